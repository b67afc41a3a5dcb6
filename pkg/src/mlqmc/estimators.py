"""Single- and multilevel MC/QMC estimators with adaptive sample allocation.

The multilevel estimators sum independent level estimates of the
corrections F_ell - F_{ell-1}.  QMC levels use randomly shifted embedded
lattice rules whose point counts double adaptively on the level with the
largest variance-to-cost ratio until the variance budget eps^2/2 is met;
levels are appended while an a-priori (or Richardson-style) bias estimate
exceeds eps/sqrt(2), and always until at least three levels exist.  MC
levels follow the classic sample-size formula or the same greedy doubling.

Integrands are callables mapping a batch of Gaussian draws (n, s) to a
tuple (values (n,), model_work), which keeps cost reporting independent of
wall clocks.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, LevelCapError, NumericalError
from .lattice import GeneratingVector, draw_shift, embedded_increment, map_to_gaussian

# Stream tags keeping MC and calibration draws away from the shift streams,
# which use spawn keys (level, shift_index) with small second entries.
_MC_STREAM = 1 << 20
_CAL_STREAM = (1 << 20) + 1


def shift_variance(per_shift_means) -> float:
    """Unbiased variance of the shift average: (1/(R(R-1))) sum (Q_k - mean)^2."""
    q = np.asarray(per_shift_means, dtype=np.float64)
    r = q.size
    if r < 2:
        raise ConfigurationError("variance over shifts needs R >= 2")
    mean = float(np.mean(q))
    return float(np.sum((q - mean) ** 2) / (r * (r - 1)))


def relative_std_error(e: float, mean: float) -> float:
    """|e / mean|; undefined for mean = 0."""
    if mean == 0.0:
        raise ValueError("relative error is undefined for zero mean")
    return abs(e / mean)


def cost_model_1d(s_ref: int, h: float, n: int, r: int) -> float:
    """Model flop count (2*s + 13) * h^-1 * N * R for one level's estimate."""
    if s_ref < 0 or h <= 0.0 or n < 1 or r < 1:
        raise ValueError("cost model needs nonnegative s and positive h, N, R")
    return (2.0 * s_ref + 13.0) / h * n * r


@dataclass
class LevelEstimate:
    """One level's estimate: shift-averaged mean and its observed variance."""

    mean: float
    shift_var: float
    n_points: int
    r_shifts: int
    cost_model: float
    cost_wall: float
    level: int = 0


@dataclass
class MLResult:
    estimate: float
    levels: list[LevelEstimate]
    total_variance: float
    bias_estimate: float
    total_cost_model: float
    total_cost_wall: float
    eps: float
    seed: int


def _build_result(states, eps: float, seed: int, bias_estimate: float) -> MLResult:
    levels = [st.estimate() for st in states]
    return MLResult(
        estimate=float(sum(le.mean for le in levels)),
        levels=levels,
        total_variance=float(sum(le.shift_var for le in levels)),
        bias_estimate=bias_estimate,
        total_cost_model=float(sum(le.cost_model for le in levels)),
        total_cost_wall=float(sum(le.cost_wall for le in levels)),
        eps=eps,
        seed=seed,
    )


class ShiftedLatticeSampler:
    """Embedded-rule QMC state for one level: R shifts, doubling with reuse.

    Points come from the nested power-of-two family, so doubling N needs
    only the odd-index points; earlier evaluations stay in the per-shift
    running sums.  ``evals_per_shift`` counts integrand evaluations, which
    a recycling-correct implementation keeps equal to the current N.
    """

    def __init__(self, integrand, s: int, gen: GeneratingVector, r: int,
                 level: int, seed: int):
        if r < 2:
            raise ConfigurationError("QMC level estimates need R >= 2 shifts")
        self.integrand = integrand
        self.s = int(s)
        self.gen = gen
        self.r = int(r)
        self.level = int(level)
        self.seed = int(seed)
        self.shifts = [draw_shift(seed, level, k, s) for k in range(r)]
        self.n = 0
        self.sums = np.zeros(r)
        self.evals_per_shift = 0
        self.work_model = 0.0
        self.wall = 0.0

    @property
    def n_cap(self) -> int:
        return self.gen.n_points

    def grow_to(self, n: int) -> None:
        if n & (n - 1):
            raise ConfigurationError(f"point counts must be powers of 2, got {n}")
        while self.n < n:
            self._advance()

    def _advance(self) -> None:
        m_next = 0 if self.n == 0 else self.n.bit_length()
        if (1 << m_next) > self.n_cap:
            raise NumericalError(
                f"level {self.level}: vector supports at most {self.n_cap} points")
        t0 = time.perf_counter()
        for k in range(self.r):
            pts = embedded_increment(self.gen, m_next, self.shifts[k], self.s)
            vals, work = self.integrand(map_to_gaussian(pts))
            self.sums[k] += float(np.sum(vals))
            self.work_model += work
        self.evals_per_shift += 1 if self.n == 0 else self.n
        self.n = 1 << m_next
        self.wall += time.perf_counter() - t0

    def per_shift_means(self) -> np.ndarray:
        if self.n == 0:
            raise NumericalError("no points evaluated yet")
        return self.sums / self.n

    def estimate(self) -> LevelEstimate:
        means = self.per_shift_means()
        return LevelEstimate(mean=float(np.mean(means)),
                             shift_var=shift_variance(means),
                             n_points=self.n, r_shifts=self.r,
                             cost_model=self.work_model, cost_wall=self.wall,
                             level=self.level)

    def variance(self) -> float:
        return shift_variance(self.per_shift_means())


class McSampler:
    """Plain Monte Carlo state for one level with an extendable i.i.d. stream."""

    _CHUNK = 1 << 15

    def __init__(self, integrand, s: int, level: int, seed: int):
        self.integrand = integrand
        self.s = int(s)
        self.level = int(level)
        self.seed = int(seed)
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(level, _MC_STREAM))
        self.rng = np.random.Generator(np.random.Philox(ss))
        self.n = 0
        self.sum1 = 0.0
        self.sum2 = 0.0
        self.work_model = 0.0
        self.wall = 0.0

    def extend_to(self, n: int) -> None:
        while self.n < n:
            k = min(n - self.n, self._CHUNK)
            t0 = time.perf_counter()
            y = self.rng.standard_normal((k, self.s))
            vals, work = self.integrand(y)
            self.sum1 += float(np.sum(vals))
            self.sum2 += float(np.sum(np.asarray(vals) ** 2))
            self.work_model += work
            self.n += k
            self.wall += time.perf_counter() - t0

    def mean(self) -> float:
        return self.sum1 / self.n

    def sample_variance(self) -> float:
        if self.n < 2:
            raise NumericalError("sample variance needs at least two draws")
        return max(self.sum2 - self.sum1 ** 2 / self.n, 0.0) / (self.n - 1)

    def variance(self) -> float:
        """Variance of the sample mean."""
        return self.sample_variance() / self.n

    def estimate(self) -> LevelEstimate:
        return LevelEstimate(mean=self.mean(), shift_var=self.variance(),
                             n_points=self.n, r_shifts=1,
                             cost_model=self.work_model, cost_wall=self.wall,
                             level=self.level)


def qmc_level_estimate(integrand, s: int, gen: GeneratingVector, n: int, r: int,
                       seed: int, level: int = 0,
                       state: ShiftedLatticeSampler | None = None) -> LevelEstimate:
    """Shift-averaged N-point lattice estimate of one level's correction.

    Passing back the returned state via ``state`` grows the rule in place,
    reusing every earlier evaluation (embedded nesting).
    """
    if state is None:
        state = ShiftedLatticeSampler(integrand, s, gen, r, level, seed)
    state.grow_to(n)
    est = state.estimate()
    est.state = state  # type: ignore[attr-defined]
    return est


def mc_level_estimate(integrand, s: int, n_mc: int, seed: int,
                      level: int = 0) -> LevelEstimate:
    """Plain MC estimate from n_mc i.i.d. standard normal parameter draws."""
    if n_mc < 2:
        raise ConfigurationError("MC level estimates need at least 2 samples")
    sampler = McSampler(integrand, s, level, seed)
    sampler.extend_to(n_mc)
    return sampler.estimate()


# Truncation policies: how many KL terms each level sees.

@dataclass(frozen=True)
class FixedTruncation:
    """Every level uses the same number of KL terms."""

    s: int

    def s_for(self, ell: int, problem) -> int:
        return self.s


@dataclass(frozen=True)
class BalancedTruncation:
    """s_ell = ceil(c_bal * h_ell^(-d/nu)): truncation bias tracks FE bias."""

    c_bal: float

    def s_for(self, ell: int, problem) -> int:
        p = problem.basis.params
        return max(1, math.ceil(self.c_bal * problem.h(ell) ** (-p.d / p.nu)))


@dataclass(frozen=True)
class BiasModel:
    """Calibrated bias bound C_FE * h^alpha + C_trunc * s^(-alpha_prime)."""

    c_fe: float
    c_trunc: float
    alpha: float = 2.0
    alpha_prime: float = 2.0

    def __post_init__(self) -> None:
        if self.c_fe <= 0.0 or self.c_trunc <= 0.0:
            raise ValueError("bias constants must be positive")

    def bias(self, h: float, s: int) -> float:
        return self.c_fe * h ** self.alpha + self.c_trunc * s ** (-self.alpha_prime)

    def eps_for(self, h_l: float) -> float:
        """Tolerance matched to the level-L bias: 2*sqrt(2)*C_FE*h_L^alpha."""
        return 2.0 * math.sqrt(2.0) * self.c_fe * h_l ** self.alpha


def choose_sL(bias: BiasModel, h_l: float, d: int, nu: float) -> int:
    """ceil(C_bal * h_L^(-d/nu)) with C_bal = (C_trunc/C_FE)^(d/(2 nu)).

    This equates the truncation part of the bias with the FE part:
    C_trunc * s_L^(-2 nu/d) <= C_FE * h_L^2.
    """
    if h_l <= 0.0:
        raise ValueError("h_L must be positive")
    c_bal = (bias.c_trunc / bias.c_fe) ** (d / (2.0 * nu))
    return int(math.ceil(c_bal * h_l ** (-d / nu)))


class CalibrationWarning(UserWarning):
    """Bias ladder behaved non-monotonically beyond the noise level."""


def calibrate_bias(problem, ref_level: int, s_star: int, n_mc: int,
                   h_levels=None, s_ladder=None, seed: int = 0) -> BiasModel:
    """Fit the bias constants from coupled-MC ladders against a fine reference.

    The FE ladder compares F at coarser meshes with the reference mesh
    using common random numbers.  The truncation ladder compares truncated
    draws on the reference mesh with the full-s_star reference, pairing
    each draw with its tail-negated twin so the leading-order tail noise
    cancels pathwise and 10^3 samples resolve the s^(-2 nu/d) means.
    Constants are the smallest ones dominating the observed errors.
    """
    p = problem.basis.params
    if h_levels is None:
        h_levels = list(range(0, max(1, ref_level - 2)))
    if s_ladder is None:
        s_ladder = [s for s in (2, 4, 8, 16, 32) if s < s_star]
    if max(h_levels) >= ref_level:
        raise ConfigurationError("h ladder must stay coarser than the reference level")
    if max(s_ladder) >= s_star:
        raise ConfigurationError("s ladder must stay below s_star")
    if s_star > problem.basis.s_star:
        raise ConfigurationError(
            f"basis holds {problem.basis.s_star} eigenpairs, need {s_star}; "
            "rebuild it with a finer quadrature")

    ss = np.random.SeedSequence(entropy=seed, spawn_key=(0, _CAL_STREAM))
    rng = np.random.Generator(np.random.Philox(ss))
    y = rng.standard_normal((n_mc, s_star))

    ref_vals, _ = problem.functional_batch(ref_level, y)

    fe_errors = []
    for ell in h_levels:
        vals, _ = problem.functional_batch(ell, y)
        diff = vals - ref_vals
        err = abs(float(np.mean(diff)))
        se = float(np.std(diff, ddof=1)) / math.sqrt(n_mc)
        fe_errors.append((problem.h(ell), err, se))
    c_fe = max(err / h ** 2 for h, err, _ in fe_errors)

    trunc_errors = []
    for s in s_ladder:
        y_anti = y.copy()
        y_anti[:, s:] *= -1.0
        anti_vals, _ = problem.functional_batch(ref_level, y_anti)
        coarse_vals, _ = problem.functional_batch(ref_level, y[:, :s])
        diff = 0.5 * (ref_vals + anti_vals) - coarse_vals
        err = abs(float(np.mean(diff)))
        se = float(np.std(diff, ddof=1)) / math.sqrt(n_mc)
        trunc_errors.append((s, err, se))
    expo = 2.0 * p.nu / p.d
    c_trunc = max(err * s ** expo for s, err, _ in trunc_errors)

    for name, ladder in (("FE", fe_errors), ("truncation", trunc_errors)):
        errs = [e for _, e, _ in ladder]
        ses = [se for _, _, se in ladder]
        for i in range(len(errs) - 1):
            if errs[i + 1] > errs[i] + 3.0 * (ses[i] + ses[i + 1]):
                warnings.warn(
                    f"{name} error ladder is non-monotone beyond noise: {ladder}",
                    CalibrationWarning, stacklevel=2)
    return BiasModel(c_fe=c_fe, c_trunc=c_trunc, alpha=2.0,
                     alpha_prime=2.0 * p.nu / p.d)


def giles_sample_sizes(v, c, eps: float) -> np.ndarray:
    """N_ell = ceil(2 eps^-2 sqrt(V_ell/C_ell) sum_k sqrt(V_k C_k)), at least 1.

    The Lagrange-optimal MC allocation for a variance budget of eps^2/2.
    """
    v = np.asarray(v, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if np.any(v < 0.0) or np.any(c <= 0.0):
        raise ValueError("need V >= 0 and C > 0")
    total = float(np.sum(np.sqrt(v * c)))
    n = np.ceil(2.0 * eps ** -2 * np.sqrt(v / c) * total)
    return np.maximum(n, 1.0).astype(np.int64)


def _bias_gate(states, level: int, truncation, problem, bias_model,
               dynamic_bias: bool, alpha: float) -> float:
    if dynamic_bias:
        mean_l = float(np.mean(states[level].per_shift_means())) if hasattr(
            states[level], "per_shift_means") else states[level].mean()
        return abs(mean_l) / (2.0 ** alpha - 1.0)
    if bias_model is None:
        raise ConfigurationError("a BiasModel is required unless dynamic_bias is set")
    s_l = truncation.s_for(level, problem)
    return bias_model.bias(problem.h(level), s_l)


def _apriori_levels(problem, truncation, bias_model, eps: float,
                    level_cap: int) -> tuple[int, bool]:
    """Finest level the a-priori bias gate asks for, and whether it was capped.

    With a calibrated bias model the gate "bias > eps/sqrt(2) or L < 2" is a
    deterministic formula, so the level schedule is known before any sample
    is drawn.  Adding those levels up front lets the greedy loop equilibrate
    profit across all of them instead of loading the whole variance budget
    onto level 0 first (which is also how the reference experiments run:
    L is fixed by the tolerance, the loop only allocates samples).
    """
    tol = eps / math.sqrt(2.0)
    level = 0
    while True:
        s_l = truncation.s_for(level, problem)
        if level >= 2 and bias_model.bias(problem.h(level), s_l) <= tol:
            return level, False
        if level >= level_cap:
            return level, True
        level += 1


def _greedy_variance_loop(states, eps: float) -> None:
    """Algorithm step 2: double points on argmax V/C until sum V <= eps^2/2."""
    budget = 0.5 * eps * eps
    while True:
        variances = [st.variance() for st in states]
        if sum(variances) <= budget:
            return
        profits = np.asarray([v / max(st.work_model, 1e-300)
                              for v, st in zip(variances, states)])
        for pick in np.argsort(-profits, kind="stable"):
            st = states[int(pick)]
            if isinstance(st, ShiftedLatticeSampler):
                if st.n < st.n_cap:
                    st.grow_to(st.n * 2 if st.n else 1)
                    break
            else:
                st.extend_to(st.n * 2)
                break
        else:
            raise NumericalError(
                "every level is at its point cap but the variance budget is unmet")


def _level_spec_for(problem, truncation, ell: int):
    s_l = truncation.s_for(ell, problem)
    s_coarse = truncation.s_for(ell - 1, problem) if ell >= 1 else None
    return problem.level_spec(ell, s_l, s_coarse)


def mlqmc_adaptive(problem, gen: GeneratingVector, eps: float, r: int = 16,
                   seed: int = 0, truncation=None, bias_model: BiasModel | None = None,
                   dynamic_bias: bool = False, alpha: float = 2.0,
                   level_cap: int = 12) -> MLResult:
    """Greedy multilevel QMC driver.

    Doubles N on the level with the largest variance/cost ratio (ties:
    lowest level) until the summed shift variance is at most eps^2/2;
    appends a level while the bias estimate exceeds eps/sqrt(2) or fewer
    than three levels exist.  With a calibrated ``bias_model`` the gate is
    sample-free, so every level it will ever request is added before the
    doubling loop runs; with ``dynamic_bias`` the gate needs the current
    fine-level mean and is re-checked after each allocation pass.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if truncation is None:
        raise ConfigurationError("a truncation policy is required")

    states: list[ShiftedLatticeSampler] = []

    def add_level(ell: int) -> None:
        spec = _level_spec_for(problem, truncation, ell)
        st = ShiftedLatticeSampler(problem.difference_integrand(spec), spec.s,
                                   gen, r, ell, seed)
        st.grow_to(1)
        states.append(st)

    if not dynamic_bias:
        level, capped = _apriori_levels(problem, truncation, bias_model, eps,
                                        level_cap)
        for ell in range(level + 1):
            add_level(ell)
        _greedy_variance_loop(states, eps)
        bias_est = _bias_gate(states, level, truncation, problem, bias_model,
                              dynamic_bias, alpha)
        if capped:
            raise LevelCapError(
                f"level cap {level_cap} reached at eps={eps:g}",
                partial_result=_build_result(states, eps, seed, bias_est))
        return _build_result(states, eps, seed, bias_est)

    level = 0
    add_level(0)
    while True:
        _greedy_variance_loop(states, eps)
        bias_est = _bias_gate(states, level, truncation, problem, bias_model,
                              dynamic_bias, alpha)
        if bias_est > eps / math.sqrt(2.0) or level < 2:
            level += 1
            if level > level_cap:
                raise LevelCapError(
                    f"level cap {level_cap} reached at eps={eps:g}",
                    partial_result=_build_result(states, eps, seed, bias_est))
            add_level(level)
            continue
        return _build_result(states, eps, seed, bias_est)


def mlmc_run(problem, eps: float, seed: int = 0, allocator: str = "giles",
             truncation=None, bias_model: BiasModel | None = None,
             dynamic_bias: bool = False, alpha: float = 2.0,
             level_cap: int = 12, warmup: int = 100,
             greedy_start: int = 32) -> MLResult:
    """Multilevel plain-MC driver.

    allocator ``giles``: per-level sample sizes from giles_sample_sizes,
    re-estimated from 100 warm-up samples per level and iterated to a fixed
    point.  allocator ``greedy``: the same doubling loop as the QMC driver
    but with MC level estimators (which need a small starting batch, 32
    samples, to produce a first variance estimate).
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if truncation is None:
        raise ConfigurationError("a truncation policy is required")
    if allocator not in ("giles", "greedy"):
        raise ConfigurationError(f"unknown allocator {allocator!r}")

    states: list[McSampler] = []
    start = warmup if allocator == "giles" else greedy_start

    def add_level(ell: int) -> None:
        spec = _level_spec_for(problem, truncation, ell)
        st = McSampler(problem.difference_integrand(spec), spec.s, ell, seed)
        st.extend_to(start)
        states.append(st)

    def allocate() -> None:
        if allocator == "giles":
            _giles_allocation_loop(states, eps)
        else:
            _greedy_variance_loop(states, eps)

    if not dynamic_bias:
        level, capped = _apriori_levels(problem, truncation, bias_model, eps,
                                        level_cap)
        for ell in range(level + 1):
            add_level(ell)
        allocate()
        bias_est = _bias_gate(states, level, truncation, problem, bias_model,
                              dynamic_bias, alpha)
        if capped:
            raise LevelCapError(
                f"level cap {level_cap} reached at eps={eps:g}",
                partial_result=_build_result(states, eps, seed, bias_est))
        return _build_result(states, eps, seed, bias_est)

    level = 0
    add_level(0)
    while True:
        allocate()
        bias_est = _bias_gate(states, level, truncation, problem, bias_model,
                              dynamic_bias, alpha)
        if bias_est > eps / math.sqrt(2.0) or level < 2:
            level += 1
            if level > level_cap:
                raise LevelCapError(
                    f"level cap {level_cap} reached at eps={eps:g}",
                    partial_result=_build_result(states, eps, seed, bias_est))
            add_level(level)
            continue
        return _build_result(states, eps, seed, bias_est)


def _giles_allocation_loop(states, eps: float, max_rounds: int = 64) -> None:
    for _ in range(max_rounds):
        v = np.asarray([st.sample_variance() for st in states])
        c = np.asarray([st.work_model / st.n for st in states])
        targets = giles_sample_sizes(v, c, eps)
        grew = False
        for st, target in zip(states, targets):
            if st.n < target:
                st.extend_to(int(target))
                grew = True
        if not grew:
            return
    raise NumericalError("sample allocation failed to stabilise")


def qmc_single_level(problem, ell: int, s: int, gen: GeneratingVector,
                     eps: float, r: int = 16, seed: int = 0) -> MLResult:
    """One-level randomly shifted lattice estimator at the finest mesh."""

    def integrand(y):
        return problem.functional_batch(ell, y)

    st = ShiftedLatticeSampler(integrand, s, gen, r, ell, seed)
    st.grow_to(1)
    budget = 0.5 * eps * eps
    while st.variance() > budget:
        if st.n >= st.n_cap:
            raise NumericalError(
                f"single-level QMC hit the vector's point cap {st.n_cap}")
        st.grow_to(st.n * 2)
    return _build_result([st], eps, seed, bias_estimate=float("nan"))


def mc_single_level(problem, ell: int, s: int, eps: float, seed: int = 0,
                    start: int = 100, max_rounds: int = 64) -> MLResult:
    """One-level plain MC estimator at the finest mesh."""

    def integrand(y):
        return problem.functional_batch(ell, y)

    st = McSampler(integrand, s, ell, seed)
    st.extend_to(start)
    budget = 0.5 * eps * eps
    for _ in range(max_rounds):
        if st.variance() <= budget:
            return _build_result([st], eps, seed, bias_estimate=float("nan"))
        target = int(math.ceil(2.0 * st.sample_variance() / (eps * eps)))
        st.extend_to(max(target, st.n + 1))
    raise NumericalError("single-level MC failed to meet its variance budget")


@dataclass(frozen=True)
class ComplexityPrediction:
    theta: float
    log_factor: bool
    levels: int
    n_schedule: tuple[int, ...]


def complexity_predictor(alpha: float, alpha_prime: float, beta: float,
                         lam: float, d: int, eps: float, c1: float = 0.0,
                         c2: float = 1.0) -> ComplexityPrediction:
    """Predicted cost exponent theta and sample schedule for given rates.

    cost = O(eps^-theta) with theta = 2*lambda + 1/alpha_prime, plus
    (d - beta*lambda)/alpha when beta*lambda < d; beta*lambda = d adds a
    (log 1/eps)^(lambda+1) factor instead.  L and N_ell follow the level
    and sample schedules of the same cost analysis; c1 and c2 are the free
    constants of those schedules.
    """
    if min(alpha, alpha_prime, beta) <= 0.0 or d < 1 or eps <= 0.0:
        raise ValueError("rates, dimension, and eps must be positive")
    if not 0.5 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [1/2, 1], got {lam}")

    prod = beta * lam
    theta = 2.0 * lam + 1.0 / alpha_prime
    log_factor = math.isclose(prod, d, rel_tol=1e-12)
    if prod < d and not log_factor:
        theta += (d - prod) / alpha

    levels = max(int(math.ceil(math.log2(1.0 / eps) / alpha + c1)), 0)
    if log_factor:
        e_l = float(max(levels, 1))
    elif prod > d:
        e_l = 1.0
    else:
        e_l = 2.0 ** (levels * (d - prod) / (lam + 1.0))
    n0 = c2 * 2.0 ** (2.0 * alpha * lam * levels) * e_l ** lam
    ratio = (d + beta) * lam / (lam + 1.0)
    schedule = tuple(int(math.ceil(n0 * 2.0 ** (-ell * ratio)))
                     for ell in range(levels + 1))
    return ComplexityPrediction(theta=theta, log_factor=log_factor,
                                levels=levels, n_schedule=schedule)
