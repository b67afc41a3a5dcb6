"""Weighted-space machinery and component-by-component lattice construction.

The shift-averaged worst-case error of a randomly shifted lattice rule in a
weighted unanchored Sobolev space factorises over coordinate subsets u with
weights gamma_u.  The weights used here have product-and-order-dependent
(POD) form

    gamma_u = ( [(|u|+5)!]^2 * prod_{j in u} (4*bbar_j^2 / Jbar)
                / rho_max^{|u|} )^{1/(1+lambda)},

driven by the decay sequence bbar_j of the random field's expansion and a
per-coordinate factor rho_j(lambda) that absorbs the Gaussian weight
functions.  The CBC search minimises the resulting squared error one
coordinate at a time over all residues coprime to N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import GeneratingVector

__all__ = [
    "WeightSchedule",
    "ProductWeights",
    "pod_weight",
    "fubini_number",
    "fubini_bound_holds",
    "euler_totient",
    "zeta_direct",
    "coordinate_rho",
    "lambda_from_summability",
    "cbc_construct",
    "cbc_construct_embedded",
    "CBCResult",
    "variance_bound",
]


def fubini_number(n: int) -> int:
    """Number of ordered set partitions of an n-set (exact integer).

    Satisfies the recursion a_0 = 1, a_n = sum_{i<n} C(n,i) a_i; the first
    values are 1, 1, 3, 13, 75, 541.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return _fubini_cached(n)


@lru_cache(maxsize=None)
def _fubini_cached(n: int) -> int:
    if n == 0:
        return 1
    return sum(math.comb(n, i) * _fubini_cached(i) for i in range(n))


def fubini_bound_holds(n: int, alpha: float) -> bool:
    """Whether a_n <= n! / alpha^n, valid for every n once alpha <= ln 2."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return fubini_number(n) <= math.factorial(n) / alpha ** n


def euler_totient(n: int) -> int:
    """Count of integers in [1, n-1] coprime to n, for n >= 2."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    result = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if m > 1:
        result -= result // m
    return result


_ZETA_CUTOFF = 1_000_000


@lru_cache(maxsize=None)
def zeta_direct(x: float) -> float:
    """Riemann zeta for x > 1 by direct summation plus an integral tail.

    Terms up to k = 1e6 are summed pairwise; the Euler-Maclaurin tail
    K^(1-x)/(x-1) - K^(-x)/2 + x*K^(-x-1)/12 leaves an error far below
    1e-12 for every x >= 1.01.
    """
    if x <= 1.0:
        raise ValueError(f"zeta requires x > 1, got {x}")
    k = np.arange(1, _ZETA_CUTOFF + 1, dtype=np.float64)
    head = float(np.sum(k ** (-x)))
    kc = float(_ZETA_CUTOFF)
    tail = kc ** (1.0 - x) / (x - 1.0) - 0.5 * kc ** (-x) + x * kc ** (-x - 1.0) / 12.0
    return head + tail


def coordinate_rho(alpha_j: float, lam: float) -> float:
    """Per-coordinate factor rho_j(lambda) of the shift-averaged error bound.

    With eta = (2*lambda - 1)/(4*lambda),

        rho_j = 2 * ( sqrt(2*pi) * exp(alpha_j^2/eta)
                      / (pi^(2-2*eta) * (1-eta) * eta) )^lambda * zeta(lambda + 1/2).
    """
    if not 0.5 < lam <= 1.0:
        raise ValueError(f"lambda must lie in (1/2, 1], got {lam}")
    if alpha_j <= 0.0:
        raise ValueError(f"alpha_j must be positive, got {alpha_j}")
    eta = (2.0 * lam - 1.0) / (4.0 * lam)
    # exp(alpha^2/eta) overflows quickly, so assemble the log first; values
    # beyond float64 range come back as inf (the bound is vacuous there).
    log_inner = (0.5 * math.log(2.0 * math.pi) + alpha_j ** 2 / eta
                 - (2.0 - 2.0 * eta) * math.log(math.pi)
                 - math.log((1.0 - eta) * eta))
    log_rho = math.log(2.0) + lam * log_inner + math.log(zeta_direct(lam + 0.5))
    if log_rho > 709.0:
        return math.inf
    return math.exp(log_rho)


def lambda_from_summability(q: float, delta: float = 0.25) -> float:
    """Map the summability exponent of bbar to the CBC quality parameter.

    q in (0, 2/3) gives lambda = 1/(2 - 2*delta) for any delta in (0, 1/2);
    q in (2/3, 1) gives lambda = q/(2 - q).  q = 2/3 sits on the boundary
    and is rejected rather than silently resolved.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if q == 2.0 / 3.0:
        raise ValueError("q = 2/3 is the boundary case; pick a side explicitly")
    if q < 2.0 / 3.0:
        if not 0.0 < delta < 0.5:
            raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
        return 1.0 / (2.0 - 2.0 * delta)
    return q / (2.0 - q)


@dataclass(frozen=True)
class WeightSchedule:
    """POD weight data: decay sequence bbar, majorants alpha, and lambda.

    Requires alpha_j > 11*bbar_j for every j (the margin jbar is the
    infimum of the gap) and lambda in (1/2, 1].
    """

    lam: float
    alpha: np.ndarray
    b_bar: np.ndarray
    j_bar: float
    rho_max: float

    def __post_init__(self) -> None:
        alpha = np.ascontiguousarray(np.asarray(self.alpha, dtype=np.float64))
        b_bar = np.ascontiguousarray(np.asarray(self.b_bar, dtype=np.float64))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "b_bar", b_bar)
        if not 0.5 < self.lam <= 1.0:
            raise ValueError(f"lambda must lie in (1/2, 1], got {self.lam}")
        if alpha.shape != b_bar.shape or alpha.ndim != 1:
            raise ValueError("alpha and b_bar must be 1-d arrays of equal length")
        if np.any(b_bar < 0.0):
            raise ValueError("b_bar must be nonnegative")
        gap = alpha - 11.0 * b_bar
        if np.any(gap <= 0.0):
            raise ValueError("need alpha_j > 11*b_bar_j for every j")
        if self.j_bar <= 0.0 or self.j_bar > np.min(gap) + 1e-12:
            raise ValueError("j_bar must be positive and no larger than min(alpha - 11*b_bar)")
        if self.rho_max <= 0.0:
            raise ValueError("rho_max must be positive")

    @classmethod
    def from_b_bar(cls, b_bar, lam: float, margin: float = 0.1) -> "WeightSchedule":
        """Schedule with alpha_j = 11*bbar_j + margin and rho_max at max alpha."""
        b_bar = np.asarray(b_bar, dtype=np.float64)
        alpha = 11.0 * b_bar + margin
        rho_max = coordinate_rho(float(np.max(alpha)), lam)
        return cls(lam=lam, alpha=alpha, b_bar=b_bar, j_bar=margin, rho_max=rho_max)

    @property
    def s_max(self) -> int:
        return int(self.b_bar.size)

    def coordinate_rhos(self, s: int) -> np.ndarray:
        return np.asarray([coordinate_rho(float(a), self.lam) for a in self.alpha[:s]])

    def pod_factors(self, s: int, u_max: int) -> tuple[np.ndarray, np.ndarray]:
        """Split gamma_u = order[|u|] * prod_{j in u} coord[j].

        order[m] = ((m+5)!^2 / rho_max^m)^(1/(1+lambda)),
        coord[j] = (4*bbar_j^2 / jbar)^(1/(1+lambda)); order[0] = 1.
        """
        if s > self.s_max:
            raise ValueError(f"schedule holds {self.s_max} coordinates, need {s}")
        expo = 1.0 / (1.0 + self.lam)
        # log space: (m+5)!^2 overflows for moderate u_max and rho_max may be
        # huge (even inf, collapsing every order >= 1 factor to zero).
        log_rho = math.log(self.rho_max) if math.isfinite(self.rho_max) else math.inf
        order = np.ones(u_max + 1)
        for mi in range(1, u_max + 1):
            log_val = 2.0 * math.lgamma(mi + 6) - mi * log_rho
            order[mi] = math.exp(expo * log_val) if log_val > -math.inf else 0.0
        coord = (4.0 * self.b_bar[:s] ** 2 / self.j_bar) ** expo
        return order, coord


@dataclass(frozen=True)
class ProductWeights:
    """Plain product weights gamma_u = prod_{j in u} gamma_j for CBC tests."""

    gamma: np.ndarray
    lam: float = 1.0
    rho: np.ndarray | None = None

    def pod_factors(self, s: int, u_max: int) -> tuple[np.ndarray, np.ndarray]:
        gamma = np.asarray(self.gamma, dtype=np.float64)
        if s > gamma.size:
            raise ValueError(f"only {gamma.size} product weights available, need {s}")
        return np.ones(u_max + 1), gamma[:s]

    def coordinate_rhos(self, s: int) -> np.ndarray:
        if self.rho is None:
            raise ValueError("no rho sequence attached to these product weights")
        return np.asarray(self.rho, dtype=np.float64)[:s]


def pod_weight(u, schedule) -> float:
    """Weight gamma_u for an explicit coordinate subset u (1-based indices)."""
    idx = sorted(set(int(j) for j in u))
    if not idx:
        return 1.0
    if idx[0] < 1:
        raise ValueError("coordinate indices are 1-based")
    order, coord = schedule.pod_factors(idx[-1], len(idx))
    prod = 1.0
    for j in idx:
        prod *= coord[j - 1]
    return float(order[len(idx)] * prod)


# CBC construction.  The shift-averaged squared error of the rule (z_1..z_d)
# with POD weights truncated at superposition order u_max is
#
#   e^2(z) = (1/N) sum_{k=0}^{N-1} sum_{m=1}^{u_max} order[m] * e_m(t_1..t_d)(k),
#
# with t_j(k) = coord[j] * B2({k z_j / N}) and e_m the elementary symmetric
# polynomial; B2 is the Bernoulli polynomial x^2 - x + 1/6.  The per-k
# polynomials are carried as arrays P[m] and updated one coordinate at a
# time, so scoring a candidate z costs one weighted dot product.


def _bernoulli2_table(n: int) -> np.ndarray:
    x = np.arange(n, dtype=np.float64) / float(n)
    return x * x - x + 1.0 / 6.0


def _argmin_lowest(scores: np.ndarray) -> int:
    # candidates are sorted ascending, and exact ties (the z <-> N-z mirror
    # symmetry, or the fully degenerate 1-d case) pick up float noise in the
    # accumulated dot products; resolve to the smallest candidate whose
    # score sits within roundoff of the minimum
    smin = float(scores.min())
    tol = 1e-12 * max(1.0, abs(smin))
    return int(np.flatnonzero(scores <= smin + tol)[0])


def _admissible(n: int) -> np.ndarray:
    cand = np.arange(1, n, dtype=np.int64)
    return cand[np.gcd(cand, n) == 1]


@dataclass(frozen=True)
class CBCResult:
    vector: GeneratingVector
    error_bound_by_dim: np.ndarray


def cbc_construct(n: int, s: int, weights, u_max: int = 6) -> CBCResult:
    """Greedy per-coordinate minimisation of the shift-averaged squared error.

    Exhaustive over the residues coprime to n at every coordinate (no FFT
    speedup); ties resolve to the smallest candidate.  Returns the vector
    and the running squared-error bound after each coordinate.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    u_max = min(u_max, s)
    order, coord = weights.pod_factors(s, u_max)

    omega = _bernoulli2_table(n)
    cand = _admissible(n)
    # omega evaluated at every candidate/point pair, built once.
    idx = (cand[:, None] * np.arange(n, dtype=np.int64)[None, :]) % n
    omega_cand = omega[idx]

    p_state = np.zeros((u_max + 1, n))
    p_state[0] = 1.0
    z_out = np.empty(s, dtype=np.int64)
    err_by_dim = np.empty(s)

    for d in range(s):
        q = np.zeros(n)
        for m in range(1, u_max + 1):
            q += order[m] * p_state[m - 1]
        scores = omega_cand @ q
        best = _argmin_lowest(scores)
        z_out[d] = cand[best]
        omega_z = omega_cand[best]
        for m in range(u_max, 0, -1):
            p_state[m] += coord[d] * omega_z * p_state[m - 1]
        err = 0.0
        for m in range(1, u_max + 1):
            err += order[m] * float(np.sum(p_state[m]))
        err_by_dim[d] = err / n

    return CBCResult(vector=GeneratingVector(z=z_out, n_points=n),
                     error_bound_by_dim=err_by_dim)


def cbc_construct_embedded(m_min: int, m_max: int, s: int, weights,
                           u_max: int = 6, full_search_dims: int = 128,
                           reduced_candidates: int = 128,
                           seed: int = 20260822) -> CBCResult:
    """CBC for an embedded family of power-of-two rules N = 2^m_min .. 2^m_max.

    Scores candidates by sum_m 4^m * e_m^2(z) so every level of the family
    carries comparable influence (e^2 itself decays roughly like 4^-m).
    Beyond ``full_search_dims`` coordinates the candidate set is thinned to
    a deterministic random subset; the late coordinates carry tiny weights,
    so the loss is negligible while the search stays affordable.
    """
    if not 1 <= m_min <= m_max:
        raise ValueError("need 1 <= m_min <= m_max")
    n_max = 1 << m_max
    u_max = min(u_max, s)
    order, coord = weights.pod_factors(s, u_max)

    cand = np.arange(1, n_max, 2, dtype=np.int64)
    ms = list(range(m_min, m_max + 1))

    # At level m, candidate c and c mod 2^m index identical omega rows, so
    # store only the 2^(m-1) distinct odd residues; candidate c maps to row
    # (c mod 2^m) >> 1.  Rows are built in chunks to bound the index temp.
    omega_unique = {}
    for m in ms:
        nm = 1 << m
        tab = _bernoulli2_table(nm)
        rows = np.empty((nm // 2, nm))
        k = np.arange(nm, dtype=np.int64)
        for start in range(0, nm // 2, 512):
            stop = min(start + 512, nm // 2)
            odd = 2 * np.arange(start, stop, dtype=np.int64) + 1
            rows[start:stop] = tab[(odd[:, None] * k[None, :]) % nm]
        omega_unique[m] = rows

    p_state = {m: _init_state(1 << m, u_max) for m in ms}
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    z_out = np.empty(s, dtype=np.int64)
    err_by_dim = np.empty(s)

    for d in range(s):
        full = d < full_search_dims or cand.size <= reduced_candidates
        if full:
            pool = cand
        else:
            picked = np.sort(rng.choice(cand.size, size=reduced_candidates,
                                        replace=False))
            pool = cand[picked]
        scores = np.zeros(pool.size)
        for m in ms:
            nm = 1 << m
            q = np.zeros(nm)
            for mm in range(1, u_max + 1):
                q += order[mm] * p_state[m][mm - 1]
            row_idx = (pool % nm) >> 1
            if full:
                sc_unique = omega_unique[m] @ q
                scores += (4.0 ** m / nm) * sc_unique[row_idx]
            else:
                scores += (4.0 ** m / nm) * (omega_unique[m][row_idx] @ q)
        z_best = int(pool[_argmin_lowest(scores)])
        z_out[d] = z_best
        total = 0.0
        for m in ms:
            nm = 1 << m
            omega_z = omega_unique[m][(z_best % nm) >> 1]
            st = p_state[m]
            for mm in range(u_max, 0, -1):
                st[mm] += coord[d] * omega_z * st[mm - 1]
            for mm in range(1, u_max + 1):
                total += (4.0 ** m / nm) * order[mm] * float(np.sum(st[mm]))
        err_by_dim[d] = total

    return CBCResult(vector=GeneratingVector(z=z_out, n_points=n_max),
                     error_bound_by_dim=err_by_dim)


def _init_state(n: int, u_max: int) -> np.ndarray:
    st = np.zeros((u_max + 1, n))
    st[0] = 1.0
    return st


def variance_bound(schedule, n: int, r: int, norm_sq: float, s: int,
                   u_max: int = 6) -> float:
    """A-priori bound on the shift variance of an R-shift rank-1 rule.

    (1/R) * ( sum_{|u| <= u_max} gamma_u^lambda * prod_{j in u} rho_j(lambda)
            )^(1/lambda) * phi(N)^(-1/lambda) * norm_sq.

    The subset sum runs over superposition order m <= u_max through
    elementary symmetric polynomials; the empty set contributes 1.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if norm_sq < 0.0:
        raise ValueError("norm_sq must be nonnegative")
    if norm_sq == 0.0:
        return 0.0
    lam = schedule.lam
    u_max = min(u_max, s)
    order, coord = schedule.pod_factors(s, u_max)
    rhos = schedule.coordinate_rhos(s)
    t = coord ** lam * rhos
    esym = _elementary_symmetric(t, u_max)
    subset_sum = 1.0 + float(np.sum(order[1:] ** lam * esym[1:]))
    tot = euler_totient(n)
    return (1.0 / r) * subset_sum ** (1.0 / lam) * tot ** (-1.0 / lam) * norm_sq


def _elementary_symmetric(t: np.ndarray, u_max: int) -> np.ndarray:
    """e_0..e_umax of the values t by the standard one-pass recursion."""
    e = np.zeros(u_max + 1)
    e[0] = 1.0
    for tj in t:
        upto = u_max
        for m in range(upto, 0, -1):
            e[m] += tj * e[m - 1]
    return e
