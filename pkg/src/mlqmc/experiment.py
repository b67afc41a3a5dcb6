"""Experiment runner: tolerance sweeps over estimator families, CSV output.

A config selects a PDE problem, a Matérn field, a list of target levels L,
and a set of estimators.  For each L the tolerance is tied to the level-L
FE bias, eps_L = 2*sqrt(2)*C_FE*h_L^2, the KL truncation s_L balances the
two bias sources, and every selected estimator runs to the same budget.
One CSV row is emitted per (L, estimator); a failing estimator yields a
row with its error message and the run continues.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import estimators as est
from .errors import ConfigurationError, ParseError
from .lattice import GeneratingVector, bundled_vector, load_generating_vector
from .problems import LognormalPde
from .randomfield import (MaternParams, default_quadrature,
                          nystrom_eigendecomposition)

ESTIMATOR_NAMES = ("MC", "QMC", "MLMC_G", "MLMC_GW", "MLQMC")
PROBLEM_KINDS = {"OneD": "point1d", "TwoDDirichlet": "average2d",
                 "TwoDFlowCell": "flux2d"}

# Calibration presets.  Desk scale shrinks the reference computation so a
# full sweep stays interactive; paper scale matches the published setup.
SCALES = {
    "desk": {"h_star": 512, "s_star": 200, "n_mc": 1000},
    "paper": {"h_star": 1024, "s_star": 800, "n_mc": 100000},
}

_CSV_FIELDS = ("estimator", "L", "eps", "rel_std_error", "estimate",
               "cost_model", "cost_wall", "levels_N", "levels_V", "error")


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    matern: MaternParams
    ell0: int
    L_list: tuple[int, ...]
    estimators: tuple[str, ...]
    r: int
    seed: int
    vector_file: str | None
    h_star: int
    s_star: int
    n_mc: int
    output: str
    problem_options: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.problem not in PROBLEM_KINDS:
            raise ConfigurationError(f"unknown problem {self.problem!r}")
        if not self.L_list:
            raise ConfigurationError("L_list must be nonempty")
        if self.problem == "TwoDDirichlet" and self.ell0 < 3:
            raise ConfigurationError(
                "TwoDDirichlet needs ell0 >= 3 so the averaging region "
                "lies on mesh lines")
        bad = [e for e in self.estimators if e not in ESTIMATOR_NAMES]
        if bad:
            raise ConfigurationError(f"unknown estimators {bad}")
        if not self.estimators:
            raise ConfigurationError("at least one estimator is required")
        if self.r < 2:
            raise ConfigurationError("R must be at least 2")
        d_expected = 1 if self.problem == "OneD" else 2
        if self.matern.d != d_expected:
            raise ConfigurationError(
                f"problem {self.problem} needs d={d_expected}, "
                f"config says d={self.matern.d}")
        if self.h_star & (self.h_star - 1) or self.h_star < (1 << self.ell0):
            raise ConfigurationError(
                "h_star must be a power-of-2 denominator finer than the "
                "coarsest mesh")

    @property
    def ref_level(self) -> int:
        return self.h_star.bit_length() - 1 - self.ell0


@dataclass
class ResultRow:
    estimator: str
    L: int
    eps: float
    rel_std_error: float | None = None
    estimate: float | None = None
    cost_model: float | None = None
    cost_wall: float | None = None
    levels_N: tuple[int, ...] = ()
    levels_V: tuple[float, ...] = ()
    error: str = ""


# Config parsing: INI sections, every key checked against a whitelist.

_SECTION_KEYS = {
    "problem": {"kind", "ell0", "f", "point", "region", "cg_tol"},
    "matern": {"nu", "sigma2", "lambda_c", "d"},
    "run": {"L_list", "estimators", "R", "seed", "vector_file"},
    "calibration": {"h_star", "s_star", "n_mc"},
    "output": {"path"},
}
_REQUIRED = {"problem": {"kind", "ell0"},
             "matern": {"nu", "sigma2", "lambda_c", "d"},
             "run": {"L_list", "estimators", "seed"}}


def _get(parser, section, key, cast, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ParseError(f"[{section}] is missing required key {key!r}")
        return default
    raw = parser.get(section, key).strip()
    if raw == "":
        return default
    try:
        return cast(raw)
    except ValueError as exc:
        raise ParseError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def _str_list(raw: str) -> tuple[str, ...]:
    return tuple(tok for tok in raw.replace(",", " ").split())


def _float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def parse_config(path: str, scale: str = "desk") -> ExperimentConfig:
    """Read a key = value config file; unknown sections or keys are errors."""
    if scale not in SCALES:
        raise ParseError(f"unknown scale {scale!r}, expected one of {list(SCALES)}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ParseError(f"config file {path!r} not found or unreadable")

    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ParseError(f"unknown config section [{section}]")
        extra = set(parser.options(section)) - {k.lower() for k in _SECTION_KEYS[section]}
        if extra:
            raise ParseError(f"unknown keys in [{section}]: {sorted(extra)}")
    for section, keys in _REQUIRED.items():
        if not parser.has_section(section):
            raise ParseError(f"missing required config section [{section}]")
        for key in keys:
            if not parser.has_option(section, key):
                raise ParseError(f"[{section}] is missing required key {key!r}")

    options: dict = {}
    f_val = _get(parser, "problem", "f", float)
    if f_val is not None:
        options["f"] = f_val
    point = _get(parser, "problem", "point", float)
    if point is not None:
        options["point"] = point
    region = _get(parser, "problem", "region", _float_list)
    if region is not None:
        if len(region) != 4:
            raise ParseError("region needs 4 numbers: x0 x1 y0 y1")
        options["region"] = ((region[0], region[1]), (region[2], region[3]))
    cg_tol = _get(parser, "problem", "cg_tol", float)
    if cg_tol is not None:
        options["cg_tol"] = cg_tol

    preset = SCALES[scale]
    matern = MaternParams(
        nu=_get(parser, "matern", "nu", float, required=True),
        sigma2=_get(parser, "matern", "sigma2", float, required=True),
        lambda_c=_get(parser, "matern", "lambda_c", float, required=True),
        d=_get(parser, "matern", "d", int, required=True),
    )
    has_cal = parser.has_section("calibration")
    return ExperimentConfig(
        problem=_get(parser, "problem", "kind", str, required=True),
        ell0=_get(parser, "problem", "ell0", int, required=True),
        matern=matern,
        L_list=_get(parser, "run", "L_list", _int_list, required=True),
        estimators=_get(parser, "run", "estimators", _str_list, required=True),
        r=_get(parser, "run", "R", int, default=16),
        seed=_get(parser, "run", "seed", int, required=True),
        vector_file=_get(parser, "run", "vector_file", str),
        h_star=(_get(parser, "calibration", "h_star", int, preset["h_star"])
                if has_cal else preset["h_star"]),
        s_star=(_get(parser, "calibration", "s_star", int, preset["s_star"])
                if has_cal else preset["s_star"]),
        n_mc=(_get(parser, "calibration", "n_mc", int, preset["n_mc"])
              if has_cal else preset["n_mc"]),
        output=(_get(parser, "output", "path", str, "results.csv")
                if parser.has_section("output") else "results.csv"),
    )


def build_problem(config: ExperimentConfig) -> LognormalPde:
    """KL basis plus PDE pipeline sized for the config's calibration needs."""
    q = default_quadrature(config.matern.d)
    if config.matern.d == 1:
        q = max(q, 2 * config.s_star)
    else:
        q = max(q, math.ceil(math.sqrt(2.0 * config.s_star)))
    basis = nystrom_eigendecomposition(config.matern, q_per_dim=q)
    if basis.s_star < config.s_star:
        raise ConfigurationError(
            f"quadrature resolves only {basis.s_star} KL modes, "
            f"calibration needs {config.s_star}")
    return LognormalPde(basis, PROBLEM_KINDS[config.problem], config.ell0,
                        **config.problem_options)


def load_vector(config: ExperimentConfig) -> GeneratingVector:
    if config.vector_file:
        return load_generating_vector(config.vector_file)
    return bundled_vector()


def calibrate(config: ExperimentConfig,
              problem: LognormalPde | None = None) -> est.BiasModel:
    if problem is None:
        problem = build_problem(config)
    return est.calibrate_bias(problem, ref_level=config.ref_level,
                              s_star=config.s_star, n_mc=config.n_mc,
                              seed=config.seed)


def _ml_levels(result: est.MLResult) -> tuple[tuple[int, ...], tuple[float, ...]]:
    return (tuple(le.n_points for le in result.levels),
            tuple(le.shift_var for le in result.levels))


def run_experiment(config: ExperimentConfig,
                   bias_model: est.BiasModel | None = None,
                   problem: LognormalPde | None = None) -> list[ResultRow]:
    """Run every (L, estimator) cell of the sweep; never raises per-row.

    Rows appear with L in config order (outer) and estimators in declaration
    order (inner).  A bias model and problem may be passed in to reuse an
    earlier calibration; by default both are derived from the config.
    """
    if problem is None:
        problem = build_problem(config)
    if bias_model is None:
        bias_model = calibrate(config, problem)
    p = config.matern
    needs_vector = any(e in ("QMC", "MLQMC") for e in config.estimators)
    gen = load_vector(config) if needs_vector else None

    rows: list[ResultRow] = []
    for L in config.L_list:
        h_l = problem.h(L)
        eps = bias_model.eps_for(h_l)
        s_l = est.choose_sL(bias_model, h_l, p.d, p.nu)
        trunc = est.FixedTruncation(s_l)
        for name in config.estimators:
            row = ResultRow(estimator=name, L=L, eps=eps)
            try:
                result = _run_one(name, problem, gen, L, s_l, eps, trunc,
                                  bias_model, config)
                row.estimate = result.estimate
                row.rel_std_error = est.relative_std_error(
                    math.sqrt(result.total_variance), result.estimate)
                row.cost_model = result.total_cost_model
                row.cost_wall = result.total_cost_wall
                row.levels_N, row.levels_V = _ml_levels(result)
            except (ConfigurationError, est.NumericalError, ValueError) as exc:
                row.error = f"{type(exc).__name__}: {exc}"
            rows.append(row)
    return rows


def _run_one(name, problem, gen, L, s_l, eps, trunc, bias_model, config):
    seed = config.seed
    if name == "MC":
        return est.mc_single_level(problem, L, s_l, eps, seed=seed)
    if name == "QMC":
        return est.qmc_single_level(problem, L, s_l, gen, eps, r=config.r,
                                    seed=seed)
    if name == "MLMC_G":
        return est.mlmc_run(problem, eps, seed=seed, allocator="giles",
                            truncation=trunc, bias_model=bias_model)
    if name == "MLMC_GW":
        return est.mlmc_run(problem, eps, seed=seed, allocator="greedy",
                            truncation=trunc, bias_model=bias_model)
    if name == "MLQMC":
        return est.mlqmc_adaptive(problem, gen, eps, r=config.r, seed=seed,
                                  truncation=trunc, bias_model=bias_model)
    raise ConfigurationError(f"unknown estimator {name!r}")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows, out, timing: bool = False) -> None:
    """Write rows with a full header.  Wall-clock cells stay empty unless
    timing is requested, keeping reruns byte-identical."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_CSV_FIELDS)
    for row in rows:
        writer.writerow([
            row.estimator,
            str(row.L),
            repr(float(row.eps)),
            _fmt(row.rel_std_error),
            _fmt(row.estimate),
            _fmt(row.cost_model),
            _fmt(row.cost_wall) if timing else "",
            json.dumps(list(row.levels_N)),
            json.dumps([float(v) for v in row.levels_V]),
            row.error,
        ])


def write_csv(rows, path: str, timing: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        rows_to_csv(rows, fh, timing=timing)


def csv_bytes(rows, timing: bool = False) -> bytes:
    buf = io.StringIO()
    rows_to_csv(rows, buf, timing=timing)
    return buf.getvalue().encode()


def fit_cost_exponent(rows) -> float:
    """Least-squares slope of log cost against log(1/eps) for one estimator."""
    clean = [r for r in rows if r.error == "" and r.cost_model is not None]
    if len(clean) < 3:
        raise ValueError("cost-exponent fits need at least 3 successful rows")
    x = np.log([1.0 / r.eps for r in clean])
    y = np.log([r.cost_model for r in clean])
    return float(np.polyfit(x, y, 1)[0])


def with_overrides(config: ExperimentConfig, seed: int | None = None,
                   out: str | None = None) -> ExperimentConfig:
    updates = {}
    if seed is not None:
        updates["seed"] = seed
    if out is not None:
        updates["output"] = out
    return replace(config, **updates) if updates else config
