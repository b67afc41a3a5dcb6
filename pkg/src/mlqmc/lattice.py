"""Randomly shifted rank-1 lattice rules.

A rank-1 lattice rule with N points and generating vector z evaluates an
integrand at the points frac(i*z/N + delta), i = 1..N, where delta is a
random shift drawn uniformly from [0,1)^s.  Averaging over independent
shifts gives an unbiased estimator whose variance is observable from the
shift spread.  Points are mapped to Gaussian coordinates through the
inverse normal CDF before the integrand sees them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import erfc

# Unit-cube coordinates are clamped away from {0,1} so the Gaussian map
# stays finite.  2^-53 is the spacing of doubles just below 1.
UNIT_EPS = 2.0 ** -53

__all__ = [
    "UNIT_EPS",
    "GeneratingVector",
    "Shift",
    "lattice_point",
    "lattice_points",
    "embedded_point_set",
    "embedded_increment",
    "map_to_gaussian",
    "inverse_norm_cdf",
    "draw_shift",
    "load_generating_vector",
    "save_generating_vector",
    "bundled_vector",
]


@dataclass(frozen=True)
class GeneratingVector:
    """Integer generating vector and the point count it was built for."""

    z: np.ndarray
    n_points: int

    def __post_init__(self) -> None:
        z = np.ascontiguousarray(np.asarray(self.z, dtype=np.int64))
        object.__setattr__(self, "z", z)
        if self.n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {self.n_points}")
        if z.ndim != 1 or z.size == 0:
            raise ValueError("generating vector must be a nonempty 1-d array")
        if np.any(z < 1) or np.any(z > self.n_points - 1):
            raise ValueError("components must satisfy 1 <= z_j <= n_points - 1")

    @property
    def s_max(self) -> int:
        return int(self.z.size)

    def components(self, s: int) -> np.ndarray:
        if not 1 <= s <= self.s_max:
            raise ValueError(f"need 1 <= s <= {self.s_max}, got {s}")
        return self.z[:s]


@dataclass(frozen=True)
class Shift:
    """A uniform random shift in [0,1)^s plus the id of the stream it came from."""

    delta: np.ndarray
    seed_id: int = 0

    def __post_init__(self) -> None:
        delta = np.ascontiguousarray(np.asarray(self.delta, dtype=np.float64))
        object.__setattr__(self, "delta", delta)
        if delta.ndim != 1:
            raise ValueError("shift must be a 1-d array")
        if np.any(delta < 0.0) or np.any(delta >= 1.0):
            raise ValueError("shift components must lie in [0,1)")


def _unit_points(indices: np.ndarray, gen: GeneratingVector, n: int,
                 shift: Shift, s: int) -> np.ndarray:
    if n < 1 or n > gen.n_points:
        raise ValueError(f"need 1 <= n <= {gen.n_points}, got {n}")
    z = gen.components(s)
    if shift.delta.size < s:
        raise ValueError("shift has fewer components than requested dimension")
    # Reduce i*z mod n in integer arithmetic so nested power-of-two rules
    # reproduce their parents bitwise.  i*z stays well inside int64.
    frac = ((indices[:, None] * z[None, :]) % n) / float(n)
    pts = (frac + shift.delta[None, :s]) % 1.0
    return np.clip(pts, UNIT_EPS, 1.0 - UNIT_EPS)


def lattice_point(i: int, gen: GeneratingVector, n: int, shift: Shift,
                  s: int) -> np.ndarray:
    """Point i (1-based, i = 1..n) of the shifted n-point rule in [0,1)^s."""
    if not 1 <= i <= n:
        raise ValueError(f"index must satisfy 1 <= i <= {n}, got {i}")
    idx = np.asarray([i], dtype=np.int64)
    return _unit_points(idx, gen, n, shift, s)[0]

def lattice_points(gen: GeneratingVector, n: int, shift: Shift, s: int) -> np.ndarray:
    """All n points of the shifted rule, shape (n, s), indices i = 1..n."""
    idx = np.arange(1, n + 1, dtype=np.int64)
    return _unit_points(idx, gen, n, shift, s)


def embedded_point_set(gen: GeneratingVector, m: int, shift: Shift, s: int) -> np.ndarray:
    """Point set of the 2^m rule.

    The even indices of the 2^(m+1) rule reproduce this set exactly, which
    is what lets a doubling estimator reuse earlier evaluations.
    """
    n = _check_embedded_m(gen, m)
    return lattice_points(gen, n, shift, s)


def embedded_increment(gen: GeneratingVector, m: int, shift: Shift, s: int) -> np.ndarray:
    """The 2^(m-1) new points (odd indices) gained when doubling to 2^m."""
    n = _check_embedded_m(gen, m)
    if m == 0:
        idx = np.asarray([1], dtype=np.int64)
    else:
        idx = np.arange(1, n + 1, 2, dtype=np.int64)
    return _unit_points(idx, gen, n, shift, s)


def _check_embedded_m(gen: GeneratingVector, m: int) -> int:
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    n = 1 << m
    if n > gen.n_points:
        raise ValueError(
            f"2^{m} exceeds the vector's published point count {gen.n_points}")
    return n


# Coefficients of the rational initial guess for the inverse normal CDF
# (P. Acklam's approximation, absolute relative error ~1.15e-9 before
# refinement).  One Halley step pushes it to near machine precision.
_ICDF_A = (-3.969683028665376e+01, 2.209460984245205e+02,
           -2.759285104469687e+02, 1.383577518672690e+02,
           -3.066479806614716e+01, 2.506628277459239e+00)
_ICDF_B = (-5.447609879822406e+01, 1.615858368580409e+02,
           -1.556989798598866e+02, 6.680131188771972e+01,
           -1.328068155288572e+01)
_ICDF_C = (-7.784894002430293e-03, -3.223964580411365e-01,
           -2.400758277161838e+00, -2.549732539343734e+00,
           4.374664141464968e+00, 2.938163982698783e+00)
_ICDF_D = (7.784695709041462e-03, 3.224671290700398e-01,
           2.445134137142996e+00, 3.754408661907416e+00)
_ICDF_PLOW = 0.02425


def _icdf_initial(p: np.ndarray) -> np.ndarray:
    a, b, c, d = _ICDF_A, _ICDF_B, _ICDF_C, _ICDF_D
    x = np.empty_like(p)

    lo = p < _ICDF_PLOW
    hi = p > 1.0 - _ICDF_PLOW
    mid = ~(lo | hi)

    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        num = ((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]
        den = ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
        x[mid] = num * q / den

    for mask, sign in ((lo, 1.0), (hi, -1.0)):
        if not np.any(mask):
            continue
        tail = p[mask] if sign > 0 else 1.0 - p[mask]
        q = np.sqrt(-2.0 * np.log(tail))
        num = ((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]
        den = (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        x[mask] = sign * num / den
    return x


def inverse_norm_cdf(p):
    """Inverse standard normal CDF, accurate to ~1e-15 relative on (1e-300, 1-1e-16).

    Rational approximation refined by one Halley step driven through erfc,
    so the tails keep full relative accuracy.
    """
    p_arr = np.asarray(p, dtype=np.float64)
    scalar = p_arr.ndim == 0
    p_arr = np.atleast_1d(p_arr)
    if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
        raise ValueError("inverse normal CDF needs arguments strictly inside (0,1)")

    x = _icdf_initial(p_arr)
    # Halley refinement: e = Phi(x) - p, u = e / phi(x).  Above the median
    # Phi(x) and p are both ~1, so the residual is formed from the exact
    # complement 1 - p and the complementary CDF to dodge cancellation.
    upper = p_arr > 0.5
    e = np.where(upper,
                 (1.0 - p_arr) - 0.5 * erfc(x / np.sqrt(2.0)),
                 0.5 * erfc(-x / np.sqrt(2.0)) - p_arr)
    u = e * np.sqrt(2.0 * np.pi) * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    return float(x[0]) if scalar else x


def map_to_gaussian(points: np.ndarray) -> np.ndarray:
    """Apply the inverse normal CDF componentwise to unit-cube points."""
    return inverse_norm_cdf(points)


def draw_shift(seed: int, level: int, shift_index: int, s: int) -> Shift:
    """Deterministic uniform shift for the stream keyed by (seed, level, shift_index).

    Counter-based (Philox) streams: the same key always yields the same
    shift regardless of how many other streams were consumed before it.
    """
    if s < 1:
        raise ValueError(f"dimension must be >= 1, got {s}")
    if level < 0 or shift_index < 0:
        raise ValueError("level and shift_index must be nonnegative")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(level, shift_index))
    rng = np.random.Generator(np.random.Philox(ss))
    delta = rng.random(s)
    return Shift(delta=delta, seed_id=(level << 20) | shift_index)


_RANGE_IN_NAME = re.compile(r"(\d+)-(\d+)\.\d+\.txt$")


def load_generating_vector(path, n_points: int | None = None) -> GeneratingVector:
    """Read a generating vector from a whitespace-separated text table.

    One line per dimension; the last integer column of line j is z_j.  The
    published point count is taken from ``n_points`` or, failing that,
    parsed from a ``...-LO-HI.DIMS.txt`` style file name.
    """
    path = Path(path)
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            cols = stripped.split()
            try:
                rows.append(int(cols[-1]))
            except ValueError as exc:
                raise ValueError(
                    f"{path.name}:{lineno}: last column is not an integer") from exc
    if not rows:
        raise ValueError(f"{path.name}: no vector rows found")
    if n_points is None:
        match = _RANGE_IN_NAME.search(path.name)
        if match is None:
            raise ValueError(
                f"{path.name}: cannot infer the point count from the file name; "
                "pass n_points explicitly")
        n_points = int(match.group(2))
    return GeneratingVector(z=np.asarray(rows, dtype=np.int64), n_points=n_points)


def save_generating_vector(path, gen: GeneratingVector) -> None:
    """Write ``dimension z_j`` lines in the same format the loader reads."""
    with open(path, "w") as fh:
        for j, zj in enumerate(gen.z, start=1):
            fh.write(f"{j} {int(zj)}\n")


_BUNDLED_NAME = "lattice-cbc-4-16384.3600.txt"


def bundled_vector() -> GeneratingVector:
    """The generating vector shipped with the package."""
    from importlib.resources import as_file, files

    res = files("mlqmc.data").joinpath(_BUNDLED_NAME)
    with as_file(res) as p:
        return load_generating_vector(p)
