"""
Numeric verification of the algebraic identities behind the Warren processes:
harmonicity and eigenfunction relations of the Vandermonde determinant, the
face identities of the intertwining argument, and the Dixon-Anderson integral
and normalization identities.

Derivatives of the Vandermonde determinant are analytic, so the algebraic
checks are near machine precision; the integral checks are Monte Carlo
estimates with standard errors.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, ParameterError, ShapeError
from .gt_core import LaguerreShape, log_superfactorial, modified_vandermonde, vandermonde
from .oracles import RngLike, RngStream, as_generator

logger = logging.getLogger(__name__)

LAGUERRE_FACE_CASES = ("n<=p lower", "n<=p upper", "n>p lower", "n>p upper")
JACOBI_FACE_CASES = ("lower", "upper")
FACE_TOL = 1e-12
ALGEBRAIC_TOL = 1e-8
FACE_RESIDUAL_TOL = 1e-9
# standard errors allowed between a Monte Carlo estimate and its target in the suite
MC_SIGMAS = 4.0


@dataclass(frozen=True)
class IdentityResidual:
    """Both sides of one identity at one point, with the scale used for relative error."""

    lhs: float
    rhs: float
    scale: float

    @property
    def absolute(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative(self) -> float:
        return self.absolute / (1.0 + abs(self.scale))


class MCEstimate(NamedTuple):
    estimate: float
    target: float
    stderr: float

    def within(self, n_se: float = 3.0) -> bool:
        return abs(self.estimate - self.target) <= n_se * self.stderr + 1e-12 * max(
            1.0, abs(self.target)
        )


@dataclass
class ResidualReport:
    """Worst residual of one identity over a set of evaluation points."""

    identity_id: str
    n_points: int
    max_residual: float
    tolerance: float
    passed: bool = field(init=False)
    worst_point: Optional[Dict[str, Any]] = None

    def __post_init__(self) -> None:
        self.passed = bool(self.max_residual <= self.tolerance)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# ---------------------------------------------------------------------
# Vandermonde derivatives
# ---------------------------------------------------------------------


def vandermonde_derivatives(x: Sequence[float]) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Δ(x) with its first and pure second partial derivatives.

    ∂_iΔ = Δ S_i and ∂²_iΔ = Δ (S_i² - T_i) where S_i = Σ_{j≠i} 1/(x_i - x_j)
    and T_i = Σ_{j≠i} 1/(x_i - x_j)².
    """
    x = np.asarray(x, dtype=float)
    delta = float(vandermonde(x))
    if x.size < 2:
        return delta, np.zeros(x.size), np.zeros(x.size)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, np.inf)
    inv = 1.0 / diff
    s = inv.sum(axis=1)
    t = (inv**2).sum(axis=1)
    return delta, delta * s, delta * (s**2 - t)


def _require_distinct(x: np.ndarray, what: str) -> None:
    if x.size > 1 and np.any(np.diff(np.sort(x)) <= 0):
        raise DomainError(f"{what} must have distinct coordinates, got {x.tolist()}")


def check_laguerre_harmonicity(lam: Sequence[float], n: int, p: int) -> IdentityResidual:
    """
    L Δ(λ) against 0 for L = Σ 2λ_i ∂²_i + 2(|n - p| + 1) ∂_i.

    The level has min(n, p) variables.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (min(n, p),):
        raise ShapeError(f"level n={n}, p={p} has {min(n, p)} variables, got {lam.shape}")
    _require_distinct(lam, "λ")
    delta, first, second = vandermonde_derivatives(lam)
    value = float(np.sum(2.0 * lam * second + 2.0 * (abs(n - p) + 1) * first))
    return IdentityResidual(value, 0.0, delta)


def jacobi_eigenvalue(n: int, p: int, q: int) -> float:
    """Eigenvalue of Δ under the level-n Jacobi generator."""
    return -n * (n - 1) * (3 * p + 3 * q - 4 * n + 2) / 3.0


def check_jacobi_eigenfunction(mu: Sequence[float], n: int, p: int, q: int) -> IdentityResidual:
    """
    J Δ(μ) against c Δ(μ) with J = Σ 2μ(1-μ)∂²_i + 2((p-n+1) - (p+q-2n+2)μ_i)∂_i.

    c = -n(n-1)(3p+3q-4n+2)/3; the generator is dissipative so c <= 0.
    """
    if n > min(p, q):
        raise ParameterError(f"n={n} exceeds min(p, q)={min(p, q)}")
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (n,):
        raise ShapeError(f"expected {n} variables, got {mu.shape}")
    if np.any(mu <= 0) or np.any(mu >= 1):
        raise DomainError("μ must lie in (0, 1)")
    _require_distinct(mu, "μ")
    delta, first, second = vandermonde_derivatives(mu)
    drift = 2.0 * ((p - n + 1) - (p + q - 2 * n + 2) * mu)
    value = float(np.sum(2.0 * mu * (1.0 - mu) * second + drift * first))
    return IdentityResidual(value, jacobi_eigenvalue(n, p, q) * delta, delta)


# ---------------------------------------------------------------------
# Face identities
# ---------------------------------------------------------------------


@dataclass(frozen=True)
class FacePoint:
    """
    A point on a face of the interlacing cone.

    ``x`` is level n-1, ``y`` is level n, ``i`` the 1-based index of the
    level-(n-1) particle sitting on the face.
    """

    x: Tuple[float, ...]
    y: Tuple[float, ...]
    i: int
    n: int
    p: int
    q: int = 0


def _interaction(v: np.ndarray, i: int, coef: Callable[[float], float]) -> float:
    """Σ_{j≠i} coef(v_i)/(v_i - v_j), i 1-based."""
    vi = v[i - 1]
    others = np.delete(v, i - 1)
    return float(np.sum(coef(vi) / (vi - others)))


def _laguerre_coef(v: float) -> float:
    return 4.0 * v


def _jacobi_coef(v: float) -> float:
    return 4.0 * v * (1.0 - v)


def _face_partner(case: str, i: int) -> int:
    """1-based index of the level-n particle the face pins x_i to."""
    if case in ("n<=p lower", "n>p upper", "lower"):
        return i
    if case in ("n<=p upper", "upper"):
        return i + 1
    return i - 1


def _check_face_point(
    case: str, point: FacePoint, x_len: int, y_len: int, i_range: range
) -> Tuple[np.ndarray, np.ndarray, int]:
    x = np.asarray(point.x, dtype=float)
    y = np.asarray(point.y, dtype=float)
    if x.shape != (x_len,) or y.shape != (y_len,):
        raise ShapeError(
            f"expected x of length {x_len} and y of length {y_len}, got {x.shape} and {y.shape}"
        )
    if point.i not in i_range:
        raise ParameterError(f"face index i={point.i} outside {i_range.start}..{i_range.stop - 1}")
    k = _face_partner(case, point.i)
    target = y[k - 1]
    if abs(x[point.i - 1] - target) > FACE_TOL * (1.0 + abs(target)):
        raise DomainError(f"x[{point.i}]={x[point.i - 1]} is not on the face y[{k}]={target}")
    _require_distinct(x, "x")
    _require_distinct(y, "y")
    return x, y, k


def check_laguerre_face_identity(case: str, point: FacePoint) -> IdentityResidual:
    """
    Both sides of the Laguerre face equality, evaluated term by term.

    Cases and faces (1-based i):
        "n<=p lower": x_i = y_i,     i in 1..n-1
        "n<=p upper": x_i = y_{i+1}, i in 1..n-1
        "n>p upper":  x_i = y_i,     i in 1..p
        "n>p lower":  x_i = y_{i-1}, i in 2..p
    """
    n, p, i = point.n, point.p, point.i
    if case not in LAGUERRE_FACE_CASES:
        raise ParameterError(f"unknown Laguerre face case {case!r}")
    if case.startswith("n<=p") and n > p or case.startswith("n>p") and n <= p:
        raise ParameterError(f"case {case!r} does not apply to n={n}, p={p}")
    if n < 2:
        raise ParameterError(f"faces need n >= 2, got {n}")
    if case.startswith("n<=p"):
        i_range = range(1, n)
    elif case == "n>p upper":
        i_range = range(1, p + 1)
    else:
        i_range = range(2, p + 1)
    x, y, k = _check_face_point(case, point, min(n - 1, p), min(n, p), i_range)

    below = abs(n - p - 1)
    here = abs(n - p)
    sx = _interaction(x, i, _laguerre_coef)
    sy = _interaction(y, k, _laguerre_coef)
    if case == "n<=p lower":
        lhs = -2.0 * (below + 1) - sx + 2.0 + sx
        rhs = -2.0 * (here + 1) - sy + sy
    elif case == "n<=p upper":
        lhs = 2.0 * (below + 1) + sx - 2.0 - sx
        rhs = 2.0 * (here + 1) + sy - sy
    elif case == "n>p upper":
        lhs = 2.0 * (below + 1) + sx - 2.0 - sx - 4.0 * (n - p - 1)
        rhs = 2.0 * (here + 1) + sy - sy - 4.0 * (n - p)
    else:
        lhs = -2.0 * (below + 1) - sx + 2.0 + sx + 4.0 * (n - p - 1)
        rhs = -2.0 * (here + 1) - sy + sy + 4.0 * (n - p)
    return IdentityResidual(lhs, rhs, lhs)


def check_jacobi_face_identity(case: str, point: FacePoint) -> IdentityResidual:
    """
    Both sides of the Jacobi face equality, evaluated term by term.

    "lower" is the face x_i = y_i and "upper" the face x_i = y_{i+1}, i in 1..n-1.
    """
    n, p, q, i = point.n, point.p, point.q, point.i
    if case not in JACOBI_FACE_CASES:
        raise ParameterError(f"unknown Jacobi face case {case!r}")
    if n < 2 or n > min(p, q):
        raise ParameterError(f"need 2 <= n <= min(p, q), got n={n}, p={p}, q={q}")
    x, y, k = _check_face_point(case, point, n - 1, n, range(1, n))
    if np.any(x <= 0) or np.any(x >= 1) or np.any(y <= 0) or np.any(y >= 1):
        raise DomainError("Jacobi face points must lie in (0, 1)")

    xi = x[i - 1]
    yk = y[k - 1]
    sx = _interaction(x, i, _jacobi_coef)
    sy = _interaction(y, k, _jacobi_coef)
    drift_below = (p - n + 2) - (p + q - 2 * n + 4) * xi
    # k is i on the lower face and i + 1 on the upper one: the drift is read at
    # the face coordinate y_k, which for "upper" is y_{i+1} rather than y_i
    drift_here = (p - n + 1) - (p + q - 2 * n + 2) * yk
    if case == "lower":
        lhs = -2.0 * drift_below - sx + (2.0 - 4.0 * xi) + sx
        rhs = -2.0 * drift_here - sy + sy
    else:
        lhs = 2.0 * drift_below + sx - (2.0 - 4.0 * xi) - sx
        rhs = 2.0 * drift_here + sy - sy
    return IdentityResidual(lhs, rhs, lhs)


def check_face_diffusion(family: str, case: str, point: FacePoint) -> IdentityResidual:
    """
    Diffusion matching on a face: -4x = -4y (Laguerre) or -4x(1-x) = -4y(1-y)
    (Jacobi), with the sign of the face's normal direction.
    """
    x = np.asarray(point.x, dtype=float)
    y = np.asarray(point.y, dtype=float)
    k = _face_partner(case, point.i)
    xi, yk = x[point.i - 1], y[k - 1]
    if abs(xi - yk) > FACE_TOL * (1.0 + abs(yk)):
        raise DomainError(f"x[{point.i}] is not on the face y[{k}]")
    sign = -1.0 if case.endswith("lower") else 1.0
    if family == "laguerre":
        lhs, rhs = sign * 4.0 * xi, sign * 4.0 * yk
    elif family == "jacobi":
        lhs, rhs = sign * 4.0 * xi * (1.0 - xi), sign * 4.0 * yk * (1.0 - yk)
    else:
        raise ParameterError(f"unknown family {family!r}")
    return IdentityResidual(lhs, rhs, lhs)


# ---------------------------------------------------------------------
# Dixon-Anderson integrals
# ---------------------------------------------------------------------


def _check_level(y: Sequence[float], n: int, p: int) -> np.ndarray:
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    y = np.asarray(y, dtype=float)
    if y.shape != (min(n, p),):
        raise ShapeError(f"level n={n}, p={p} has {min(n, p)} entries, got {y.shape}")
    if np.any(y < 0) or (y.size > 1 and np.any(np.diff(y) <= 0)):
        raise DomainError(f"y must be nonnegative and strictly ascending, got {y.tolist()}")
    return y


def check_da_integral(
    n: int, p: int, y: Sequence[float], n_mc: int, rng: RngLike
) -> MCEstimate:
    """
    Monte Carlo estimate of ∫ Δ̃_{n-1,p}(x)/Δ̃_{n,p}(y) dx over the interlacing box.

    The target is (n-p-1)_+!/(n-1)!. The interlacing region between two
    adjacent levels is a product of intervals, so uniform sampling on it
    weighted by its volume is unbiased.
    """
    y = _check_level(y, n, p)
    gen = as_generator(rng)
    lo, hi = LaguerreShape(n, p).sub_level_bounds(n, y)
    widths = hi - lo
    x = lo + widths * gen.random((n_mc, lo.size))
    values = np.prod(widths) * modified_vandermonde(x, n - 1, p) / modified_vandermonde(y, n, p)
    target = math.exp(gammaln(max(n - p - 1, 0) + 1) - gammaln(n))
    return MCEstimate(float(values.mean()), target, float(values.std(ddof=1) / math.sqrt(n_mc)))


def check_kernel_normalization(
    n: int, p: int, y: Sequence[float], n_mc: int, rng: RngLike
) -> MCEstimate:
    """
    Monte Carlo estimate of the total mass of Λ(y, ·) over all fillings below y.

    Λ is the constant (n-1)!...1!/((n-p-1)_+!...1! Δ̃_{n,p}(y)). Fillings are
    drawn level by level, each uniform on its box given the level above; the
    product of box volumes is the importance weight.
    """
    y = _check_level(y, n, p)
    gen = as_generator(rng)
    shape = LaguerreShape(n, p)
    kernel = math.exp(log_superfactorial(n - 1) - log_superfactorial(max(n - p - 1, 0)))
    kernel /= float(modified_vandermonde(y, n, p))

    weights = np.ones(n_mc)
    level = np.broadcast_to(y, (n_mc, y.size))
    for k in range(n, 1, -1):
        lo, hi = shape.sub_level_bounds(k, level)
        widths = hi - lo
        weights = weights * np.prod(widths, axis=1)
        level = lo + widths * gen.random(lo.shape)
    values = kernel * weights
    return MCEstimate(float(values.mean()), 1.0, float(values.std(ddof=1) / math.sqrt(n_mc)))


# ---------------------------------------------------------------------
# Random evaluation points and the suite runner
# ---------------------------------------------------------------------


def random_separated(
    gen: np.random.Generator, count: int, low: float, high: float, min_gap: float = 0.05
) -> np.ndarray:
    """Ascending uniform points in (low, high) whose gaps are at least ``min_gap``."""
    while True:
        x = np.sort(gen.uniform(low, high, count))
        if count < 2 or np.min(np.diff(x)) >= min_gap:
            return x


def random_face_point(
    family: str, case: str, n: int, p: int, q: int, gen: np.random.Generator
) -> Tuple[FacePoint, int]:
    """A random point on a face; returns it with a valid face index already set."""
    if family == "laguerre":
        y = random_separated(gen, min(n, p), 0.1, 5.0)
        below = min(n - 1, p)
        if n <= p:
            lo, hi = y[:-1], y[1:]
        else:
            lo, hi = np.concatenate([[0.0], y[:-1]]), y
        i_range = {"n>p upper": (1, p), "n>p lower": (2, p)}.get(case, (1, n - 1))
    else:
        y = random_separated(gen, n, 0.02, 0.98)
        below = n - 1
        lo, hi = y[:-1], y[1:]
        i_range = (1, n - 1)
    x = lo + (hi - lo) * gen.uniform(0.2, 0.8, below)
    i = int(gen.integers(i_range[0], i_range[1] + 1))
    k = _face_partner(case, i)
    x[i - 1] = y[k - 1]
    return FacePoint(tuple(x), tuple(y), i, n, p, q), i


def _report(
    identity_id: str, residuals: List[Tuple[float, Dict[str, Any]]], tol: float
) -> ResidualReport:
    worst_value, worst_point = max(residuals, key=lambda item: item[0])
    return ResidualReport(identity_id, len(residuals), worst_value, tol, worst_point)


def run_identity_suite(
    suite: str = "all", n_points: int = 1000, seed: int = 0, max_n: int = 4
) -> List[ResidualReport]:
    """
    Evaluate every identity in ``suite`` at random points.

    Suites: "all", "harmonic" (harmonicity and eigenfunction), "faces" (face
    identities and diffusion matching), "dixon-anderson" (integral checks).
    """
    if suite not in ("all", "harmonic", "faces", "dixon-anderson"):
        raise ParameterError(f"unknown suite {suite!r}")
    gen = RngStream(seed).generator()
    reports: List[ResidualReport] = []
    sizes = range(1, max_n + 1)

    if suite in ("all", "harmonic"):
        for n in sizes:
            for p in sizes:
                rows = []
                for _ in range(n_points):
                    lam = random_separated(gen, min(n, p), 0.1, 5.0)
                    rows.append(
                        (check_laguerre_harmonicity(lam, n, p).relative, {"lambda": lam.tolist()})
                    )
                reports.append(_report(f"laguerre-harmonicity[n={n},p={p}]", rows, ALGEBRAIC_TOL))
        for n in sizes:
            for p in range(n, max_n + 1):
                for q in range(n, max_n + 1):
                    rows = []
                    for _ in range(n_points):
                        mu = random_separated(gen, n, 0.02, 0.98)
                        rows.append(
                            (check_jacobi_eigenfunction(mu, n, p, q).relative, {"mu": mu.tolist()})
                        )
                    reports.append(
                        _report(f"jacobi-eigenfunction[n={n},p={p},q={q}]", rows, ALGEBRAIC_TOL)
                    )

    if suite in ("all", "faces"):
        for case in LAGUERRE_FACE_CASES:
            for n in range(2, max_n + 1):
                for p in sizes:
                    if case.startswith("n<=p") and n > p or case.startswith("n>p") and n <= p:
                        continue
                    if case == "n>p lower" and p < 2:
                        continue
                    rows = []
                    drows = []
                    for _ in range(n_points):
                        point, _ = random_face_point("laguerre", case, n, p, 0, gen)
                        info = asdict(point)
                        rows.append((check_laguerre_face_identity(case, point).relative, info))
                        drows.append((check_face_diffusion("laguerre", case, point).relative, info))
                    tag = f"[{case},n={n},p={p}]"
                    reports.append(_report("laguerre-face" + tag, rows, FACE_RESIDUAL_TOL))
                    reports.append(
                        _report("laguerre-face-diffusion" + tag, drows, FACE_RESIDUAL_TOL)
                    )
        for case in JACOBI_FACE_CASES:
            for n in range(2, max_n + 1):
                for p in range(n, max_n + 1):
                    for q in range(n, max_n + 1):
                        rows = []
                        drows = []
                        for _ in range(n_points):
                            point, _ = random_face_point("jacobi", case, n, p, q, gen)
                            info = asdict(point)
                            rows.append((check_jacobi_face_identity(case, point).relative, info))
                            drows.append(
                                (check_face_diffusion("jacobi", case, point).relative, info)
                            )
                        tag = f"[{case},n={n},p={p},q={q}]"
                        reports.append(_report("jacobi-face" + tag, rows, FACE_RESIDUAL_TOL))
                        reports.append(
                            _report("jacobi-face-diffusion" + tag, drows, FACE_RESIDUAL_TOL)
                        )

    if suite in ("all", "dixon-anderson"):
        n_mc = max(20 * n_points, 10000)
        for n, p in ((2, 1), (3, 1), (3, 2), (4, 2)):
            y = random_separated(gen, min(n, p), 0.1, 5.0)
            est = check_da_integral(n, p, y, n_mc, gen)
            reports.append(mc_report(f"da-integral[n={n},p={p}]", est, {"y": y.tolist()}))
        for n, p in ((2, 1), (2, 2), (3, 1), (3, 2), (3, 3)):
            y = random_separated(gen, min(n, p), 0.1, 5.0)
            est = check_kernel_normalization(n, p, y, n_mc, gen)
            reports.append(mc_report(f"kernel-norm[n={n},p={p}]", est, {"y": y.tolist()}))

    failed = [r.identity_id for r in reports if not r.passed]
    logger.info(f"Identity suite {suite!r}: {len(reports) - len(failed)}/{len(reports)} passed")
    return reports


def mc_report(identity_id: str, est: MCEstimate, point: Dict[str, Any]) -> ResidualReport:
    point = dict(point, estimate=est.estimate, target=est.target, stderr=est.stderr)
    tol = MC_SIGMAS * est.stderr + 1e-12 * max(1.0, abs(est.target))
    return ResidualReport(identity_id, 1, abs(est.estimate - est.target), tol, point)
