"""
Unnormalized log-densities of the explicit measures (entrance laws, invariant
laws, Gibbs measures) and the Dixon-Anderson interlacing kernel.

Off-support points return ``-inf`` instead of raising; only ratios and
constant differences of these values carry meaning.
"""

import math
from typing import Sequence

import numpy as np

from .errors import ParameterError, ShapeError
from .gt_core import (
    GTPattern,
    JacobiShape,
    LaguerreShape,
    log_gt_volume,
    log_modified_vandermonde,
    log_superfactorial,
    log_vandermonde,
    validate_interlacing,
)

NEG_INF = -math.inf


def _ascending(x: np.ndarray) -> bool:
    return bool(x.size < 2 or np.all(np.diff(x) > 0))


def log_laguerre_entrance(lam: Sequence[float], n: int, p: int, t: float) -> float:
    """
    Entrance law of the level-n Laguerre eigenvalue process at time ``t``.

    Returns 2 log Δ(λ) + Σ(|p - n| log λ_i - λ_i / 2t).
    """
    if t <= 0:
        raise ParameterError(f"t must be positive, got {t}")
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (min(n, p),):
        raise ShapeError(f"expected {min(n, p)} eigenvalues, got shape {lam.shape}")
    if np.any(lam < 0) or not _ascending(lam):
        return NEG_INF
    exponent = abs(p - n)
    with np.errstate(divide="ignore"):
        weight = exponent * np.sum(np.log(lam)) if exponent else 0.0
    return float(2.0 * log_vandermonde(lam) + weight - np.sum(lam) / (2.0 * t))


def log_jacobi_invariant(mu: Sequence[float], n: int, p: int, q: int) -> float:
    """Invariant law Δ(μ)² Π μ^{p-n} (1-μ)^{q-n} of the level-n Jacobi process."""
    if n > min(p, q):
        raise ParameterError(f"n={n} exceeds min(p, q)={min(p, q)}")
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (n,):
        raise ShapeError(f"expected {n} eigenvalues, got shape {mu.shape}")
    if np.any(mu <= 0) or np.any(mu >= 1) or not _ascending(mu):
        return NEG_INF
    return float(
        2.0 * log_vandermonde(mu)
        + (p - n) * np.sum(np.log(mu))
        + (q - n) * np.sum(np.log1p(-mu))
    )


def log_warren_entrance(pattern: GTPattern, t: float) -> float:
    """
    Entrance law of the Laguerre Warren process at time ``t``.

    Depends on the top row only: Δ(l^m) Π (l^m_i)^{(p-m)_+} e^{-l^m_i/2t},
    Lebesgue on the lower levels.
    """
    shape = pattern.shape
    if not isinstance(shape, LaguerreShape):
        raise ShapeError("log_warren_entrance needs a Laguerre pattern")
    if t <= 0:
        raise ParameterError(f"t must be positive, got {t}")
    if not validate_interlacing(pattern, strict_top=True):
        return NEG_INF
    top = np.asarray(pattern.top)
    exponent = max(shape.p - shape.m, 0)
    with np.errstate(divide="ignore"):
        weight = exponent * np.sum(np.log(top)) if exponent else 0.0
    return float(log_vandermonde(top) + weight - np.sum(top) / (2.0 * t))


def log_jacobi_warren_invariant(pattern: GTPattern) -> float:
    """Invariant law of the Jacobi Warren process: Δ(top) Π j^{p-k} (1-j)^{q-k}."""
    shape = pattern.shape
    if not isinstance(shape, JacobiShape):
        raise ShapeError("log_jacobi_warren_invariant needs a Jacobi pattern")
    if not validate_interlacing(pattern, strict_top=True):
        return NEG_INF
    top = np.asarray(pattern.top)
    if np.any(top <= 0) or np.any(top >= 1):
        return NEG_INF
    return float(
        log_vandermonde(top)
        + (shape.p - shape.k) * np.sum(np.log(top))
        + (shape.q - shape.k) * np.sum(np.log1p(-top))
    )


def da_kernel_level(y: Sequence[float], x: Sequence[float], n: int, p: int) -> float:
    """
    Dixon-Anderson density of level n-1 positions ``x`` below level n positions ``y``.

    Args:
        y: Level-n positions, min(n, p) entries
        x: Level-(n-1) positions, min(n-1, p) entries
        n: Level of ``y`` (at least 2)
        p: Rank

    Returns:
        ((n-1)!/(n-p-1)_+!) Δ̃_{n-1,p}(x)/Δ̃_{n,p}(y) on the interlacing region, else 0
    """
    if n < 2:
        raise ParameterError(f"kernel needs n >= 2, got {n}")
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.shape != (min(n, p),) or x.shape != (min(n - 1, p),):
        raise ShapeError(
            f"expected y of length {min(n, p)} and x of length {min(n - 1, p)}, "
            f"got {y.shape} and {x.shape}"
        )
    shape = LaguerreShape(n, p)
    lo, hi = shape.sub_level_bounds(n, y)
    if np.any(x < lo) or np.any(x > hi):
        return 0.0
    log_const = math.lgamma(n) - math.lgamma(max(n - p - 1, 0) + 1)
    value = (
        log_const
        + log_modified_vandermonde(x, n - 1, p)
        - log_modified_vandermonde(y, n, p)
    )
    return float(np.exp(value))


def full_gibbs_log_density(pattern: GTPattern) -> float:
    """
    Log of the uniform density on the polytope below the pattern's top row.

    Laguerre: log[(m-1)!...1! / ((m-p-1)_+!...1! Δ̃_{m,p}(top))];
    Jacobi: log[(k-1)!...1! / Δ(top)].
    """
    shape = pattern.shape
    if not validate_interlacing(pattern, strict_top=True):
        return NEG_INF
    if isinstance(shape, LaguerreShape):
        return float(-log_gt_volume(pattern.top, shape.m, shape.p))
    if isinstance(shape, JacobiShape):
        return float(log_superfactorial(shape.k - 1) - log_vandermonde(pattern.top))
    raise ShapeError(f"no Gibbs measure defined for {type(shape).__name__}")
