"""
Reflected Brownian motions in the quadrant describing the gaps between two
neighbouring interlacing particles near a triple point, and empirical
corner-avoidance statistics for them.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Sequence

import numpy as np

from .errors import ParameterError, ValidationError
from .oracles import RngLike, as_generator

logger = logging.getLogger(__name__)

RBM_TYPES = ("A", "B1", "B2", "C1", "C2", "D")
LCP_SWEEPS = 2


@dataclass(frozen=True)
class RBMSpec:
    """Covariance A and reflection matrix R of a quadrant RBM."""

    tag: str
    covariance: np.ndarray
    reflection: np.ndarray

    def __post_init__(self) -> None:
        cov = np.asarray(self.covariance, dtype=float)
        ref = np.asarray(self.reflection, dtype=float)
        if cov.shape != (2, 2) or ref.shape != (2, 2):
            raise ValidationError("covariance and reflection must be 2x2")
        if not np.allclose(cov, cov.T) or np.any(np.linalg.eigvalsh(cov) <= 0):
            raise ValidationError(f"covariance of {self.tag} is not symmetric positive definite")
        if not np.allclose(np.diag(ref), 1.0):
            raise ValidationError(f"reflection matrix of {self.tag} needs a unit diagonal")
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "reflection", ref)


_REFLECTIONS: Dict[str, Sequence[Sequence[float]]] = {
    "A": [[1.0, 0.0], [0.0, 1.0]],
    "B1": [[1.0, 0.0], [-1.0, 1.0]],
    "B2": [[1.0, 0.0], [-1.0, 1.0]],
    "C1": [[1.0, 0.0], [1.0, 1.0]],
    "C2": [[1.0, 0.0], [1.0, 1.0]],
    "D": [[1.0, 0.0], [0.0, 1.0]],
}

# gaps of three interlacing particles share one Brownian driver
_SHARED_COVARIANCE = [[2.0, -1.0], [-1.0, 2.0]]
_INDEPENDENT_COVARIANCE = [[2.0, 0.0], [0.0, 2.0]]


def builtin_spec(tag: str) -> RBMSpec:
    """The covariance and reflection matrices of one of the six gap systems."""
    if tag not in RBM_TYPES:
        raise ParameterError(f"unknown RBM type {tag!r}; choose from {RBM_TYPES}")
    cov = _INDEPENDENT_COVARIANCE if tag == "D" else _SHARED_COVARIANCE
    return RBMSpec(tag, np.array(cov), np.array(_REFLECTIONS[tag]))


class GapPaths(NamedTuple):
    """Simulated gap process Z and pushing process L, both (paths, steps + 1, 2)."""

    times: np.ndarray
    z: np.ndarray
    pushing: np.ndarray


def solve_skorokhod_step(
    y: np.ndarray, reflection: np.ndarray, sweeps: int = LCP_SWEEPS
) -> np.ndarray:
    """
    Smallest dL >= 0 with y + R dL >= 0 and dL_k (y + R dL)_k = 0.

    Projected Gauss-Seidel on the 2-D linear complementarity problem; two
    sweeps are exact for unit-diagonal R with off-diagonal entries in {-1, 0, 1}
    when one of them is zero, which covers every builtin type.
    """
    d_l = np.zeros_like(y)
    for _ in range(sweeps):
        for k in range(y.shape[-1]):
            slack = y[..., k] + d_l @ reflection[k]
            d_l[..., k] = np.maximum(d_l[..., k] - slack / reflection[k, k], 0.0)
    return d_l


def simulate_gap_process(
    spec: RBMSpec,
    start: Sequence[float],
    dt: float,
    T: float,
    rng: RngLike,
    n_paths: int = 1,
    noise_scale: float = 1.0,
) -> GapPaths:
    """
    Euler scheme Z <- Z + dW + R dL for a quadrant RBM.

    Args:
        spec: Covariance and reflection matrices
        start: Starting point in the closed quadrant
        dt: Time step
        T: Horizon
        rng: Randomness source
        n_paths: Independent paths simulated together
        noise_scale: Multiplies the Brownian increments (0 freezes the noise)

    Returns:
        GapPaths with nonnegative Z and nondecreasing L
    """
    start = np.asarray(start, dtype=float)
    if start.shape != (2,) or np.any(start < 0):
        raise ParameterError(f"start must be a point of the closed quadrant, got {start}")
    if not dt > 0 or T < 0:
        raise ParameterError(f"need dt > 0 and T >= 0, got dt={dt}, T={T}")
    gen = as_generator(rng)
    n_steps = int(round(T / dt))
    chol = np.linalg.cholesky(spec.covariance)

    z = np.empty((n_paths, n_steps + 1, 2))
    pushing = np.zeros_like(z)
    z[:, 0] = start
    current = np.tile(start, (n_paths, 1))
    total = np.zeros((n_paths, 2))
    scale = noise_scale * math.sqrt(dt)
    for k in range(1, n_steps + 1):
        dw = scale * gen.standard_normal((n_paths, 2)) @ chol.T
        y = current + dw
        d_l = solve_skorokhod_step(y, spec.reflection)
        # rounding can leave -1e-17 after the pushing step
        current = np.maximum(y + d_l @ spec.reflection.T, 0.0)
        total = total + d_l
        z[:, k] = current
        pushing[:, k] = total
    return GapPaths(dt * np.arange(n_steps + 1), z, pushing)


class CornerStats(NamedTuple):
    eps: float
    fraction: float
    stderr: float
    n_paths: int


def corner_hit_stats(paths: GapPaths, eps: float) -> CornerStats:
    """Fraction of paths with min_t max(Z_1, Z_2) < eps, with its binomial error."""
    if eps < 0:
        raise ParameterError(f"eps must be nonnegative, got {eps}")
    closest = np.min(np.max(paths.z, axis=-1), axis=-1)
    hits = closest < eps
    n = hits.size
    fraction = float(hits.mean())
    return CornerStats(eps, fraction, math.sqrt(fraction * (1.0 - fraction) / n), n)


def corner_ladder(
    spec: RBMSpec,
    eps_values: Sequence[float],
    n_paths: int,
    rng: RngLike,
    start: Sequence[float] = (1.0, 1.0),
    dt: float = 1e-3,
    T: float = 1.0,
    paths: Optional[GapPaths] = None,
) -> Dict[float, CornerStats]:
    """Corner-hit statistics of one simulated batch across several eps values."""
    if paths is None:
        paths = simulate_gap_process(spec, start, dt, T, rng, n_paths=n_paths)
    stats = {float(eps): corner_hit_stats(paths, eps) for eps in eps_values}
    logger.info(
        f"RBM type {spec.tag}: "
        + ", ".join(f"eps={e:g} -> {s.fraction:.4f}" for e, s in stats.items())
    )
    return stats
