"""
Exact fixed-time samplers built from random matrices, independent of any SDE
integrator, plus the exact Gibbs sampler that fills a pattern below a given
top row.

Matrices are numpy complex arrays; the Hermitian eigenproblem is solved on the
real-symmetric embedding [[X, -Y], [Y, X]] of H = X + iY with batched cyclic
Jacobi rotations, so every sampler works on stacks of draws at once.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ParameterError, ShapeError, ValidationError
from .gt_core import GTPattern, JacobiShape, LaguerreShape, PatternShape

logger = logging.getLogger(__name__)

# Complex matrices (or stacks of them) are plain numpy complex arrays.
ComplexMatrix = np.ndarray

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 60
BISECTION_STEPS = 64


@dataclass(frozen=True)
class RngStream:
    """
    Reproducible source of randomness addressed by (seed, stream).

    Identical pairs always produce identical sequences; distinct stream ids
    give statistically independent sequences for parallel work.
    """

    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        if self.seed < 0 or self.stream < 0:
            raise ParameterError(
                f"seed and stream must be nonnegative, got ({self.seed}, {self.stream})"
            )
        if self.seed >= 2**64 or self.stream >= 2**64:
            raise ParameterError("seed and stream must fit in 64 bits")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        )

    def child(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise ParameterError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def complex_gaussian(
    gen: np.random.Generator, shape: Tuple[int, ...], variance: float
) -> ComplexMatrix:
    """Entries re + i im with re, im independent N(0, variance)."""
    scale = np.sqrt(variance)
    return scale * gen.standard_normal(shape) + 1j * scale * gen.standard_normal(shape)


# ---------------------------------------------------------------------
# Eigensolvers
# ---------------------------------------------------------------------


def symmetric_jacobi_eigh(
    a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cyclic Jacobi eigensolver for a stack of real symmetric matrices.

    Args:
        a: Array (..., N, N), symmetric in the last two axes
        tol: Stop once the off-diagonal Frobenius norm is below tol * ||A||_F
        max_sweeps: Hard cap on full sweeps

    Returns:
        (eigenvalues (..., N) ascending, eigenvectors (..., N, N) as columns)
    """
    a = np.asarray(a, dtype=float)
    batch_shape = a.shape[:-2]
    size = a.shape[-1]
    work = 0.5 * (a + np.swapaxes(a, -1, -2)).reshape((-1, size, size)).copy()
    vecs = np.broadcast_to(np.eye(size), work.shape).copy()

    norm = np.sqrt(np.sum(work**2, axis=(-1, -2)))
    threshold = (tol * np.maximum(norm, np.finfo(float).tiny)) ** 2
    pairs = [(p, q) for p in range(size - 1) for q in range(p + 1, size)]

    for sweep in range(max_sweeps):
        off = np.sum(work**2, axis=(-1, -2)) - np.sum(
            np.diagonal(work, axis1=-2, axis2=-1) ** 2, axis=-1
        )
        if np.all(off <= threshold):
            break
        for p, q in pairs:
            apq = work[:, p, q]
            active = apq != 0.0
            if not active.any():
                continue
            theta = (work[:, q, q] - work[:, p, p]) / (2.0 * np.where(active, apq, 1.0))
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            col_p = work[:, :, p].copy()
            col_q = work[:, :, q].copy()
            work[:, :, p] = c[:, None] * col_p - s[:, None] * col_q
            work[:, :, q] = s[:, None] * col_p + c[:, None] * col_q
            row_p = work[:, p, :].copy()
            row_q = work[:, q, :].copy()
            work[:, p, :] = c[:, None] * row_p - s[:, None] * row_q
            work[:, q, :] = s[:, None] * row_p + c[:, None] * row_q

            vec_p = vecs[:, :, p].copy()
            vec_q = vecs[:, :, q].copy()
            vecs[:, :, p] = c[:, None] * vec_p - s[:, None] * vec_q
            vecs[:, :, q] = s[:, None] * vec_p + c[:, None] * vec_q
    else:
        logger.warning(f"Jacobi eigensolver hit the sweep cap ({max_sweeps})")

    vals = np.diagonal(work, axis1=-2, axis2=-1).copy()
    order = np.argsort(vals, axis=-1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=-1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=-1)
    return vals.reshape(batch_shape + (size,)), vecs.reshape(batch_shape + (size, size))


def _check_hermitian(h: np.ndarray) -> None:
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise ShapeError(f"expected square matrices, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2))), initial=0.0) > HERMITIAN_TOL * scale:
        raise ValidationError("matrix is not Hermitian within tolerance")


def real_embedding(h: ComplexMatrix) -> np.ndarray:
    """[[X, -Y], [Y, X]] for H = X + iY (stacked over leading axes)."""
    x, y = h.real, h.imag
    top = np.concatenate([x, -y], axis=-1)
    bottom = np.concatenate([y, x], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def hermitian_eigh(h: ComplexMatrix) -> Tuple[np.ndarray, ComplexMatrix]:
    """
    Eigenvalues (ascending) and unit eigenvectors of Hermitian matrices.

    Raises:
        ValidationError: if ``h`` is not Hermitian within 1e-12
    """
    h = np.asarray(h, dtype=complex)
    _check_hermitian(h)
    size = h.shape[-1]
    vals, vecs = symmetric_jacobi_eigh(real_embedding(h))
    # each eigenvalue of H appears twice in the embedding
    vals = vals[..., ::2]
    vecs = vecs[..., ::2]
    cvecs = vecs[..., :size, :] + 1j * vecs[..., size:, :]
    cvecs = cvecs / np.linalg.norm(cvecs, axis=-2, keepdims=True)
    return vals, cvecs


def hermitian_eigs(h: ComplexMatrix) -> np.ndarray:
    """Eigenvalues of Hermitian matrices, ascending along the last axis."""
    return hermitian_eigh(h)[0]


def generalized_hermitian_eigs(a: ComplexMatrix, b: ComplexMatrix) -> np.ndarray:
    """
    Eigenvalues of the pencil A v = mu B v with B positive definite.

    Reduces to L^{-1} A L^{-*} with B = L L^* (Cholesky), then solves the
    standard Hermitian problem.
    """
    chol = np.linalg.cholesky(b)
    inv = np.linalg.inv(chol)
    reduced = inv @ a @ np.conj(np.swapaxes(inv, -1, -2))
    reduced = 0.5 * (reduced + np.conj(np.swapaxes(reduced, -1, -2)))
    return hermitian_eigs(reduced)


def _gram(a: ComplexMatrix) -> ComplexMatrix:
    """The smaller of A A^* and A^* A; both share the nonzero spectrum."""
    if a.shape[-2] <= a.shape[-1]:
        return a @ np.conj(np.swapaxes(a, -1, -2))
    return np.conj(np.swapaxes(a, -1, -2)) @ a


def _enforce_cone(shape: PatternShape, flat: np.ndarray) -> np.ndarray:
    # rounding can break Cauchy interlacing by an ulp; clamp top-down
    for n in range(shape.n_levels, 1, -1):
        lo, hi = shape.sub_level_bounds(n, flat[..., shape.level_slice(n)])
        below = shape.level_slice(n - 1)
        flat[..., below] = np.clip(flat[..., below], lo, hi)
    return flat


# ---------------------------------------------------------------------
# Laguerre oracles
# ---------------------------------------------------------------------


def sample_wishart_eigs(
    n: int, p: int, t: float, rng: RngLike, size: Optional[int] = None
) -> np.ndarray:
    """
    The min(n, p) nonzero eigenvalues of A A^* for an n x p complex Gaussian A.

    Real and imaginary parts of every entry are independent N(0, t).

    Returns:
        Ascending array (min(n, p),), or (size, min(n, p)) when ``size`` is given
    """
    if t <= 0:
        raise ParameterError(f"t must be positive, got {t}")
    if n < 1 or p < 1:
        raise ParameterError(f"n and p must be positive, got n={n}, p={p}")
    gen = as_generator(rng)
    draws = 1 if size is None else size
    a = complex_gaussian(gen, (draws, n, p), t)
    eigs = np.maximum(hermitian_eigs(_gram(a)), 0.0)
    return eigs[0] if size is None else eigs


def sample_multilevel_wishart_eigs(
    m: int, p: int, t: float, rng: RngLike, size: Optional[int] = None
) -> Union[GTPattern, np.ndarray]:
    """
    Eigenvalues of A_n A_n^* for the nested top-n-row corners of one draw.

    Returns:
        A GTPattern when ``size`` is None, else flat patterns (size, n_coords)
        laid out as LaguerreShape(m, p)
    """
    if t <= 0:
        raise ParameterError(f"t must be positive, got {t}")
    shape = LaguerreShape(m, p)
    gen = as_generator(rng)
    draws = 1 if size is None else size
    a = complex_gaussian(gen, (draws, m, p), t)
    flat = np.empty((draws, shape.n_coords))
    for n in range(1, m + 1):
        flat[:, shape.level_slice(n)] = np.maximum(hermitian_eigs(_gram(a[:, :n, :])), 0.0)
    flat = _enforce_cone(shape, flat)
    return GTPattern.from_flat(shape, flat[0]) if size is None else flat


# ---------------------------------------------------------------------
# Jacobi oracles
# ---------------------------------------------------------------------


def _jacobi_pencil(
    gen: np.random.Generator, draws: int, n: int, p: int, q: int
) -> Tuple[ComplexMatrix, ComplexMatrix]:
    x = complex_gaussian(gen, (draws, p, n), 0.5)
    y = complex_gaussian(gen, (draws, q, n), 0.5)
    xx = np.conj(np.swapaxes(x, -1, -2)) @ x
    yy = np.conj(np.swapaxes(y, -1, -2)) @ y
    return xx, xx + yy


def sample_jacobi_eigs(
    n: int, p: int, q: int, rng: RngLike, size: Optional[int] = None
) -> np.ndarray:
    """
    Eigenvalues of X^*X v = mu (X^*X + Y^*Y) v for standard complex Gaussian
    X (p x n) and Y (q x n).

    Raises:
        ParameterError: if n > min(p, q)
    """
    if n > min(p, q):
        raise ParameterError(f"n={n} exceeds min(p, q)={min(p, q)}")
    gen = as_generator(rng)
    draws = 1 if size is None else size
    a, b = _jacobi_pencil(gen, draws, n, p, q)
    eigs = np.clip(generalized_hermitian_eigs(a, b), 0.0, 1.0)
    return eigs[0] if size is None else eigs


def sample_multilevel_jacobi_eigs(
    k: int, p: int, q: int, rng: RngLike, size: Optional[int] = None
) -> Union[GTPattern, np.ndarray]:
    """Nested Jacobi eigenvalues from the first n columns of X and Y, n = 1..k."""
    shape = JacobiShape(p, q, k)
    gen = as_generator(rng)
    draws = 1 if size is None else size
    a, b = _jacobi_pencil(gen, draws, k, p, q)
    flat = np.empty((draws, shape.n_coords))
    for n in range(1, k + 1):
        eigs = generalized_hermitian_eigs(a[:, :n, :n], b[:, :n, :n])
        flat[:, shape.level_slice(n)] = np.clip(eigs, 0.0, 1.0)
    flat = _enforce_cone(shape, flat)
    return GTPattern.from_flat(shape, flat[0]) if size is None else flat


# ---------------------------------------------------------------------
# Exact Gibbs filling
# ---------------------------------------------------------------------


def sample_dixon_anderson(
    points: np.ndarray, exponents: Sequence[float], rng: RngLike
) -> np.ndarray:
    """
    Roots of sum_j w_j / (t - a_j) with w ~ Dirichlet(exponents).

    The roots interlace the points and have density proportional to
    Δ(x) Π |x_i - a_j|^{s_j - 1}.

    Args:
        points: Ascending array (S, N)
        exponents: N positive Dirichlet parameters
        rng: Randomness source

    Returns:
        Array (S, N - 1) of ascending roots
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    exponents = np.asarray(exponents, dtype=float)
    if points.shape[-1] != exponents.shape[0]:
        raise ShapeError(
            f"{points.shape[-1]} points but {exponents.shape[0]} Dirichlet exponents"
        )
    if np.any(exponents <= 0):
        raise ParameterError("Dirichlet exponents must be positive")
    gen = as_generator(rng)
    weights = gen.dirichlet(exponents, size=points.shape[0])

    lo = points[:, :-1].copy()
    hi = points[:, 1:].copy()
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.sum(weights[:, None, :] / (mid[:, :, None] - points[:, None, :]), axis=-1)
        right = f > 0
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)
    return 0.5 * (lo + hi)


def sample_gibbs_pattern(
    shape: PatternShape, top: Sequence[float], rng: RngLike, size: Optional[int] = None
) -> Union[GTPattern, np.ndarray]:
    """
    Fill every level below ``top`` uniformly on the subordinate polytope.

    Each level's marginal is a Dixon-Anderson law given the level above, so the
    pattern is built top-down from exact draws.
    """
    if not isinstance(shape, (LaguerreShape, JacobiShape)):
        raise ShapeError(f"no Gibbs measure defined for {type(shape).__name__}")
    top = np.asarray(top, dtype=float)
    if top.shape[-1] != shape.level_sizes[-1]:
        raise ShapeError(f"top row needs {shape.level_sizes[-1]} entries, got {top.shape[-1]}")
    if top.size > 1 and np.any(np.diff(top, axis=-1) <= 0):
        raise ValidationError("top row must be strictly ascending")
    if np.any(top < 0) or np.any(top > shape.upper_cap):
        raise ValidationError(f"top row outside [0, {shape.upper_cap}]")

    gen = as_generator(rng)
    draws = 1 if size is None else size
    flat = np.empty((draws, shape.n_coords))
    flat[:, shape.level_slice(shape.n_levels)] = np.broadcast_to(top, (draws, top.shape[-1]))
    for n in range(shape.n_levels, 1, -1):
        y = flat[:, shape.level_slice(n)]
        if isinstance(shape, LaguerreShape) and n > shape.p:
            points = np.concatenate([np.zeros((draws, 1)), y], axis=1)
            exponents = np.concatenate([[n - shape.p], np.ones(shape.p)])
        else:
            points = y
            exponents = np.ones(y.shape[1])
        flat[:, shape.level_slice(n - 1)] = sample_dixon_anderson(points, exponents, gen)
    flat = _enforce_cone(shape, flat)
    return GTPattern.from_flat(shape, flat[0]) if size is None else flat
