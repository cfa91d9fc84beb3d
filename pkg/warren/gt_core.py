"""
Gelfand-Tsetlin pattern shapes, interlacing validation, Vandermonde functionals
and volumes of the subordinate polytopes.

A pattern is stored level by level, level 1 first, each level ascending. For
batched work the levels are concatenated into one flat coordinate vector; every
shape knows the offsets of its levels and the list of pairwise constraints
``x[a] <= x[b]`` that make up its cone, so one validator and one stepper serve
every family.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from .errors import ParameterError, ShapeError

# (lower partner, upper partner) indices on the previous level, None when absent
Partners = Tuple[Optional[int], Optional[int]]


def _check_positive(name: str, value: int) -> None:
    if int(value) != value or value < 1:
        raise ParameterError(f"{name} must be a positive integer, got {value!r}")


class PatternShape(ABC):
    """Common interface of every multilevel state space."""

    family: str = ""

    @property
    @abstractmethod
    def level_sizes(self) -> Tuple[int, ...]:
        """Number of particles on each level, level 1 first."""

    @property
    @abstractmethod
    def upper_cap(self) -> float:
        """Global upper bound of every coordinate (``inf`` or 1)."""

    @abstractmethod
    def partners(self, n: int, i: int) -> Partners:
        """Reflection partners on level ``n - 1`` of particle ``i`` (0-based) on level ``n``."""

    @property
    def n_levels(self) -> int:
        return len(self.level_sizes)

    def particle_count(self, n: int) -> int:
        if not 1 <= n <= self.n_levels:
            raise ParameterError(f"level {n} outside 1..{self.n_levels}")
        return self.level_sizes[n - 1]

    @cached_property
    def offsets(self) -> Tuple[int, ...]:
        out = [0]
        for size in self.level_sizes:
            out.append(out[-1] + size)
        return tuple(out)

    @property
    def n_coords(self) -> int:
        return self.offsets[-1]

    @property
    def free_coordinates(self) -> int:
        """Coordinates below the top level."""
        return self.n_coords - self.level_sizes[-1]

    def level_slice(self, n: int) -> slice:
        return slice(self.offsets[n - 1], self.offsets[n])

    def flat_index(self, n: int, i: int) -> int:
        return self.offsets[n - 1] + i

    def iter_particles(self) -> Iterator[Tuple[int, int]]:
        for n, size in enumerate(self.level_sizes, start=1):
            for i in range(size):
                yield n, i

    @cached_property
    def partner_table(self) -> Tuple[Tuple[int, Optional[int], Optional[int]], ...]:
        """Flat (index, lower partner index, upper partner index) per particle."""
        rows = []
        for n, i in self.iter_particles():
            lower, upper = self.partners(n, i) if n > 1 else (None, None)
            rows.append(
                (
                    self.flat_index(n, i),
                    None if lower is None else self.flat_index(n - 1, lower),
                    None if upper is None else self.flat_index(n - 1, upper),
                )
            )
        return tuple(rows)

    @cached_property
    def constraint_pairs(self) -> Tuple[Tuple[int, int], ...]:
        """Flat pairs (a, b) with ``x[a] <= x[b]`` on the cone."""
        pairs = set()
        for n, size in enumerate(self.level_sizes, start=1):
            for i in range(size - 1):
                pairs.add((self.flat_index(n, i), self.flat_index(n, i + 1)))
        for idx, lower, upper in self.partner_table:
            if lower is not None:
                pairs.add((lower, idx))
            if upper is not None:
                pairs.add((idx, upper))
        return tuple(sorted(pairs))

    @cached_property
    def partner_pairs(self) -> Tuple[Tuple[int, int], ...]:
        """Pairs whose equality is a collision of the reflected dynamics."""
        pairs = set()
        for idx, lower, upper in self.partner_table:
            if lower is not None:
                pairs.add((lower, idx))
            if upper is not None:
                pairs.add((idx, upper))
        if not pairs and self.n_levels == 1:
            size = self.level_sizes[0]
            pairs = {(i, i + 1) for i in range(size - 1)}
        return tuple(sorted(pairs))

    def sub_level_bounds(self, n: int, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Box of admissible level ``n - 1`` positions given level ``n`` values ``y``.

        Args:
            n: Level of ``y`` (at least 2)
            y: Array of shape (..., level_sizes[n-1])

        Returns:
            (lo, hi) arrays of shape (..., level_sizes[n-2])
        """
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.particle_count(n):
            raise ShapeError(
                f"level {n} holds {self.particle_count(n)} particles, got {y.shape[-1]}"
            )
        below = self.particle_count(n - 1)
        lo = np.zeros(y.shape[:-1] + (below,))
        hi = np.full(y.shape[:-1] + (below,), self.upper_cap)
        for i in range(y.shape[-1]):
            lower, upper = self.partners(n, i)
            if lower is not None:
                hi[..., lower] = np.minimum(hi[..., lower], y[..., i])
            if upper is not None:
                lo[..., upper] = np.maximum(lo[..., upper], y[..., i])
        return lo, hi


@dataclass(frozen=True)
class LaguerreShape(PatternShape):
    """Positive cone of rank ``p`` with ``m`` levels; level n holds min(n, p) particles."""

    m: int
    p: int
    family = "laguerre"

    def __post_init__(self) -> None:
        _check_positive("m", self.m)
        _check_positive("p", self.p)

    @property
    def level_sizes(self) -> Tuple[int, ...]:
        return tuple(min(n, self.p) for n in range(1, self.m + 1))

    @property
    def upper_cap(self) -> float:
        return math.inf

    def partners(self, n: int, i: int) -> Partners:
        if n <= 1:
            return None, None
        if n <= self.p:
            return (i - 1 if i >= 1 else None), (i if i <= n - 2 else None)
        return i, (i + 1 if i + 1 < self.p else None)


@dataclass(frozen=True)
class JacobiShape(PatternShape):
    """The [0,1] polytope with ``k`` levels; level n holds n particles."""

    p: int
    q: int
    k: int
    family = "jacobi"

    def __post_init__(self) -> None:
        _check_positive("p", self.p)
        _check_positive("q", self.q)
        _check_positive("k", self.k)
        if self.k > min(self.p, self.q):
            raise ParameterError(
                f"Jacobi level count k={self.k} exceeds min(p, q)={min(self.p, self.q)}"
            )

    @property
    def level_sizes(self) -> Tuple[int, ...]:
        return tuple(range(1, self.k + 1))

    @property
    def upper_cap(self) -> float:
        return 1.0

    def partners(self, n: int, i: int) -> Partners:
        if n <= 1:
            return None, None
        return (i - 1 if i >= 1 else None), (i if i <= n - 2 else None)


@dataclass(frozen=True)
class LeftEdgeShape(PatternShape):
    """Smallest particle of levels 1..p; each sits below the one on the previous level."""

    p: int
    family = "left-edge"

    def __post_init__(self) -> None:
        _check_positive("p", self.p)

    @property
    def level_sizes(self) -> Tuple[int, ...]:
        return (1,) * self.p

    @property
    def upper_cap(self) -> float:
        return math.inf

    def partners(self, n: int, i: int) -> Partners:
        if n <= 1:
            return None, None
        return None, 0


@dataclass(frozen=True)
class SpectrumShape(PatternShape):
    """A single ordered level, the state space of an eigenvalue process."""

    count: int
    cap: float = math.inf
    family = "spectrum"

    def __post_init__(self) -> None:
        _check_positive("count", self.count)

    @property
    def level_sizes(self) -> Tuple[int, ...]:
        return (self.count,)

    @property
    def upper_cap(self) -> float:
        return self.cap

    def partners(self, n: int, i: int) -> Partners:
        return None, None


@dataclass(frozen=True)
class GTPattern:
    """One pattern: ``levels[n-1][i]`` is particle i+1 on level n."""

    shape: PatternShape
    levels: Tuple[Tuple[float, ...], ...]

    def __post_init__(self) -> None:
        levels = tuple(tuple(float(v) for v in level) for level in self.levels)
        object.__setattr__(self, "levels", levels)
        sizes = tuple(len(level) for level in levels)
        if sizes != self.shape.level_sizes:
            raise ShapeError(
                f"level sizes {sizes} do not match shape sizes {self.shape.level_sizes}"
            )

    @classmethod
    def from_flat(cls, shape: PatternShape, flat: Sequence[float]) -> "GTPattern":
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (shape.n_coords,):
            raise ShapeError(f"expected {shape.n_coords} coordinates, got {flat.shape}")
        return cls(
            shape,
            tuple(tuple(flat[shape.level_slice(n)]) for n in range(1, shape.n_levels + 1)),
        )

    def flat(self) -> np.ndarray:
        return np.array([v for level in self.levels for v in level], dtype=float)

    def level(self, n: int) -> Tuple[float, ...]:
        return self.levels[n - 1]

    @property
    def top(self) -> Tuple[float, ...]:
        return self.levels[-1]


# ---------------------------------------------------------------------
# Vandermonde functionals
# ---------------------------------------------------------------------


def vandermonde(x: Sequence[float]) -> np.ndarray:
    """
    Product of x_j - x_i over i < j along the last axis.

    Positive for ascending input; 1 for fewer than two entries.
    """
    x = np.asarray(x, dtype=float)
    size = x.shape[-1] if x.ndim else 1
    if size < 2:
        return np.ones(x.shape[:-1]) if x.ndim > 1 else np.float64(1.0)
    i, j = np.triu_indices(size, k=1)
    return np.prod(x[..., j] - x[..., i], axis=-1)


def log_vandermonde(x: Sequence[float]) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    size = x.shape[-1] if x.ndim else 1
    if size < 2:
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else np.float64(0.0)
    i, j = np.triu_indices(size, k=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sum(np.log(x[..., j] - x[..., i]), axis=-1)


def modified_vandermonde(x: Sequence[float], m: int, p: int) -> np.ndarray:
    """Vandermonde times prod x_i^{(m-p)_+}; ``x`` holds min(m, p) entries."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != min(m, p):
        raise ShapeError(f"expected {min(m, p)} entries for m={m}, p={p}, got {x.shape[-1]}")
    return vandermonde(x) * np.prod(x ** max(m - p, 0), axis=-1)


def log_modified_vandermonde(x: Sequence[float], m: int, p: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != min(m, p):
        raise ShapeError(f"expected {min(m, p)} entries for m={m}, p={p}, got {x.shape[-1]}")
    exponent = max(m - p, 0)
    with np.errstate(divide="ignore"):
        weights = exponent * np.sum(np.log(x), axis=-1) if exponent else 0.0
    return log_vandermonde(x) + weights


def log_superfactorial(n: int) -> float:
    """log of n! (n-1)! ... 1!, zero for n <= 0."""
    if n <= 0:
        return 0.0
    return float(np.sum(gammaln(np.arange(2, n + 2))))


def log_gt_volume(top_row: Sequence[float], m: int, p: int) -> np.ndarray:
    return (
        log_modified_vandermonde(top_row, m, p)
        + log_superfactorial(max(m - p - 1, 0))
        - log_superfactorial(m - 1)
    )


def gt_volume(top_row: Sequence[float], m: int, p: int) -> np.ndarray:
    """Volume of the Laguerre patterns with ``m`` levels below ``top_row``."""
    scale = math.exp(log_superfactorial(max(m - p - 1, 0)) - log_superfactorial(m - 1))
    return modified_vandermonde(top_row, m, p) * scale


def jacobi_gt_volume(top_row: Sequence[float]) -> np.ndarray:
    """Volume of the classical triangular polytope below ``top_row`` (k = len(top_row))."""
    top_row = np.asarray(top_row, dtype=float)
    k = top_row.shape[-1]
    return vandermonde(top_row) * math.exp(-log_superfactorial(k - 1))


# ---------------------------------------------------------------------
# Interlacing validation
# ---------------------------------------------------------------------


def interlacing_violations(
    shape: PatternShape, positions: np.ndarray, tol: float = 0.0
) -> np.ndarray:
    """
    Per-row violation mask for flat coordinates.

    Args:
        shape: Shape of the patterns
        positions: Array (..., shape.n_coords)
        tol: Slack allowed on every inequality

    Returns:
        Boolean array (...) true where some cone inequality fails
    """
    x = np.asarray(positions, dtype=float)
    if x.shape[-1] != shape.n_coords:
        raise ShapeError(f"expected {shape.n_coords} coordinates, got {x.shape[-1]}")
    bad = np.any(np.isnan(x), axis=-1)
    bad |= np.any(x < -tol, axis=-1)
    if math.isfinite(shape.upper_cap):
        bad |= np.any(x > shape.upper_cap + tol, axis=-1)
    pairs = shape.constraint_pairs
    if pairs:
        a = np.array([pair[0] for pair in pairs])
        b = np.array([pair[1] for pair in pairs])
        bad |= np.any(x[..., a] > x[..., b] + tol, axis=-1)
    return bad


def validate_interlacing(
    pattern: GTPattern, tol: float = 0.0, strict_top: bool = False
) -> bool:
    """
    True iff every cone inequality of the pattern's shape holds.

    Inequalities are non-strict up to ``tol``; ``strict_top`` additionally
    requires distinct particles on the top level.
    """
    flat = pattern.flat()
    if bool(interlacing_violations(pattern.shape, flat, tol)):
        return False
    if strict_top:
        top = np.asarray(pattern.top)
        if top.size > 1 and np.any(np.diff(top) <= 0):
            return False
    return True


def describe_violations(pattern: GTPattern, tol: float = 0.0) -> List[str]:
    """Human-readable list of the inequalities a pattern breaks."""
    shape = pattern.shape
    flat = pattern.flat()
    labels = [f"l[{n}][{i + 1}]" for n, i in shape.iter_particles()]
    problems = []
    for idx, value in enumerate(flat):
        if not np.isfinite(value):
            problems.append(f"{labels[idx]} is not finite")
        elif value < -tol:
            problems.append(f"{labels[idx]}={value} < 0")
        elif value > shape.upper_cap + tol:
            problems.append(f"{labels[idx]}={value} > {shape.upper_cap}")
    for a, b in shape.constraint_pairs:
        if flat[a] > flat[b] + tol:
            problems.append(f"{labels[a]}={flat[a]} > {labels[b]}={flat[b]}")
    return problems
