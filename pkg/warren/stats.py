"""Empirical distribution comparisons and summary statistics."""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import stats as sps

from .errors import ParameterError, ShapeError
from .sder_engine import PathEnsemble


@dataclass(frozen=True)
class EmpiricalSample:
    """Draws of sorted d-tuples, one row per draw."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ShapeError(f"expected (draws, d) values, got shape {values.shape}")
        if values.shape[1] > 1 and np.any(np.diff(values, axis=1) < 0):
            raise ShapeError("every draw must be sorted ascending")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_ensemble(
        cls, ensemble: PathEnsemble, level: int, record: int = -1
    ) -> "EmpiricalSample":
        return cls(ensemble.level(level, record))

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    def coordinate(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def trace(self) -> np.ndarray:
        return self.values.sum(axis=1)


@dataclass(frozen=True)
class KSReport:
    statistic: float
    n_a: int
    n_b: int
    coordinate: Optional[int] = None


def ks_two_sample(
    a: Sequence[float], b: Sequence[float], coordinate: Optional[int] = None
) -> KSReport:
    """Sup-distance between the empirical CDFs of ``a`` and ``b``."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ParameterError("KS statistic needs two nonempty samples")
    result = sps.ks_2samp(a, b)
    return KSReport(float(result.statistic), a.size, b.size, coordinate)


def compare_coordinates(sim: EmpiricalSample, oracle: EmpiricalSample) -> List[KSReport]:
    """One KS report per coordinate of two samples of equal dimension."""
    if sim.dimension != oracle.dimension:
        raise ShapeError(f"dimensions differ: {sim.dimension} vs {oracle.dimension}")
    return [
        ks_two_sample(sim.coordinate(j), oracle.coordinate(j), coordinate=j)
        for j in range(sim.dimension)
    ]


class Moments(NamedTuple):
    mean: float
    variance: float
    skewness: float
    kurtosis: float


def moments(sample: Sequence[float]) -> Moments:
    """
    Mean, unbiased variance, skewness and excess kurtosis.

    Skewness and kurtosis come from the biased central moments and are 0 for a
    constant sample.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise ParameterError("moments need a nonempty sample")
    mean = float(x.mean())
    variance = float(x.var(ddof=1)) if x.size > 1 else 0.0
    if np.ptp(x) == 0:
        return Moments(mean, variance, 0.0, 0.0)
    return Moments(mean, variance, float(sps.skew(x)), float(sps.kurtosis(x)))


def ecdf(values: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Sorted values and the ECDF evaluated at them."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    return x, np.arange(1, x.size + 1) / x.size


def histogram_density(values: Sequence[float], bins: int = 50) -> Tuple[np.ndarray, np.ndarray]:
    """Bin centres and normalized histogram heights."""
    heights, edges = np.histogram(np.asarray(values, dtype=float).ravel(), bins=bins, density=True)
    return 0.5 * (edges[:-1] + edges[1:]), heights


@dataclass
class GapReport:
    """
    Partner-gap minima of an ensemble.

    ``path_min[:, k]`` is the smallest gap of pair k along each path and
    ``second_min`` the smallest second-smallest simultaneous gap (inf when
    there are fewer than two pairs).
    """

    pairs: List[Tuple[str, str]]
    path_min: np.ndarray
    second_min: np.ndarray


def _pair_gaps(
    ensemble: PathEnsemble, include_failed: bool
) -> Tuple[List[Tuple[str, str]], np.ndarray]:
    shape = ensemble.shape
    labels = [f"l[{n}][{i + 1}]" for n, i in shape.iter_particles()]
    pairs = list(shape.partner_pairs)
    positions = ensemble.positions if include_failed else ensemble.positions[~ensemble.failed]
    if not pairs:
        return [], np.zeros(positions.shape[:2] + (0,))
    a = np.array([pair[0] for pair in pairs])
    b = np.array([pair[1] for pair in pairs])
    gaps = positions[..., b] - positions[..., a]
    return [(labels[i], labels[j]) for i, j in pairs], gaps


def min_gap_statistics(ensemble: PathEnsemble, include_failed: bool = False) -> GapReport:
    """Per-pair path-minimum gaps plus the double-collision proxy."""
    if ensemble.n_records < 1:
        raise ParameterError("ensemble has no recorded times")
    names, gaps = _pair_gaps(ensemble, include_failed)
    path_min = gaps.min(axis=1) if gaps.shape[-1] else np.zeros((gaps.shape[0], 0))
    if gaps.shape[-1] >= 2:
        second = np.sort(gaps, axis=-1)[..., 1].min(axis=1)
    else:
        second = np.full(gaps.shape[0], math.inf)
    return GapReport(names, path_min, second)


def double_collision_fraction(ensemble: PathEnsemble, eps: float) -> Tuple[float, float]:
    """
    Fraction of recorded (path, time) cells with two partner gaps below ``eps``.

    Returns:
        (fraction, binomial standard error over the cells)
    """
    _, gaps = _pair_gaps(ensemble, include_failed=False)
    if gaps.shape[-1] < 2:
        return 0.0, 0.0
    close = np.sum(gaps < eps, axis=-1) >= 2
    cells = close.size
    fraction = float(close.mean())
    return fraction, math.sqrt(fraction * (1.0 - fraction) / cells)
