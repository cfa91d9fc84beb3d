import math

import numpy as np
import pytest

from warren.densities import (
    da_kernel_level,
    full_gibbs_log_density,
    log_jacobi_invariant,
    log_jacobi_warren_invariant,
    log_laguerre_entrance,
    log_warren_entrance,
)
from warren.errors import ParameterError, ShapeError
from warren.gt_core import GTPattern, JacobiShape, LaguerreShape, LeftEdgeShape, log_gt_volume

from .mc import assert_within


class TestEntranceLaws:
    @pytest.mark.parametrize(
        "lam, n, p, t, expected",
        [
            ((2.0,), 1, 1, 1.0, -1.0),
            ((1.0,), 1, 3, 0.5, -1.0),
            ((1.0, 3.0), 2, 2, 1.0, 2.0 * math.log(2.0) - 2.0),
        ],
    )
    def test_laguerre_values(self, lam, n, p, t, expected):
        assert log_laguerre_entrance(lam, n, p, t) == pytest.approx(expected)

    def test_laguerre_needs_positive_time(self):
        with pytest.raises(ParameterError):
            log_laguerre_entrance((1.0,), 1, 1, 0.0)

    def test_laguerre_off_support(self):
        assert log_laguerre_entrance((-1.0,), 1, 2, 1.0) == -math.inf
        assert log_laguerre_entrance((3.0, 1.0), 2, 2, 1.0) == -math.inf

    def test_laguerre_shape(self):
        with pytest.raises(ShapeError):
            log_laguerre_entrance((1.0, 2.0), 1, 3, 1.0)

    @pytest.mark.parametrize(
        "mu, n, p, q, expected",
        [
            ((0.3,), 1, 1, 1, 0.0),
            ((0.5,), 1, 2, 1, math.log(0.5)),
            ((0.25, 0.75), 2, 2, 2, 2.0 * math.log(0.5)),
        ],
    )
    def test_jacobi_values(self, mu, n, p, q, expected):
        assert log_jacobi_invariant(mu, n, p, q) == pytest.approx(expected)

    def test_jacobi_level_too_large(self):
        with pytest.raises(ParameterError):
            log_jacobi_invariant((0.2, 0.4, 0.6), 3, 2, 4)

    def test_jacobi_off_support(self):
        assert log_jacobi_invariant((1.2,), 1, 2, 2) == -math.inf


class TestWarrenLaws:
    def test_single_particle(self):
        pattern = GTPattern(LaguerreShape(1, 1), ((2.0,),))
        assert log_warren_entrance(pattern, 1.0) == pytest.approx(-1.0)

    def test_depends_on_top_only(self):
        shape = LaguerreShape(2, 2)
        a = log_warren_entrance(GTPattern(shape, ((1.5,), (1.0, 3.0))), 1.0)
        b = log_warren_entrance(GTPattern(shape, ((2.5,), (1.0, 3.0))), 1.0)
        assert a == pytest.approx(math.log(2.0) - 2.0)
        assert a == b

    def test_off_support(self):
        pattern = GTPattern(LaguerreShape(2, 2), ((3.5,), (1.0, 3.0)))
        assert log_warren_entrance(pattern, 1.0) == -math.inf

    def test_requires_laguerre(self):
        with pytest.raises(ShapeError):
            log_warren_entrance(GTPattern(LeftEdgeShape(1), ((1.0,),)), 1.0)

    def test_marginal_matches_level_law(self, gen):
        m, p, t = 3, 2, 0.7
        shape = LaguerreShape(m, p)
        diffs = []
        for _ in range(100):
            top = np.sort(gen.uniform(0.1, 5.0, p))
            filling = GTPattern(shape, ((top[0],), tuple(top), tuple(top)))
            marginal = log_warren_entrance(filling, t) + log_gt_volume(top, m, p)
            diffs.append(marginal - log_laguerre_entrance(top, m, p, t))
        assert np.var(diffs) < 1e-18

    def test_jacobi_invariant(self):
        assert log_jacobi_warren_invariant(GTPattern(JacobiShape(1, 1, 1), ((0.3,),))) == 0.0
        pattern = GTPattern(JacobiShape(2, 2, 2), ((0.5,), (0.25, 0.75)))
        assert log_jacobi_warren_invariant(pattern) == pytest.approx(math.log(0.5))
        bad = GTPattern(JacobiShape(2, 2, 2), ((0.9,), (0.25, 0.75)))
        assert log_jacobi_warren_invariant(bad) == -math.inf


class TestKernel:
    @pytest.mark.parametrize(
        "y, x, n, p, expected",
        [
            ((0.0, 2.0), (1.0,), 2, 2, 0.5),
            ((0.0, 2.0), (3.0,), 2, 2, 0.0),
            ((2.0,), (1.0,), 2, 1, 0.5),
        ],
    )
    def test_values(self, y, x, n, p, expected):
        assert da_kernel_level(y, x, n, p) == pytest.approx(expected)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            da_kernel_level((1.0, 2.0), (1.0, 1.5), 2, 2)

    def test_integrates_to_one(self, gen):
        n, p = 3, 2
        y = np.array([0.7, 2.9])
        lo, hi = LaguerreShape(n, p).sub_level_bounds(n, y)
        n_mc = 20_000
        x = lo + (hi - lo) * gen.random((n_mc, lo.size))
        values = np.prod(hi - lo) * np.array([da_kernel_level(y, row, n, p) for row in x])
        assert_within(values.mean(), 1.0, values.std(ddof=1) / math.sqrt(n_mc))


class TestGibbs:
    def test_unit_volume(self):
        pattern = GTPattern(LaguerreShape(2, 2), ((0.5,), (0.0, 1.0)))
        assert full_gibbs_log_density(pattern) == pytest.approx(0.0)

    def test_rank_one(self):
        pattern = GTPattern(LaguerreShape(2, 1), ((1.0,), (2.0,)))
        assert full_gibbs_log_density(pattern) == pytest.approx(-math.log(2.0))

    def test_invalid_filling(self):
        pattern = GTPattern(LaguerreShape(2, 2), ((1.5,), (0.0, 1.0)))
        assert full_gibbs_log_density(pattern) == -math.inf

    def test_jacobi(self):
        pattern = GTPattern(JacobiShape(2, 2, 2), ((0.5,), (0.25, 0.75)))
        assert full_gibbs_log_density(pattern) == pytest.approx(math.log(2.0))


def _resorted(values, gen):
    return tuple(np.sort(gen.permutation(np.asarray(values, dtype=float))))


def _resorted_pattern(pattern, gen):
    return GTPattern(pattern.shape, tuple(_resorted(level, gen) for level in pattern.levels))


class TestCanonicalInput:
    """Shuffling an input and sorting it again leaves every density unchanged."""

    @pytest.mark.parametrize("lam, n, p", [((0.4, 1.1, 2.5), 3, 3), ((0.2, 3.0), 4, 2)])
    def test_laguerre_entrance(self, gen, lam, n, p):
        expected = log_laguerre_entrance(lam, n, p, 0.8)
        assert log_laguerre_entrance(_resorted(lam, gen), n, p, 0.8) == expected

    def test_jacobi_invariant(self, gen):
        mu = (0.2, 0.5, 0.7)
        assert log_jacobi_invariant(_resorted(mu, gen), 3, 3, 4) == log_jacobi_invariant(
            mu, 3, 3, 4
        )

    @pytest.mark.parametrize(
        "pattern",
        [
            GTPattern(LaguerreShape(2, 2), ((1.5,), (1.0, 3.0))),
            GTPattern(LaguerreShape(3, 2), ((0.8,), (0.5, 1.5), (1.0, 2.0))),
        ],
    )
    def test_warren_entrance(self, gen, pattern):
        expected = log_warren_entrance(pattern, 1.3)
        assert log_warren_entrance(_resorted_pattern(pattern, gen), 1.3) == expected

    def test_jacobi_warren_invariant(self, gen):
        pattern = GTPattern(JacobiShape(3, 3, 3), ((0.4,), (0.3, 0.6), (0.2, 0.5, 0.8)))
        expected = log_jacobi_warren_invariant(pattern)
        assert log_jacobi_warren_invariant(_resorted_pattern(pattern, gen)) == expected

    @pytest.mark.parametrize(
        "y, x, n, p", [((0.7, 2.9), (0.5, 1.5), 3, 2), ((0.5, 1.0, 2.0), (0.7, 1.5), 3, 3)]
    )
    def test_kernel(self, gen, y, x, n, p):
        expected = da_kernel_level(y, x, n, p)
        assert expected > 0.0
        assert da_kernel_level(_resorted(y, gen), _resorted(x, gen), n, p) == expected
