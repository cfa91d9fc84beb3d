import math

import numpy as np
import pytest

from warren.errors import ParameterError, ShapeError
from warren.gt_core import (
    GTPattern,
    JacobiShape,
    LaguerreShape,
    LeftEdgeShape,
    SpectrumShape,
    describe_violations,
    gt_volume,
    interlacing_violations,
    jacobi_gt_volume,
    log_gt_volume,
    modified_vandermonde,
    validate_interlacing,
    vandermonde,
)

from .mc import assert_within


class TestShapes:
    def test_laguerre_level_sizes(self):
        assert LaguerreShape(4, 2).level_sizes == (1, 2, 2, 2)
        assert LaguerreShape(3, 5).level_sizes == (1, 2, 3)

    def test_jacobi_level_count_bounded(self):
        assert JacobiShape(3, 3, 2).level_sizes == (1, 2)
        with pytest.raises(ParameterError):
            JacobiShape(2, 3, 3)

    def test_nonpositive_parameters_rejected(self):
        with pytest.raises(ParameterError):
            LaguerreShape(0, 2)
        with pytest.raises(ParameterError):
            LeftEdgeShape(0)

    def test_laguerre_partners_below_rank(self):
        shape = LaguerreShape(3, 3)
        assert shape.partners(3, 0) == (None, 0)
        assert shape.partners(3, 1) == (0, 1)
        assert shape.partners(3, 2) == (1, None)

    def test_laguerre_partners_above_rank(self):
        shape = LaguerreShape(4, 2)
        assert shape.partners(3, 0) == (0, 1)
        assert shape.partners(3, 1) == (1, None)

    def test_left_edge_chain(self):
        shape = LeftEdgeShape(3)
        assert shape.constraint_pairs == ((1, 0), (2, 1))

    def test_spectrum_pairs_are_consecutive(self):
        assert SpectrumShape(3).partner_pairs == ((0, 1), (1, 2))
        assert SpectrumShape(1).partner_pairs == ()

    def test_sub_level_bounds_above_rank(self):
        lo, hi = LaguerreShape(3, 2).sub_level_bounds(3, np.array([1.0, 4.0]))
        np.testing.assert_allclose(lo, [0.0, 1.0])
        np.testing.assert_allclose(hi, [1.0, 4.0])


class TestPattern:
    def test_size_mismatch(self):
        with pytest.raises(ShapeError):
            GTPattern(LaguerreShape(2, 2), ((0.5,), (0.2,)))

    def test_flat_round_trip(self):
        shape = LaguerreShape(3, 2)
        pattern = GTPattern(shape, ((1.0,), (0.5, 2.0), (0.2, 1.5)))
        assert GTPattern.from_flat(shape, pattern.flat()) == pattern
        assert pattern.top == (0.2, 1.5)


class TestVandermonde:
    @pytest.mark.parametrize(
        "x, expected", [((1.0, 3.0), 2.0), ((0.0, 1.0, 2.0), 2.0), ((5.0,), 1.0)]
    )
    def test_values(self, x, expected):
        assert vandermonde(x) == pytest.approx(expected)

    def test_batched(self):
        np.testing.assert_allclose(vandermonde(np.array([[1.0, 3.0], [0.0, 0.5]])), [2.0, 0.5])

    def test_swap_changes_sign(self):
        assert vandermonde((3.0, 1.0, 2.0)) == pytest.approx(-vandermonde((1.0, 3.0, 2.0)))

    @pytest.mark.parametrize(
        "x, m, p, expected",
        [((0.5,), 2, 1, 0.5), ((2.0,), 3, 1, 4.0), ((1.0, 3.0), 2, 5, 2.0)],
    )
    def test_modified(self, x, m, p, expected):
        assert modified_vandermonde(x, m, p) == pytest.approx(expected)

    def test_modified_length_mismatch(self):
        with pytest.raises(ShapeError):
            modified_vandermonde((1.0, 2.0), 3, 1)


class TestVolume:
    @pytest.mark.parametrize(
        "top, m, p, expected",
        [
            ((0.0, 1.0), 2, 2, 1.0),
            ((2.0,), 2, 1, 2.0),
            ((0.0, 1.0, 2.0), 3, 3, 1.0),
            ((2.0,), 3, 1, 2.0),
        ],
    )
    def test_values(self, top, m, p, expected):
        assert gt_volume(top, m, p) == pytest.approx(expected)

    def test_log_volume_matches(self):
        top = (0.5, 1.5, 4.0)
        assert math.exp(log_gt_volume(top, 4, 3)) == pytest.approx(gt_volume(top, 4, 3))

    def test_homogeneity(self):
        shape = LaguerreShape(4, 2)
        top = np.array([0.7, 2.3])
        ratio = gt_volume(2.0 * top, 4, 2) / gt_volume(top, 4, 2)
        assert ratio == pytest.approx(2.0**shape.free_coordinates)

    def test_jacobi_volume(self):
        # one free particle between 0.25 and 0.75
        assert jacobi_gt_volume((0.25, 0.75)) == pytest.approx(0.5)

    @pytest.mark.parametrize("m, p", [(2, 1), (3, 2), (3, 3), (4, 2)])
    def test_brute_force(self, gen, m, p):
        shape = LaguerreShape(m, p)
        top = np.sort(gen.uniform(0.2, 2.0, min(m, p)))
        n_mc = 200_000
        box = float(top[-1])
        flat = np.empty((n_mc, shape.n_coords))
        flat[:, : shape.free_coordinates] = gen.uniform(0.0, box, (n_mc, shape.free_coordinates))
        flat[:, shape.free_coordinates :] = top
        inside = ~interlacing_violations(shape, flat)
        scale = box**shape.free_coordinates
        estimate = scale * inside.mean()
        stderr = scale * inside.std(ddof=1) / math.sqrt(n_mc)
        assert_within(estimate, float(gt_volume(top, m, p)), stderr)


class TestValidation:
    def test_laguerre_examples(self):
        shape = LaguerreShape(2, 2)
        assert validate_interlacing(GTPattern(shape, ((0.5,), (0.2, 0.8))))
        assert not validate_interlacing(GTPattern(shape, ((0.9,), (0.2, 0.8))))

    def test_jacobi_cap(self):
        shape = JacobiShape(2, 2, 2)
        assert not validate_interlacing(GTPattern(shape, ((0.5,), (0.2, 1.1))))

    def test_touching_boundaries_allowed(self):
        shape = LaguerreShape(2, 2)
        assert validate_interlacing(GTPattern(shape, ((0.2,), (0.2, 0.8))))

    def test_strict_top(self):
        pattern = GTPattern(LaguerreShape(2, 2), ((0.5,), (0.5, 0.5)))
        assert validate_interlacing(pattern)
        assert not validate_interlacing(pattern, strict_top=True)

    def test_above_rank(self):
        shape = LaguerreShape(3, 2)
        good = GTPattern(shape, ((1.0,), (0.5, 2.0), (0.7, 2.5)))
        bad = GTPattern(shape, ((1.0,), (0.5, 2.0), (0.3, 2.5)))
        assert validate_interlacing(good)
        assert not validate_interlacing(bad)
        assert any("l[2][1]" in msg and "l[3][1]" in msg for msg in describe_violations(bad))

    def test_negative_and_nan(self):
        shape = SpectrumShape(2)
        mask = interlacing_violations(shape, np.array([[0.1, 0.2], [-0.1, 0.2], [np.nan, 1.0]]))
        assert mask.tolist() == [False, True, True]

    def test_tolerance(self):
        pattern = GTPattern(LaguerreShape(2, 2), ((0.8 + 1e-13,), (0.2, 0.8)))
        assert not validate_interlacing(pattern)
        assert validate_interlacing(pattern, tol=1e-12)
