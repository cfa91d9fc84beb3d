import math

import numpy as np
import pytest
from scipy import stats as sps

from warren.errors import ParameterError, ValidationError
from warren.oracles import RngStream
from warren.rbm_quadrant import (
    RBM_TYPES,
    RBMSpec,
    builtin_spec,
    corner_hit_stats,
    corner_ladder,
    simulate_gap_process,
    solve_skorokhod_step,
)

from .mc import assert_within


class TestSpecs:
    @pytest.mark.parametrize("tag", RBM_TYPES)
    def test_builtin(self, tag):
        spec = builtin_spec(tag)
        assert spec.tag == tag
        np.testing.assert_allclose(np.diag(spec.reflection), [1.0, 1.0])

    def test_unknown_type(self):
        with pytest.raises(ParameterError):
            builtin_spec("E")

    def test_covariance_must_be_positive(self):
        with pytest.raises(ValidationError):
            RBMSpec("bad", np.array([[1.0, 2.0], [2.0, 1.0]]), np.eye(2))

    def test_reflection_needs_unit_diagonal(self):
        with pytest.raises(ValidationError):
            RBMSpec("bad", np.eye(2), np.array([[2.0, 0.0], [0.0, 1.0]]))


class TestSkorokhod:
    def test_normal_reflection(self):
        d_l = solve_skorokhod_step(np.array([[-0.5, 0.3]]), np.eye(2))
        np.testing.assert_allclose(d_l, [[0.5, 0.0]])

    def test_oblique_push_into_second_face(self):
        reflection = np.array([[1.0, 0.0], [-1.0, 1.0]])
        y = np.array([[-0.5, 0.2]])
        d_l = solve_skorokhod_step(y, reflection)
        np.testing.assert_allclose(d_l, [[0.5, 0.3]])
        np.testing.assert_allclose(y + d_l @ reflection.T, [[0.0, 0.0]], atol=1e-15)

    def test_interior_untouched(self):
        d_l = solve_skorokhod_step(np.array([[0.1, 0.3]]), builtin_spec("C1").reflection)
        assert not d_l.any()


class TestGapProcess:
    def test_frozen_noise(self):
        paths = simulate_gap_process(
            builtin_spec("A"), (1.0, 2.0), 0.01, 1.0, RngStream(0), n_paths=3, noise_scale=0.0
        )
        assert paths.z.shape == (3, 101, 2)
        np.testing.assert_array_equal(paths.z, np.broadcast_to([1.0, 2.0], paths.z.shape))
        assert not paths.pushing.any()

    @pytest.mark.parametrize("tag", ["B1", "C2", "D"])
    def test_quadrant_and_pushing(self, tag):
        paths = simulate_gap_process(
            builtin_spec(tag), (0.1, 0.1), 1e-3, 0.5, RngStream(1), n_paths=200
        )
        assert np.all(paths.z >= 0)
        assert np.all(np.diff(paths.pushing, axis=1) >= 0)

    def test_reflected_marginal_mean(self):
        # each coordinate of type A is a reflected BM with variance 2: Z_T ~ |1 + W_T|
        paths = simulate_gap_process(
            builtin_spec("A"), (1.0, 1.0), 1e-4, 1.0, RngStream(2), n_paths=2000
        )
        final = paths.z[:, -1, 0]
        sigma = math.sqrt(2.0)
        expected = sigma * math.sqrt(2.0 / math.pi) * math.exp(-1.0 / (2.0 * sigma**2))
        expected += 1.0 - 2.0 * sps.norm.cdf(-1.0 / sigma)
        assert_within(final.mean(), expected, final.std(ddof=1) / math.sqrt(final.size))

    @pytest.mark.parametrize("tag, rho", [("A", -0.5), ("D", 0.0)])
    def test_increment_correlation(self, tag, rho):
        paths = simulate_gap_process(
            builtin_spec(tag), (50.0, 50.0), 1e-2, 1.0, RngStream(3), n_paths=4000
        )
        moves = paths.z[:, -1] - 50.0
        assert np.corrcoef(moves.T)[0, 1] == pytest.approx(rho, abs=0.08)

    def test_invalid_arguments(self):
        with pytest.raises(ParameterError):
            simulate_gap_process(builtin_spec("A"), (-1.0, 1.0), 0.01, 1.0, RngStream(0))
        with pytest.raises(ParameterError):
            simulate_gap_process(builtin_spec("A"), (1.0, 1.0), 0.0, 1.0, RngStream(0))


class TestCornerStats:
    @pytest.fixture(scope="class")
    def paths(self):
        return simulate_gap_process(
            builtin_spec("C1"), (0.5, 0.5), 1e-3, 1.0, RngStream(4), n_paths=500
        )

    def test_extremes(self, paths):
        assert corner_hit_stats(paths, 0.0).fraction == 0.0
        assert corner_hit_stats(paths, 1e6).fraction == 1.0

    def test_ladder_is_monotone(self, paths):
        ladder = corner_ladder(builtin_spec("C1"), [0.2, 0.05, 0.01], 0, RngStream(0), paths=paths)
        fractions = [ladder[eps].fraction for eps in (0.01, 0.05, 0.2)]
        assert fractions == sorted(fractions)
        assert all(stats.n_paths == 500 for stats in ladder.values())

    def test_ladder_simulates(self):
        ladder = corner_ladder(builtin_spec("D"), [0.1], 50, RngStream(5), dt=1e-2, T=0.5)
        assert ladder[0.1].n_paths == 50

    def test_negative_eps(self, paths):
        with pytest.raises(ParameterError):
            corner_hit_stats(paths, -0.1)
