import numpy as np
import pytest

from pathhmm.emissions import (
    B1_FLOOR,
    BmDriftEmission,
    EuclideanEmission,
    FbmDriftEmission,
    NonparametricEmission,
    OuEmission,
    fbm_gain,
    log_emission,
    ou_objective_and_gradient,
    reestimate_bm_drift,
    reestimate_euclidean,
    reestimate_fbm_drift,
    reestimate_nonparametric,
    reestimate_ou,
)
from pathhmm.errors import DimensionMismatch, NumericalError
from pathhmm.paths import Grid, Path
from pathhmm.simulate import sample_bm_drift, sample_ou

# Reference gamma-function values, frozen from standard tables.
GAMMA_TABLE = {
    0.75: 1.2254167024651776,
    1.2: 0.9181687423997606,
    1.4: 0.8872638175030753,
    1.5: 0.8862269254527580,
}

GRID = Grid(201)


def linear(c, grid=GRID):
    return Path(grid, c * grid.taus)


def rough_path(seed, grid=GRID, drift=0.0):
    return sample_bm_drift(drift, grid, seed)


def rough_paths(n, seed0=0, grid=GRID, drift=0.0):
    return [rough_path(seed0 + k, grid, drift) for k in range(n)]


class TestLogEmission:
    def test_bm_perfect_drift_match(self):
        assert BmDriftEmission(2.0).log_emission(linear(2.0)) == pytest.approx(0.0, abs=1e-12)

    def test_euclidean_scalar(self):
        e = EuclideanEmission(np.array([0.0]), np.array([[1.0]]))
        assert e.log_emission(np.array([2.0])) == pytest.approx(-2.0)

    def test_nonparametric_linear_vs_zero(self):
        e = NonparametricEmission(linear(0.0), order=1)
        assert e.log_emission(linear(1.0)) == pytest.approx(-0.5)

    def test_ou_reversion_term_survives_zero_path(self):
        e = OuEmission(0.0, 2.0)
        zero = Path(GRID, np.zeros(GRID.n_points))
        assert e.log_emission(zero) == pytest.approx(1.0)

    def test_fbm_at_half_matches_bm(self):
        p = rough_path(11, drift=1.5)
        bm = BmDriftEmission(1.5).log_emission(p)
        fbm = FbmDriftEmission(1.5, 0.5).log_emission(p)
        assert fbm == pytest.approx(bm, abs=1e-10)

    def test_nonpositive_families(self):
        # quadratic-form families never score above zero
        for seed in range(5):
            p = rough_path(seed)
            assert BmDriftEmission(seed - 2.0).log_emission(p) <= 0.0
            assert NonparametricEmission(linear(0.5), order=1).log_emission(p) <= 0.0
            assert FbmDriftEmission(1.0, 0.7).log_emission(p) <= 0.0
        rng = np.random.default_rng(0)
        e = EuclideanEmission(rng.normal(size=3), np.eye(3))
        assert e.log_emission(rng.normal(size=3)) <= 0.0

    def test_dispatch_helper(self):
        p = linear(2.0)
        assert log_emission(BmDriftEmission(2.0), p) == pytest.approx(0.0, abs=1e-12)

    def test_grid_mismatch_rejected(self):
        e = NonparametricEmission(linear(1.0, Grid(11)), order=1)
        with pytest.raises(DimensionMismatch):
            e.log_emission(linear(1.0, Grid(12)))

    def test_euclidean_dimension_mismatch(self):
        e = EuclideanEmission(np.zeros(2), np.eye(2))
        with pytest.raises(DimensionMismatch):
            e.log_emission(np.zeros(3))

    def test_euclidean_requires_symmetric_precision(self):
        with pytest.raises(ValueError):
            EuclideanEmission(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_ou_requires_positive_b1(self):
        with pytest.raises(ValueError):
            OuEmission(0.0, 0.0)


class TestReestimateEuclidean:
    def test_unweighted_mean(self):
        out = reestimate_euclidean([1.0, 1.0], [np.array([0.0]), np.array([2.0])])
        np.testing.assert_allclose(out, [1.0])

    def test_degenerate_weight(self):
        out = reestimate_euclidean([1.0, 0.0], [np.array([5.0]), np.array([9.0])])
        np.testing.assert_allclose(out, [5.0])

    def test_weighted_mean_by_hand(self):
        out = reestimate_euclidean([1.0, 3.0], [np.array([0.0]), np.array([4.0])])
        np.testing.assert_allclose(out, [3.0])

    def test_all_zero_weights_rejected(self):
        with pytest.raises(ValueError):
            reestimate_euclidean([0.0, 0.0], [np.array([1.0]), np.array([2.0])])


class TestReestimateBmDrift:
    def test_single_linear_path(self):
        assert reestimate_bm_drift([1.0], [linear(3.0)]) == pytest.approx(3.0)

    def test_two_endpoints(self):
        obs = [linear(2.0), linear(4.0)]
        assert reestimate_bm_drift([1.0, 1.0], obs) == pytest.approx(3.0)

    def test_weighted_by_hand(self):
        obs = [linear(1.0), linear(2.0), linear(6.0)]
        assert reestimate_bm_drift([2.0, 1.0, 1.0], obs) == pytest.approx(2.5)

    def test_equal_weights_is_sample_mean_of_endpoints(self):
        obs = rough_paths(7, seed0=20)
        endpoints = np.array([p.values[-1] for p in obs])
        assert reestimate_bm_drift(np.ones(7), obs) == pytest.approx(endpoints.mean(), abs=1e-12)


class TestOuObjective:
    def test_pure_drift_mismatch(self):
        c = 1.7
        u, _, _ = ou_objective_and_gradient(1e-8, 1e-8, [1.0], [linear(c)])
        assert u == pytest.approx(c * c / 2.0, rel=1e-6)

    def test_zero_path_constant_terms(self):
        zero = Path(GRID, np.zeros(GRID.n_points))
        u, _, _ = ou_objective_and_gradient(1.0, 1.0, [1.0], [zero])
        assert u == pytest.approx(0.0, abs=1e-12)

    def test_gradient_matches_central_differences(self):
        obs = [sample_ou(4.0, 1.0, GRID, seed) for seed in range(6)]
        weights = np.array([0.5, 1.0, 2.0, 0.1, 1.5, 0.7])
        b0, b1 = 1.3, 2.1
        h = 1e-5
        _, db0, db1 = ou_objective_and_gradient(b0, b1, weights, obs)
        up0, _, _ = ou_objective_and_gradient(b0 + h, b1, weights, obs)
        dn0, _, _ = ou_objective_and_gradient(b0 - h, b1, weights, obs)
        up1, _, _ = ou_objective_and_gradient(b0, b1 + h, weights, obs)
        dn1, _, _ = ou_objective_and_gradient(b0, b1 - h, weights, obs)
        assert db0 == pytest.approx((up0 - dn0) / (2 * h), rel=1e-5)
        assert db1 == pytest.approx((up1 - dn1) / (2 * h), rel=1e-5)


class TestReestimateOu:
    def test_parameter_recovery(self):
        # known-process check: rate 4, mean 2, T = 50 paths
        obs = [sample_ou(4.0, 2.0, GRID, 100 + k) for k in range(50)]
        b0, b1 = reestimate_ou(np.ones(50), obs)
        assert b0 / b1 == pytest.approx(2.0, abs=0.7)

    def test_first_order_conditions_at_optimum(self):
        obs = [sample_ou(3.0, -1.0, GRID, 200 + k) for k in range(8)]
        weights = np.linspace(0.2, 1.4, 8)
        b0, b1 = reestimate_ou(weights, obs)
        _, db0, db1 = ou_objective_and_gradient(b0, b1, weights, obs)
        assert abs(db0) < 1e-8 and abs(db1) < 1e-8

    def test_beats_random_probes(self):
        obs = [sample_ou(5.0, 0.5, GRID, 300 + k) for k in range(10)]
        weights = np.ones(10)
        b0, b1 = reestimate_ou(weights, obs)
        u_star, _, _ = ou_objective_and_gradient(b0, b1, weights, obs)
        rng = np.random.default_rng(17)
        for _ in range(100):
            pb0 = b0 + rng.normal() * 2.0
            pb1 = max(b1 + rng.normal() * 2.0, B1_FLOOR)
            u, _, _ = ou_objective_and_gradient(pb0, pb1, weights, obs)
            assert u >= u_star - 1e-12

    def test_constant_paths_are_degenerate(self):
        zero = Path(GRID, np.zeros(GRID.n_points))
        with pytest.raises(NumericalError):
            reestimate_ou([1.0, 1.0], [zero, zero])

    def test_clamped_b1_keeps_projected_gradient(self):
        # an explosive path makes the unconstrained b1 negative, forcing the clamp
        expo = Path(GRID, np.exp(3.0 * GRID.taus) - 1.0)
        obs = [expo, linear(2.0)]
        weights = np.array([1.0, 0.2])
        b0, b1 = reestimate_ou(weights, obs)
        assert b1 == B1_FLOOR
        _, db0, db1 = ou_objective_and_gradient(b0, b1, weights, obs)
        # with b1 pinned at the floor, b0 is still optimal and the b1
        # component of the gradient pushes against the bound
        assert abs(db0) < 1e-8
        assert db1 >= 0.0


class TestFbmGain:
    def test_brownian_limit(self):
        assert fbm_gain(0.5) == (0.0, 1.0)

    def test_rough_regime_against_gamma_table(self):
        exponent, prefactor = fbm_gain(0.3)
        assert exponent == pytest.approx(0.2)
        assert prefactor == pytest.approx(GAMMA_TABLE[1.2] / GAMMA_TABLE[1.4], rel=1e-12)

    def test_smooth_regime_against_gamma_table(self):
        exponent, prefactor = fbm_gain(0.75)
        assert exponent == pytest.approx(-0.25)
        assert prefactor == pytest.approx(
            0.5 * GAMMA_TABLE[0.75] / GAMMA_TABLE[1.5], rel=1e-12
        )

    @pytest.mark.parametrize("bad", [0.25, 0.2, 0.0, 1.0, 1.3, -0.5])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(ValueError):
            fbm_gain(bad)


class TestReestimateFbmDrift:
    def test_reduces_to_bm_at_half(self):
        rng = np.random.default_rng(4)
        for k in range(5):
            obs = rough_paths(6, seed0=400 + 10 * k)
            weights = rng.random(6) + 0.05
            fbm = reestimate_fbm_drift(weights, obs, 0.5)
            bm = reestimate_bm_drift(weights, obs)
            assert fbm == pytest.approx(bm, abs=1e-10)

    @pytest.mark.parametrize("hurst", [0.3, 0.45, 2 / 3, 0.9])
    def test_linear_path_closed_form(self, hurst):
        # For a path with constant slope c the estimate is c * G(2e+2)/G(e+2)
        # with e the signed gain exponent: the minimizer of the score, not c
        # itself (they only coincide at hurst = 1/2).  Checked against the
        # gamma function and against brute-force minimization below.
        import math

        c = 2.0
        exponent, _ = fbm_gain(hurst)
        expected = c * math.gamma(2 * exponent + 2) / math.gamma(exponent + 2)
        est = reestimate_fbm_drift([1.0], [linear(c)], hurst)
        assert est == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("hurst", [0.3, 0.8])
    def test_matches_brute_force_minimizer(self, hurst):
        obs = rough_paths(5, seed0=500, drift=-2.0)
        weights = np.array([1.0, 0.3, 2.0, 0.7, 1.1])
        est = reestimate_fbm_drift(weights, obs, hurst)

        def neg_score(c):
            e = FbmDriftEmission(c, hurst)
            return sum(w * -e.log_emission(p) for w, p in zip(weights, obs))

        grid = np.linspace(est - 2.0, est + 2.0, 4001)
        values = [neg_score(c) for c in grid]
        assert abs(grid[int(np.argmin(values))] - est) <= 2 * (grid[1] - grid[0])

    def test_degenerate_weight_uses_first_path_only(self):
        obs = rough_paths(4, seed0=600)
        weights = np.array([1.0, 0.0, 0.0, 0.0])
        est = reestimate_fbm_drift(weights, obs, 0.7)
        only = reestimate_fbm_drift([1.0], obs[:1], 0.7)
        assert est == pytest.approx(only, abs=1e-14)

    def test_continuous_in_hurst_across_half(self):
        obs = rough_paths(8, seed0=700, drift=3.0)
        weights = np.ones(8)
        center = reestimate_fbm_drift(weights, obs, 0.5)
        below = reestimate_fbm_drift(weights, obs, 0.49)
        above = reestimate_fbm_drift(weights, obs, 0.51)
        assert abs(below - center) <= 0.05 * abs(center)
        assert abs(above - center) <= 0.05 * abs(center)


class TestReestimateNonparametric:
    def test_symmetric_average_is_zero(self):
        out = reestimate_nonparametric([1.0, 1.0], [linear(1.0), linear(-1.0)])
        np.testing.assert_allclose(out.values, 0.0, atol=1e-15)

    def test_weighted_average_by_hand(self):
        out = reestimate_nonparametric([3.0, 1.0], [linear(0.0), linear(4.0)])
        np.testing.assert_allclose(out.values, GRID.taus, atol=1e-14)

    def test_single_nonzero_weight(self):
        obs = rough_paths(3, seed0=800)
        out = reestimate_nonparametric([0.0, 1.0, 0.0], obs)
        np.testing.assert_array_equal(out.values, obs[1].values)

    def test_result_in_pointwise_convex_hull(self):
        obs = rough_paths(5, seed0=900)
        weights = np.array([0.2, 1.0, 0.4, 0.9, 0.1])
        out = reestimate_nonparametric(weights, obs)
        stacked = np.stack([p.values for p in obs])
        assert np.all(out.values >= stacked.min(axis=0) - 1e-12)
        assert np.all(out.values <= stacked.max(axis=0) + 1e-12)

    def test_grid_mismatch_rejected(self):
        with pytest.raises(DimensionMismatch):
            reestimate_nonparametric([1.0, 1.0], [linear(1.0, Grid(5)), linear(1.0, Grid(6))])


class TestOptimalityAcrossFamilies:
    """The reestimated parameter minimizes the weighted negative log score."""

    def weighted_negloglik(self, emission, weights, obs):
        return sum(w * -emission.log_emission(o) for w, o in zip(weights, obs))

    def test_bm(self):
        rng = np.random.default_rng(31)
        obs = rough_paths(6, seed0=1000, drift=1.0)
        weights = rng.random(6) + 0.1
        drift = reestimate_bm_drift(weights, obs)
        base = self.weighted_negloglik(BmDriftEmission(drift), weights, obs)
        for _ in range(100):
            probe = drift + rng.normal() * rng.choice([1e-3, 0.1, 1.0])
            assert self.weighted_negloglik(BmDriftEmission(probe), weights, obs) >= base - 1e-10

    def test_nonparametric(self):
        rng = np.random.default_rng(33)
        grid = Grid(41)
        obs = rough_paths(5, seed0=1100, grid=grid)
        weights = rng.random(5) + 0.1
        mean = reestimate_nonparametric(weights, obs)
        base = self.weighted_negloglik(NonparametricEmission(mean, 1), weights, obs)
        for _ in range(100):
            bump = rng.normal(size=grid.n_points) * rng.choice([1e-3, 0.1])
            probe = Path(grid, mean.values + (bump - bump[0]))
            score = self.weighted_negloglik(NonparametricEmission(probe, 1), weights, obs)
            assert score >= base - 1e-10

    def test_euclidean(self):
        rng = np.random.default_rng(35)
        obs = [rng.normal(size=3) for _ in range(8)]
        weights = rng.random(8) + 0.1
        precision = np.diag([1.0, 2.0, 0.5])
        mean = reestimate_euclidean(weights, obs)
        base = self.weighted_negloglik(EuclideanEmission(mean, precision), weights, obs)
        for _ in range(100):
            probe = mean + rng.normal(size=3) * rng.choice([1e-3, 0.1, 1.0])
            score = self.weighted_negloglik(EuclideanEmission(probe, precision), weights, obs)
            assert score >= base - 1e-10
