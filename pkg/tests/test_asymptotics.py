import math

import numpy as np
import pytest
from scipy import integrate

from torusmut import asymptotics as asy
from torusmut.process import ModelParams

import oracles

A3_PARAMS = ModelParams(d=1, L=1e6, alpha=1.0, mu=(1e-4, 1e-4))


class TestUnitBallVolume:
    def test_known_volumes(self):
        assert asy.unit_ball_volume(1) == 2.0
        assert asy.unit_ball_volume(2) == pytest.approx(math.pi)
        assert asy.unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)

    def test_unsupported_dimension(self):
        with pytest.raises(ValueError):
            asy.unit_ball_volume(4)


class TestTimeScales:
    def test_first_scale_is_inverse_total_rate(self):
        p = ModelParams(d=2, L=10.0, alpha=3.0, mu=(0.01, 0.02))
        assert asy.beta_k(p, 1) == pytest.approx(1.0 / (p.N * 0.01))

    def test_identity_scaling(self):
        p = ModelParams(d=1, L=1.0, alpha=1.0, mu=(1.0, 1.0, 1.0))
        for k in (1, 2, 3):
            assert asy.beta_k(p, k) == pytest.approx(1.0)

    def test_frozen_second_scale(self):
        assert asy.beta_k(A3_PARAMS, 2) == pytest.approx(4.641588833612778,
                                                         rel=1e-12)

    def test_type_index_validated(self):
        with pytest.raises(ValueError):
            asy.beta_k(A3_PARAMS, 3)
        with pytest.raises(ValueError):
            asy.beta_k(A3_PARAMS, 0)
        with pytest.raises(ValueError):
            asy.kappa_j(A3_PARAMS, 3)

    def test_gap_scale_values(self):
        p = ModelParams(d=3, L=2.0, alpha=1.0, mu=(1.0,))
        assert asy.kappa_j(p, 1) == pytest.approx(1.0)
        q = ModelParams(d=1, L=10.0, alpha=1e4, mu=(1e2,))
        assert asy.kappa_j(q, 1) == pytest.approx(1e-3, rel=1e-12)

    def test_gap_scale_decreases_in_rate(self):
        lo = ModelParams(d=2, L=10.0, alpha=2.0, mu=(0.1,))
        hi = ModelParams(d=2, L=10.0, alpha=2.0, mu=(0.5,))
        assert asy.kappa_j(hi, 1) < asy.kappa_j(lo, 1)


class TestMeanVolumeCurve:
    def test_level_zero_is_everything(self):
        assert asy.v_k(A3_PARAMS, 0, 3.7) == A3_PARAMS.N

    def test_starts_at_zero(self):
        assert asy.v_k(A3_PARAMS, 2, 0.0) == 0.0

    def test_level_one_closed_form(self):
        p = ModelParams(d=2, L=10.0, alpha=2.0, mu=(0.01, 0.01))
        t = 1.7
        expected = math.pi / 3.0 * 0.01 * 100.0 * 4.0 * t**3
        assert asy.v_k(p, 1, t) == pytest.approx(expected, rel=1e-12)

    def test_frozen_level_two_value(self):
        assert asy.v_k(A3_PARAMS, 2, 1.0) == pytest.approx(
            0.0016666666666666668, rel=1e-12)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            asy.v_k(A3_PARAMS, 1, -0.5)

    def test_quadrature_recursion_agrees(self):
        rng = np.random.default_rng(2024)
        for _ in range(60):
            d = int(rng.integers(1, 4))
            K = int(rng.integers(1, 5))
            L = float(rng.uniform(1.0, 50.0))
            p = ModelParams(d=d, L=L, alpha=float(rng.uniform(0.1, 10.0)),
                            mu=tuple(sorted(rng.uniform(1e-5, 1e-1, K))))
            k = int(rng.integers(1, K + 1))
            t = float(rng.uniform(0.0, 3.0))
            closed = asy.v_k(p, k, t)
            quad = asy.v_k_quadrature(p, k, t)
            assert quad == pytest.approx(closed, rel=1e-8, abs=1e-300)


class TestSingleBallPassage:
    def test_boundary_values(self):
        assert asy.single_ball_passage_cdf(A3_PARAMS, 1, 0.0) == 0.0

    def test_gap_scale_is_the_characteristic_time(self):
        p = ModelParams(d=1, L=10.0, alpha=2.0, mu=(0.3,))
        kappa = asy.kappa_j(p, 1)
        assert asy.single_ball_passage_cdf(p, 1, kappa) == pytest.approx(
            0.6321205588285577, rel=1e-12)

    def test_monotone(self):
        ts = np.linspace(0, 5, 200)
        vals = asy.single_ball_passage_cdf(A3_PARAMS, 2, ts)
        assert np.all(np.diff(vals) >= 0)

    def test_type_index_validated(self):
        with pytest.raises(ValueError):
            asy.single_ball_passage_cdf(A3_PARAMS, 5, 1.0)


class TestGapDensity:
    def test_values(self):
        assert asy.gap_density(1, 0.0) == 0.0
        assert asy.gap_density(1, 1.0) == pytest.approx(0.7357588823428847,
                                                        rel=1e-12)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_normalization(self, d):
        total, err = integrate.quad(lambda t: asy.gap_density(d, t), 0, np.inf)
        assert total == pytest.approx(1.0, abs=1e-8)


class TestTailConstant:
    def test_small_cases(self):
        c, m = asy.theorem3_constant(1, 2)
        assert (c, m) == (pytest.approx(1.0 / 3.0), 3)
        c, m = asy.theorem3_constant(2, 3)
        assert m == 7
        assert c == pytest.approx(0.007833019365943935, rel=1e-12)
        assert asy.theorem3_constant(3, 1) == (pytest.approx(1.0), 1)

    def test_validation(self):
        with pytest.raises(ValueError):
            asy.theorem3_constant(1, 0)


class TestHazardIntegrand:
    def test_quadratic_case(self):
        p = ModelParams(d=1, L=100.0, alpha=1.0, mu=(0.01, 0.01))
        ts = np.array([0.0, 0.5, 1.0, 2.0])
        assert asy.theorem3_integrand(p, 2, ts) == pytest.approx(ts**2)

    def test_dual_formula_identity(self):
        rng = np.random.default_rng(77)
        for _ in range(100):
            d = int(rng.integers(1, 4))
            K = int(rng.integers(2, 5))
            p = ModelParams(d=d, L=float(rng.uniform(2.0, 30.0)),
                            alpha=float(rng.uniform(0.1, 5.0)),
                            mu=tuple(sorted(rng.uniform(1e-5, 1e-2, K))))
            k = int(rng.integers(2, K + 1))
            t = float(rng.uniform(0.01, 3.0))
            beta = asy.beta_k(p, k)
            direct = asy.theorem3_integrand(p, k, t)
            via_volume = beta * p.mu[k - 1] * asy.v_k(p, k - 1, beta * t)
            assert via_volume == pytest.approx(direct, rel=1e-8)

    def test_validation(self):
        p = ModelParams(d=1, L=10.0, alpha=1.0, mu=(0.1,))
        with pytest.raises(ValueError):
            asy.theorem3_integrand(p, 2, 1.0)
        with pytest.raises(ValueError):
            asy.theorem3_integrand(p, 1, -1.0)


class TestLimitLaws:
    def test_exp1(self):
        law = asy.Exp1Law()
        assert law.cdf(1.0) == pytest.approx(0.6321205588285577, rel=1e-12)
        assert law.cdf(0.0) == 0.0
        assert law.to_dict() == {"kind": "exp1"}

    def test_weibull_type_from_order(self):
        law = asy.WeibullTypeLaw.from_order(1, 2)
        assert law.exponent == 3
        assert law.coefficient == pytest.approx(1.0 / 3.0)
        assert law.cdf(1.0) == pytest.approx(0.28346868942621073, rel=1e-12)

    def test_weibull_density_normalizes(self):
        for d, k in [(1, 2), (2, 2), (3, 3)]:
            law = asy.WeibullTypeLaw.from_order(d, k)
            c, m = law.coefficient, law.exponent
            total, _ = integrate.quad(
                lambda t: c * m * t ** (m - 1) * math.exp(-c * t**m), 0, np.inf)
            assert total == pytest.approx(1.0, abs=1e-8)

    def test_hypoexponential_two_rates(self):
        law = asy.HypoexponentialLaw([1.0, 2.0])
        assert law.cdf(1.0) == pytest.approx(0.39957640089372803, rel=1e-9)

    def test_infinite_rates_drop_out(self):
        law = asy.HypoexponentialLaw([1.0, math.inf])
        ts = np.linspace(0, 10, 101)
        assert law.cdf(ts) == pytest.approx(-np.expm1(-ts), rel=1e-12)
        assert law.to_dict() == {"kind": "hypoexponential",
                                 "rates": [1.0, "inf"]}

    def test_all_infinite_rates_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            asy.HypoexponentialLaw([math.inf, math.inf])

    def test_nonpositive_rates_rejected(self):
        with pytest.raises(ValueError):
            asy.HypoexponentialLaw([1.0, -2.0])
        with pytest.raises(ValueError):
            asy.HypoexponentialLaw([])

    def test_repeated_rates_use_stable_path(self):
        law = asy.HypoexponentialLaw([1.0, 1.0])
        ts = np.linspace(0.0, 30.0, 301)
        exact = oracles.erlang_cdf(2, 1.0, ts)
        assert np.max(np.abs(law.cdf(ts) - exact)) < 5e-4

    def test_near_equal_rates_stay_consistent(self):
        ts = np.linspace(0.0, 30.0, 301)
        closed = asy.HypoexponentialLaw([1.0, 1.001]).cdf(ts)
        grid = asy.HypoexponentialLaw([1.0, 1.0 + 1e-9]).cdf(ts)
        assert np.max(np.abs(closed - grid)) < 5e-4

    def test_limit_cdf_dispatch(self):
        law = asy.WeibullTypeLaw.from_order(1, 2)
        assert asy.limit_cdf(law, 1.0) == law.cdf(1.0)

    @pytest.mark.parametrize("law", [
        asy.Exp1Law(),
        asy.HypoexponentialLaw([0.5, 3.0, 3.0]),
        asy.WeibullTypeLaw.from_order(2, 2),
        asy.DistanceLaw(2),
    ])
    def test_cdf_shape_properties(self, law):
        ts = np.linspace(0.0, 60.0, 10_000)
        vals = law.cdf(ts)
        assert vals[0] == 0.0
        assert np.all(np.diff(vals) >= -1e-12)
        assert vals[-1] > 1.0 - 1e-6
        assert np.all((vals >= 0.0) & (vals <= 1.0))


class TestDistanceCdf:
    def test_endpoints(self):
        assert asy.distance_cdf(1, 0.0) == 0.0
        assert asy.distance_cdf(2, 50.0) == pytest.approx(1.0, abs=1e-9)

    def test_frozen_unit_value(self):
        assert asy.distance_cdf(1, 1.0) == pytest.approx(0.9109261441092125,
                                                         abs=1e-8)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_matches_special_function_form(self, d):
        ss = np.linspace(0.01, 4.0, 80)
        mine = asy.distance_cdf(d, ss)
        ref = oracles.distance_cdf_closed(d, ss)
        assert np.max(np.abs(mine - ref)) < 1e-8

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_scalar_and_array_paths_agree(self, d):
        ss = np.array([0.1, 0.7, 1.3, 2.9])
        arr = asy.distance_cdf(d, ss)
        scal = np.array([asy.distance_cdf(d, float(s)) for s in ss])
        assert arr == pytest.approx(scal, abs=1e-10)

    def test_monotone(self):
        ss = np.linspace(0, 5, 500)
        assert np.all(np.diff(asy.distance_cdf(3, ss)) >= -1e-12)

    def test_distance_law_object(self):
        law = asy.DistanceLaw(1)
        assert law.cdf(1.0) == pytest.approx(asy.distance_cdf(1, 1.0))
        assert law.to_dict() == {"kind": "distance", "d": 1}
