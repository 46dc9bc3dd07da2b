import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasemax_lab import replica
from phasemax_lab.exceptions import DomainError, Unstable
from phasemax_lab.replica import (
    Regime, alpha_critical, c_const, fixed_point_gap, h_of_q, h_second_derivative_at_1,
    picard_fixed_point, q_min, rho_critical, solve_fixed_point, sufficient_alpha, theta_of_q,
    w_of_q,
)

# Reference values from a 40-digit mpmath evaluation of the naive formulas.
C_2_5 = 1.5388417685876267012851452880184549120033510717689
THETA_0_8_A3 = 0.8774964387392122060406388307416309560876
W_0_8_A3 = 0.8243066354415913040181244453195303111293
H_0_9_A2_5_R0_5 = 0.8970739404747212324041834687322683663963
FIXED_POINTS = [
    # alpha, rho, q*, nmse
    (2.5, 0.5, 0.73026777699212427444, 0.23630613608744523096),
    (3.5, 0.35, 0.56548819404055657068, 0.16367517711580184768),
    (3.0, 0.25, 0.44025312821561755614, 0.53412795394593389326),
]

alphas = st.floats(2.05, 20.0)
rhos = st.floats(0.02, 1.0)


def one_sided_slope(f, q=1.0, step=1e-6):
    """Second-order backward difference; h has a kink at q = 1."""
    return (3 * f(q) - 4 * f(q - step) + f(q - 2 * step)) / (2 * step)


class TestConstants:
    def test_c_alpha_4(self):
        assert c_const(4) == pytest.approx(0.5, abs=1e-15)

    def test_c_large_alpha(self):
        assert 0 < c_const(1e6) < 2e-6

    def test_c_alpha_2_5(self):
        assert c_const(2.5) == pytest.approx(C_2_5, rel=1e-14)

    @pytest.mark.parametrize("alpha", [2.0, 1.5, 0.0, -3.0, math.inf, math.nan])
    def test_c_rejects_alpha(self, alpha):
        with pytest.raises(DomainError):
            c_const(alpha)

    def test_q_min_is_root(self):
        for alpha in (2.1, 2.5, 3.0, 4.0, 10.0):
            q = q_min(alpha)
            c = c_const(alpha)
            assert 0 < q < 1
            assert q == pytest.approx(c * c * (1 - q) ** 2, abs=1e-14)


class TestThetaW:
    def test_theta_at_one(self):
        for alpha in (2.2, 3.0, 7.0):
            assert theta_of_q(1.0, alpha) == 1.0

    def test_theta_domain_error_carries_boundary(self):
        with pytest.raises(DomainError) as exc:
            theta_of_q(0.0, 4)
        assert exc.value.boundary == pytest.approx(q_min(4))

    def test_theta_value(self):
        assert theta_of_q(0.8, 3) == pytest.approx(THETA_0_8_A3, rel=1e-14)
        assert theta_of_q(0.8, 3) == pytest.approx(math.sqrt(0.77), rel=1e-14)

    def test_w_at_one(self):
        assert w_of_q(1.0, 2.7) == 1.0

    def test_w_value(self):
        assert w_of_q(0.8, 3) == pytest.approx(W_0_8_A3, rel=1e-14)

    def test_w_continuous_at_one(self):
        eps = 1e-9
        assert w_of_q(1 - eps, 4) == pytest.approx(1.0, abs=1e-8)
        assert w_of_q(1 + eps, 4) == pytest.approx(1.0, abs=1e-8)

    def test_w_symmetric_in_distance_to_one(self):
        # |1 - q| enters w; theta differs on each side, so only compare arctan arguments' sign
        assert w_of_q(0.5, 4) < 1 and w_of_q(1.5, 4) < 1

    def test_w_propagates_domain_error(self):
        with pytest.raises(DomainError):
            w_of_q(0.0, 4)


class TestH:
    @settings(max_examples=1000, deadline=None)
    @given(alphas, rhos)
    def test_h_one_is_fixed(self, alpha, rho):
        assert h_of_q(1.0, alpha, rho) == 1.0

    @settings(max_examples=100, deadline=None)
    @given(alphas, rhos)
    def test_left_slope_is_one(self, alpha, rho):
        slope = one_sided_slope(lambda q: h_of_q(q, alpha, rho))
        assert slope == pytest.approx(1.0, abs=1e-5)

    def test_h_value(self):
        assert h_of_q(0.9, 2.5, 0.5) == pytest.approx(H_0_9_A2_5_R0_5, rel=1e-13)

    def test_gap_matches_naive(self):
        for q in (0.6, 0.8, 0.95):
            assert fixed_point_gap(q, 2.5, 0.5) == pytest.approx(h_of_q(q, 2.5, 0.5) - q, abs=1e-14)

    def test_h_has_kink_at_one(self):
        # right branch slope is -1: h depends on |1 - q|
        f = lambda q: h_of_q(q, 3.0, 0.5)
        assert (f(1 + 1e-6) - f(1.0)) / 1e-6 == pytest.approx(-1.0, abs=1e-4)


class TestSecondDerivative:
    @pytest.mark.parametrize("alpha, rho", [(2.5, 0.769), (3.5, 0.533)])
    def test_vanishes_at_reported_critical_pairs(self, alpha, rho):
        assert abs(h_second_derivative_at_1(alpha, rho)) < 1e-3

    def test_sign_matches_finite_difference(self):
        rng = np.random.default_rng(20)
        for _ in range(20):
            alpha = rng.uniform(2.1, 8.0)
            rho = rng.uniform(0.05, 1.0)
            if abs(rho - rho_critical(alpha)) < 1e-2:
                continue
            d = 1e-4
            f = lambda q: h_of_q(q, alpha, rho)
            fd = (f(1.0) - 2 * f(1.0 - d) + f(1.0 - 2 * d)) / d**2
            assert np.sign(fd) == np.sign(h_second_derivative_at_1(alpha, rho))

    def test_closed_form_is_half_left_curvature(self):
        # h(q) - q = (h''(1-)/2) e^2 + O(e^3) with e = 1 - q
        for alpha, rho in [(2.5, 0.5), (3.0, 0.8), (5.0, 0.2)]:
            e = 1e-6
            taylor = fixed_point_gap(1 - e, alpha, rho) / e**2
            assert taylor == pytest.approx(h_second_derivative_at_1(alpha, rho), rel=1e-4)

    @settings(max_examples=300, deadline=None)
    @given(alphas, rhos)
    def test_sign_vs_rho_critical(self, alpha, rho):
        rc = rho_critical(alpha)
        if abs(rho - rc) <= 1e-6:
            return
        assert np.sign(h_second_derivative_at_1(alpha, rho)) == np.sign(rho - rc)


class TestBoundary:
    def test_reported_critical_values(self):
        assert rho_critical(2.5) == pytest.approx(0.769, abs=1e-3)
        assert rho_critical(3.5) == pytest.approx(0.533, abs=1e-3)

    def test_rho_critical_limits(self):
        assert rho_critical(2 + 1e-9) == pytest.approx(1.0, abs=1e-4)
        assert 0 < rho_critical(1e6) < 1e-5

    def test_rho_critical_alpha_3(self):
        assert rho_critical(3.0) == pytest.approx(0.628808565401209673, rel=1e-13)

    def test_alpha_critical_values(self):
        assert alpha_critical(1.0) == 2.0
        assert alpha_critical(0.769) == pytest.approx(2.5, abs=0.01)
        assert alpha_critical(0.533) == pytest.approx(3.5, abs=0.01)
        assert alpha_critical(0.0) == math.inf

    def test_alpha_critical_rejects(self):
        for bad in (-0.1, 1.1):
            with pytest.raises(DomainError):
                alpha_critical(bad)

    @pytest.mark.parametrize("rho", np.linspace(0.05, 0.999, 40))
    def test_mutual_inverse(self, rho):
        assert rho_critical(alpha_critical(rho)) == pytest.approx(rho, abs=1e-8)

    def test_alpha_critical_decreasing(self):
        grid = np.linspace(0.01, 1.0, 200)
        vals = [alpha_critical(r) for r in grid]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_sufficient_values(self):
        assert sufficient_alpha(1.0) == 2.0
        assert sufficient_alpha(math.cos(math.pi / 4)) == pytest.approx(4.0, rel=1e-12)
        # 40-digit mpmath value
        assert sufficient_alpha(0.769) == pytest.approx(3.58107940561314237954630656197, rel=1e-13)
        assert sufficient_alpha(0.769) > alpha_critical(0.769)

    def test_sufficient_rejects_nonpositive(self):
        for bad in (0.0, -0.5):
            with pytest.raises(DomainError):
                sufficient_alpha(bad)

    def test_sufficient_above_critical(self):
        for rho in np.linspace(0.01, 0.99, 100):
            assert sufficient_alpha(rho) > alpha_critical(rho)


class TestFixedPoint:
    def test_success_regime(self):
        pred = solve_fixed_point(3.0, 0.8)
        assert pred.regime is Regime.SUCCESS
        assert (pred.q_star, pred.theta_star, pred.nmse) == (1.0, 1.0, 0.0)
        assert pred.rho_critical == pytest.approx(0.6288, abs=1e-4)

    @pytest.mark.parametrize("alpha, rho, q_ref, nmse_ref", FIXED_POINTS)
    def test_failure_regime_matches_mpmath(self, alpha, rho, q_ref, nmse_ref):
        pred = solve_fixed_point(alpha, rho)
        assert pred.regime is Regime.FAILURE
        assert pred.q_star == pytest.approx(q_ref, abs=1e-10)
        assert pred.nmse == pytest.approx(nmse_ref, abs=1e-10)
        assert abs(fixed_point_gap(pred.q_star, alpha, rho)) <= 1e-10

    @pytest.mark.parametrize("alpha, rho, q_ref, nmse_ref", FIXED_POINTS)
    def test_picard_agrees(self, alpha, rho, q_ref, nmse_ref):
        assert picard_fixed_point(alpha, rho) == pytest.approx(solve_fixed_point(alpha, rho).q_star, abs=1e-8)

    def test_continuity_toward_transition(self):
        alpha = 2.5
        rc = rho_critical(alpha)
        values = [solve_fixed_point(alpha, r).nmse for r in np.linspace(rc - 0.2, rc - 1e-4, 10)]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-5

    def test_near_boundary_root_resolved(self):
        pred = solve_fixed_point(3.5, 0.533)
        assert pred.regime is Regime.FAILURE
        assert 0 < pred.nmse < 1e-6

    def test_small_rho_near_alpha_2_is_unstable(self):
        with pytest.raises(Unstable):
            solve_fixed_point(2.1, 0.1)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(2.3, 8.0), st.floats(0.3, 1.0))
    def test_prediction_invariants(self, alpha, rho):
        pred = solve_fixed_point(alpha, rho)
        assert 0.0 <= pred.nmse <= 4.0
        assert (pred.nmse == 0.0) == (pred.regime is Regime.SUCCESS)
        assert (pred.regime is Regime.SUCCESS) == (rho > pred.rho_critical)
        if pred.regime is Regime.FAILURE:
            assert abs(fixed_point_gap(pred.q_star, alpha, rho)) <= 1e-10

    def test_to_dict(self):
        d = solve_fixed_point(2.5, 0.5).to_dict()
        assert d["regime"] == "Failure"
