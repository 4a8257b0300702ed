import numpy as np
import pytest

from sbpkit.extremal import SearchConfig, estimate_extremals, per_u_certificates
from sbpkit.fibering import charge_ratio, fiber_coeffs, q_of_u
from sbpkit.profiles import exponential, gaussian


def test_estimate_improves_on_family(grid512, params_default):
    est = estimate_extremals(grid512, params_default)
    best_family = 0.0
    for alpha in np.geomspace(0.05, 20.0, 40):
        for profile in (gaussian(grid512, alpha), exponential(grid512, alpha)):
            best_family = max(best_family, q_of_u(fiber_coeffs(profile, params_default)))
    assert est.q_star_lb >= best_family * (1.0 - 1e-12)
    assert est.iterations > 0


def test_maximizer_attains_reported_charge(grid512, params_default):
    est = estimate_extremals(grid512, params_default)
    q_check = q_of_u(fiber_coeffs(est.maximizer, params_default))
    assert abs(q_check - est.q_star_lb) / est.q_star_lb < 1e-12


def test_threshold_pair_locked_by_ratio(grid512, params_default):
    est = estimate_extremals(grid512, params_default)
    want = charge_ratio(params_default.p) * est.q_star_lb
    assert abs(est.q0_star_lb - want) <= 1e-15 * want
    assert est.q0_star_lb < est.q_star_lb


def test_deterministic_across_runs(grid512, params_default):
    e1 = estimate_extremals(grid512, params_default)
    e2 = estimate_extremals(grid512, params_default)
    assert e1.q_star_lb == e2.q_star_lb
    assert np.array_equal(e1.maximizer.vals, e2.maximizer.vals)


def test_converges_for_subcubic_power(grid512, params_default):
    est = estimate_extremals(grid512, params_default)
    assert est.converged


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(alpha_lo=-1.0)
    with pytest.raises(ValueError):
        SearchConfig(ascent_iters=-1)


def test_certificates_all_above_at_large_charge(grid512, params_default):
    est = estimate_extremals(grid512, params_default)
    rep = per_u_certificates(grid512, params_default, 3.0 * est.q_star_lb, samples=50)
    assert rep.above == 50
    assert rep.below == 0
    assert rep.violations == []


def test_certificates_all_below_at_tiny_charge(grid512, params_default):
    est = estimate_extremals(grid512, params_default)
    rep = per_u_certificates(grid512, params_default, 0.01 * est.q_star_lb, samples=50)
    assert rep.below == 50
    assert rep.violations == []


def test_certificates_deterministic(grid512, params_default):
    r1 = per_u_certificates(grid512, params_default, 0.05, samples=20, seed=5)
    r2 = per_u_certificates(grid512, params_default, 0.05, samples=20, seed=5)
    assert (r1.above, r1.below, r1.boundary) == (r2.above, r2.below, r2.boundary)
