import numpy as np
import pytest

from sbpkit import potential
from sbpkit.grids import ProblemParams, RadialFunction
from sbpkit.profiles import gaussian
from sbpkit.verify import (
    coercivity_certificate,
    report_to_json,
    run_suite,
)


def _check(report, name):
    matches = [c for c in report.checks if c.name == name]
    assert len(matches) == 1
    return matches[0]


@pytest.fixture(scope="module")
def suite_default(grid512, params_default):
    return run_suite(grid512, params_default, seed=0, samples=40)


def test_all_checks_pass_on_defaults(suite_default):
    failing = [c.name for c in suite_default.checks if c.status == "fail"]
    assert failing == []
    assert suite_default.passed


def test_screened_branch_runs_subordination(suite_default):
    assert _check(suite_default, "subordination").status == "pass"
    assert _check(suite_default, "coulomb-reduction").status == "not-applicable"


def test_coulomb_branch_swaps_checks(grid512, params_coulomb):
    report = run_suite(grid512, params_coulomb, seed=0, samples=20)
    assert report.passed
    assert _check(report, "subordination").status == "not-applicable"
    assert _check(report, "coulomb-reduction").status == "pass"


def test_report_serialization_byte_stable(grid512, params_default):
    r1 = run_suite(grid512, params_default, seed=2, samples=10)
    r2 = run_suite(grid512, params_default, seed=2, samples=10)
    assert report_to_json(r1) == report_to_json(r2)


def test_slacks_hold_up_under_refinement(grid512, grid1024, params_default):
    # inequality margins must not degrade with resolution
    coarse = run_suite(grid512, params_default, seed=0, samples=20)
    fine = run_suite(grid1024, params_default, seed=0, samples=20)
    assert coarse.passed and fine.passed


def test_misscaled_kernel_trips_identity_check(grid512, params_default, monkeypatch):
    # a deliberately wrong kernel scale must surface in the D-norm identity
    real = potential.solve_potential

    def crooked(u, params):
        sol = real(u, params)
        return potential.PotentialSolution(
            phi=sol.phi,
            lap_phi=sol.lap_phi,
            b_coupling=1.01 * sol.b_coupling,
            d_norm_sq=sol.d_norm_sq,
        )

    import sbpkit.verify as verify_mod

    monkeypatch.setattr(verify_mod, "solve_potential", crooked)
    report = verify_mod.run_suite(grid512, params_default, seed=0, samples=10)
    assert _check(report, "dnorm-identity").status == "fail"
    assert not report.passed


def test_coercivity_equality_at_zero(grid512, params_default):
    u = RadialFunction(grid512, np.zeros(grid512.n))
    rep = coercivity_certificate(u, 1.0, params_default)
    assert rep.energy == 0.0
    assert rep.lower_bound == 0.0
    assert rep.slack == 0.0


def test_coercivity_slack_nonnegative(grid512, params_default):
    rep = coercivity_certificate(gaussian(grid512, 1.0), 1.0, params_default)
    assert rep.slack >= -1e-8
    assert rep.d_coefficient > 0.0


def test_coercivity_default_epsilon_midpoint(grid512, params_default):
    q = 0.7
    rep = coercivity_certificate(gaussian(grid512, 1.0), q, params_default)
    want = q * q / (32.0 * np.pi)
    assert abs(rep.d_coefficient - want) < 1e-15


def test_coercivity_rejects_fat_epsilon(grid512, params_default):
    q = 1.0
    bad_eps = (q * q / (8.0 * np.pi)) ** 0.25
    with pytest.raises(ValueError):
        coercivity_certificate(gaussian(grid512, 1.0), q, params_default, epsilon=bad_eps)


def test_coercivity_rejects_small_omega(grid512):
    params = ProblemParams(p=2.5, a=1.0, omega=0.5)
    with pytest.raises(ValueError):
        coercivity_certificate(gaussian(grid512, 1.0), 1.0, params)
