import numpy as np
import pytest

from sbpkit.energy import residual_norm
from sbpkit.extremal import estimate_extremals
from sbpkit.grids import RadialFunction, h1_norm_sq
from sbpkit.solve import (
    SolveOptions,
    barrier_estimate,
    continue_branch,
    find_minimizer,
    mountain_pass,
)


@pytest.fixture(scope="module")
def thresholds(grid512, params_default):
    return estimate_extremals(grid512, params_default)


def test_global_minimizer_below_threshold(grid512, params_default, thresholds):
    q = 0.5 * thresholds.q0_star_lb
    result = find_minimizer(grid512, q, params_default, thresholds.maximizer)
    assert result.status == "converged"
    rec = result.record
    assert rec.energy < 0.0
    assert rec.kind == "global-min"
    assert rec.nehari == "plus"
    assert rec.residual_norm <= 1e-6
    # the record's residual is reproducible from the stored profile
    assert abs(residual_norm(rec.u, q, params_default) - rec.residual_norm) < 1e-9


def test_mountain_pass_above_minimizer(grid512, params_default, thresholds):
    q = 0.5 * thresholds.q0_star_lb
    base = find_minimizer(grid512, q, params_default, thresholds.maximizer)
    result = mountain_pass(grid512, q, params_default, base.record)
    assert result.status == "converged"
    rec = result.record
    assert rec.kind == "mountain-pass"
    assert rec.nehari == "minus"
    assert rec.energy > 0.0 > base.record.energy
    assert rec.residual_norm <= 1e-6
    assert rec.mp_level is not None and rec.mp_level >= rec.energy - 1e-8


def test_local_minimizer_above_zero_energy_threshold(grid512, params_default, thresholds):
    q = 1.01 * thresholds.q0_star_lb
    base = find_minimizer(grid512, q, params_default, thresholds.maximizer)
    assert base.status == "converged"
    assert base.record.energy > 0.0
    assert base.record.kind == "local-min"
    mp = mountain_pass(grid512, q, params_default, base.record)
    assert mp.status == "converged"
    assert mp.record.energy > base.record.energy


def test_collapse_above_existence_threshold(grid512, params_default, thresholds):
    q = 3.0 * thresholds.q_star_lb
    result = find_minimizer(grid512, q, params_default, thresholds.maximizer)
    assert result.status == "trivial-attractor"
    assert result.record is None
    assert result.norm_floor > 0.0


def test_converged_minimizer_respects_norm_floor(grid512, params_default, thresholds):
    q = 0.5 * thresholds.q0_star_lb
    result = find_minimizer(grid512, q, params_default, thresholds.maximizer)
    nrm = np.sqrt(h1_norm_sq(result.record.u, params_default))
    assert nrm >= result.norm_floor


def test_deterministic_bitwise(grid512, params_default, thresholds):
    q = 0.5 * thresholds.q0_star_lb
    r1 = find_minimizer(grid512, q, params_default, thresholds.maximizer)
    r2 = find_minimizer(grid512, q, params_default, thresholds.maximizer)
    assert np.array_equal(r1.record.u.vals, r2.record.u.vals)
    assert r1.record.energy == r2.record.energy


def test_rejects_bad_arguments(grid512, params_default):
    with pytest.raises(ValueError):
        find_minimizer(grid512, -0.1, params_default)
    with pytest.raises(ValueError):
        find_minimizer(grid512, 0.02, params_default, RadialFunction(grid512, np.zeros(grid512.n)))
    with pytest.raises(ValueError):
        mountain_pass(grid512, 0.02, params_default, None)
    with pytest.raises(ValueError):
        SolveOptions(grad_tol=0.0)
    with pytest.raises(ValueError):
        SolveOptions(path_nodes=3)


def test_barrier_estimate_positive(grid512, params_default):
    rho, level = barrier_estimate(grid512, params_default)
    assert rho > 0.0
    assert level > 0.0


def test_branch_structure(grid512, params_default, thresholds):
    lo, hi = 0.9 * thresholds.q0_star_lb, 1.01 * thresholds.q0_star_lb
    branch = continue_branch(grid512, lo, hi, 3, params_default, seed_profile=thresholds.maximizer)
    assert branch.qs.shape == (3,)
    assert len(branch.minimizers) == 3
    assert len(branch.passes) == 3
    assert all(flag == "" for flag in branch.flags)
    # the branch straddles the zero-energy threshold
    assert branch.jhat[0] < 0.0 < branch.jhat[-1]
    assert np.all(np.diff(branch.jhat) > 0.0)
    for result, q in zip(branch.minimizers, branch.qs):
        assert result.record is not None
        assert abs(result.record.q - q) < 1e-15


def test_branch_single_point(grid512, params_default, thresholds):
    q = 0.5 * thresholds.q0_star_lb
    branch = continue_branch(grid512, q, q, 1, params_default, seed_profile=thresholds.maximizer)
    assert branch.qs.shape == (1,)
    assert branch.jhat[0] < 0.0
