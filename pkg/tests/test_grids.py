import math

import numpy as np
import pytest

from sbpkit.grids import (
    ProblemParams,
    RadialFunction,
    h1_inner,
    h1_norm_sq,
    l2_norm_sq,
    lp_norm_p,
    make_grid,
    same_grid,
)

# closed forms for u(r) = exp(-r^2)
GAUSS_MASS = math.pi ** 1.5 / (2.0 * math.sqrt(2.0))
GAUSS_GRAD_SQ = 3.0 * math.pi ** 1.5 / (2.0 * math.sqrt(2.0))
GAUSS_CUBE = (math.pi / 3.0) ** 1.5


def test_weights_positive(grid1024):
    assert np.all(grid1024.w > 0.0)


def test_node_layout(grid1024):
    assert grid1024.r[0] == 0.0
    assert grid1024.r[-1] == 40.0
    assert np.all(np.diff(grid1024.r) > 0.0)


@pytest.mark.parametrize("scheme", ["graded", "uniform"])
def test_ball_volume_exact(scheme):
    grid = make_grid(7.0, 257, scheme)
    vol = float(np.sum(grid.w))
    want = 4.0 / 3.0 * math.pi * 7.0 ** 3
    assert abs(vol - want) / want < 1e-14


@pytest.mark.parametrize("scheme", ["graded", "uniform"])
def test_linear_moment_exact(scheme):
    grid = make_grid(7.0, 257, scheme)
    got = float(grid.w @ grid.r)
    want = math.pi * 7.0 ** 4
    assert abs(got - want) / want < 1e-14


def test_quadratic_moment(grid1024):
    got = float(grid1024.w @ grid1024.r ** 2)
    want = 4.0 * math.pi / 5.0 * 40.0 ** 5
    assert abs(got - want) / want < 1e-10


def test_gaussian_mass(grid1024):
    u = RadialFunction.from_callable(grid1024, lambda r: np.exp(-r * r))
    assert abs(l2_norm_sq(u) - GAUSS_MASS) / GAUSS_MASS < 1e-7


def test_gaussian_h1_closed_form(grid1024, params_default):
    u = RadialFunction.from_callable(grid1024, lambda r: np.exp(-r * r))
    want = GAUSS_GRAD_SQ + GAUSS_MASS
    assert abs(h1_norm_sq(u, params_default) - want) / want < 1e-6


def test_gaussian_cube_norm(grid1024):
    u = RadialFunction.from_callable(grid1024, lambda r: np.exp(-r * r))
    assert abs(lp_norm_p(u, 3.0) - GAUSS_CUBE) / GAUSS_CUBE < 1e-7


def test_h1_inner_polarization(grid1024, params_default):
    rng = np.random.default_rng(3)
    u = RadialFunction(grid1024, np.exp(-grid1024.r ** 2) * (1 + 0.1 * rng.standard_normal(grid1024.n)))
    v = RadialFunction.from_callable(grid1024, lambda r: np.exp(-0.5 * r * r))
    lhs = h1_inner(u, v, params_default)
    rhs = 0.25 * (
        h1_norm_sq(RadialFunction(grid1024, u.vals + v.vals), params_default)
        - h1_norm_sq(RadialFunction(grid1024, u.vals - v.vals), params_default)
    )
    assert abs(lhs - rhs) / abs(lhs) < 1e-12


def test_refinement_improves_mass():
    errs = []
    for n in (256, 512, 1024):
        grid = make_grid(40.0, n)
        u = RadialFunction.from_callable(grid, lambda r: np.exp(-r * r))
        errs.append(abs(l2_norm_sq(u) - GAUSS_MASS))
    assert errs[1] < errs[0] and errs[2] < errs[1]


def test_make_grid_rejects_bad_inputs():
    with pytest.raises(ValueError):
        make_grid(-1.0, 64)
    with pytest.raises(ValueError):
        make_grid(10.0, 8)
    with pytest.raises(ValueError):
        make_grid(10.0, 64, "chebyshev")


def test_params_validation():
    with pytest.raises(ValueError):
        ProblemParams(p=2.0, a=1.0, omega=1.0)
    with pytest.raises(ValueError):
        ProblemParams(p=3.5, a=1.0, omega=1.0)
    with pytest.raises(ValueError):
        ProblemParams(p=2.5, a=-0.5, omega=1.0)
    with pytest.raises(ValueError):
        ProblemParams(p=2.5, a=1.0, omega=0.0)


def test_radial_function_shape_check(grid1024):
    with pytest.raises(ValueError):
        RadialFunction(grid1024, np.zeros(7))
    with pytest.raises(ValueError):
        RadialFunction(grid1024, np.full(grid1024.n, np.nan))


def test_same_grid_guard(grid512, grid1024):
    u = RadialFunction(grid512, np.zeros(grid512.n))
    v = RadialFunction(grid1024, np.zeros(grid1024.n))
    with pytest.raises(ValueError):
        same_grid(u, v)
