"""Radial Bopp-Podolsky potential of a charge density u².

For screening length a > 0 the field equation -Δφ + a²Δ²φ = 4πu² is solved
by the kernel (1 - e^{-|x|/a})/|x| convolved with u².  Radially that splits
into a Coulomb part and a screened part,

    φ_C(r) = 4π [ (1/r)∫_0^r s² u² ds + ∫_r^∞ s u² ds ],
    φ_Y(r) = (2π/(μ r)) ∫_0^∞ s u(s)² (e^{-μ|r-s|} - e^{-μ(r+s)}) ds,

with μ = 1/a and φ = φ_C - φ_Y.  The second form of φ_Y comes from writing
the usual modified-Helmholtz Green kernel sinh(μ min)e^{-μ max}/(μ r s) as a
difference of decaying exponentials; it is free of growing factors, so it is
evaluated stably for any μ.  At the origin both parts have removable limits,
φ_C(0) = 4π∫ s u² ds and φ_Y(0) = 4π∫ s u² e^{-μs} ds.

Since Δφ_Y = μ²φ_Y - 4πu² exactly cancels the density against the Coulomb
part, the composite field satisfies Δφ = -μ²φ_Y, which gives Δφ on the nodes
without numerical differentiation.  With a = 0 the screened part vanishes,
φ = φ_C and Δφ = -4πu².

The D-norm reported here is ‖φ‖²_D = a²‖Δφ‖₂² + ‖∇φ‖₂², with the gradient
taken by the grid's finite-difference map over the ball r ≤ r_max plus the
closed-form exterior contribution.  Outside a radius containing the density
the field is exactly κ/r - (C/r)e^{-μ(r-R)} with κ = R φ_C(R) and
C = R φ_Y(R), and the exterior integrals collapse (the exponential-integral
pieces cancel between the 1/r and 1/r² cross terms) to

    ∫_{r>R} |∇φ|² + a²|Δφ|² dV = 4π [ R φ(R)² + μ (R φ_Y(R))² ].

Without that term the report would carry an O(1/r_max) deficit from the
monopole tail.  The identity 4π∫φ u² = ‖φ‖²_D holds for the continuum
solution, and the discrete mismatch decays with the mesh, which verify
uses as a consistency probe.

All potential evaluations are linear scans in the density with exact
transposes, so downstream energy gradients differentiate the discrete
coupling value itself rather than an approximation of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import _scans
from .grids import FOUR_PI, ProblemParams, RadialFunction, RadialGrid


@dataclass(eq=False)
class PotentialSolution:
    """Field of one density: potential, its Laplacian, and the two scalars."""

    phi: RadialFunction
    lap_phi: RadialFunction
    b_coupling: float
    d_norm_sq: float


def kernel_apply(grid, params: ProblemParams, density: NDArray[np.float64]) -> NDArray[np.float64]:
    """Potential of an arbitrary nodal density (not necessarily a square)."""
    phi = _scans.coulomb_apply(grid, density)
    if params.a > 0.0:
        phi = phi - _scans.yukawa_apply(grid, 1.0 / params.a, density)
    return phi


def kernel_apply_t(grid, params: ProblemParams, v: NDArray[np.float64]) -> NDArray[np.float64]:
    """Exact transpose of kernel_apply."""
    adj = _scans.coulomb_apply_t(grid, v)
    if params.a > 0.0:
        adj = adj - _scans.yukawa_apply_t(grid, 1.0 / params.a, v)
    return adj


def solve_potential(u: RadialFunction, params: ProblemParams) -> PotentialSolution:
    """Solve the field equation for the density u² at the grid nodes."""
    grid = u.grid
    m = u.vals * u.vals
    rmax = grid.r[-1]
    phi_c = _scans.coulomb_apply(grid, m)
    if params.a == 0.0:
        phi = phi_c
        lap = -FOUR_PI * m
        tail = FOUR_PI * rmax * phi[-1] ** 2
    else:
        mu = 1.0 / params.a
        phi_y = _scans.yukawa_apply(grid, mu, m)
        phi = phi_c - phi_y
        lap = -(mu * mu) * phi_y
        tail = FOUR_PI * (rmax * phi[-1] ** 2 + mu * (rmax * phi_y[-1]) ** 2)
    b = float(grid.w @ (m * phi))
    dphi = grid.deriv(phi)
    dnsq = float(grid.w @ (params.a ** 2 * lap * lap + dphi * dphi)) + tail
    return PotentialSolution(
        phi=RadialFunction(grid, phi),
        lap_phi=RadialFunction(grid, lap),
        b_coupling=b,
        d_norm_sq=dnsq,
    )


def coupling_and_gradient(
    u: RadialFunction, params: ProblemParams
) -> tuple[PotentialSolution, NDArray[np.float64]]:
    """Potential plus the exact nodal gradient of B(u) = Σ w u² φ[u²].

    B is quadratic in the density m = u² through the symmetric continuum
    kernel, but the discrete scan matrix G is not W-symmetric, so the
    gradient needs the transposed scan as well:

        dB/du_i = 2 u_i ( w_i φ_i + (Gᵀ (w ⊙ m))_i ).
    """
    grid = u.grid
    sol = solve_potential(u, params)
    m = u.vals * u.vals
    wm = grid.w * m
    adj = _scans.coulomb_apply_t(grid, wm)
    if params.a > 0.0:
        adj = adj - _scans.yukawa_apply_t(grid, 1.0 / params.a, wm)
    grad = 2.0 * u.vals * (grid.w * sol.phi.vals + adj)
    return sol, grad


def residual_potential(
    u: RadialFunction, params: ProblemParams
) -> NDArray[np.float64]:
    """Symmetrized potential φ̃ whose pointwise product closes the gradient.

    The Euler operator applied on the grid uses φ̃ u, where
    φ̃ = (φ + W⁻¹ Gᵀ W m)/2, so that the discrete functional's derivative
    is exactly w_i times the nodal residual.  In the bulk φ̃ agrees with φ
    to the order of the scan discretization; the few nodes nearest the
    origin deviate (the scan columns carry an odd r factor, so node 0 has
    no adjoint image at all), but those nodes hold vanishing measure
    weight and never register in the weighted residual norms.
    """
    grid = u.grid
    sol = solve_potential(u, params)
    wm = grid.w * (u.vals * u.vals)
    adj = _scans.coulomb_apply_t(grid, wm)
    if params.a > 0.0:
        adj = adj - _scans.yukawa_apply_t(grid, 1.0 / params.a, wm)
    return 0.5 * (sol.phi.vals + adj / grid.w)


def check_subordination(sol: PotentialSolution, params: ProblemParams) -> float:
    """Largest nodal value of a²Δφ - φ; the continuum field keeps it ≤ 0."""
    gap = params.a ** 2 * sol.lap_phi.vals - sol.phi.vals
    return float(np.max(gap))


def cube_norm_bound(u: RadialFunction, sol: PotentialSolution) -> tuple[float, float]:
    """Pair (∫|u|³, (1/π)·‖φ_u‖_D·‖∇u‖₂); the first never exceeds the second.

    The bound follows from testing the field equation with u and applying
    Cauchy-Schwarz in the D inner product; it holds for a = 0 as well,
    where the sharper Coulomb constant would allow 1/(4π).
    """
    grid = u.grid
    lhs = float(grid.w @ np.abs(u.vals) ** 3)
    du = grid.deriv(u.vals)
    grad_l2 = float(np.sqrt(grid.w @ (du * du)))
    rhs = (1.0 / np.pi) * np.sqrt(max(sol.d_norm_sq, 0.0)) * grad_l2
    return lhs, rhs
