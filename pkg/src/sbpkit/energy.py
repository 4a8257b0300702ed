"""Energy of the reduced Schrödinger-Bopp-Podolsky functional.

    𝒥_q(u) = ½‖u‖² + (q²/4)∫φ_u u² − (1/p)‖u‖_p^p,

with ‖u‖ the ω-weighted H¹ norm and φ_u the potential of u².  One
potential solve feeds every quantity here.

Stationarity is always measured through the exact gradient of the
discrete functional: the nodal residual R satisfies
∂𝒥/∂u_i = w_i R_i identically, so a zero of R is a true critical point
of the computed energy, not merely of a nearby discretization.  The
H¹-preconditioned form of that gradient is what descent iterates on,
giving mesh-independent stopping behavior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import ProblemParams, RadialFunction, h1_norm_sq, lp_norm_p
from .potential import coupling_and_gradient, solve_potential

ZERO_BAND = 1e-8


@dataclass(eq=False)
class EnergyBreakdown:
    """Signed pieces of 𝒥_q(u); total = quad + coupling - power.

    quad is ½‖u‖², coupling the (q²/4)∫φ_u u² term, power (1/p)‖u‖_p^p.
    """

    quad: float
    coupling: float
    power: float
    total: float
    q: float


def energy(u: RadialFunction, q: float, params: ProblemParams) -> EnergyBreakdown:
    quad = 0.5 * h1_norm_sq(u, params)
    sol = solve_potential(u, params)
    coupling = 0.25 * q * q * sol.b_coupling
    power = lp_norm_p(u, params.p) / params.p
    return EnergyBreakdown(
        quad=quad, coupling=coupling, power=power, total=quad + coupling - power, q=q
    )


def _gradient_vector(u: RadialFunction, q: float, params: ProblemParams) -> np.ndarray:
    """Exact gradient of the discrete energy with respect to nodal values."""
    grid = u.grid
    _, bgrad = coupling_and_gradient(u, params)
    lin = grid.stiffness() @ u.vals + params.omega * (grid.w * u.vals)
    pw = grid.w * np.abs(u.vals) ** (params.p - 2.0) * u.vals
    return lin + 0.25 * q * q * bgrad - pw


def euler_residual(u: RadialFunction, q: float, params: ProblemParams) -> RadialFunction:
    """Nodal residual of −Δu + ωu + q²φ_u u − |u|^{p−2}u.

    Scaled so that w_i R_i is exactly the energy gradient; in particular
    the weighted L² norm of R vanishes precisely at discrete critical
    points.
    """
    grid = u.grid
    return RadialFunction(grid, _gradient_vector(u, q, params) / grid.w)


def residual_norm(u: RadialFunction, q: float, params: ProblemParams) -> float:
    """Weighted L² norm of the Euler residual."""
    g = _gradient_vector(u, q, params)
    return float(np.sqrt(np.sum(g * g / u.grid.w)))


def sobolev_gradient(u: RadialFunction, q: float, params: ProblemParams) -> RadialFunction:
    """H¹-preconditioned gradient g with (−Δ + ω)g = residual.

    ⟨g, v⟩_{H¹} equals the directional derivative 𝒥'_q(u)[v] for every v,
    up to the linear-solver roundoff; descent on g reduces 𝒥 for any
    non-critical u.
    """
    grid = u.grid
    g = grid.h1_solve(params.omega, _gradient_vector(u, q, params))
    return RadialFunction(grid, g)


@dataclass(eq=False)
class NehariVerdict:
    """Fiber classification of u at its own scale t = 1."""

    label: str  # plus | zero | minus | off-nehari
    psi_prime: float
    psi_second: float


def nehari_classify(u: RadialFunction, q: float, params: ProblemParams) -> NehariVerdict:
    """Classify membership in 𝒩_q = {ψ'(1) = 0} and its ±/0 split.

    ψ'(1) = A + q²B − P and ψ''(1) = A + 3q²B − (p−1)P from the fiber
    coefficients; a band of 1e−8·max(1, A) separates genuine zeros from
    roundoff, since the double-root case sits exactly on the ψ'' = 0
    boundary.
    """
    if not np.any(u.vals):
        raise ValueError("nehari classification needs a nontrivial function")
    a = h1_norm_sq(u, params)
    b = solve_potential(u, params).b_coupling
    pw = lp_norm_p(u, params.p)
    psi1 = a + q * q * b - pw
    psi2 = a + 3.0 * q * q * b - (params.p - 1.0) * pw
    band = ZERO_BAND * max(1.0, abs(a))
    if abs(psi1) > band:
        return NehariVerdict("off-nehari", psi1, psi2)
    if psi2 > band:
        return NehariVerdict("plus", psi1, psi2)
    if psi2 < -band:
        return NehariVerdict("minus", psi1, psi2)
    return NehariVerdict("zero", psi1, psi2)


def embedding_estimate(grid, params: ProblemParams, samples: int = 64, seed: int = 0) -> float:
    """Empirical sup of ‖u‖_p^p / ‖u‖^p over probe profiles on the grid.

    Any u on the Nehari set has ‖u‖_p^p ≥ ‖u‖², so this constant floors
    the norm: ‖u‖ ≥ C_emb^{−1/(p−2)}.  Grid estimate only, reported as a
    diagnostic and used by the solvers to detect collapse toward zero.
    """
    from .profiles import random_bumps

    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        u = random_bumps(grid, rng)
        a = h1_norm_sq(u, params)
        if a <= 0.0:
            continue
        best = max(best, lp_norm_p(u, params.p) / a ** (0.5 * params.p))
    # sharp Gaussian and wide Gaussian ends of the family
    for alpha in np.geomspace(0.02, 50.0, 40):
        u = RadialFunction(grid, np.exp(-alpha * grid.r ** 2))
        a = h1_norm_sq(u, params)
        best = max(best, lp_norm_p(u, params.p) / a ** (0.5 * params.p))
    return best


def nehari_floor(grid, params: ProblemParams, c_emb: float | None = None) -> float:
    """Norm floor C̃ = C_emb^{−1/(p−2)} below which no Nehari point sits."""
    if c_emb is None:
        c_emb = embedding_estimate(grid, params)
    return c_emb ** (-1.0 / (params.p - 2.0))
