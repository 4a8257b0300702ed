"""Lower bounds for the extremal charges q* = sup_u q(u) and q0*.

q(u) is 0-homogeneous and finite, so the sup is well posed, but whether it
is attained is open; everything reported here is a certified lower bound:
the value of q(u) at an explicitly constructed profile.

The search has two phases.  A scan over named trial families (Gaussians
e^{-αr²} and exponentials e^{-αr} with log-spaced widths) gives a cheap,
fully reproducible seed.  Free ascent then climbs ln q(u) on the grid
values with its exact gradient,

    ∇ ln q = ∇P/((p−2)P) − (4−p)∇A/(2(p−2)A) − ∇B/(2B),

preconditioned by (−Δ+ω)⁻¹ and renormalized in H¹ after every step
(0-homogeneity makes the normalization lossless).  Steps are accepted
only when q increases, so the ascent can never fall below the family
scan, and the whole procedure is deterministic for a fixed config.

Because q0(u)/q(u) is the same constant for every direction, the two
bounds share one maximizer and q0_star_lb is exactly the fixed ratio
times q_star_lb.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fibering
from .grids import ProblemParams, RadialFunction, RadialGrid, h1_norm_sq
from .potential import coupling_and_gradient
from .profiles import exponential, gaussian, random_bumps


@dataclass(frozen=True)
class SearchConfig:
    alpha_lo: float = 0.05
    alpha_hi: float = 20.0
    n_alpha: int = 40
    ascent_iters: int = 200
    ascent_tol: float = 1e-12
    step0: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_alpha < 1 or self.ascent_iters < 0:
            raise ValueError("search budget must be positive")
        if not 0.0 < self.alpha_lo < self.alpha_hi:
            raise ValueError("alpha range must be increasing and positive")


@dataclass(eq=False)
class ExtremalEstimate:
    q_star_lb: float
    q0_star_lb: float
    maximizer: RadialFunction
    family_tag: str
    iterations: int
    converged: bool


def _charge(u: RadialFunction, params: ProblemParams) -> float:
    return fibering.q_of_u(fibering.fiber_coeffs(u, params))


def _log_charge_gradient(
    u: RadialFunction, params: ProblemParams
) -> tuple[float, np.ndarray]:
    """Value of q(u) and the exact nodal gradient of ln q."""
    grid = u.grid
    p = params.p
    sol, bgrad = coupling_and_gradient(u, params)
    a = h1_norm_sq(u, params)
    b = sol.b_coupling
    pw = float(grid.w @ np.abs(u.vals) ** p)
    c = fibering.FiberCoeffs(h1=a, coupling=b, power=pw, p=p)
    q = fibering.q_of_u(c)
    agrad = 2.0 * (grid.stiffness() @ u.vals + params.omega * grid.w * u.vals)
    pgrad = p * grid.w * np.abs(u.vals) ** (p - 2.0) * u.vals
    g = (
        pgrad / ((p - 2.0) * pw)
        - (4.0 - p) * agrad / (2.0 * (p - 2.0) * a)
        - bgrad / (2.0 * b)
    )
    return q, g


def estimate_extremals(
    grid: RadialGrid, params: ProblemParams, search: SearchConfig | None = None
) -> ExtremalEstimate:
    """Two-phase maximization of q(u); returns lower bounds, never q* itself."""
    cfg = search if search is not None else SearchConfig()
    alphas = np.geomspace(cfg.alpha_lo, cfg.alpha_hi, cfg.n_alpha)
    best_q = -np.inf
    best_u = None
    best_tag = ""
    for tag, family in (("gaussian", gaussian), ("exponential", exponential)):
        for alpha in alphas:
            u = family(grid, float(alpha))
            q = _charge(u, params)
            if q > best_q:
                best_q, best_u, best_tag = q, u, tag
    if best_u is None:
        raise ArithmeticError("family scan produced no finite charge")

    # free ascent from the best family member
    scale = 1.0 / np.sqrt(h1_norm_sq(best_u, params))
    u = RadialFunction(grid, scale * best_u.vals)
    q_cur, g = _log_charge_gradient(u, params)
    step = cfg.step0
    iters = 0
    converged = False
    tag = best_tag
    for iters in range(1, cfg.ascent_iters + 1):
        direction = grid.h1_solve(params.omega, g)
        moved = False
        while step > 1e-14:
            cand = u.vals + step * direction
            nrm = np.sqrt(h1_norm_sq(RadialFunction(grid, cand), params))
            cand = cand / nrm
            try:
                q_new, g_new = _log_charge_gradient(RadialFunction(grid, cand), params)
            except (ArithmeticError, ValueError):
                step *= 0.5
                continue
            if q_new > q_cur:
                rel_gain = (q_new - q_cur) / q_cur
                u = RadialFunction(grid, cand)
                q_cur, g = q_new, g_new
                tag = "free ascent"
                step = min(step * 1.5, 10.0)
                moved = True
                if rel_gain < cfg.ascent_tol:
                    converged = True
                break
            step *= 0.5
        if not moved or converged:
            converged = converged or not moved
            break

    return ExtremalEstimate(
        q_star_lb=q_cur,
        q0_star_lb=fibering.charge_ratio(params.p) * q_cur,
        maximizer=u,
        family_tag=tag,
        iterations=iters,
        converged=converged,
    )


@dataclass(eq=False)
class CertificateReport:
    q: float
    samples: int
    above: int  # samples with q > q(u), must all be case three
    below: int  # samples with q < q(u), must all be case one
    boundary: int  # samples inside the classification band
    violations: list = field(default_factory=list)


def per_u_certificates(
    grid: RadialGrid, params: ProblemParams, q: float, samples: int = 100, seed: int = 0
) -> CertificateReport:
    """Exact per-direction fiber certificates at charge q.

    For every sampled profile, q > q(u) must give a strictly increasing
    fiber (case three: no nontrivial critical point on that ray) and
    q < q(u) the two-critical-point graph (case one).  Any deviation is
    recorded as a violation; an empty list certifies the sample set.
    """
    if q <= 0.0:
        raise ValueError("charge must be positive")
    rng = np.random.default_rng(seed)
    report = CertificateReport(q=q, samples=samples, above=0, below=0, boundary=0)
    for k in range(samples):
        u = random_bumps(grid, rng)
        c = fibering.fiber_coeffs(u, params)
        qu = fibering.q_of_u(c)
        rep = fibering.classify_fiber(c, q)
        if rep.case == "two":
            report.boundary += 1
            continue
        if q > qu:
            report.above += 1
            if rep.case != "three":
                report.violations.append((k, qu, rep.case))
        else:
            report.below += 1
            if rep.case != "one":
                report.violations.append((k, qu, rep.case))
    return report
