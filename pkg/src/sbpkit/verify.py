"""One-shot invariant suite over the toolkit's analytic guarantees.

Every check exercises an identity or inequality that the continuum theory
forces: the cube-norm interpolation bound, pointwise subordination of the
screened field, the D-norm route to the coupling integral, exact
homogeneities along rays, the degenerate-fiber energy identities, the
fiber-case partition in q, the zero-energy threshold, the Nehari norm
floor, and the mountain-pass coercivity decomposition.  Checks run over a
seeded batch of random bump profiles plus a canonical Gaussian and
exponential, so a report is reproducible bit-for-bit from its seed.

Failures are statuses, not exceptions; each failing check carries the
worst slack and the sample that produced it.  The report serializes to
canonical JSON (sorted keys, round-trip floats), so identical runs give
identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import fibering
from .energy import EnergyBreakdown, energy
from .extremal import estimate_extremals
from .grids import (
    FOUR_PI,
    ProblemParams,
    RadialFunction,
    RadialGrid,
    h1_norm_sq,
    lp_norm_p,
)
from .potential import check_subordination, cube_norm_bound, solve_potential
from .profiles import exponential, gaussian, random_bumps


@dataclass(eq=False)
class CheckResult:
    name: str
    status: str  # pass | fail | not-applicable
    worst_slack: float
    tolerance: float
    samples: int
    detail: str = ""


@dataclass(eq=False)
class VerifyReport:
    checks: list
    seed: int
    params: ProblemParams
    grid_summary: dict

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)


@dataclass(eq=False)
class CoercivityReport:
    energy: float
    lower_bound: float
    slack: float
    d_coefficient: float
    epsilon: float


def coercivity_certificate(
    u: RadialFunction, q: float, params: ProblemParams, epsilon: float | None = None
) -> CoercivityReport:
    """Evaluate 𝒥_q(u) ≥ ¼‖u‖² + D‖φ_u‖²_D + ∫f(u).

    D = q²/16π − ε⁴ and f(t) = ¼t² + (πε²/4)t³ − (1/p)t^p; the default ε
    makes D = q²/32π, the midpoint of the admissible range.  The ¼t²
    piece of f absorbs part of the mass term, which needs ω ≥ 1; smaller
    ω would demand a reweighted decomposition, so it is rejected.
    """
    if params.omega < 1.0:
        raise ValueError("coercivity decomposition as stated needs omega >= 1")
    if epsilon is None:
        epsilon = (q * q / (32.0 * math.pi)) ** 0.25
    d_coef = q * q / (16.0 * math.pi) - epsilon ** 4
    if d_coef <= 0.0:
        raise ValueError("epsilon too large: D = q^2/16pi - eps^4 must be positive")
    grid = u.grid
    sol = solve_potential(u, params)
    t = np.abs(u.vals)
    f_vals = 0.25 * t ** 2 + (math.pi * epsilon ** 2 / 4.0) * t ** 3 - t ** params.p / params.p
    lower = (
        0.25 * h1_norm_sq(u, params)
        + d_coef * sol.d_norm_sq
        + float(grid.w @ f_vals)
    )
    val = energy(u, q, params).total
    return CoercivityReport(
        energy=val,
        lower_bound=lower,
        slack=val - lower,
        d_coefficient=d_coef,
        epsilon=epsilon,
    )


def _suite_profiles(grid: RadialGrid, seed: int, samples: int) -> list[RadialFunction]:
    rng = np.random.default_rng(seed)
    profiles = [gaussian(grid, 1.0), gaussian(grid, 0.25), exponential(grid, 1.0)]
    while len(profiles) < samples:
        profiles.append(random_bumps(grid, rng))
    return profiles[:samples]


def _coulomb_oracle(u: RadialFunction, radii: np.ndarray) -> np.ndarray:
    """Independent Coulomb potential via cubic-spline antiderivatives."""
    r = u.grid.r
    m = u.vals * u.vals
    inner = CubicSpline(r, r * r * m).antiderivative()
    outer = CubicSpline(r, r * m).antiderivative()
    out = np.empty(radii.size)
    for i, rr in enumerate(radii):
        if rr == 0.0:
            out[i] = FOUR_PI * float(outer(r[-1]))
        else:
            out[i] = FOUR_PI * (
                float(inner(rr)) / rr + float(outer(r[-1])) - float(outer(rr))
            )
    return out


def run_suite(
    grid: RadialGrid, params: ProblemParams, seed: int = 0, samples: int = 100
) -> VerifyReport:
    """Run every invariant check; deterministic for fixed (grid, params, seed)."""
    profiles = _suite_profiles(grid, seed, samples)
    sols = [solve_potential(u, params) for u in profiles]
    checks: list[CheckResult] = []

    def add(name, tol, slacks, details=None):
        worst = float(np.min(slacks))
        st = "pass" if worst >= -tol else "fail"
        detail = ""
        if st == "fail" and details is not None:
            detail = details[int(np.argmin(slacks))]
        checks.append(CheckResult(name, st, worst, tol, len(slacks), detail))

    def skip(name, tol):
        checks.append(CheckResult(name, "not-applicable", 0.0, tol, 0))

    # interpolation bound for the cubic norm
    slacks, labels = [], []
    for k, (u, sol) in enumerate(zip(profiles, sols)):
        lhs, rhs = cube_norm_bound(u, sol)
        scale = max(1.0, abs(rhs))
        slacks.append((rhs - lhs) / scale)
        labels.append(f"sample {k}")
    add("cube-norm-bound", 1e-6, slacks, labels)

    # pointwise subordination a^2 lap(phi) <= phi, screened case only
    if params.a > 0.0:
        slacks, labels = [], []
        for k, sol in enumerate(sols):
            gap = check_subordination(sol, params)
            scale = max(1.0, float(np.max(np.abs(sol.phi.vals))))
            slacks.append(-gap / scale)
            labels.append(f"sample {k}")
        add("subordination", 1e-6, slacks, labels)
        skip("coulomb-reduction", 1e-6)
    else:
        skip("subordination", 1e-6)
        slacks, labels = [], []
        idx = np.unique(np.linspace(0, grid.n - 1, 12).astype(int))
        for k, (u, sol) in enumerate(zip(profiles[:5], sols[:5])):
            want = _coulomb_oracle(u, grid.r[idx])
            got = sol.phi.vals[idx]
            rel = np.max(np.abs(got - want) / np.maximum(np.abs(want), 1e-30))
            slacks.append(1e-6 - rel)
            labels.append(f"sample {k}")
        add("coulomb-reduction", 0.0, slacks, labels)

    # D-norm route to the coupling integral
    slacks, labels = [], []
    for k, sol in enumerate(sols):
        lhs = FOUR_PI * sol.b_coupling
        rel = abs(lhs - sol.d_norm_sq) / max(abs(lhs), 1e-300)
        slacks.append(1e-3 - rel)
        labels.append(f"sample {k}: rel mismatch {rel:.3e}")
    add("dnorm-identity", 0.0, slacks, labels)

    # positivity of the field and the coefficient triple
    slacks, labels = [], []
    for k, (u, sol) in enumerate(zip(profiles, sols)):
        scale = float(np.max(sol.phi.vals))
        slacks.append(float(np.min(sol.phi.vals)) / max(scale, 1e-300))
        slacks.append(sol.b_coupling / max(scale, 1e-300))
        labels.extend([f"sample {k} phi", f"sample {k} B"])
    add("positivity", 1e-12, slacks, labels)

    # exact homogeneities along a ray
    slacks, labels = [], []
    t = 1.37
    for k, (u, sol) in enumerate(zip(profiles[:10], sols[:10])):
        ut = RadialFunction(grid, t * u.vals)
        st = solve_potential(ut, params)
        a0, at = h1_norm_sq(u, params), h1_norm_sq(ut, params)
        p0, pt = lp_norm_p(u, params.p), lp_norm_p(ut, params.p)
        for got, want, tag in (
            (at, t ** 2 * a0, "A"),
            (st.b_coupling, t ** 4 * sol.b_coupling, "B"),
            (pt, t ** params.p * p0, "P"),
        ):
            slacks.append(1e-12 - abs(got - want) / abs(want))
            labels.append(f"sample {k} {tag}")
    add("ray-homogeneity", 0.0, slacks, labels)

    # identities on constructed degenerate Nehari points: at q = q(u) the
    # rescaling by t(u) puts the fiber root at 1 with psi'' = 0 there, so
    # P = 2A/(4-p) and J = (p-2)A/(4p)
    slacks, labels = [], []
    for k, u in enumerate(profiles[:20]):
        c = fibering.fiber_coeffs(u, params)
        qu = fibering.q_of_u(c)
        tu = fibering.t_of_u(c)
        u0 = RadialFunction(grid, tu * u.vals)
        a = h1_norm_sq(u0, params)
        pw = lp_norm_p(u0, params.p)
        val = energy(u0, qu, params).total
        slacks.append(1e-10 - abs(val - (params.p - 2.0) / (4.0 * params.p) * a) / a)
        labels.append(f"sample {k} energy identity")
        slacks.append(1e-10 - abs(pw - 2.0 * a / (4.0 - params.p)) / pw)
        labels.append(f"sample {k} power identity")
    add("nzero-identities", 0.0, slacks, labels)

    # fiber partition in q around q(u)
    slacks, labels = [], []
    for k, u in enumerate(profiles[:20]):
        c = fibering.fiber_coeffs(u, params)
        qu = fibering.q_of_u(c)
        ok = True
        for factor in np.linspace(0.5, 1.5, 21):
            rep = fibering.classify_fiber(c, factor * qu)
            want = "two" if abs(factor - 1.0) < 1e-9 else ("one" if factor < 1.0 else "three")
            ok = ok and rep.case == want
        slacks.append(1.0 if ok else -1.0)
        labels.append(f"sample {k}")
    add("fiber-partition", 0.0, slacks, labels)

    # zero-energy threshold: min psi < 0 exactly below q0(u)
    slacks, labels = [], []
    ts = np.geomspace(1e-3, 1e3, 4001)
    for k, u in enumerate(profiles[:20]):
        c = fibering.fiber_coeffs(u, params)
        q0u = fibering.q0_of_u(c)
        t0 = fibering.t0_of_u(c)
        scale = h1_norm_sq(u, params) * t0 ** 2
        below = float(np.min(fibering.psi(c, 0.995 * q0u, t0 * ts)))
        above = float(np.min(fibering.psi(c, 1.005 * q0u, t0 * ts)))
        at = float(np.min(fibering.psi(c, q0u, t0 * ts)))
        ok = below < 0.0 and above >= -1e-10 * scale and at >= -1e-8 * scale
        slacks.append(1.0 if ok else -1.0)
        labels.append(f"sample {k}: below {below:.2e} at {at:.2e} above {above:.2e}")
    add("zero-energy-threshold", 0.0, slacks, labels)

    # Nehari floor via the empirical embedding constant
    ratios = []
    for u in profiles:
        a = h1_norm_sq(u, params)
        ratios.append(lp_norm_p(u, params.p) / a ** (0.5 * params.p))
    c_emb = max(ratios)
    floor = c_emb ** (-1.0 / (params.p - 2.0))
    slacks, labels = [], []
    for k, u in enumerate(profiles[:20]):
        c = fibering.fiber_coeffs(u, params)
        qu = fibering.q_of_u(c)
        rep = fibering.classify_fiber(c, 0.9 * qu)
        for t in (rep.t_minus, rep.t_plus):
            nrm = t * math.sqrt(c.h1)
            slacks.append((nrm - floor) / floor)
            labels.append(f"sample {k} t={t:.3e}")
    add("nehari-floor", 1e-9, slacks, labels)

    # energy breakdown consistency
    slacks, labels = [], []
    for k, u in enumerate(profiles[:10]):
        br: EnergyBreakdown = energy(u, 1.0, params)
        scale = max(1.0, abs(br.quad), abs(br.coupling), abs(br.power))
        slacks.append(1e-12 - abs(br.total - (br.quad + br.coupling - br.power)) / scale)
        labels.append(f"sample {k}")
    add("breakdown-consistency", 0.0, slacks, labels)

    # coercivity decomposition at q = 1
    if params.omega >= 1.0:
        slacks, labels = [], []
        for k, u in enumerate(profiles):
            rep = coercivity_certificate(u, 1.0, params)
            scale = max(1.0, abs(rep.energy))
            slacks.append(rep.slack / scale)
            labels.append(f"sample {k}")
        add("coercivity", 1e-8, slacks, labels)
    else:
        skip("coercivity", 1e-8)

    # global zero-energy level at the estimated threshold
    est = estimate_extremals(grid, params)
    slacks, labels = [], []
    for k, u in enumerate(profiles[:20]):
        c = fibering.fiber_coeffs(u, params)
        t0 = fibering.t0_of_u(c)
        scale = h1_norm_sq(u, params) * t0 ** 2
        low = float(np.min(fibering.psi(c, est.q0_star_lb, t0 * ts)))
        slacks.append(low / scale + 1e-8)
        labels.append(f"sample {k}: min psi {low:.3e}")
    add("zero-energy-level", 0.0, slacks, labels)

    return VerifyReport(
        checks=checks,
        seed=seed,
        params=params,
        grid_summary={"r_max": grid.r_max, "n": grid.n, "scheme": grid.scheme},
    )


def report_to_dict(report: VerifyReport) -> dict:
    return {
        "seed": report.seed,
        "params": {"p": report.params.p, "a": report.params.a, "omega": report.params.omega},
        "grid": report.grid_summary,
        "passed": report.passed,
        "checks": [
            {
                "name": c.name,
                "status": c.status,
                "worst_slack": c.worst_slack,
                "tolerance": c.tolerance,
                "samples": c.samples,
                "detail": c.detail,
            }
            for c in report.checks
        ],
    }


def report_to_json(report: VerifyReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True)
