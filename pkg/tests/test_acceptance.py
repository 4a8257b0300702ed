"""Acceptance gate: one test per top-level criterion, one verdict line each.

Each test prints `[criterion N] PASS/FAIL: <label>` so a transcript of the
run reads as a checklist.  Tolerances are stated inline next to each
assertion; grids are the coarsest that hold the stated tolerance with
margin, keeping the whole gate under a couple of minutes.
"""

import json
import math
import time

import numpy as np
import pytest

from sbpkit.cli import SWEEP_HEADER, main
from sbpkit.extremal import estimate_extremals, per_u_certificates
from sbpkit.fibering import (
    FiberCoeffs,
    charge_ratio,
    classify_fiber,
    fiber_coeffs,
    fiber_constants,
    psi,
    q0_of_u,
    q_of_u,
    t0_of_u,
    t_of_u,
)
from sbpkit.grids import FOUR_PI, ProblemParams, make_grid
from sbpkit.potential import check_subordination, cube_norm_bound, solve_potential
from sbpkit.profiles import gaussian, random_bumps
from sbpkit.solve import continue_branch, find_minimizer, mountain_pass
from sbpkit.verify import coercivity_certificate


def _verdict(num: int, label: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    tail = f"  ({detail})" if detail else ""
    print(f"[criterion {num}] {status}: {label}{tail}")
    assert ok, f"criterion {num} failed: {label} {detail}"


@pytest.fixture(scope="module")
def grid_fine():
    return make_grid(40.0, 2048)


@pytest.fixture(scope="module")
def grid_desk():
    return make_grid(40.0, 1024)


@pytest.fixture(scope="module")
def params():
    return ProblemParams(p=2.5, a=1.0, omega=1.0)


@pytest.fixture(scope="module")
def thresholds(grid_desk, params):
    return estimate_extremals(grid_desk, params)


def test_criterion_1_micro_oracle():
    start = time.perf_counter()
    c = FiberCoeffs(h1=1.0, coupling=1.0, power=1.0, p=3.0)
    ok = (
        abs(t_of_u(c) - 2.0) < 1e-12
        and abs(q_of_u(c) - 0.5) < 1e-12
        and abs(t0_of_u(c) - 3.0) < 1e-12
        and abs(q0_of_u(c) - math.sqrt(2.0) / 3.0) < 1e-12
    )
    rep = classify_fiber(c, 0.4)
    ok = ok and rep.case == "one"
    ok = ok and abs(rep.t_minus - 1.25) < 1e-9 and abs(rep.t_plus - 5.0) < 1e-9
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 1.0
    _verdict(1, "closed-form micro-oracle on the unit triple", ok, f"{elapsed:.3f}s")


def test_criterion_2_constant_identities():
    ok = True
    for p in (2.2, 2.5, 3.0):
        want = math.sqrt(2.0) * (2.0 / p) ** (1.0 / (p - 2.0))
        ok = ok and abs(charge_ratio(p) - want) < 1e-12 * want
        c_p, c_0p = fiber_constants(p)
        ok = ok and c_0p < c_p
    rng = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(50):
        a, b, pw = rng.uniform(0.1, 10.0, 3)
        p = rng.uniform(2.1, 3.0)
        c = FiberCoeffs(h1=a, coupling=b, power=pw, p=p)
        c_p, c_0p = fiber_constants(p)
        exp_a = (4.0 - p) / (2.0 * (p - 2.0))
        denom = a ** exp_a * math.sqrt(4.0 * math.pi * b)
        closed_q = c_p * pw ** (1.0 / (p - 2.0)) / denom
        closed_q0 = c_0p * pw ** (1.0 / (p - 2.0)) / denom
        worst = max(worst, abs(q_of_u(c) - closed_q) / closed_q)
        worst = max(worst, abs(q0_of_u(c) - closed_q0) / closed_q0)
    ok = ok and worst < 1e-12
    _verdict(2, "printed constants match the degenerate-fiber system", ok, f"worst rel {worst:.2e}")


def test_criterion_3_potential_identities(grid_fine):
    start = time.perf_counter()
    u = gaussian(grid_fine, 1.0)
    ok = True
    details = []
    for a in (1.0, 0.0):
        sol = solve_potential(u, ProblemParams(p=2.5, a=a, omega=1.0))
        lhs = FOUR_PI * sol.b_coupling
        rel = abs(lhs - sol.d_norm_sq) / lhs
        details.append(f"a={a} identity {rel:.1e}")
        ok = ok and rel < 1e-3
    sol0 = solve_potential(u, ProblemParams(p=2.5, a=0.0, omega=1.0))
    origin = abs(sol0.phi.vals[0] - math.pi) / math.pi
    ok = ok and origin < 1e-6
    sol_eps = solve_potential(u, ProblemParams(p=2.5, a=1e-3, omega=1.0))
    limit = float(np.max(np.abs(sol_eps.phi.vals - sol0.phi.vals)) / np.max(sol0.phi.vals))
    ok = ok and limit < 1e-3
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 10.0
    details.append(f"origin {origin:.1e}, limit {limit:.1e}, {elapsed:.2f}s")
    _verdict(3, "D-norm identity / origin value / screening limit", ok, "; ".join(details))


def test_criterion_4_inequality_suite(grid_desk, params):
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    profiles = [gaussian(grid_desk, 1.0)] + [random_bumps(grid_desk, rng) for _ in range(99)]
    worst_cube = math.inf
    worst_sub = math.inf
    worst_coer = math.inf
    for u in profiles:
        sol = solve_potential(u, params)
        lhs, rhs = cube_norm_bound(u, sol)
        worst_cube = min(worst_cube, rhs - lhs)
        worst_sub = min(worst_sub, -check_subordination(sol, params))
        rep = coercivity_certificate(u, 1.0, params)
        worst_coer = min(worst_coer, rep.slack / max(1.0, abs(rep.energy)))
    elapsed = time.perf_counter() - start
    ok = worst_cube >= -1e-6 and worst_sub >= -1e-6 and worst_coer >= -1e-8 and elapsed < 120.0
    _verdict(
        4,
        "cube-norm, subordination, coercivity over 100 profiles",
        ok,
        f"slacks {worst_cube:.2e}/{worst_sub:.2e}/{worst_coer:.2e}, {elapsed:.1f}s",
    )


def test_criterion_5_fiber_partition(grid_desk, params):
    rng = np.random.default_rng(7)
    violations = 0
    for _ in range(20):
        u = random_bumps(grid_desk, rng)
        c = fiber_coeffs(u, params)
        qu = q_of_u(c)
        for factor in np.linspace(0.5, 1.5, 100):
            if abs(factor - 1.0) < 1e-9:
                continue
            rep = classify_fiber(c, factor * qu)
            want = "one" if factor < 1.0 else "three"
            violations += rep.case != want
        if classify_fiber(c, qu).case != "two":
            violations += 1
        # zero-energy threshold: the fiber dips negative exactly below q0
        q0 = q0_of_u(c)
        ts = t0_of_u(c) * np.geomspace(1e-3, 1e3, 3001)
        scale = c.h1 * t0_of_u(c) ** 2
        if not float(np.min(psi(c, 0.995 * q0, ts))) < 0.0:
            violations += 1
        if not float(np.min(psi(c, 1.005 * q0, ts))) >= -1e-8 * scale:
            violations += 1
    _verdict(5, "fiber partition and zero-energy threshold", violations == 0, f"{violations} violations")


def test_criterion_6_two_solution_reproduction(grid_desk, params, thresholds):
    q_lo = 0.5 * thresholds.q0_star_lb
    q_hi = 1.01 * thresholds.q0_star_lb
    details = []

    start = time.perf_counter()
    ground = find_minimizer(grid_desk, q_lo, params, thresholds.maximizer)
    ok = ground.status == "converged"
    rec = ground.record
    ok = ok and rec.energy < 0.0 and rec.nehari == "plus" and rec.residual_norm <= 1e-6
    mp = mountain_pass(grid_desk, q_lo, params, rec)
    ok = ok and mp.status == "converged"
    ok = ok and mp.record.energy > 0.0 > rec.energy and mp.record.nehari == "minus"
    ok = ok and mp.record.residual_norm <= 1e-6
    details.append(f"q=0.5q0: J={rec.energy:.4g}/{mp.record.energy:.4g}, {time.perf_counter() - start:.0f}s")

    start = time.perf_counter()
    local = find_minimizer(grid_desk, q_hi, params, thresholds.maximizer)
    ok = ok and local.status == "converged" and local.record.energy > 0.0
    mp2 = mountain_pass(grid_desk, q_hi, params, local.record)
    ok = ok and mp2.status == "converged"
    ok = ok and mp2.record.energy > local.record.energy > 0.0
    details.append(f"q=1.01q0: J={local.record.energy:.4g}/{mp2.record.energy:.4g}, {time.perf_counter() - start:.0f}s")

    _verdict(6, "two-solution structure on both sides of the threshold", ok, "; ".join(details))


def test_criterion_7_sign_flip_and_monotone_level(grid_desk, params, thresholds):
    lo = 0.85 * thresholds.q0_star_lb
    hi = 1.015 * thresholds.q0_star_lb
    branch = continue_branch(grid_desk, lo, hi, 9, params, seed_profile=thresholds.maximizer)
    signs = np.sign(branch.jhat)
    flips = int(np.sum(signs[1:] != signs[:-1]))
    diffs = np.diff(branch.jhat)
    scale = np.maximum(1.0, np.abs(branch.jhat[:-1]))
    monotone = bool(np.all(diffs >= -1e-8 * scale))
    ok = flips == 1 and monotone and all(f == "" for f in branch.flags)
    _verdict(7, "single sign flip and nondecreasing level across the threshold", ok,
             f"flips={flips}, min step {np.min(diffs):.3g}")


def test_criterion_8_nonexistence_consistency(grid_desk, params, thresholds):
    q = 3.0 * thresholds.q_star_lb
    rng = np.random.default_rng(21)
    statuses = []
    for _ in range(20):
        seed = random_bumps(grid_desk, rng)
        statuses.append(find_minimizer(grid_desk, q, params, seed).status)
    all_collapse = all(s == "trivial-attractor" for s in statuses)
    certs = per_u_certificates(grid_desk, params, q, samples=50)
    ok = all_collapse and certs.above == certs.samples and certs.violations == []
    _verdict(8, "collapse and case-three certificates at 3x the extremal charge", ok,
             f"collapses 20/20={all_collapse}, above={certs.above}/{certs.samples}")


def test_criterion_9_byte_determinism(tmp_path, capsys):
    config = {
        "params": {"p": 2.5, "a": 1.0, "omega": 1.0},
        "grid": {"r_max": 40.0, "n": 256},
        "sweep": {"q_lo": 0.02, "q_hi": 0.03, "steps": 2},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    outs = []
    for tag in ("d1", "d2"):
        code = main(["--config", str(path), "--out", str(tmp_path / tag), "sweep"])
        assert code == 0
        outs.append((tmp_path / tag / "sweep.csv").read_bytes())
    capsys.readouterr()
    identical = outs[0] == outs[1]
    header_ok = outs[0].decode().splitlines()[0] == SWEEP_HEADER
    ok = identical and header_ok
    _verdict(9, "rerun with identical config and seed is byte-identical", ok)
