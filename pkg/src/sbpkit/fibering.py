"""Fiber maps ψ(t) = 𝒥_q(tu) and the per-direction extremal charges.

Because the potential scales as φ_{tu} = t²φ_u, the energy along a ray is
the scalar quartic-plus-power map

    ψ(t) = (A/2)t² + (q²B/4)t⁴ − (P/p)t^p,
    A = ‖u‖²,  B = ∫φ_u u²,  P = ‖u‖_p^p,

so everything about critical points on a ray reduces to algebra on the
coefficient triple.  ψ'(t) = t·h(t) with h(t) = A + q²Bt² − Pt^{p−2}, and
for 2 < p < 4, h falls from A to a single minimum at

    t_h = ((p−2)P / (2q²B))^{1/(4−p)}

and rises afterwards.  The sign of h(t_h) therefore decides the whole
graph: negative gives a local max t⁻ and local min t⁺ of ψ (case one),
zero gives a single degenerate inflection (case two), positive makes ψ
strictly increasing (case three).

Two distinguished charges per direction come out of this structure.  q(u)
is the charge at which the fiber degenerates (case two); q0(u) < q(u) is
the charge at which the fiber's minimum touches level zero.  Both are
0-homogeneous in u.  Their closed forms carry the constants

    C_p   = 2√(p−2) √π (4−p)^{(4−p)/(2(p−2))} / 2^{1/(p−2)},
    C_0p  = 2^{3/2} √(p−2) √π (4−p)^{(4−p)/(2(p−2))} / p^{1/(p−2)},

with the fixed ratio C_0p/C_p = √2 (2/p)^{1/(p−2)} < 1 on 2 < p ≤ 3.
Every q(u)/q0(u) evaluation recomputes the value from the defining
stationarity system and cross-checks it against these printed constants,
so a transcription error in either route cannot pass silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import FOUR_PI, ProblemParams, RadialFunction, h1_norm_sq, lp_norm_p
from .potential import solve_potential

CASE_BAND = 1e-9
CROSS_CHECK_TOL = 5e-12
REL_ROOT_TOL = 1e-12


@dataclass(frozen=True)
class FiberCoeffs:
    """Coefficient triple (‖u‖², ∫φ_u u², ‖u‖_p^p) with its exponent."""

    h1: float
    coupling: float
    power: float
    p: float

    def __post_init__(self) -> None:
        if not 2.0 < self.p <= 3.0:
            raise ValueError("exponent must lie in (2, 3]")
        for name in ("h1", "coupling", "power"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be finite and positive")


@dataclass(eq=False)
class FiberingReport:
    """Full classification of one fiber at one charge."""

    case: str  # one | two | three
    q: float
    t_minus: float | None
    t_plus: float | None
    t_inflect: float | None
    q_of_u: float
    q0_of_u: float
    t_of_u: float
    t0_of_u: float
    psi_at_roots: tuple[float, ...]


def fiber_coeffs(u: RadialFunction, params: ProblemParams) -> FiberCoeffs:
    if not np.any(u.vals):
        raise ValueError("fiber coefficients need a nontrivial function")
    return FiberCoeffs(
        h1=h1_norm_sq(u, params),
        coupling=solve_potential(u, params).b_coupling,
        power=lp_norm_p(u, params.p),
        p=params.p,
    )


def psi(c: FiberCoeffs, q: float, t) -> float:
    # the quartic term is grouped as (q t²)² so near-degenerate fibers with
    # enormous ray parameters and tiny charges stay representable
    t = np.asarray(t, dtype=np.float64)
    val = 0.5 * c.h1 * t ** 2 + 0.25 * c.coupling * (q * t * t) ** 2 - c.power * t ** c.p / c.p
    return float(val) if val.ndim == 0 else val


def psi_prime(c: FiberCoeffs, q: float, t) -> float:
    t = np.asarray(t, dtype=np.float64)
    val = c.h1 * t + c.coupling * (q * t) * (q * t) * t - c.power * t ** (c.p - 1.0)
    return float(val) if val.ndim == 0 else val


def psi_second(c: FiberCoeffs, q: float, t) -> float:
    t = np.asarray(t, dtype=np.float64)
    val = c.h1 + 3.0 * c.coupling * (q * t) * (q * t) - (c.p - 1.0) * c.power * t ** (c.p - 2.0)
    return float(val) if val.ndim == 0 else val


def _h(c: FiberCoeffs, q: float, t: float) -> float:
    return c.h1 + c.coupling * (q * t) * (q * t) - c.power * t ** (c.p - 2.0)


def _bisect(f, lo: float, hi: float) -> float:
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= REL_ROOT_TOL * mid:
            return mid
        fm = f(mid)
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classify_fiber(c: FiberCoeffs, q: float) -> FiberingReport:
    """Decide the fiber's graph type and locate its critical points.

    The roots are found by bisection on the two monotone branches of h,
    which stays robust arbitrarily close to the double-root boundary.
    """
    if q <= 0.0:
        raise ValueError("charge must be positive")
    p = c.p
    th = ((p - 2.0) * c.power / (2.0 * q * q * c.coupling)) ** (1.0 / (4.0 - p))
    hmin = _h(c, q, th)
    scale = c.h1 + q * q * c.coupling * th * th + c.power * th ** (p - 2.0)
    qs, q0s = q_of_u(c), q0_of_u(c)
    ts, t0s = t_of_u(c), t0_of_u(c)
    common = dict(q=q, q_of_u=qs, q0_of_u=q0s, t_of_u=ts, t0_of_u=t0s)
    if abs(hmin) <= CASE_BAND * scale:
        return FiberingReport(
            case="two", t_minus=None, t_plus=None, t_inflect=th,
            psi_at_roots=(psi(c, q, th),), **common,
        )
    if hmin > 0.0:
        return FiberingReport(
            case="three", t_minus=None, t_plus=None, t_inflect=None,
            psi_at_roots=(), **common,
        )
    f = lambda t: _h(c, q, t)
    t_minus = _bisect(f, th * 1e-14, th)
    hi = 2.0 * th
    while f(hi) <= 0.0:
        hi *= 2.0
    t_plus = _bisect(f, th, hi)
    return FiberingReport(
        case="one", t_minus=t_minus, t_plus=t_plus, t_inflect=None,
        psi_at_roots=(psi(c, q, t_minus), psi(c, q, t_plus)), **common,
    )


def fiber_constants(p: float) -> tuple[float, float]:
    """The printed closed-form constants (C_p, C_0p) of q(u) and q0(u)."""
    if not 2.0 < p <= 3.0:
        raise ValueError("exponent must lie in (2, 3]")
    shared = 2.0 * math.sqrt(p - 2.0) * math.sqrt(math.pi) * (4.0 - p) ** (
        (4.0 - p) / (2.0 * (p - 2.0))
    )
    c_p = shared / 2.0 ** (1.0 / (p - 2.0))
    c_0p = shared * math.sqrt(2.0) / p ** (1.0 / (p - 2.0))
    if not c_0p < c_p:
        raise ArithmeticError("constant ordering C_0p < C_p violated")
    return c_p, c_0p


def _closed_form_charge(c: FiberCoeffs, constant: float) -> float:
    # q = C · ‖u‖_p^{p/(p−2)} / ( ‖u‖^{(4−p)/(p−2)} · ‖φ_u‖_D ),  ‖φ_u‖_D = √(4πB)
    p = c.p
    return (
        constant
        * c.power ** (1.0 / (p - 2.0))
        / (c.h1 ** ((4.0 - p) / (2.0 * (p - 2.0))) * math.sqrt(FOUR_PI * c.coupling))
    )


def _cross_check(value: float, printed: float, what: str) -> float:
    if abs(value - printed) > CROSS_CHECK_TOL * abs(printed):
        raise ArithmeticError(
            f"{what}: stationarity system gives {value!r}, printed constant {printed!r}"
        )
    return value


def t_of_u(c: FiberCoeffs) -> float:
    """Scale of the degenerate critical point: t^{p−2} = 2A/((4−p)P)."""
    return (2.0 * c.h1 / ((4.0 - c.p) * c.power)) ** (1.0 / (c.p - 2.0))


def q_of_u(c: FiberCoeffs) -> float:
    """Charge at which the fiber degenerates to a single inflection.

    Solves ψ'(t) = ψ''(t) = 0 for (t, q); the result is cross-checked
    against the printed C_p closed form on every call.
    """
    t = t_of_u(c)
    q = math.sqrt((c.p - 2.0) * c.h1 / ((4.0 - c.p) * c.coupling)) / t
    return _cross_check(q, _closed_form_charge(c, fiber_constants(c.p)[0]), "q(u)")


def t0_of_u(c: FiberCoeffs) -> float:
    """Scale of the zero-energy critical point: t0^{p−2} = pA/((4−p)P)."""
    return (c.p * c.h1 / ((4.0 - c.p) * c.power)) ** (1.0 / (c.p - 2.0))


def q0_of_u(c: FiberCoeffs) -> float:
    """Charge at which the fiber has a critical point at level zero.

    Solves ψ(t) = ψ'(t) = 0; cross-checked against the printed C_0p
    closed form on every call.
    """
    t0 = t0_of_u(c)
    q0 = math.sqrt(2.0 * (c.p - 2.0) * c.power * t0 ** (c.p - 4.0) / (c.p * c.coupling))
    return _cross_check(q0, _closed_form_charge(c, fiber_constants(c.p)[1]), "q0(u)")


def charge_ratio(p: float) -> float:
    """q0(u)/q(u) = √2 (2/p)^{1/(p−2)}, the same for every direction u."""
    if not 2.0 < p <= 3.0:
        raise ValueError("exponent must lie in (2, 3]")
    return math.sqrt(2.0) * (2.0 / p) ** (1.0 / (p - 2.0))
