"""Two-solution solvers: the Nehari-plus minimizer and the mountain pass.

For charges below the zero-energy threshold the functional has a negative
global minimum; slightly above it, a positive local minimum survives on
the Nehari-plus set, and in both regimes a second critical point of
saddle type sits at the mountain-pass level.  The solvers mirror that
structure:

* find_minimizer runs preconditioned descent (Barzilai-Borwein step with
  an Armijo backtrack) interleaved with fiber polish: periodically the
  iterate is rescaled to the t⁺ root of its own fiber map, which is the
  exact ray-minimum and costs one scalar root-find.  The final iterate is
  rescaled to the t⁺ root once more, which places it on the Nehari set to
  the root-finder's accuracy.

* mountain_pass deforms a discrete path from 0 to the minimizer: the
  highest node takes one descending step, the path is re-spread to
  uniform H¹ arclength, and the loop stops when the highest node is
  nearly critical.  That node is then polished by descent projected onto
  the Nehari-minus branch (each step rescales to the t⁻ root), which
  converges to the saddle because the branch is a natural constraint.

Descent that sinks toward zero is reported as a trivial attractor, using
the Nehari floor: no nontrivial critical point has H¹ norm below
C̃ = C_emb^{−1/(p−2)}, so falling under half that floor certifies the
basin.  The same embedding constant gives the mountain-pass barrier
radius ρ = C̃/√2 and height M = ℓ(ρ²), ℓ(A) = A/2 − (C_emb/p)A^{p/2},
both reported as grid-empirical diagnostics rather than certified
constants.

Solvers return status records instead of raising: descent landing in the
zero basin or a path losing its saddle are expected outcomes in parts of
the (q, p) plane, not errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, minres

from . import fibering
from .energy import embedding_estimate, nehari_classify
from .extremal import estimate_extremals
from .grids import ProblemParams, RadialFunction, RadialGrid, h1_norm_sq
from .potential import coupling_and_gradient, kernel_apply, kernel_apply_t
from .profiles import gaussian

ARMIJO = 1e-4


@dataclass(frozen=True)
class SolveOptions:
    grad_tol: float = 1e-7
    res_tol: float = 1e-6
    max_iters: int = 2000
    polish_every: int = 10
    collapse_factor: float = 0.5
    path_nodes: int = 25
    path_grad_tol: float = 1e-5
    path_max_iters: int = 400
    seed: int = 0
    c_emb: float | None = None

    def __post_init__(self) -> None:
        if min(self.grad_tol, self.res_tol) <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.path_nodes < 5:
            raise ValueError("path needs at least 5 nodes")


@dataclass(eq=False)
class SolutionRecord:
    q: float
    u: RadialFunction
    energy: float
    residual_norm: float
    nehari: str
    kind: str  # global-min | local-min | mountain-pass
    mp_level: float | None = None


@dataclass(eq=False)
class SolveResult:
    status: str  # converged | trivial-attractor | geometry-lost | max-iters
    record: SolutionRecord | None
    iterations: int
    grad_norm: float
    norm_floor: float


@dataclass(eq=False)
class SolutionBranch:
    qs: np.ndarray
    minimizers: list
    passes: list
    jhat: np.ndarray
    flags: list


class _Objective:
    """One-stop evaluation of 𝒥_q with its exact discrete gradient."""

    def __init__(self, grid: RadialGrid, q: float, params: ProblemParams):
        self.grid = grid
        self.q = q
        self.params = params
        self.stiff = grid.stiffness()

    def coeffs(self, vals: np.ndarray) -> tuple[float, float, float]:
        u = RadialFunction(self.grid, vals)
        a = h1_norm_sq(u, self.params)
        b = coupling_and_gradient(u, self.params)[0].b_coupling
        p = float(self.grid.w @ np.abs(vals) ** self.params.p)
        return a, b, p

    def value(self, vals: np.ndarray) -> float:
        a, b, p = self.coeffs(vals)
        return 0.5 * a + 0.25 * self.q ** 2 * b - p / self.params.p

    def value_grad(self, vals: np.ndarray):
        grid, params, q = self.grid, self.params, self.q
        u = RadialFunction(grid, vals)
        sol, bgrad = coupling_and_gradient(u, params)
        a = h1_norm_sq(u, params)
        pnorm = float(grid.w @ np.abs(vals) ** params.p)
        val = 0.5 * a + 0.25 * q * q * sol.b_coupling - pnorm / params.p
        grad = (
            self.stiff @ vals
            + params.omega * grid.w * vals
            + 0.25 * q * q * bgrad
            - grid.w * np.abs(vals) ** (params.p - 2.0) * vals
        )
        return val, grad

    def precondition(self, grad: np.ndarray) -> np.ndarray:
        return self.grid.h1_solve(self.params.omega, grad)

    def res_norm(self, grad: np.ndarray) -> float:
        return float(np.sqrt(np.sum(grad * grad / self.grid.w)))

    def hessian_operator(self, vals: np.ndarray) -> LinearOperator:
        """Exact Hessian of the discrete energy at vals as a matvec."""
        grid, params, q = self.grid, self.params, self.q
        w = grid.w
        m = vals * vals
        phi = kernel_apply(grid, params, m)
        adj = kernel_apply_t(grid, params, w * m)
        lin_extra = (
            params.omega * w
            + 0.5 * q * q * (w * phi + adj)
            - (params.p - 1.0) * w * np.abs(vals) ** (params.p - 2.0)
        )

        def mv(v: np.ndarray) -> np.ndarray:
            uv = 2.0 * vals * v
            quad = w * kernel_apply(grid, params, uv) + kernel_apply_t(grid, params, w * uv)
            return self.stiff @ v + lin_extra * v + 0.5 * q * q * vals * quad

        n = grid.n
        return LinearOperator((n, n), matvec=mv, dtype=np.float64)

    def newton_polish(
        self, vals: np.ndarray, grad: np.ndarray, res_target: float, max_steps: int = 12
    ) -> tuple[np.ndarray, np.ndarray]:
        """Damped Newton on the gradient itself.

        Energy-comparison descent bottoms out once energy differences fall
        under eps·|𝒥|; this tail iterates on ‖∇𝒥‖ instead, with MINRES on
        the exact Hessian (symmetric, possibly indefinite at a saddle) and
        the H¹ operator as preconditioner, so critical points are resolved
        to tolerances far below the energy floor.
        """
        grid, params = self.grid, self.params
        pre = LinearOperator(
            (grid.n, grid.n),
            matvec=lambda x: grid.h1_solve(params.omega, x),
            dtype=np.float64,
        )
        res = self.res_norm(grad)
        for _ in range(max_steps):
            if res <= res_target:
                break
            hess = self.hessian_operator(vals)
            delta, _info = minres(hess, -grad, M=pre, maxiter=200, rtol=1e-10)
            s = 1.0
            improved = False
            for _ in range(12):
                cand = vals + s * delta
                _cval, cgrad = self.value_grad(cand)
                cres = self.res_norm(cgrad)
                if cres < res:
                    vals, grad, res = cand, cgrad, cres
                    improved = True
                    break
                s *= 0.5
            if not improved:
                break
        return vals, grad


def _norm_floor(grid: RadialGrid, params: ProblemParams, opts: SolveOptions) -> float:
    c_emb = opts.c_emb
    if c_emb is None:
        key = ("c_emb", params.p, params.omega)
        c_emb = grid._kernel_cache.get(key)
        if c_emb is None:
            c_emb = embedding_estimate(grid, params)
            grid._kernel_cache[key] = c_emb
    return c_emb ** (-1.0 / (params.p - 2.0))


def barrier_estimate(grid: RadialGrid, params: ProblemParams, opts: SolveOptions | None = None):
    """Empirical mountain-pass barrier (ρ, M): 𝒥_q ≥ M on ‖u‖ = ρ for every q."""
    opts = opts or SolveOptions()
    floor = _norm_floor(grid, params, opts)
    c_emb = floor ** -(params.p - 2.0)
    rho = floor / math.sqrt(2.0)
    a = rho * rho
    m_barrier = 0.5 * a - (c_emb / params.p) * a ** (0.5 * params.p)
    return rho, m_barrier


def _fiber_rescale(obj: _Objective, vals: np.ndarray, root: str) -> np.ndarray | None:
    """Rescale to the t⁺ or t⁻ root of the iterate's own fiber, if present."""
    a, b, p = obj.coeffs(vals)
    if a == 0.0 or p == 0.0:
        return None
    c = fibering.FiberCoeffs(h1=a, coupling=b, power=p, p=obj.params.p)
    rep = fibering.classify_fiber(c, obj.q)
    if rep.case == "one":
        t = rep.t_plus if root == "plus" else rep.t_minus
    elif rep.case == "two":
        t = rep.t_inflect
    else:
        return None
    return t * vals


def find_minimizer(
    grid: RadialGrid,
    q: float,
    params: ProblemParams,
    seed_profile: RadialFunction | None = None,
    opts: SolveOptions | None = None,
) -> SolveResult:
    """Descend 𝒥_q to the Nehari-plus minimizer, or report the zero basin."""
    if q <= 0.0:
        raise ValueError("charge must be positive")
    opts = opts or SolveOptions()
    obj = _Objective(grid, q, params)
    floor = _norm_floor(grid, params, opts)

    seed = seed_profile if seed_profile is not None else gaussian(grid, 1.0)
    if not np.any(seed.vals):
        raise ValueError("seed profile must be nontrivial")
    vals = seed.vals.copy()
    scaled = _fiber_rescale(obj, vals, "plus")
    if scaled is not None:
        vals = scaled

    val, grad = obj.value_grad(vals)
    step = 1.0
    prev_vals = prev_grad = None
    gnorm = math.inf
    iters = 0
    for iters in range(1, opts.max_iters + 1):
        direction = obj.precondition(grad)
        gnorm = math.sqrt(max(float(direction @ grad), 0.0))
        # the energy comparison below cannot see decreases under eps·|J|,
        # so stop descending once the gradient nears that floor; the
        # Newton tail takes over from there
        if gnorm <= max(0.25 * opts.grad_tol, 50.0 * math.sqrt(np.finfo(float).eps * abs(val))):
            break
        unorm = math.sqrt(h1_norm_sq(RadialFunction(grid, vals), params))
        if unorm < opts.collapse_factor * floor:
            return SolveResult("trivial-attractor", None, iters, gnorm, floor)
        if prev_vals is not None:
            du = vals - prev_vals
            dg = grad - prev_grad
            denom = float(du @ dg)
            if denom > 0.0:
                step = float(du @ (obj.stiff @ du) + params.omega * (grid.w * du) @ du) / denom
        prev_vals, prev_grad = vals.copy(), grad.copy()
        accepted = False
        s = step
        for _ in range(60):
            cand = vals - s * direction
            cval = obj.value(cand)
            if cval <= val - ARMIJO * s * gnorm ** 2:
                vals = cand
                val, grad = obj.value_grad(vals)
                accepted = True
                break
            s *= 0.5
        if not accepted:
            break
        if iters % opts.polish_every == 0:
            scaled = _fiber_rescale(obj, vals, "plus")
            if scaled is not None:
                sval = obj.value(scaled)
                if sval < val:
                    vals = scaled
                    val, grad = obj.value_grad(vals)
                    prev_vals = prev_grad = None

    unorm = math.sqrt(h1_norm_sq(RadialFunction(grid, vals), params))
    if unorm < opts.collapse_factor * floor:
        return SolveResult("trivial-attractor", None, iters, gnorm, floor)

    vals, grad = obj.newton_polish(vals, grad, 0.25 * opts.res_tol)
    val = obj.value(vals)

    # land exactly on the Nehari set
    scaled = _fiber_rescale(obj, vals, "plus")
    if scaled is not None and obj.value(scaled) <= val + 1e-12 * max(1.0, abs(val)):
        vals = scaled
        val, grad = obj.value_grad(vals)
    direction = obj.precondition(grad)
    gnorm = math.sqrt(max(float(direction @ grad), 0.0))
    res = obj.res_norm(grad)

    u = RadialFunction(grid, vals)
    verdict = nehari_classify(u, q, params)
    kind = "global-min" if val < 0.0 else "local-min"
    record = SolutionRecord(
        q=q, u=u, energy=val, residual_norm=res, nehari=verdict.label, kind=kind
    )
    status = "converged" if (gnorm <= opts.grad_tol and res <= opts.res_tol) else "max-iters"
    return SolveResult(status, record, iters, gnorm, floor)


def _respread(grid, params, path: list[np.ndarray]) -> list[np.ndarray]:
    """Redistribute interior path nodes to uniform H¹ arclength."""
    n = len(path)
    seg = np.empty(n - 1)
    for k in range(n - 1):
        d = path[k + 1] - path[k]
        seg[k] = math.sqrt(h1_norm_sq(RadialFunction(grid, d), params))
    s = np.concatenate(([0.0], np.cumsum(seg)))
    total = s[-1]
    if total <= 0.0:
        return path
    out = [path[0]]
    for j in range(1, n - 1):
        target = total * j / (n - 1)
        k = int(np.searchsorted(s, target, side="right") - 1)
        k = min(max(k, 0), n - 2)
        frac = (target - s[k]) / seg[k] if seg[k] > 0.0 else 0.0
        out.append(path[k] + frac * (path[k + 1] - path[k]))
    out.append(path[-1])
    return out


def mountain_pass(
    grid: RadialGrid,
    q: float,
    params: ProblemParams,
    endpoint: SolutionRecord,
    opts: SolveOptions | None = None,
) -> SolveResult:
    """Deform a path from 0 to the endpoint onto the mountain-pass point."""
    if q <= 0.0:
        raise ValueError("charge must be positive")
    if endpoint is None or not np.any(endpoint.u.vals):
        raise ValueError("mountain pass needs a nontrivial endpoint")
    opts = opts or SolveOptions()
    obj = _Objective(grid, q, params)
    floor = _norm_floor(grid, params, opts)

    n = opts.path_nodes
    end = endpoint.u.vals
    path = [t * end for t in np.linspace(0.0, 1.0, n)]
    values = np.array([obj.value(v) for v in path])

    iters = 0
    gnorm = math.inf
    step = 1.0
    for iters in range(1, opts.path_max_iters + 1):
        k = int(np.argmax(values[1:-1])) + 1
        val, grad = obj.value_grad(path[k])
        direction = obj.precondition(grad)
        gnorm = math.sqrt(max(float(direction @ grad), 0.0))
        if gnorm <= opts.path_grad_tol:
            break
        s = step
        moved = False
        for _ in range(40):
            cand = path[k] - s * direction
            cval = obj.value(cand)
            if cval <= val - ARMIJO * s * gnorm ** 2:
                path[k] = cand
                values[k] = cval
                step = min(s * 1.8, 1.0)
                moved = True
                break
            s *= 0.5
        if not moved:
            break
        path = _respread(grid, params, path)
        values = np.array([obj.value(v) for v in path])

    k = int(np.argmax(values[1:-1])) + 1
    vals = path[k]

    # polish on the Nehari-minus branch
    scaled = _fiber_rescale(obj, vals, "minus")
    if scaled is None:
        return SolveResult("geometry-lost", None, iters, gnorm, floor)
    vals = scaled
    val, grad = obj.value_grad(vals)
    step = 1.0
    extra = 0
    for extra in range(1, opts.max_iters + 1):
        direction = obj.precondition(grad)
        gnorm = math.sqrt(max(float(direction @ grad), 0.0))
        if gnorm <= max(0.25 * opts.grad_tol, 50.0 * math.sqrt(np.finfo(float).eps * abs(val))):
            break
        s = step
        moved = False
        for _ in range(60):
            cand = _fiber_rescale(obj, vals - s * direction, "minus")
            if cand is not None:
                cval = obj.value(cand)
                if cval < val:
                    vals = cand
                    val, grad = obj.value_grad(vals)
                    step = min(s * 1.5, 1.0)
                    moved = True
                    break
            s *= 0.5
        if not moved:
            break
    iters += extra

    vals, grad = obj.newton_polish(vals, grad, 0.25 * opts.res_tol)
    val = obj.value(vals)

    scaled = _fiber_rescale(obj, vals, "minus")
    if scaled is not None:
        vals = scaled
        val, grad = obj.value_grad(vals)
    direction = obj.precondition(grad)
    gnorm = math.sqrt(max(float(direction @ grad), 0.0))
    res = obj.res_norm(grad)

    u = RadialFunction(grid, vals)
    verdict = nehari_classify(u, q, params)
    if val <= max(0.0, endpoint.energy):
        return SolveResult("geometry-lost", None, iters, gnorm, floor)
    record = SolutionRecord(
        q=q, u=u, energy=val, residual_norm=res, nehari=verdict.label,
        kind="mountain-pass", mp_level=val,
    )
    status = "converged" if (gnorm <= opts.grad_tol and res <= opts.res_tol) else "max-iters"
    return SolveResult(status, record, iters, gnorm, floor)


def continue_branch(
    grid: RadialGrid,
    q_lo: float,
    q_hi: float,
    steps: int,
    params: ProblemParams,
    opts: SolveOptions | None = None,
    seed_profile: RadialFunction | None = None,
) -> SolutionBranch:
    """Warm-started sweep recording the minimizer/mountain-pass pair per q."""
    if q_lo <= 0.0 or q_hi < q_lo:
        raise ValueError("need 0 < q_lo <= q_hi")
    opts = opts or SolveOptions()
    qs = np.array([q_lo]) if q_hi == q_lo else np.linspace(q_lo, q_hi, steps)
    if seed_profile is None:
        seed_profile = estimate_extremals(grid, params).maximizer
    minimizers: list = []
    passes: list = []
    flags: list = []
    jhat = np.full(qs.size, np.nan)
    seed = seed_profile
    for i, q in enumerate(qs):
        cell_flags = []
        mres = find_minimizer(grid, float(q), params, seed_profile=seed, opts=opts)
        minimizers.append(mres)
        if mres.record is None:
            cell_flags.append(f"minimizer:{mres.status}")
            passes.append(SolveResult("geometry-lost", None, 0, math.inf, mres.norm_floor))
            flags.append(";".join(cell_flags))
            continue
        if mres.status != "converged":
            cell_flags.append(f"minimizer:{mres.status}")
        jhat[i] = mres.record.energy
        seed = mres.record.u  # warm start
        pres = mountain_pass(grid, float(q), params, mres.record, opts=opts)
        passes.append(pres)
        if pres.record is None or pres.status != "converged":
            cell_flags.append(f"pass:{pres.status}")
        if pres.record is not None:
            gap = math.sqrt(
                h1_norm_sq(
                    RadialFunction(grid, pres.record.u.vals - mres.record.u.vals), params
                )
            )
            ref = math.sqrt(h1_norm_sq(mres.record.u, params))
            if gap < 1e-3 * max(1.0, ref):
                cell_flags.append("collapse-suspected")
        flags.append(";".join(cell_flags))
    return SolutionBranch(qs=qs, minimizers=minimizers, passes=passes, jhat=jhat, flags=flags)
