"""Command-line front door: config, subcommands, atomic persistence.

Subcommands mirror the library layers: `fiber` prints a fibering analysis
for an explicit coefficient triple, `extremal` estimates the charge
thresholds, `solve` runs the two-solution machinery at one charge,
`sweep` tabulates a branch over a charge interval, and `verify` runs the
invariant suite.

Every file lands atomically (temp file + rename) next to a manifest that
records the config hash, seed, code version, and wall time, so a result
can be tied back to the exact run that produced it.  Data files are
UTF-8, LF newlines, full-precision floats; reruns with the same config
and seed are byte-identical (the manifest's wall time is the one field
exempt from that guarantee).

Sweep cells are independent: each charge is solved from the same seed
profile with no warm starting between cells, so `--jobs N` changes wall
time but never bytes.  Exit codes: 0 success, 1 usage or config error,
2 numerical failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import __version__, fibering
from .extremal import estimate_extremals
from .grids import ProblemParams, RadialFunction, RadialGrid, make_grid
from .solve import SolveOptions, find_minimizer, mountain_pass
from .verify import report_to_json, run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3


@dataclass(frozen=True)
class RunConfig:
    p: float = 2.5
    a: float = 1.0
    omega: float = 1.0
    r_max: float = 40.0
    n: int = 2048
    scheme: str = "graded"
    grad_tol: float = 1e-7
    res_tol: float = 1e-6
    max_iters: int = 2000
    seed: int = 0
    q_lo: float = 0.02
    q_hi: float = 0.04
    steps: int = 9
    out: str = "runs"

    def params(self) -> ProblemParams:
        return ProblemParams(p=self.p, a=self.a, omega=self.omega)

    def grid(self) -> RadialGrid:
        return make_grid(self.r_max, self.n, self.scheme)

    def solve_options(self) -> SolveOptions:
        return SolveOptions(
            grad_tol=self.grad_tol,
            res_tol=self.res_tol,
            max_iters=self.max_iters,
            seed=self.seed,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        flat = {}
        nests = {"params", "grid", "solver", "sweep"}
        for key, val in data.items():
            if key in nests and isinstance(val, dict):
                flat.update(val)
            else:
                flat[key] = val
        known = set(cls.__dataclass_fields__)
        bad = set(flat) - known
        if bad:
            raise ValueError(f"unknown config keys: {sorted(bad)}")
        return cls(**flat)


def config_hash(config: RunConfig) -> str:
    canon = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(path: str, config: RunConfig, command: str, outputs: list, wall: float) -> None:
    manifest = {
        "command": command,
        "config": config.to_dict(),
        "config_hash": config_hash(config),
        "seed": config.seed,
        "code_version": __version__,
        "outputs": outputs,
        "wall_time_s": wall,
    }
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _record_dict(result) -> dict:
    if result.record is None:
        return {"status": result.status, "iterations": result.iterations}
    rec = result.record
    return {
        "status": result.status,
        "iterations": result.iterations,
        "q": rec.q,
        "energy": rec.energy,
        "residual_norm": rec.residual_norm,
        "nehari": rec.nehari,
        "kind": rec.kind,
        "mp_level": rec.mp_level,
        "u": rec.u.vals.tolist(),
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_fiber(config: RunConfig, coeffs: str, q: float) -> int:
    try:
        parts = [float(x) for x in coeffs.split(",")]
        if len(parts) != 3:
            raise ValueError("--coeffs wants three comma-separated values A,B,P")
        c = fibering.FiberCoeffs(h1=parts[0], coupling=parts[1], power=parts[2], p=config.p)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rep = fibering.classify_fiber(c, q)
    print(f"fiber analysis  p={config.p!r}  q={q!r}")
    print(f"  coefficients  A={c.h1!r}  B={c.coupling!r}  P={c.power!r}")
    print(f"  case {rep.case}")
    if rep.t_minus is not None:
        print(f"  t_minus = {rep.t_minus!r}   psi = {rep.psi_at_roots[0]!r}")
    if rep.t_plus is not None:
        print(f"  t_plus  = {rep.t_plus!r}   psi = {rep.psi_at_roots[1]!r}")
    if rep.case == "two":
        print(f"  t = {rep.t_inflect!r}  (degenerate root)")
    print(f"  q(u)  = {rep.q_of_u!r}")
    print(f"  q0(u) = {rep.q0_of_u!r}")
    print("[machine]")
    for key in ("case", "t_minus", "t_plus", "t_inflect", "q_of_u", "q0_of_u", "t_of_u", "t0_of_u"):
        print(f"{key}={getattr(rep, key)!r}")
    return EXIT_OK


def cmd_extremal(config: RunConfig) -> int:
    t0 = time.time()
    grid = config.grid()
    est = estimate_extremals(grid, config.params())
    payload = {
        "q_star_lb": est.q_star_lb,
        "q0_star_lb": est.q0_star_lb,
        "family_tag": est.family_tag,
        "iterations": est.iterations,
        "converged": est.converged,
        "maximizer": est.maximizer.vals.tolist(),
    }
    os.makedirs(config.out, exist_ok=True)
    out = os.path.join(config.out, "extremal.json")
    _atomic_write(out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _write_manifest(out + ".manifest.json", config, "extremal", ["extremal.json"], time.time() - t0)
    print(f"q_star_lb  = {est.q_star_lb!r}")
    print(f"q0_star_lb = {est.q0_star_lb!r}  (converged={est.converged})")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_solve(config: RunConfig, q: float) -> int:
    t0 = time.time()
    grid = config.grid()
    params = config.params()
    opts = config.solve_options()
    est = estimate_extremals(grid, params)
    seed_profile = est.maximizer
    min_result = find_minimizer(grid, q, params, seed_profile, opts)
    payload = {"q": q, "minimizer": _record_dict(min_result)}
    failed = min_result.status in ("max-iters", "geometry-lost")
    line = f"minimizer: {min_result.status}"
    if min_result.record is not None:
        line += f"  J={min_result.record.energy!r}  nehari={min_result.record.nehari}"
    print(line)
    if min_result.record is not None:
        mp_result = mountain_pass(grid, q, params, min_result.record, opts)
        payload["mountain_pass"] = _record_dict(mp_result)
        failed = failed or mp_result.status in ("max-iters", "geometry-lost")
        line = f"mountain pass: {mp_result.status}"
        if mp_result.record is not None:
            line += f"  J={mp_result.record.energy!r}  nehari={mp_result.record.nehari}"
        print(line)
    os.makedirs(config.out, exist_ok=True)
    out = os.path.join(config.out, "solution.json")
    _atomic_write(out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _write_manifest(out + ".manifest.json", config, "solve", ["solution.json"], time.time() - t0)
    print(f"wrote {out}")
    return EXIT_NUMERICAL if failed else EXIT_OK


def _sweep_cell(payload: tuple) -> tuple:
    """One sweep cell; module-level so worker processes can unpickle it."""
    config_dict, q, seed_vals = payload
    config = RunConfig(**config_dict)
    grid = _cell_grid(config)
    params = config.params()
    opts = config.solve_options()
    seed_profile = RadialFunction(grid, np.asarray(seed_vals))
    min_result = find_minimizer(grid, q, params, seed_profile, opts)
    flags = []
    if min_result.status != "converged":
        flags.append(f"minimizer:{min_result.status}")
    nan = float("nan")
    row = {
        "q": q,
        "J_min": nan,
        "J_mp": nan,
        "res_min": nan,
        "res_mp": nan,
        "nehari_min": "",
        "nehari_mp": "",
        "jhat": nan,
    }
    if min_result.record is not None:
        rec = min_result.record
        row.update(J_min=rec.energy, res_min=rec.residual_norm, nehari_min=rec.nehari, jhat=rec.energy)
        mp_result = mountain_pass(grid, q, params, rec, opts)
        if mp_result.status != "converged":
            flags.append(f"pass:{mp_result.status}")
        if mp_result.record is not None:
            mp = mp_result.record
            row.update(J_mp=mp.energy, res_mp=mp.residual_norm, nehari_mp=mp.nehari)
    row["flags"] = "|".join(flags)
    return row


_GRID_CACHE: dict = {}


def _cell_grid(config: RunConfig) -> RadialGrid:
    key = (config.r_max, config.n, config.scheme)
    if key not in _GRID_CACHE:
        _GRID_CACHE[key] = make_grid(*key)
    return _GRID_CACHE[key]


def _fmt(val) -> str:
    if isinstance(val, float):
        return repr(val)
    return str(val)


SWEEP_HEADER = "q,J_min,J_mp,res_min,res_mp,nehari_min,nehari_mp,jhat,flags"


def cmd_sweep(config: RunConfig, jobs: int) -> int:
    t0 = time.time()
    grid = config.grid()
    params = config.params()
    est = estimate_extremals(grid, params)
    seed_vals = est.maximizer.vals.tolist()
    qs = np.linspace(config.q_lo, config.q_hi, config.steps)
    payloads = [(config.to_dict(), float(q), seed_vals) for q in qs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, payloads))
    else:
        rows = [_sweep_cell(p) for p in payloads]

    cols = SWEEP_HEADER.split(",")
    lines = [SWEEP_HEADER]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in cols))
    os.makedirs(config.out, exist_ok=True)
    out = os.path.join(config.out, "sweep.csv")
    _atomic_write(out, "\n".join(lines) + "\n")
    _write_manifest(out + ".manifest.json", config, "sweep", ["sweep.csv"], time.time() - t0)
    failed = any(row["flags"] and "trivial-attractor" not in row["flags"] for row in rows)
    print("\n".join(lines))
    print(f"wrote {out}")
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    t0 = time.time()
    grid = config.grid()
    report = run_suite(grid, config.params(), seed=config.seed)
    text = report_to_json(report) + "\n"
    os.makedirs(config.out, exist_ok=True)
    out = os.path.join(config.out, "verify.json")
    _atomic_write(out, text)
    _write_manifest(out + ".manifest.json", config, "verify", ["verify.json"], time.time() - t0)
    for c in report.checks:
        print(f"{c.status:>14s}  {c.name}  worst_slack={c.worst_slack!r}")
    print(f"wrote {out}")
    return EXIT_OK if report.passed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# argument plumbing


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the artifact contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    # shared flags live on a parent so they parse on either side of the
    # subcommand; SUPPRESS keeps an unset subparser copy from clobbering
    # a value given before the subcommand
    common = argparse.ArgumentParser(add_help=False)
    sup = argparse.SUPPRESS
    common.add_argument("--config", default=sup, help="JSON config file; flags override its values")
    common.add_argument("--p", type=float, default=sup, help="power exponent in (2, 3]")
    common.add_argument("--a", type=float, default=sup, help="screening length (0 for pure Coulomb)")
    common.add_argument("--omega", type=float, default=sup, help="frequency")
    common.add_argument("--seed", type=int, default=sup, help="seed for all randomized pieces")
    common.add_argument("--jobs", type=int, default=sup, help="worker processes for sweep")
    common.add_argument("--out", default=sup, help="output directory")

    parser = _Parser(prog="sbpkit", parents=[common], description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_fiber = sub.add_parser("fiber", parents=[common], help="classify one fiber map from A,B,P")
    p_fiber.add_argument("--coeffs", required=True, help="A,B,P")
    p_fiber.add_argument("--q", type=float, required=True)

    sub.add_parser("extremal", parents=[common], help="estimate extremal charge thresholds")

    p_solve = sub.add_parser("solve", parents=[common], help="two-solution run at one charge")
    p_solve.add_argument("--q", type=float, required=True)

    p_sweep = sub.add_parser("sweep", parents=[common], help="tabulate a branch over a charge interval")
    p_sweep.add_argument("--q-lo", type=float)
    p_sweep.add_argument("--q-hi", type=float)
    p_sweep.add_argument("--steps", type=int)

    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    path = getattr(args, "config", None)
    if path:
        with open(path, encoding="utf-8") as f:
            config = RunConfig.from_dict(json.load(f))
    else:
        config = RunConfig()
    overrides = {}
    for name in ("p", "a", "omega", "seed", "out"):
        val = getattr(args, name, None)
        if val is not None:
            overrides[name] = val
    for arg_name, field_name in (("q_lo", "q_lo"), ("q_hi", "q_hi"), ("steps", "steps")):
        val = getattr(args, arg_name, None)
        if val is not None:
            overrides[field_name] = val
    return replace(config, **overrides) if overrides else config


def main(argv: list | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "fiber":
            return cmd_fiber(config, args.coeffs, args.q)
        if args.command == "extremal":
            return cmd_extremal(config)
        if args.command == "solve":
            return cmd_solve(config, args.q)
        if args.command == "sweep":
            return cmd_sweep(config, getattr(args, "jobs", 1))
        if args.command == "verify":
            return cmd_verify(config)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
