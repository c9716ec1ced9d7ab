"""Command-line front end.

    magsum spectrum   --builtin square --bc dirichlet --beta 0 --n 3 --level 5
    magsum verify     --builtin triangle --stretch 1.5 --beta 1 --n 1 --level 4
    magsum scan       --builtin square --family stretch --grid 1:2:0.1 --flux 2pi
    magsum frames     --trials 1000
    magsum invariance --builtin triangle --beta 1

Exit codes: 0 success / inequality holds, 1 inequality or check violated,
2 usage or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .eigensolve import lowest_eigenvalues
from .errors import MagsumError, SolverDidNotConverge
from .geometry import Domain, builtin, load_domain
from .linalg2 import (
    IDENTITY,
    Mat2,
    frame_average_closed_form,
    frame_consequences_closed_form,
    hs_norm,
    rotation_average,
    rotation_frame_sum,
    rotation_scalar_sum,
)
from .mesh import dump_mesh
from .operator import BoundaryCondition, GaugeChoice, assemble, dump_triplets
from .verify import (
    FAMILIES,
    corollary_scan,
    invariance_suite,
    seed_mesh,
    theorem_check,
)

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
FRAME_TOL = 1e-12


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument types


def real(text: str) -> float:
    """Float, also accepting multiples of pi such as '2pi' or 'pi'."""
    t = text.strip().lower().replace("π", "pi")
    try:
        if t.endswith("pi"):
            head = t[:-2].rstrip("*")
            return (float(head) if head else 1.0) * math.pi
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def positive(text: str) -> float:
    x = real(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def non_negative(text: str) -> float:
    x = real(text)
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return x


def bounded_int(lo: int, hi: int):
    def parse(text: str) -> int:
        try:
            k = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if not lo <= k <= hi:
            raise argparse.ArgumentTypeError(f"must lie in [{lo}, {hi}], got {k}")
        return k

    return parse


def matrix(text: str) -> Mat2:
    parts = [real(p) for p in text.replace(";", ",").split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("matrix needs four comma-separated entries a11,a12,a21,a22")
    return Mat2(*parts)


def grid_spec(text: str) -> list[float]:
    """'start:stop:step' (inclusive) or a comma-separated list."""
    if ":" in text:
        try:
            start, stop, step = (real(p) for p in text.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError("grid must be start:stop:step") from None
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError("grid needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(count)]
    return [real(p) for p in text.split(",")]


# ---------------------------------------------------------------------------
# output


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _provenance(command: str, cfg: dict) -> dict:
    out = {"tool": f"magsum {__version__}", "command": command}
    out.update({k: v for k, v in cfg.items() if v is not None})
    return out


def render(fmt_name: str, command: str, cfg: dict, header: list[str], rows: list[list], extra: dict | None = None) -> str:
    prov = _provenance(command, cfg)
    date = datetime.now(timezone.utc).date().isoformat()
    if fmt_name == "json":
        doc = {"provenance": dict(prov, date=date), "columns": header,
               "rows": [[_jsonable(v) for v in r] for r in rows]}
        if extra:
            doc["summary"] = {k: _jsonable(v) for k, v in extra.items()}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    for k, v in prov.items():
        buf.write(f"# {k}: {fmt(v)}\n")
    buf.write(f"# date: {date}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    if extra:
        for k, v in extra.items():
            w.writerow([k, fmt(v)])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def emit(text: str, output) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    path = Path(output)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# shared helpers


def resolve_domain(args) -> Domain:
    if getattr(args, "domain", None):
        try:
            return load_domain(args.domain)
        except (OSError, KeyError, ValueError) as exc:
            raise UsageError(f"cannot load domain file {args.domain}: {exc}") from exc
    try:
        return builtin(args.builtin)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def resolve_bc(args) -> BoundaryCondition:
    if args.bc == "robin":
        return BoundaryCondition("robin", args.sigma)
    return BoundaryCondition(args.bc)


def base_cfg(args, d: Domain, bc: BoundaryCondition) -> dict:
    return {
        "domain": d.name or (args.domain if getattr(args, "domain", None) else d.kind),
        "hbar": args.hbar,
        "bc": bc.kind,
        "sigma": bc.sigma,
        "n": getattr(args, "n", None),
        "level": getattr(args, "level", None),
    }


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(args) -> int:
    d = resolve_domain(args)
    bc = resolve_bc(args)
    m = seed_mesh(d, args.level)
    op = assemble(m, GaugeChoice(args.gauge, args.beta), args.hbar, bc)
    if args.dump_matrices:
        dump_triplets(op, args.dump_matrices)
    if args.dump_mesh:
        dump_mesh(m, args.dump_mesh)
    res = lowest_eigenvalues(op, args.n, method=args.method)
    cfg = dict(base_cfg(args, d, bc), beta=args.beta, gauge=args.gauge, dofs=op.n_dofs, method=res.config["method"])
    rows = [[j + 1, lam, r] for j, (lam, r) in enumerate(zip(res.eigenvalues, res.residual_norms))]
    emit(render(args.format, "spectrum", cfg, ["j", "eigenvalue", "residual"], rows,
                {"sum": float(np.sum(res.eigenvalues))}), args.output)
    return EXIT_OK


def _verify_map(args) -> Mat2:
    chosen = [x is not None for x in (args.matrix, args.stretch, args.shear)]
    if sum(chosen) > 1:
        raise UsageError("give at most one of --matrix, --stretch, --shear")
    if args.matrix is not None:
        return args.matrix
    if args.stretch is not None:
        return Mat2.diag(args.stretch, 1.0 / args.stretch)
    if args.shear is not None:
        return Mat2.shear(args.shear)
    return IDENTITY


def cmd_verify(args) -> int:
    d = resolve_domain(args)
    bc = resolve_bc(args)
    T = _verify_map(args)
    v = theorem_check(d, T, args.hbar, args.beta, bc, args.n, args.level)
    cfg = dict(base_cfg(args, d, bc), beta=args.beta, T=",".join(fmt(x) for x in T))
    header = ["n", "lhs", "rhs", "margin", "error_budget", "holds", "status", "hbar_t", "beta_t", "sigma_t"]
    row = [v.n, v.lhs, v.rhs, v.margin, v.error_budget, v.holds, v.status,
           v.details["hbar_t"], v.details["beta_t"], v.details["sigma_t"]]
    emit(render(args.format, "verify", cfg, header, [row]), args.output)
    return EXIT_OK if v.holds else EXIT_VIOLATED


def cmd_scan(args) -> int:
    d = resolve_domain(args)
    bc = resolve_bc(args)
    scan = corollary_scan(d, args.family, args.grid, args.hbar, args.flux, bc, args.n, args.level)
    cfg = dict(base_cfg(args, d, bc), flux=args.flux, family=args.family)
    header = ["parameter", "A", "I"] + [f"lambda_{j + 1}" for j in range(args.n)] + ["functional", "budget"]
    rows = [
        [t, A, I, *lam, f, b]
        for t, A, I, lam, f, b in zip(scan.parameters, scan.areas, scan.inertias, scan.eigenvalues,
                                       scan.functional, scan.budgets)
    ]
    summary = {"argmax": scan.argmax_parameter, "monotone": scan.monotone_from_identity()}
    emit(render(args.format, "scan", cfg, header, rows, summary), args.output)
    ok = scan.maximal_at_identity() and scan.monotone_from_identity()
    return EXIT_OK if ok else EXIT_VIOLATED


def _random_invertible(rng: random.Random) -> Mat2:
    while True:
        T = Mat2(*(rng.uniform(-2.0, 2.0) for _ in range(4)))
        s1, s2 = T.singular_values()
        if s2 > 0.1 and s1 / s2 < 50:
            return T


def frame_deviations(M: Mat2, T: Mat2, y, x, N: int) -> dict[str, float]:
    """Deviation of each rotation-average identity from its closed form.

    Works for every N >= 1 (no precondition checks) so that the failure for
    N < 3 can be reported.
    """
    out = {}
    closed = frame_average_closed_form(M)
    out["average"] = rotation_average(M, N).max_abs_diff(closed) / (1.0 + hs_norm(M))
    M0 = M - 0.5 * M.trace * IDENTITY
    Tinv = T.inverse()
    summed = (
        rotation_average(Tinv @ Tinv.T, N),
        rotation_average(T.T @ M.T @ M @ T, N),
        rotation_average(Tinv @ M0 @ T, N),
    )
    expected = frame_consequences_closed_form(T, M)
    expected = expected[:2] + (frame_consequences_closed_form(T, M0)[2],)
    for name, got, want in zip(("inverse_gram", "gram", "conjugated"), summed, expected):
        out[name] = got.max_abs_diff(want) / max(1.0, hs_norm(want))
    half = 0.5 * hs_norm(T) ** 2
    out["scalar"] = abs(rotation_scalar_sum(T, y, N) - half) / half
    xx = x[0] ** 2 + x[1] ** 2
    out["tight_frame"] = abs(rotation_frame_sum(x, y, N) - 0.5 * N * xx) / max(1.0, 0.5 * N * xx)
    return out


def cmd_frames(args) -> int:
    rng = random.Random(args.seed)
    worst: dict[str, float] = {}
    for _ in range(args.trials):
        N = args.order if args.order is not None else rng.randint(3, 12)
        M = Mat2(*(rng.gauss(0.0, 1.0) for _ in range(4)))
        T = _random_invertible(rng)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        y = (math.cos(phi), math.sin(phi))
        x = (rng.gauss(0.0, 1.0), rng.gauss(0.0, 1.0))
        for k, v in frame_deviations(M, T, y, x, N).items():
            worst[k] = max(worst.get(k, 0.0), v)
    cfg = {"trials": args.trials, "order": args.order if args.order is not None else "3..12", "seed": args.seed}
    rows = [[k, v, v <= FRAME_TOL] for k, v in worst.items()]
    overall = max(worst.values())
    emit(render(args.format, "frames", cfg, ["identity", "max_deviation", "passed"], rows,
                {"max_deviation": overall}), args.output)
    return EXIT_OK if overall <= FRAME_TOL else EXIT_VIOLATED


def cmd_invariance(args) -> int:
    d = resolve_domain(args)
    bc = resolve_bc(args)
    rep = invariance_suite(d, args.hbar, args.beta, bc, args.level, tol=args.tol)
    cfg = dict(base_cfg(args, d, bc), beta=args.beta, tol=args.tol)
    rows = [[c.name, c.value, c.tolerance, c.passed, c.note] for c in rep.checks]
    emit(render(args.format, "invariance", cfg, ["check", "value", "tolerance", "passed", "note"], rows),
         args.output)
    return EXIT_OK if rep.passed else EXIT_VIOLATED


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser, level_default: int, n_default: int = 1) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--builtin", default="triangle", help="triangle, square, hexagon or disk")
    src.add_argument("--domain", help="JSON domain file")
    p.add_argument("--hbar", type=positive, default=1.0)
    p.add_argument("--bc", choices=["dirichlet", "neumann", "robin"], default="dirichlet")
    p.add_argument("--sigma", type=non_negative, default=1.0, help="Robin parameter")
    p.add_argument("--n", type=bounded_int(1, 50), default=n_default)
    p.add_argument("--level", type=bounded_int(0, 8), default=level_default)
    _add_output(p)


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magsum", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"magsum {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="lowest eigenvalues of one configuration")
    _add_common(p, level_default=4, n_default=3)
    p.add_argument("--beta", type=real, default=0.0)
    p.add_argument("--gauge", choices=["symmetric", "landau_x", "landau_y"], default="symmetric")
    p.add_argument("--method", choices=["auto", "dense", "iterative"], default="auto")
    p.add_argument("--dump-matrices", help=argparse.SUPPRESS)
    p.add_argument("--dump-mesh", help="write the mesh as JSON")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="transformed eigenvalue-sum inequality for one map T")
    _add_common(p, level_default=4)
    p.add_argument("--beta", type=real, default=1.0)
    p.add_argument("--matrix", type=matrix, help="a11,a12,a21,a22")
    p.add_argument("--stretch", type=positive, help="T = diag(t, 1/t)")
    p.add_argument("--shear", type=real, help="T = [[1, s], [0, 1]]")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="flux-normalized functional along a family of linear images")
    _add_common(p, level_default=4)
    p.add_argument("--family", choices=sorted(FAMILIES), default="stretch")
    p.add_argument("--grid", type=grid_spec, default=grid_spec("1:2:0.1"))
    p.add_argument("--flux", type=real, default=2.0 * math.pi)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("frames", help="randomized rotation-average identity checks")
    p.add_argument("--trials", type=bounded_int(1, 10**7), default=1000)
    p.add_argument("--order", type=bounded_int(1, 10**6), default=None, help="fixed N (default: random in 3..12)")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    p.set_defaults(func=cmd_frames)

    p = sub.add_parser("invariance", help="discrete invariance and positivity checks")
    _add_common(p, level_default=4)
    p.add_argument("--beta", type=real, default=1.0)
    p.add_argument("--tol", type=positive, default=1e-10)
    p.set_defaults(func=cmd_invariance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad arguments
    try:
        return args.func(args)
    except (UsageError, MagsumError) as exc:
        if isinstance(exc, SolverDidNotConverge):
            print(f"magsum: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"magsum: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, ArithmeticError, RuntimeError) as exc:
        print(f"magsum: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
