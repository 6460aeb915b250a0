"""Command-line front end: ``partition-flow <command> ...``.

Exit status is 0 on success, 1 when a verification fails and 2 for bad
input.  Every file is written to a temporary sibling first and renamed
into place.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np
import scipy.io

from . import acceptance
from . import circle_model as cm
from . import flow_analysis as fa
from . import grid_model as gm
from . import partition_graph as pg
from .eigen_core import morse_index, schur_dn
from .errors import NotEquipartition, PartitionFlowError, SlitError, SpecError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
INPUT_ERRORS = (SpecError, SlitError, NotEquipartition, ValueError, KeyError, OSError)


class InputError(Exception):
    pass


def atomic_write(path: str, text: str | None = None, writer=None):
    """Write ``text`` (or call ``writer(tmp_path)``) then rename onto ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        if writer is None:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
        else:
            os.close(fd)
            writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _emit(args, payload: dict):
    text = json.dumps(payload, sort_keys=True, indent=2, default=_default) + "\n"
    if getattr(args, "json_out", None):
        atomic_write(args.json_out, text)
    else:
        sys.stdout.write(text)


def _default(x):
    if hasattr(x, "item"):
        return x.item()
    if hasattr(x, "tolist"):
        return x.tolist()
    if isinstance(x, (set, frozenset, tuple)):
        return sorted(x) if isinstance(x, (set, frozenset)) else list(x)
    raise TypeError(type(x).__name__)


def _load_json(path, what):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"--{what}: no such file {path!r}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"--{what}: {path!r} is not valid JSON ({exc})") from None


def _grid(args):
    spec = _load_json(args.domain, "domain")
    try:
        return gm.build_grid(spec)
    except SpecError as exc:
        raise InputError(f"--domain: {exc}") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_circle(args) -> int:
    if args.n < 2:
        raise InputError("--n: must be at least 2")
    cfg = cm.CircleConfig(args.n)
    try:
        rep = cm.circle_deficiency(cfg, args.eps)
    except PartitionFlowError as exc:
        raise InputError(f"--eps: {exc}") from None
    lam = args.lam if args.lam is not None else rep.extras["lambda"]
    mu = cm.mu_spectrum(cfg, lam)
    table = _csv(["k", "mu_k"], enumerate(mu.tolist()))
    if args.csv_out:
        atomic_write(args.csv_out, table)
    payload = rep.to_dict()
    payload["csv_lambda"] = lam
    _emit(args, payload)
    return EXIT_OK if rep.ok() else EXIT_FAIL


def cmd_slit(args) -> int:
    data = _load_json(args.graph, "graph")
    try:
        graph = pg.PartitionGraph.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"--graph: malformed graph ({exc})") from None
    errs = pg.validate(graph)
    if errs:
        raise InputError("--graph: " + "; ".join(errs))
    payload = {"slit": pg.slit(graph).sorted(), "odd_vertices": sorted(map(str, pg.odd_data(graph).odd_vertices))}
    status = EXIT_OK
    if args.verify is not None:
        if os.path.exists(args.verify):
            cand = _load_json(args.verify, "verify")
            cand = cand.get("slit", cand) if isinstance(cand, dict) else cand
        else:
            try:
                cand = [int(x) for x in args.verify.split(",") if x.strip()]
            except ValueError:
                raise InputError("--verify: expected a JSON file or comma-separated edge ids") from None
        ok = pg.slit_verify(graph, [int(x) for x in cand])
        payload["candidate"] = sorted(int(x) for x in cand)
        payload["verified"] = ok
        status = EXIT_OK if ok else EXIT_FAIL
    _emit(args, payload)
    return status


def cmd_assemble(args) -> int:
    grid = _grid(args)
    if args.cover:
        op = gm.assemble_double_cover(grid)
    elif args.slit:
        op = gm.assemble_slit(grid)
    else:
        op = gm.assemble_laplacian(grid)
    comment = f"partition-flow operator h={grid.h!r} dim={op.dimension}"
    atomic_write(args.out, writer=lambda p: scipy.io.mmwrite(p, op.matrix, comment=comment, symmetry="symmetric"))
    _emit(args, {"dimension": op.dimension, "nnz": int(op.matrix.nnz), "out": args.out,
                 "symmetric": op.is_symmetric()})
    return EXIT_OK


def cmd_dn(args) -> int:
    grid = _grid(args)
    fam = fa.family_for(grid, args.slit)
    dn = schur_dn(fam.base, args.lam, fam.gamma_rows)
    w = dn.eigenvalues()
    if args.out:
        atomic_write(args.out, _csv(["index", "eigenvalue"], enumerate(w.tolist())))
    _emit(args, {"lambda": args.lam, "dimension": dn.dimension,
                 "morse_index": morse_index(dn.entries), "eigenvalues": w.tolist()})
    return EXIT_OK


def cmd_flow(args) -> int:
    grid = _grid(args)
    fam = fa.family_for(grid, args.slit)
    branch = fa.sigma_sweep(fam, args.sigma_max, args.samples, args.levels)
    header = ["sigma"] + [f"lambda_{n}" for n in range(1, branch.levels + 1)]
    atomic_write(args.out, _csv(header, branch.to_rows()))
    payload = {"levels": branch.levels, "samples": len(branch.sigma_samples),
               "sigma_max": branch.sigma_max, "out": args.out,
               "infinity": branch.infinity_values.tolist()}
    if args.level is not None:
        payload["crossings"] = fa.crossing_count(branch, args.level)
    _emit(args, payload)
    return EXIT_OK


def cmd_verify(args) -> int:
    grid = _grid(args)
    eps = "auto" if args.eps is None else args.eps
    rep = fa.deficiency(grid, slit_flag=args.slit, epsilon_policy=eps, check_flow=args.flow)
    _emit(args, rep.to_dict())
    return EXIT_OK if rep.identity_residual == 0 else EXIT_FAIL


def cmd_suite(args) -> int:
    results = acceptance.run_suite(args.seed, args.scale)
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    if args.json_out:
        atomic_write(args.json_out, json.dumps(
            [{"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail}
             for r in results], indent=2) + "\n")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="partition-flow",
        description="Spectral flow and deficiency of partitions on discrete models.",
        epilog="PARTITION_FLOW_THREADS caps worker threads for sigma sweeps (0 = auto).",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    c = sub.add_parser("circle", help="deficiency identity on the circle", formatter_class=fmt)
    c.add_argument("--n", type=int, required=True, help="number of arcs N")
    c.add_argument("--eps", type=float, default=1e-3, help="offset above sqrt(energy)")
    c.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="spectral parameter for the mu_k table (default (N/2+eps)^2)")
    c.add_argument("--csv-out", default=None, help="write (k, mu_k) here")
    c.add_argument("--json-out", default=None, help="write the report here instead of stdout")
    c.set_defaults(func=cmd_circle)

    s = sub.add_parser("slit", help="slitting set of a partition graph", formatter_class=fmt)
    s.add_argument("--graph", required=True, help="graph JSON file")
    s.add_argument("--verify", default=None, help="candidate edge ids: JSON file or comma list")
    s.add_argument("--json-out", default=None)
    s.set_defaults(func=cmd_slit)

    a = sub.add_parser("assemble", help="write an operator in Matrix Market format", formatter_class=fmt)
    a.add_argument("--domain", required=True, help="domain/partition JSON file")
    a.add_argument("--out", required=True, help="output .mtx path")
    a.add_argument("--slit", action="store_true", help="signed (slit) operator")
    a.add_argument("--cover", action="store_true", help="explicit two-sheet cover")
    a.add_argument("--json-out", default=None)
    a.set_defaults(func=cmd_assemble)

    d = sub.add_parser("dn", help="DN spectrum and Morse index at lambda", formatter_class=fmt)
    d.add_argument("--domain", required=True)
    d.add_argument("--lambda", dest="lam", type=float, required=True)
    d.add_argument("--slit", action="store_true")
    d.add_argument("--out", default=None, help="CSV of DN eigenvalues")
    d.add_argument("--json-out", default=None)
    d.set_defaults(func=cmd_dn)

    f = sub.add_parser("flow", help="sigma sweep of the Robin family", formatter_class=fmt)
    f.add_argument("--domain", required=True)
    f.add_argument("--sigma-max", type=float, default=None, help="default 1e4/h^2")
    f.add_argument("--samples", type=int, default=64)
    f.add_argument("--levels", type=int, default=None, help="default k+1")
    f.add_argument("--level", type=float, default=None, help="count crossings of this level")
    f.add_argument("--slit", action="store_true")
    f.add_argument("--out", required=True, help="CSV: sigma, lambda_1..lambda_M")
    f.add_argument("--json-out", default=None)
    f.set_defaults(func=cmd_flow)

    v = sub.add_parser("verify", help="check Def = 1 - m + Mor on a grid partition", formatter_class=fmt)
    v.add_argument("--domain", required=True)
    v.add_argument("--slit", action="store_true")
    v.add_argument("--eps", type=float, default=None, help="default: quarter of the spectral gap")
    v.add_argument("--flow", action="store_true", help="also count sigma-sweep crossings")
    v.add_argument("--json-out", default=None)
    v.set_defaults(func=cmd_verify)

    q = sub.add_parser("suite", help="run the acceptance battery", formatter_class=fmt)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--scale", choices=("quick", "full"), default="quick")
    q.add_argument("--json-out", default=None)
    q.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"partition-flow {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except INPUT_ERRORS as exc:
        print(f"partition-flow {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PartitionFlowError as exc:
        print(f"partition-flow {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
