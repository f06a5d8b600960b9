"""``tanglekit`` command line: every subcommand prints one JSON document.

Exit codes: 0 success, 1 domain failure (invalid machine, no colouring,
inconclusive or negative search), 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import random
import sys
from fractions import Fraction

from . import __version__
from .canonical import canonical_key, invariant_profile
from .io import SCHEMA_VERSION, DocumentError, encode_color, export_dot, load_document, load_moves, to_json
from .machine import ColoringError, LinearSolution, solve_coloring, solve_linear, validate
from .moves import KINDS, StaleSiteError, enumerate_moves, replay
from .quandle import LinearQuandle, QuandleError
from .search import Budget, Found, search_equivalent

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def precision() -> str:
    p = os.environ.get("TANGLEKIT_PRECISION", "rational")
    if p not in ("rational", "float"):
        raise UsageError(f"TANGLEKIT_PRECISION must be 'rational' or 'float', got {p!r}")
    return p


def number(text: str):
    """Parse a CLI number in the carrier picked by ``TANGLEKIT_PRECISION``."""
    try:
        q = Fraction(text)
        return float(q) if precision() == "float" else q
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def _header(args) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command", "seed")}
    return {"schema": SCHEMA_VERSION, "version": __version__, "command": args.command,
            "seed": args.seed, "precision": precision(), "params": _jsonable(params)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    try:
        return encode_color(x)
    except TypeError:
        return str(x)


def _emit(args, body: dict, out=None) -> None:
    report = {"header": _header(args)}
    report.update(body)
    (out or sys.stdout).write(json.dumps(_jsonable(report), indent=2, ensure_ascii=False) + "\n")


def _load(path):
    try:
        return load_document(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


# -- machine subcommands -------------------------------------------------

def cmd_validate(args) -> int:
    m = _load(args.file).machine
    rep = validate(m)
    _emit(args, {"result": rep.to_json()})
    return EXIT_OK if rep.ok else EXIT_DOMAIN


def cmd_color(args) -> int:
    m = _load(args.file).machine
    try:
        colors = solve_coloring(m)
    except ColoringError as exc:
        if isinstance(m.quandle, LinearQuandle) and m.colors:
            try:
                sol = solve_linear(m)
            except QuandleError:
                sol = None
            if isinstance(sol, LinearSolution):
                ok = sol.kind == "point"
                body = {"status": "colored" if ok else sol.kind, "solution": sol.to_json()}
                if ok:
                    body["machine"] = to_json(m.replace(colors=sol.particular))
                _emit(args, body)
                return EXIT_OK if ok else EXIT_DOMAIN
        _emit(args, {"status": "failed", "error": str(exc)})
        return EXIT_DOMAIN
    _emit(args, {"status": "colored", "machine": to_json(m.replace(colors=colors))})
    return EXIT_OK


def cmd_moves(args) -> int:
    m = _load(args.file).machine
    kinds = args.kinds.split(",") if args.kinds else list(KINDS)
    bad = [k for k in kinds if k not in KINDS]
    if bad:
        raise UsageError(f"unknown move kinds {bad}")
    sites = enumerate_moves(m, kinds)
    _emit(args, {"count": len(sites), "moves": [s.to_json() for s in sites]})
    return EXIT_OK


def cmd_replay(args) -> int:
    doc = _load(args.file)
    if args.moves:
        try:
            sites = load_moves(args.moves)
        except OSError as exc:
            raise UsageError(f"cannot read {args.moves}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid JSON in {args.moves}: {exc}") from None
    else:
        sites = doc.moves
    try:
        out = replay(doc.machine, sites)
    except StaleSiteError as exc:
        _emit(args, {"status": "stale", "error": str(exc)})
        return EXIT_DOMAIN
    _emit(args, {"status": "ok", "applied": len(sites), "machine": to_json(out)})
    return EXIT_OK


def cmd_equiv(args) -> int:
    a, b = _load(args.first).machine, _load(args.second).machine
    budget = Budget(args.max_moves, args.max_states, args.max_stabilizations)
    res = search_equivalent(a, b, budget)
    _emit(args, {"result": res.to_json()})
    return EXIT_OK if isinstance(res, Found) else EXIT_DOMAIN


def cmd_invariants(args) -> int:
    m = _load(args.file).machine
    key = canonical_key(m)
    _emit(args, {"profile": invariant_profile(m).to_json(),
                 "canonical_key_sha256": hashlib.sha256(key).hexdigest()})
    return EXIT_OK


def cmd_dot(args) -> int:
    sys.stdout.write(export_dot(_load(args.file).machine))
    return EXIT_OK


def _pairs(items) -> list[tuple[str, str]]:
    out = []
    for it in items or []:
        if "=" not in it:
            raise UsageError(f"pairing must look like OUT=IN, got {it!r}")
        o, i = it.split("=", 1)
        out.append((o, i))
    return out


def cmd_iterate(args) -> int:
    from .markov import IterationError, IterationSpec, iterate, steady_state

    m = _load(args.file).machine
    pairing = _pairs(args.pair)
    if not pairing:
        raise UsageError("at least one --pair OUT=IN is required")
    ins = [i for _, i in pairing]
    missing = [r for r in ins if r not in m.colors]
    if missing:
        raise UsageError(f"input registers without a colour: {missing}")
    controls = {r: c for r, c in m.colors.items() if r not in ins}
    try:
        spec = IterationSpec(m.replace(colors={}), pairing, args.copies,
                             {r: m.colors[r] for r in ins}, controls)
        traj = iterate(spec)
        steady = steady_state(spec)
    except (IterationError, ColoringError) as exc:
        _emit(args, {"status": "failed", "error": str(exc)})
        return EXIT_DOMAIN
    _emit(args, {
        "status": "ok",
        "trajectory": [{r: encode_color(c) for r, c in d.items()} for d in traj.inputs],
        "final": {r: encode_color(c) for r, c in traj.final.items()},
        "steady_state": steady.to_json() if steady is not None else None,
    })
    return EXIT_OK


# -- demos ------------------------------------------------------------------

def cmd_demo_info(args) -> int:
    from .info import (DEMO_SPEC, EntropySpec, SpecError, build_capacity_triple, classify_interactions,
                       global_capacity, interaction_capacities)

    vals = {k: getattr(args, k) for k in ("H0", "H1", "H2", "H1g2", "H1g02", "H1g0")}
    if all(v is None for v in vals.values()):
        spec = DEMO_SPEC
    else:
        if any(vals[k] is None for k in ("H0", "H1", "H2", "H1g2", "H1g02")):
            raise UsageError("give all of --H0 --H1 --H2 --H1g2 --H1g02 (or none for the demo values)")
        spec = EntropySpec(**{k: (number(v) if v is not None else None) for k, v in vals.items()})
    try:
        (left, middle, right), sites = build_capacity_triple(spec)
    except SpecError as exc:
        _emit(args, {"status": "invalid-spec", "error": str(exc)})
        return EXIT_DOMAIN
    machines = {}
    for name, m in (("left", left), ("middle", middle), ("right", right)):
        classes = classify_interactions(m, spec.conditionals())
        machines[name] = {
            "machine": to_json(m),
            "global_capacity": [encode_color(c) for c in global_capacity(m)],
            "interactions": {u: r.to_json() for u, r in classes.items()},
        }
    _emit(args, {
        "t": encode_color(spec.t), "s": encode_color(spec.s), "h0t2": encode_color(spec.h0t2),
        "moves": [s.to_json() for s in sites],
        "machines": machines,
        "right_capacities": [[t, h, encode_color(c)] for u in sorted(right.agents)
                             for t, h, c in interaction_capacities(right, u)],
    })
    return EXIT_OK


def cmd_demo_aqc(args) -> int:
    from .aqc import build_aqc_triple, build_single_aqc, classify_feasibility, default_grid, scan_gaps

    if args.grid < 3:
        raise UsageError("--grid needs at least 3 points")
    grid = default_grid(args.grid)
    families = (build_single_aqc(),) + build_aqc_triple()
    verdicts = {}
    rows = []
    for fam in families:
        f = classify_feasibility(fam, grid, args.threshold)
        verdicts[fam.name] = f.to_json()
        if args.csv:
            for t in scan_gaps(fam, grid):
                rows += [(fam.name, t.register, s, g) for s, g in zip(t.grid, t.gaps)]
    third = Fraction(1, 3)
    machines = {fam.name: to_json(fam(third)) for fam in families}
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["family", "register", "s", "gap"])
            w.writerows((a, b, repr(s), repr(g)) for a, b, s, g in rows)
    _emit(args, {"machines_at_one_third": machines, "feasibility": verdicts})
    return EXIT_OK


def cmd_demo_markov(args) -> int:
    from .markov import (MARKOV_IN, MARKOV_OUT, IterationError, feed_back_unit, feed_forward_unit,
                         internal_stability, iterate, markov_iteration, markov_unit, steady_state)

    s1, s2, s3 = number(args.s1), number(args.s2), number(args.s3)
    v0 = [number(x) for x in args.v0.split(",")]
    if len(v0) != 2:
        raise UsageError("--v0 takes two comma-separated numbers")
    try:
        _, P = markov_unit(s1, s2)
        ff = feed_forward_unit(s1, s2, s3)
        fb = feed_back_unit(s1, s2, s3)
    except (IterationError, ZeroDivisionError, QuandleError) as exc:
        _emit(args, {"status": "failed", "error": str(exc)})
        return EXIT_DOMAIN
    spec = markov_iteration(s1, s2, v0, args.copies)
    traj = iterate(spec).vectors(MARKOV_IN, MARKOV_OUT)
    steady = steady_state(spec)

    def rows(m):
        return [[encode_color(x) for x in r] for r in m.rows]

    _emit(args, {
        "P": P.to_json(),
        "P0": ff.P0.to_json(), "P1": ff.P1.to_json(), "composition_order": ff.order,
        "P0dd": fb.P0dd.to_json(), "T": fb.T.to_json(), "P1_feed_back": fb.P1.to_json(),
        "composite": rows(fb.composite),
        "feed_back_two_step": rows(fb.two_step),
        "stability": {
            "markov": internal_stability({"P": P}).to_json(),
            "feed_forward": internal_stability({"P0": ff.P0, "P1": ff.P1}).to_json(),
            "feed_back": internal_stability({"P1": fb.P1, "P0dd": fb.P0dd, "T": fb.T}).to_json(),
        },
        "steady_state": steady.to_json() if steady is not None else None,
        "trajectory": [[encode_color(x) for x in v] for v in traj],
    })
    return EXIT_OK


# -- parser -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tanglekit", description="Quandle-coloured machines: checks, moves and demos.")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--version", action="version", version=f"tanglekit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        return sp

    add("validate", cmd_validate, "check every edge relation").add_argument("file")
    add("color", cmd_color, "complete a partial colouring").add_argument("file")
    sp = add("moves", cmd_moves, "list applicable moves")
    sp.add_argument("file")
    sp.add_argument("--kinds", help="comma-separated subset of " + ",".join(KINDS))
    sp = add("replay", cmd_replay, "apply a move sequence")
    sp.add_argument("file")
    sp.add_argument("moves", nargs="?", help="JSON move list (default: the document's own moves)")
    sp = add("equiv", cmd_equiv, "search for moves relating two machines")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.add_argument("--max-moves", type=int, default=8)
    sp.add_argument("--max-states", type=int, default=20000)
    sp.add_argument("--max-stabilizations", type=int, default=2)
    add("invariants", cmd_invariants, "invariant profile and canonical key").add_argument("file")
    add("dot", cmd_dot, "Graphviz export").add_argument("file")
    sp = add("iterate", cmd_iterate, "concatenate copies of a unit machine")
    sp.add_argument("file")
    sp.add_argument("--pair", action="append", metavar="OUT=IN", help="terminal=initial pairing")
    sp.add_argument("--copies", type=int, default=5)
    sp = add("demo-info", cmd_demo_info, "entropy capacity triple")
    for k in ("H0", "H1", "H2", "H1g2", "H1g02", "H1g0"):
        sp.add_argument(f"--{k}")
    sp = add("demo-aqc", cmd_demo_aqc, "spectral gaps of the Hamiltonian machines")
    sp.add_argument("--grid", type=int, default=2001)
    sp.add_argument("--threshold", type=float, default=1e-6)
    sp.add_argument("--csv", help="write gap trajectories to this CSV file")
    sp = add("demo-markov", cmd_demo_markov, "Markov unit with feed-forward and feed-back variants")
    sp.add_argument("--s1", default="3/10")
    sp.add_argument("--s2", default="1/2")
    sp.add_argument("--s3", default="9/10")
    sp.add_argument("--copies", type=int, default=5)
    sp.add_argument("--v0", default="1,0")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    random.seed(args.seed)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tanglekit: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DocumentError as exc:
        print(json.dumps({"error": exc.detail, "pointer": exc.pointer or "/"}))
        print(f"tanglekit: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
