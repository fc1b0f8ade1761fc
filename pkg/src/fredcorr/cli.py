"""Scenario-driven command line front end.

Scenarios are versioned JSON files describing a pair, twist, chain, fan,
graph, sphere, torus, or transmission computation; the tool runs every
index route the scenario admits, cross-checks them, and emits a table,
CSV, JSON, or DOT.  Identical scenario and seed give byte-identical
output.  Exit codes: 0 all checks pass, 1 a check failed, 2 usage or
parse error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import subspaces
from .circles import (
    LaurentSymbol,
    build_sphere_chain,
    build_torus,
    mv_pairing,
    random_laurent_symbol,
    sphere_hardy_pair,
    symbol_twist,
    twist_circle,
    winding_number,
)
from .errors import FredcorrError
from .fans import fan_from_twists, fan_index, partition_parts, random_fan
from .graphs import (
    DecompositionGraph,
    GraphEdge,
    edge_index,
    global_index_additive,
    global_index_fan,
    global_index_selfglue,
    has_self_loops,
    random_graph,
    sphere_path_graph,
    to_dot,
    torus_graph,
    vertex_index,
)
from .fans import TwistChain
from .morphisms import Twist, chain_total_index, index, reduce_chain_ledger, tilde_ind
from .subspaces import complement, pair_index, random_subspace, rank, restricted_projection_index
from .verify import available_suites, load_conventions, run_suite

SCENARIO_VERSION = 1
KINDS = ("pair", "twist", "chain", "fan", "graph", "sphere", "torus",
         "rh_transmission")

# params each kind accepts; "seed" is valid everywhere
PARAM_KEYS = {
    "pair": ("ambient", "dims"),
    "twist": ("window", "symbol", "channels", "degree"),
    "chain": ("window", "radii", "twists", "twist_powers"),
    "fan": ("window", "powers"),
    "graph": ("window", "edges", "vertices"),
    "sphere": ("window", "radii", "twists", "twist_powers"),
    "torus": ("window", "q", "k"),
    "rh_transmission": ("window", "symbol", "channels", "degree"),
}


class UsageError(Exception):
    pass


# -- Laurent symbol serialization ---------------------------------------

def symbol_to_json(sym):
    """Nested coefficient table with explicit power offset; every
    coefficient as an [re, im] pair so round-trips are bit-exact."""
    entries = []
    for a in range(sym.channels):
        row = []
        for b in range(sym.channels):
            row.append([[float(c.real), float(c.imag)]
                        for c in sym.coeffs[:, a, b]])
        entries.append(row)
    return {"d_min": int(sym.d_min), "entries": entries}


def _coeff(value):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise UsageError(f"bad coefficient {value!r}: want a number or [re, im]")


def symbol_from_json(obj):
    if isinstance(obj, dict) and "power" in obj:
        return LaurentSymbol.monomial(int(obj["power"]),
                                      channels=int(obj.get("channels", 1)))
    if not isinstance(obj, dict) or "entries" not in obj:
        raise UsageError("symbol needs either {'power': k} or "
                         "{'d_min': int, 'entries': [[...]]}")
    entries = obj["entries"]
    n = len(entries)
    planes = max(len(cell) for row in entries for cell in row)
    coeffs = np.zeros((planes, n, n), dtype=np.complex128)
    for a, row in enumerate(entries):
        if len(row) != n:
            raise UsageError("symbol entry table must be square")
        for b, cell in enumerate(row):
            for p, value in enumerate(cell):
                coeffs[p, a, b] = _coeff(value)
    return LaurentSymbol(coeffs=coeffs, d_min=int(obj.get("d_min", 0)))


# -- report assembly -----------------------------------------------------

def _check(name, expected, actual):
    return {"name": name, "expected": expected, "actual": actual,
            "status": "PASS" if expected == actual else "FAIL"}


def _report(kind, inputs, results, checks):
    return {"version": SCENARIO_VERSION, "kind": kind, "inputs": inputs,
            "results": results, "checks": checks}


def _apply_budget(t, budget):
    if budget is None:
        return t
    return Twist(base=t.base, operator=t.operator, symbol=t.symbol,
                 budget=int(budget))


# -- scenario runners ----------------------------------------------------

def run_pair(params, window, seed, budget):
    n = int(params.get("ambient", 12))
    rng = np.random.default_rng(seed)
    dims = params.get("dims")
    if dims is None:
        dims = [int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1))]
    da, db = (int(d) for d in dims)
    a = random_subspace(n, da, rng)
    b = random_subspace(n, db, rng)
    rep = pair_index(a, b)
    stacked_rank = rank(np.hstack([a.frame, -b.frame]))
    inclusion = (da + db - stacked_rank) - (n - stacked_rank)
    restriction = restricted_projection_index(a, complement(b)).index
    results = {
        "ambient": n, "dims": [da, db],
        "pair_index": rep.index,
        "dim_intersection": rep.dim_intersection,
        "codim_sum": rep.codim_sum,
        "inclusion_route": inclusion,
        "restriction_route": restriction,
    }
    checks = [
        _check("pair index equals dimension identity", da + db - n, rep.index),
        _check("inclusion route agrees", rep.index, inclusion),
        _check("restriction route agrees", rep.index, restriction),
    ]
    return _report("pair", {"ambient": n, "dims": [da, db], "seed": seed},
                   results, checks)


def run_twist(params, window, seed, budget):
    m = window if window is not None else int(params.get("window", 8))
    if "symbol" in params:
        sym = symbol_from_json(params["symbol"])
    else:
        rng = np.random.default_rng(seed)
        sym = random_laurent_symbol(rng, channels=int(params.get("channels", 1)),
                                    degree=int(params.get("degree", 2)))
    t = _apply_budget(symbol_twist(sym, twist_circle(m, channels=sym.channels)),
                      budget)
    w = winding_number(sym)
    ti = tilde_ind(t)
    results = {"window": m, "winding": w, "twist_index": ti,
               "symbol": symbol_to_json(sym)}
    checks = [_check("windowed index equals winding", w, ti)]
    return _report("twist", {"window": m, "seed": seed}, results, checks)


def _twists_from_params(params, seed):
    if "twists" in params:
        return [symbol_from_json(s) for s in params["twists"]]
    if "twist_powers" in params:
        return [LaurentSymbol.monomial(int(k)) for k in params["twist_powers"]]
    return []


def run_chain(params, window, seed, budget):
    m = window if window is not None else int(params.get("window", 6))
    radii = tuple(float(r) for r in params.get("radii", (2.0, 1.0)))
    twists = _twists_from_params(params, seed)
    chain = build_sphere_chain(m, twists, radii=radii)
    links = [index(l) for l in chain.links]
    total = chain_total_index(chain)
    base = load_conventions()["sphere_total_index"]
    expected = base + sum(winding_number(s) for s in twists)
    left = reduce_chain_ledger(chain, tuple(range(len(chain) - 1)))
    right = reduce_chain_ledger(chain, tuple(reversed(range(len(chain) - 1))))
    results = {"window": m, "radii": list(radii),
               "link_indices": links, "total": total,
               "delta_events_left": list(left.delta_events),
               "delta_events_right": list(right.delta_events)}
    checks = [
        _check("total is one plus total winding", expected, total),
        _check("total equals sum of links", sum(links), total),
        _check("reduction orders agree", left.total, right.total),
    ]
    return _report("chain", {"window": m, "radii": list(radii), "seed": seed},
                   results, checks)


def run_fan(params, window, seed, budget):
    m = window if window is not None else int(params.get("window", 6))
    powers = params.get("powers")
    if powers is None:
        rng = np.random.default_rng(seed)
        f = random_fan(rng, half_width=m)
    else:
        powers = [int(k) for k in powers]
        space = twist_circle(m).space()
        k = len(powers)
        cuts = [int(round(-m + (i + 1) * (2 * m + 1) / k))
                for i in range(k - 1)]
        parts = partition_parts(space.window, cuts)
        twists = [None if p == 0 else LaurentSymbol.monomial(p)
                  for p in powers]
        f = fan_from_twists(space, parts, twists, budget=budget)
    rep = fan_index(f)
    results = {"window": m, "n_parts": f.n_parts,
               "part_dims": [p.dim for p in f.parts],
               "member_dims": [mm.dim for mm in f.members],
               "formula1": rep.formula1, "formula2": rep.formula2,
               "formula3": rep.formula3, "formula4": rep.formula4}
    checks = [
        _check("member-sum formula agrees", rep.formula1, rep.formula3),
        _check("telescoped formula agrees", rep.formula1, rep.formula4),
    ]
    if rep.formula2 is not None:
        checks.append(_check("twist-sum formula agrees", rep.formula1,
                             rep.formula2))
    return _report("fan", {"window": m, "powers": powers, "seed": seed},
                   results, checks)


def _graph_from_params(params, window, seed):
    if "edges" not in params:
        rng = np.random.default_rng(seed)
        kwargs = {}
        if window is not None:
            kwargs["half_width"] = window
        return random_graph(rng, **kwargs)
    m = window if window is not None else int(params.get("window", 8))
    circle = twist_circle(m)
    vertices = tuple(params.get("vertices")
                     or sorted({str(e["source"]) for e in params["edges"]}
                               | {str(e["target"]) for e in params["edges"]}))
    edges = {}
    for i, spec in enumerate(params["edges"]):
        tw = None
        if spec.get("twist") is not None:
            sym = symbol_from_json(spec["twist"])
            if sym.channels != 1:
                raise UsageError("graph edge twists must be scalar symbols")
            tw = symbol_twist(sym, circle)
        eid = str(spec.get("id", f"e{i}"))
        edges[eid] = GraphEdge(str(spec["source"]), str(spec["target"]),
                               circle.space(), twist=tw)
    data = {v: TwistChain(factors=()) for v in vertices}
    return DecompositionGraph(vertices=vertices, edges=edges, vertex_data=data)


def run_graph(params, window, seed, budget):
    g = _graph_from_params(params, window, seed)
    per_vertex = {v: vertex_index(g, v) for v in sorted(g.vertices, key=str)}
    per_edge = {e: edge_index(g, e) for e in sorted(g.edges)}
    additive = global_index_additive(g)
    loops = has_self_loops(g)
    results = {"window": g.half_width,
               "vertex_indices": per_vertex, "edge_indices": per_edge,
               "additive": additive, "extension": loops}
    checks = []
    if loops:
        results["fan"] = None
    else:
        fan = global_index_fan(g)
        results["fan"] = fan
        checks.append(_check("fan route equals additive route", additive, fan))
    return _report("graph", {"seed": seed, "window": g.half_width},
                   results, checks), g


def run_sphere(params, window, seed, budget):
    m = window if window is not None else int(params.get("window", 6))
    radii = tuple(float(r) for r in params.get("radii", (2.0, 1.0)))
    twists = _twists_from_params(params, seed)
    chain = build_sphere_chain(m, twists, radii=radii)
    links = [index(l) for l in chain.links]
    total = chain_total_index(chain)
    base = load_conventions()["sphere_total_index"]
    expected = base + sum(winding_number(s) for s in twists)
    prod = None
    for s in twists:
        prod = s if prod is None else prod.product(s)
    g = sphere_path_graph(m, twist=prod, radii=radii)
    additive = global_index_additive(g)
    fan = global_index_fan(g)
    results = {"window": m, "radii": list(radii), "link_indices": links,
               "chain_total": total, "graph_additive": additive,
               "graph_fan": fan}
    checks = [
        _check("chain total is one plus winding", expected, total),
        _check("graph additive route agrees", total, additive),
        _check("graph fan route agrees", total, fan),
    ]
    return _report("sphere", {"window": m, "radii": list(radii), "seed": seed},
                   results, checks), g


def run_torus(params, window, seed, budget):
    m = window if window is not None else int(params.get("window", 8))
    q = float(params.get("q", 0.5))
    k = int(params.get("k", 0))
    l, t = build_torus(q, k, m)
    value = global_index_selfglue(l, _apply_budget(t, budget))
    expected = 0 if k == 0 else load_conventions()["torus_twist_sign"] * abs(k)
    results = {"window": m, "q": q, "k": k, "selfglue_index": value}
    checks = [_check("self-glued index matches pinned sign", expected, value)]
    return _report("torus", {"window": m, "q": q, "k": k, "seed": seed},
                   results, checks), torus_graph(q, k, m)


def run_rh_transmission(params, window, seed, budget):
    m = window if window is not None else int(params.get("window", 8))
    if "symbol" in params:
        sym = symbol_from_json(params["symbol"])
    else:
        rng = np.random.default_rng(seed)
        sym = random_laurent_symbol(rng, channels=int(params.get("channels", 1)),
                                    degree=int(params.get("degree", 2)))
    n = sym.channels
    w = winding_number(sym)
    t = _apply_budget(symbol_twist(sym, twist_circle(m, channels=n)), budget)
    ti = tilde_ind(t)
    mv = mv_pairing(sphere_hardy_pair(m), sym, n)
    manifest = load_conventions()
    results = {"window": m, "channels": n, "winding": w,
               "twist_index": ti, "mv_pairing": mv,
               "symbol": symbol_to_json(sym)}
    checks = [
        _check("transmission index equals winding", w, ti),
        _check("boundary pairing equals winding",
               manifest["mv_pairing_sign"] * w, mv),
    ]
    if n == 1:
        total = chain_total_index(build_sphere_chain(m, (sym,)))
        results["sphere_total"] = total
        checks.append(_check("twisted sphere total is one plus winding",
                             manifest["sphere_total_index"] + w, total))
    return _report("rh_transmission", {"window": m, "seed": seed},
                   results, checks)


RUNNERS = {
    "pair": run_pair,
    "twist": run_twist,
    "chain": run_chain,
    "fan": run_fan,
    "graph": run_graph,
    "sphere": run_sphere,
    "torus": run_torus,
    "rh_transmission": run_rh_transmission,
}

GRAPH_KINDS = ("graph", "sphere", "torus")


def run_scenario(scenario, window=None, seed=None, budget=None):
    """Returns (report, graph-or-None)."""
    if not isinstance(scenario, dict):
        raise UsageError("scenario must be a JSON object")
    if scenario.get("version") != SCENARIO_VERSION:
        raise UsageError(f"scenario version must be {SCENARIO_VERSION}")
    kind = scenario.get("kind")
    if kind not in KINDS:
        raise UsageError(f"unknown scenario kind {kind!r}; "
                         f"one of: {', '.join(KINDS)}")
    params = {k: v for k, v in scenario.items() if k not in ("version", "kind")}
    unknown = sorted(set(params) - set(PARAM_KEYS[kind]) - {"seed"})
    if unknown:
        raise UsageError(f"unknown parameter(s) for kind {kind!r}: "
                         f"{', '.join(unknown)}")
    if seed is None:
        seed = int(params.get("seed", 0))
    out = RUNNERS[kind](params, window, seed, budget)
    if kind in GRAPH_KINDS:
        return out
    return out, None


# -- output formatting ---------------------------------------------------

def _fmt_value(v):
    if isinstance(v, dict):
        items = ", ".join(f"{k}={_fmt_value(x)}" for k, x in sorted(v.items()))
        return "{" + items + "}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt_value(x) for x in v) + "]"
    return str(v)


def format_table(report):
    lines = [f"kind: {report['kind']}"]
    for key in sorted(report["results"]):
        if key == "symbol":
            continue
        lines.append(f"  {key}: {_fmt_value(report['results'][key])}")
    for c in report["checks"]:
        lines.append(f"  [{c['status']}] {c['name']}: "
                     f"expected {_fmt_value(c['expected'])}, "
                     f"got {_fmt_value(c['actual'])}")
    return "\n".join(lines) + "\n"


def format_csv(report):
    rows = ["section,name,value"]
    for key in sorted(report["results"]):
        if key == "symbol":
            continue
        rows.append(f"result,{key},{_csv_cell(report['results'][key])}")
    for c in report["checks"]:
        rows.append(f"check,{_csv_cell(c['name'])},{c['status']}")
    return "\n".join(rows) + "\n"


def _csv_cell(v):
    s = _fmt_value(v) if isinstance(v, (dict, list)) else str(v)
    if any(ch in s for ch in ",\"\n"):
        return '"' + s.replace('"', '""') + '"'
    return s


def format_json(report):
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


FORMATTERS = {"table": format_table, "csv": format_csv, "json": format_json}


def _emit(text, out_path):
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _exit_code(report):
    return 0 if all(c["status"] == "PASS" for c in report["checks"]) else 1


# -- argument plumbing ---------------------------------------------------

def _load_scenario(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: parse error at line {exc.lineno} "
                         f"column {exc.colno}: {exc.msg}")


def _resolve_tol(flag_value):
    if flag_value is not None:
        return float(flag_value)
    env = os.environ.get("FREDCORR_TOL")
    if env:
        try:
            return float(env)
        except ValueError:
            raise UsageError(f"FREDCORR_TOL is not a number: {env!r}")
    return None


def _add_common(p, scenario_arg=True):
    if scenario_arg:
        p.add_argument("scenario", nargs="?", help="scenario JSON file")
    p.add_argument("--window", type=int, help="override the mode window half width")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--tol", type=float, help="rank/angle tolerance "
                   "(overrides FREDCORR_TOL)")
    p.add_argument("--budget", type=int, help="override twist commutator budgets")
    p.add_argument("--format", choices=sorted(FORMATTERS), default="table")
    p.add_argument("--emit", choices=["dot"], help="emit a DOT rendering "
                   "(graph, sphere, torus scenarios)")
    p.add_argument("--out", help="write output to this file instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fredcorr",
        description="Exact index calculus for polarized correspondences "
                    "on windowed mode spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="run one scenario file")
    _add_common(p_index)

    p_chain = sub.add_parser("chain", help="sphere chain without a file")
    _add_common(p_chain, scenario_arg=False)
    p_chain.add_argument("--twist-powers", default="",
                         help="comma-separated monomial powers, e.g. 1,-1,2")

    p_fan = sub.add_parser("fan", help="fan four-formula report")
    _add_common(p_fan, scenario_arg=False)
    p_fan.add_argument("--powers", default=None,
                       help="comma-separated per-part twist powers")

    p_graph = sub.add_parser("graph", help="graph decomposition report")
    _add_common(p_graph)

    p_verify = sub.add_parser("verify", help="run a named property suite")
    p_verify.add_argument("suite", nargs="?", default=None,
                          help="suite name, or omit to list suites")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--count", type=int, default=None)
    p_verify.add_argument("--tol", type=float)

    p_report = sub.add_parser("report", help="run several scenarios")
    p_report.add_argument("scenarios", nargs="+", help="scenario JSON files")
    p_report.add_argument("--window", type=int)
    p_report.add_argument("--seed", type=int)
    p_report.add_argument("--tol", type=float)
    p_report.add_argument("--budget", type=int)
    p_report.add_argument("--format", choices=sorted(FORMATTERS),
                          default="table")
    return parser


def _scenario_from_args(args, kind):
    scenario = {"version": SCENARIO_VERSION, "kind": kind}
    if kind == "chain" and args.twist_powers:
        scenario["twist_powers"] = [int(k) for k in
                                    args.twist_powers.split(",")]
    if kind == "fan" and args.powers is not None:
        scenario["powers"] = [int(k) for k in args.powers.split(",")]
    return scenario


def _cmd_scenario(args, kind=None):
    if getattr(args, "scenario", None):
        scenario = _load_scenario(args.scenario)
        if kind is not None and scenario.get("kind") != kind:
            raise UsageError(f"expected a {kind} scenario, "
                             f"got {scenario.get('kind')!r}")
    elif kind is not None:
        scenario = _scenario_from_args(args, kind)
    else:
        raise UsageError("a scenario file is required")
    report, graph = run_scenario(scenario, window=args.window, seed=args.seed,
                                 budget=args.budget)
    if args.emit == "dot":
        if graph is None:
            raise UsageError(f"{report['kind']} scenarios have no DOT form")
        _emit(to_dot(graph), args.out)
    else:
        _emit(FORMATTERS[args.format](report), args.out)
    return _exit_code(report)


def _cmd_verify(args):
    if args.suite is None:
        sys.stdout.write("\n".join(available_suites()) + "\n")
        return 0
    try:
        rep = run_suite(args.suite, seed=args.seed, count=args.count)
    except KeyError as exc:
        raise UsageError(str(exc.args[0]))
    for c in rep.checks:
        mark = "PASS" if c.ok else "FAIL"
        detail = f"  ({c.detail})" if c.detail else ""
        sys.stdout.write(f"[{mark}] {c.name}: {c.passed}/{c.total}{detail}\n")
    sys.stdout.write(f"suite {rep.suite}: {'PASS' if rep.ok else 'FAIL'}\n")
    return 0 if rep.ok else 1


def _cmd_report(args):
    reports = []
    for path in args.scenarios:
        scenario = _load_scenario(path)
        report, _ = run_scenario(scenario, window=args.window, seed=args.seed,
                                 budget=args.budget)
        reports.append((path, report))
    if args.format == "json":
        payload = [{"file": p, **r} for p, r in reports]
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        failed = 0
        for path, r in reports:
            n_pass = sum(c["status"] == "PASS" for c in r["checks"])
            status = "PASS" if n_pass == len(r["checks"]) else "FAIL"
            failed += status == "FAIL"
            sys.stdout.write(f"{status} {path} ({r['kind']}): "
                             f"{n_pass}/{len(r['checks'])} checks\n")
        sys.stdout.write(f"{len(reports) - failed}/{len(reports)} scenarios passed\n")
    return 0 if all(_exit_code(r) == 0 for _, r in reports) else 1


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        tol = _resolve_tol(getattr(args, "tol", None))
        if tol is not None:
            subspaces.DEFAULT_TOL = tol
        if args.command == "index":
            return _cmd_scenario(args)
        if args.command == "chain":
            return _cmd_scenario(args, kind="chain")
        if args.command == "fan":
            return _cmd_scenario(args, kind="fan")
        if args.command == "graph":
            return _cmd_scenario(args, kind="graph")
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "report":
            return _cmd_report(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except FredcorrError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
