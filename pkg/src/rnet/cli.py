"""Command-line entry point: ``rnet <command> [options]``.

Exit status: 0 on success, 2 when a limit did not converge or a question was
left undecided (the report is still written), 1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .boundary import (boundary_classes, functional_eval, model_paths, probe_test_set,
                       validate_path)
from .errors import DepthExhausted, Inconclusive, NotConverged, RNetError
from .exhaustion import BALL, DEFAULT_TOL, FREE, SCHEMES, WIRED, truncate
from .models import BINARY_TREE, MODEL_NAMES, NONE, SIMPLE_LINE, ModelSpec, build_model, closed_forms
from .network import INFINITY, dirac, energy, load_network
from .potential_theory import charge_balance, classify, gauss_green_split
from .resistance import effective_resistance, free_resistance, reduce_two_terminal, wired_resistance
from .solver import kernel_families, level_kernels, monopole
from .stochastic import (default_threads, escape_probability, hitting_probability, mc_boundary_integral,
                         moment_check, pair_variance, random_walk_mc, sample_field)

SCHEMA = "rnet.report/1"
DEFAULT_KMAX = 20
DEFAULT_N = 100_000
SOFT_FAILURES = (NotConverged, Inconclusive, DepthExhausted)
ALIASES = {"LINE": SIMPLE_LINE, "TREE": BINARY_TREE}
MODEL_PARAMS = ("c", "m", "alpha", "beta", "d", "patch")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- input ------------------------------------------------------------

def model_name(text):
    key = text.upper().replace("-", "_")
    key = ALIASES.get(key, key)
    if key not in MODEL_NAMES:
        raise UsageError(f"unknown model {text!r}; choose from {', '.join(m.lower().replace('_', '-') for m in MODEL_NAMES)}")
    return key


def load_input(args):
    if bool(args.model) == bool(args.file):
        raise UsageError("give exactly one of --model or --file")
    if args.file:
        given = [p for p in MODEL_PARAMS if getattr(args, p) is not None]
        if given:
            raise UsageError(f"model parameters {given} only apply with --model")
        return load_network(args.file), None
    params = {p: getattr(args, p) for p in MODEL_PARAMS if getattr(args, p) is not None}
    spec = ModelSpec(model_name(args.model), params)
    return build_model(spec), spec


def require_generated(net, command):
    if net.is_finite:
        raise UsageError(f"'{command}' needs an infinite (generated) network; a finite file was given")


def vertex(net, token):
    if token in ("inf", "∞"):
        return INFINITY
    return net.parse_vertex(token)


def potential_from_spec(net, spec, text, level, args):
    """Potentials named on the command line.

    ``delta:X``, ``v:X``, ``f:X``, ``h:X``, ``monopole``, ``closed:KIND``, ``const``.
    """
    kind, _, arg = text.partition(":")
    if kind == "delta":
        return dirac(vertex(net, arg), net.ball(level + 1), net.origin)
    if kind in ("v", "f", "h"):
        x = vertex(net, arg)
        return getattr(level_kernels(net, [x], level, args.scheme)[x], kind)
    if kind == "monopole":
        mono = monopole(net, k_max=level, tol=args.tol, scheme=args.scheme, stop_early=False)
        return mono.value
    if kind == "closed":
        if spec is None:
            raise UsageError("closed forms need --model")
        for cf in closed_forms(spec):
            if cf.kind == arg.upper():
                return cf.evaluator
        raise UsageError(f"model {spec.name} has no closed form {arg!r}")
    if kind == "const":
        return lambda y: 1.0
    raise UsageError(f"cannot parse potential {text!r}")


# -- output -----------------------------------------------------------

def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set)):
        items = sorted(obj, key=str) if isinstance(obj, set) else obj
        return [_clean(v) for v in items]
    if obj is INFINITY:
        return "inf"
    return obj


def _echo(args):
    skip = {"func", "out", "threads", "kmax_given"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def write_report(args, result, status="ok", csv_rows=None):
    report = {"schema": SCHEMA, "command": args.command, "input": _echo(args), "status": status,
              "result": result}
    text = json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"
    if args.format == "csv" and csv_rows is not None:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(csv_rows)
        body = buf.getvalue()
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(body)
            with open(args.out + ".json", "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(body)
        return
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def trace_rows(levels, values):
    return [("level", "value")] + [(k, repr(float(v))) for k, v in zip(levels, values)]


# -- commands -----------------------------------------------------------

def cmd_model(args):
    net, spec = load_input(args)
    depth = args.depth
    fmt = net.format_vertex
    ball = net.ball(depth)
    edges = []
    inside = set(ball)
    for x in ball:
        for y, c in net.neighbors(x):
            if y in inside and str(fmt(x)) < str(fmt(y)):
                edges.append([fmt(x), fmt(y), c])
    result = {"name": net.name, "kind": net.kind, "origin": fmt(net.origin),
              "ball_sizes": [len(net.ball(k)) for k in range(depth + 1)], "edges": sorted(edges)}
    if spec is not None:
        result["params"] = spec.resolved()
        result["closed_forms"] = {cf.kind: {"description": cf.description,
                                            "values": {fmt(y): cf(y) for y in ball}}
                                  for cf in closed_forms(spec) if cf.kind != NONE}
    rows = [("level", "value")] + [(k, n) for k, n in enumerate(result["ball_sizes"])]
    write_report(args, result, csv_rows=rows)
    return 0


def cmd_energy(args):
    net, spec = load_input(args)
    level = args.kmax
    u = potential_from_spec(net, spec, args.u, level, args)
    v = potential_from_spec(net, spec, args.v or args.u, level, args)
    levels = list(range(1, level + 1))
    values = [energy(net, u, v, net.ball(k)) for k in levels]
    write_report(args, {"u": args.u, "v": args.v or args.u, "value": values[-1], "trace": values,
                        "levels": levels}, csv_rows=trace_rows(levels, values))
    return 0


def cmd_kernel(args):
    net, _ = load_input(args)
    x = vertex(net, args.x)
    try:
        fams = kernel_families(net, [x], args.kmax, args.tol, scheme=args.scheme)
        status = "ok"
    except NotConverged as exc:
        fams, status = exc.result, exc.code
    fam = fams[x]
    rows = [("vertex", "v", "f", "h")] + [(a, repr(b), repr(c), repr(d)) for a, b, c, d in fam.to_rows(net)]
    result = {"x": args.x, "level": fam.level, "converged": fam.converged, "convergence": fam.convergence,
              "f_infinity": fam.f_infinity, "harmonic_residual": fam.harmonic_residual(net),
              "values": {r[0]: {"v": r[1], "f": r[2], "h": r[3]} for r in fam.to_rows(net)}}
    write_report(args, result, status, csv_rows=rows)
    return 0 if status == "ok" else 2


def cmd_resistance(args):
    net, _ = load_input(args)
    x, y = vertex(net, args.x), vertex(net, args.y)
    fmt = net.format_vertex
    status = "ok"
    if args.kind == "finite":
        if not net.is_finite:
            raise UsageError("--kind finite needs a finite network; use free or wired")
        rep = effective_resistance(net, x, y)
    else:
        fn = free_resistance if args.kind == "free" else wired_resistance
        try:
            rep = fn(net, x, y, args.kmax, args.tol, args.scheme)
        except NotConverged as exc:
            rep, status = exc.result, exc.code
    write_report(args, rep.to_dict(fmt), status, csv_rows=trace_rows(rep.levels, rep.trace))
    return 0 if status == "ok" else 2


def cmd_reduce(args):
    net, _ = load_input(args)
    if not net.is_finite:
        flavor = WIRED if args.flavor == "wired" else FREE
        net = truncate(net, args.k, flavor, args.scheme).subnet
    x, y = vertex(net, args.x), vertex(net, args.y)
    res = reduce_two_terminal(net, x, y)
    write_report(args, res.to_dict(net.format_vertex))
    return 0


def cmd_gauss_green(args):
    net, spec = load_input(args)
    level = args.kmax
    u = potential_from_spec(net, spec, args.u, level + 1, args)
    v = potential_from_spec(net, spec, args.v or args.u, level + 1, args)
    splits = [gauss_green_split(net, u, v, k, args.scheme).to_dict() for k in range(1, level + 1)]
    result = {"u": args.u, "v": args.v or args.u, "splits": splits,
              "max_residual": max(s["residual"] for s in splits)}
    if args.charge:
        result["charge_balance"] = [charge_balance(net, v, k, args.scheme) for k in range(1, level + 1)]
    rows = [("level", "interior_sum", "boundary_sum", "restricted_energy")] + [
        (s["level"], repr(s["interior_sum"]), repr(s["boundary_sum"]), repr(s["restricted_energy"]))
        for s in splits]
    write_report(args, result, csv_rows=rows)
    return 0


def cmd_transience(args):
    net, _ = load_input(args)
    require_generated(net, "transience")
    c = classify(net, args.kmax, args.tol, args.scheme)
    status = "ok" if c.transient != "INCONCLUSIVE" else Inconclusive.code
    mono = c.evidence["monopole"]
    write_report(args, c.to_dict(), status, csv_rows=trace_rows(mono["levels"], mono["energy_trace"]))
    return 0 if status == "ok" else 2


def _paths(net, args):
    paths = model_paths(net)
    if args.paths:
        pick = set(args.paths.split(","))
        paths = [p for p in paths if p.name in pick]
    return paths


def cmd_boundary(args):
    net, _ = load_input(args)
    require_generated(net, "boundary")
    depth = args.depth
    level = args.kmax if args.kmax_given else depth + 5
    try:
        paths = _paths(net, args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    valid = {p.name: validate_path(net, p, depth) for p in paths}
    if args.action == "validate":
        write_report(args, {"valid": valid, "depth": depth})
        return 0
    probes = [y for y in net.ball(args.probe_radius) if y != net.origin]
    if args.action == "functional":
        x = vertex(net, args.x)
        out, status = {}, "ok"
        for p in paths:
            try:
                out[p.name] = functional_eval(net, p, {x: 1.0}, depth, args.tol, level=level).to_dict()
            except NotConverged as exc:
                out[p.name] = exc.result.to_dict()
                status = exc.code
        write_report(args, {"functionals": {p: {args.x: r["value"]} for p, r in out.items()},
                            "traces": out, "depth": depth, "level": level}, status)
        return 0 if status == "ok" else 2
    tests = probe_test_set(net, probes, level, args.tol)
    try:
        rep = boundary_classes(net, paths, tests, depth, args.eq_tol)
    except DepthExhausted as exc:
        write_report(args, {"undecided": exc.result, "valid": valid, "depth": depth}, exc.code)
        return 2
    result = rep.to_dict()
    result.update({"valid": valid, "depth": depth, "level": level, "tol": args.eq_tol})
    write_report(args, result)
    return 0


def cmd_mc(args):
    net, spec = load_input(args)
    if args.seed is None:
        raise UsageError("mc needs --seed")
    xs = [vertex(net, t) for t in args.window.split(",")]
    flavor = WIRED if args.flavor == "wired" else FREE
    harmonic = {}
    if spec is not None and flavor == FREE:
        for cf in closed_forms(spec):
            if cf.kind == "HARMONIC":
                harmonic["u"] = cf.evaluator
    hx = vertex(net, args.x) if args.x is not None and harmonic else None
    need = xs + ([hx] if hx is not None and hx not in xs else [])
    fams = kernel_families(net, need, args.kmax, args.tol, scheme=args.scheme, require_convergence=False,
                           k_min=max(1, args.kmax - 5))
    extra = {"h_x": fams[hx].h} if hx is not None else {}
    batch = sample_field(net, fams, args.N, args.seed, flavor, window=xs, extra=extra, harmonic=harmonic,
                         threads=args.threads)
    fmt = net.format_vertex
    res_fn = free_resistance if flavor == FREE else wired_resistance
    pairs = []
    window = [x for x in xs if x != net.origin]
    for i, a in enumerate(xs):
        for b in xs[i + 1:]:
            pv = pair_variance(batch, a, b)
            try:
                r = res_fn(net, a, b, args.kmax, args.tol).value
            except NotConverged as exc:
                r = exc.result.value
            pairs.append({"x": fmt(a), "y": fmt(b), "estimate": pv["estimate"], "sigma": pv["sigma"],
                          "resistance": r})
    coeffs = {w: 1.0 for w in window}
    result = {"labels": [fmt(l) if l in window else l for l in batch.labels], "N": batch.N,
              "seed": batch.seed, "generator_id": batch.generator_id, "flavor": flavor, "level": batch.level,
              "clipped_eigenvalues": batch.clipped, "warnings": batch.warnings, "pairs": pairs,
              "moments": [moment_check(batch, coeffs, n) for n in (1, 2)]}
    if hx is not None:
        result["boundary_integral"] = mc_boundary_integral(batch, "u", "h_x")
    if args.format == "csv" and args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(batch.to_csv(lambda l: fmt(l) if l in window else str(l)))
        args_json = args.out + ".json"
        report = {"schema": SCHEMA, "command": args.command, "input": _echo(args), "status": "ok",
                  "result": result}
        with open(args_json, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(_clean(report), sort_keys=True, indent=2) + "\n")
        return 0
    write_report(args, result)
    return 0


def cmd_walk(args):
    net, _ = load_input(args)
    if args.seed is None:
        raise UsageError("walk needs --seed")
    if not net.is_finite:
        net = truncate(net, args.k, WIRED, args.scheme).subnet
    start, target = vertex(net, args.start), vertex(net, args.target)
    absorb = vertex(net, args.absorb) if args.absorb is not None else start
    strict = start == absorb
    mc = random_walk_mc(net, start, target, absorb, args.N, args.seed, strict=strict, threads=args.threads)
    exact = escape_probability(net, start, target, absorb) if strict else \
        hitting_probability(net, target, absorb, start)
    mc.update({"exact": exact, "start": args.start, "target": args.target,
               "absorb": args.absorb if args.absorb is not None else args.start})
    write_report(args, mc)
    return 0


# -- parser -------------------------------------------------------------

def _common(p, *, mc=False):
    src = p.add_argument_group("input")
    src.add_argument("--model", help="built-in model (geo-int, geo-half, star, binary-tree, ladder, "
                                     "lattice-join, line)")
    src.add_argument("--file", help="edge-list network file")
    src.add_argument("--c", type=float)
    src.add_argument("--m", type=int)
    src.add_argument("--alpha", type=float)
    src.add_argument("--beta", type=float)
    src.add_argument("--d", type=int)
    src.add_argument("--patch", type=int)
    p.add_argument("--kmax", type=int, default=None, help=f"exhaustion levels (default {DEFAULT_KMAX})")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--scheme", choices=SCHEMES, default=BALL)
    p.add_argument("--out", help="report path (default: standard output)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: RNET_THREADS or available cores)")
    if mc:
        p.add_argument("--N", type=int, default=DEFAULT_N)
        p.add_argument("--seed", type=int)


def build_parser():
    parser = _Parser(prog="rnet", description="Potential theory on resistance networks.")
    parser.add_argument("--version", action="version", version=f"rnet {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("model", help="describe a network")
    _common(p)
    p.add_argument("--depth", type=int, default=3)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("energy", help="energy of potentials over growing balls")
    _common(p)
    p.add_argument("--u", required=True, help="delta:X, v:X, f:X, h:X, monopole, closed:KIND or const")
    p.add_argument("--v")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("kernel", help="kernels v_x, f_x, h_x")
    _common(p)
    p.add_argument("--x", required=True)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("resistance", help="effective, free or wired resistance")
    _common(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--kind", choices=("finite", "free", "wired"), default="free")
    p.set_defaults(func=cmd_resistance)

    p = sub.add_parser("reduce", help="series/parallel/Y-Δ reduction between two terminals")
    _common(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--k", type=int, default=3, help="truncation level for generated models")
    p.add_argument("--flavor", choices=("free", "wired"), default="wired")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("gauss-green", help="interior/boundary split of the energy per level")
    _common(p)
    p.add_argument("--u", required=True)
    p.add_argument("--v")
    p.add_argument("--charge", action="store_true", help="also report charge balance of v")
    p.set_defaults(func=cmd_gauss_green)

    p = sub.add_parser("transience", help="transience and Harm-dimension estimate")
    _common(p)
    p.set_defaults(func=cmd_transience)

    p = sub.add_parser("boundary", help="paths to infinity and boundary points")
    _common(p)
    p.add_argument("action", nargs="?", choices=("count", "functional", "validate"), default="count")
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--paths", help="comma-separated subset of the model's standard paths")
    p.add_argument("--x", help="kernel vertex for 'functional'")
    p.add_argument("--probe-radius", type=int, default=2)
    p.add_argument("--eq-tol", type=float, default=1e-3, help="path equivalence tolerance")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("mc", help="Gaussian-field Monte Carlo")
    _common(p, mc=True)
    p.add_argument("--window", required=True, help="comma-separated vertices")
    p.add_argument("--x", help="kernel vertex for the boundary integral")
    p.add_argument("--flavor", choices=("free", "wired"), default="free")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("walk", help="random-walk hitting probability by Monte Carlo")
    _common(p, mc=True)
    p.add_argument("--start", required=True)
    p.add_argument("--target", required=True, help="vertex id or 'inf'")
    p.add_argument("--absorb", help="absorbing vertex (default: start, escape probability)")
    p.add_argument("--k", type=int, default=10, help="wired truncation level for generated models")
    p.set_defaults(func=cmd_walk)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.kmax_given = args.kmax is not None
        if args.kmax is None:
            args.kmax = DEFAULT_KMAX
        if args.threads is None:
            args.threads = default_threads()
        if args.command in ("boundary", "functional") and args.action == "functional" and not args.x:
            raise UsageError("boundary functional needs --x")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SOFT_FAILURES as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 2
    except RNetError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
