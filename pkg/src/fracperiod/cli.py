"""Command-line front end: ``region``, ``simulate``, ``cycle``, ``scan``, ``check``.

Exit codes: 0 success (or ``inside``), 1 ``outside``, 2 invalid input,
3 no cycle found.  Machine-readable JSON goes to stdout, a short human
summary to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import re
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from fracperiod import cycles as cyc
from fracperiod import maps, region, simulator
from fracperiod.kernel import InvalidOrderError, as_order

EXIT_OK, EXIT_OUTSIDE, EXIT_INVALID, EXIT_NO_CYCLE = 0, 1, 2, 3

MAP_CHOICES = ("logistic", "cubic", "gauss", "linear2", "expr")
# options whose values may legitimately start with '-'
_VALUE_OPTS = ("--grid", "--expr", "--param", "--a", "--b", "--x0", "--guess", "--alpha")

log = logging.getLogger("fracperiod")


class UsageError(ValueError):
    pass


# {{{ formatting

def fmt(x: float) -> str:
    """17 significant digits: round-trips any binary64 value."""
    return "%.17g" % x


def write_csv(path: str | None, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    def cell(v):
        if isinstance(v, (bool, np.bool_)):
            return "true" if v else "false"
        if isinstance(v, (float, np.floating)):
            return fmt(float(v))
        return str(v)

    lines = [",".join(header)] + [",".join(cell(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def read_csv(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(_jsonable(payload), sort_keys=True) + "\n")


def say(msg: str) -> None:
    sys.stderr.write(msg + "\n")

# }}}


# {{{ argument helpers

def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` with an inclusive stop."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"grid must be start:stop:step, got {text!r}") from None
    if not all(map(math.isfinite, (start, stop, step))) or step <= 0 or stop < start:
        raise UsageError(f"grid needs finite start <= stop and step > 0, got {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n > 10**6:
        raise UsageError(f"grid has {n} points; at most 1e6 are allowed")
    return np.round(start + step * np.arange(n), 12)


def parse_guess(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"guess must be u,v, got {text!r}")
    try:
        u, v = float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"guess must be u,v, got {text!r}") from None
    return u, v


_IDENT = re.compile(r"[A-Za-z_]\w*")


def infer_parameter_name(expr: str) -> str:
    names = {n for n in _IDENT.findall(expr) if n not in ("x", "exp", "sin", "cos")}
    if len(names) > 1:
        raise UsageError(f"expression uses several free names {sorted(names)}; pass --param-name")
    return names.pop() if names else "p"


def build_map(args, need_param: bool = True) -> maps.MapSpec:
    kind = args.map
    if kind == "linear2":
        if args.a is None or args.b is None:
            raise UsageError("--map linear2 needs --a and --b")
        return maps.linear_two_periodic(args.a, args.b)
    param = args.param
    if param is None:
        if need_param:
            raise UsageError(f"--map {kind} needs --param")
        param = 0.0
    if kind == "expr":
        if not args.expr:
            raise UsageError("--map expr needs --expr")
        name = args.param_name or infer_parameter_name(args.expr)
        return maps.parse_map(args.expr, name, param)
    return maps.builtin(kind, param)


def _order(alpha: float, open_interval: bool = False):
    order = as_order(alpha)
    if open_interval and order.alpha >= 1.0:
        raise UsageError("this command needs 0 < alpha < 1 (at alpha = 1 the boundary curves do not meet)")
    return order


def _normalize_argv(argv: Sequence[str]) -> list[str]:
    # argparse reads "--grid -0.3:0.8:0.01" as two options; glue such values on
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out

# }}}


# {{{ commands

def cmd_region(args) -> int:
    order = _order(args.alpha, open_interval=True)
    if args.samples < 16:
        raise UsageError("--samples must be at least 16")
    reg = region.build_region(order, args.samples)
    rows = []
    for curve in reg.curves:
        for t, (a, b) in zip(curve.params, curve.points):
            rows.append((curve.label, t, a, b))
    boundary_out = args.out
    polygon_out = args.polygon_out
    if polygon_out is None and boundary_out not in (None, "-"):
        p = Path(boundary_out)
        polygon_out = str(p.with_name(p.stem + "_polygon" + (p.suffix or ".csv")))
    if boundary_out not in (None, "-"):
        write_csv(boundary_out, ("curve", "param", "a", "b"), rows)
    if polygon_out is not None:
        write_csv(polygon_out, ("a", "b"), reg.polygon)
    corners = reg.intersections
    payload = {
        "alpha": order.alpha,
        "samples": args.samples,
        "vertices": int(len(reg.polygon)),
        "intersections": {name: list(getattr(corners, name)) for name in corners._fields},
        "boundary_csv": boundary_out,
        "polygon_csv": polygon_out,
    }
    emit(payload)
    say(f"region alpha={order.alpha:g}: {len(reg.polygon)} vertices")
    return EXIT_OK


def cmd_simulate(args) -> int:
    order = _order(args.alpha)
    spec = build_map(args)
    if args.steps < 1:
        raise UsageError("--steps must be positive")
    if args.split:
        tr = simulator.iterate_split(spec, args.x0, order, args.steps)
        rows = [(i, p, q) for i, (p, q) in enumerate(zip(tr.p, tr.q))]
        flat = simulator.Trajectory(order, tr.interleave(), tr.diverged_at, tr.reason)
        header = ("t", "p", "q")
    else:
        flat = simulator.iterate_direct(spec, args.x0, order, args.steps)
        rows = list(enumerate(flat.x))
        header = ("t", "x")
    if args.out:
        write_csv(args.out, header, rows)
    tail = max(1, min(args.tail, (len(flat.x) - 2) // 2))
    info = simulator.classify_behavior(flat, spec, tail=tail, tol=args.tol) if len(flat.x) > 3 \
        else {"behavior": "divergent" if flat.diverged else "undetermined"}
    if info.get("behavior") == "period-2":
        u, v = info["u"], info["v"]
        info["u"], info["v"] = max(u, v), min(u, v)
    payload = {"alpha": order.alpha, "map": spec.describe(), "steps": args.steps,
               "x0": args.x0, "length": len(flat.x), **info}
    emit(payload)
    say(f"simulate: {info['behavior']}")
    return EXIT_OK


def _cycle_rows(found, spec):
    return [{"alpha": c.alpha.alpha, "map": spec.describe(), "parameter": spec.parameter,
             "u": c.u, "v": c.v, "a": c.a, "b": c.b, "verdict": c.verdict} for c in found]


def cmd_cycle(args) -> int:
    order = _order(args.alpha)
    spec = build_map(args)
    if spec.kind == "linear2":
        raise UsageError("cycle needs a nonlinear map")
    if args.guess is not None:
        found = [cyc.solve_period2(spec, order, parse_guess(args.guess))]
    else:
        found = cyc.cycles_at(spec, order)
    if not found:
        raise cyc.NoRealCycleError("no real period-2 cycle found")
    if args.verify:
        for c in found:
            cyc.cross_check(c, spec, seeds=(c.u, c.v, 0.5 * (c.u + c.v)), T=args.steps)
    rows = _cycle_rows(found, spec)
    stable = [r for r in rows if r["verdict"] == "stable"]
    emit({"alpha": order.alpha, "map": spec.describe(), "parameter": spec.parameter,
          "cycles": rows, "stable": len(stable)})
    for r in rows:
        say(f"cycle u={r['u']:.6g} v={r['v']:.6g} a={r['a']:.6g} b={r['b']:.6g} {r['verdict']}")
    return EXIT_OK


def cmd_scan(args) -> int:
    order = _order(args.alpha)
    if args.grid is None:
        raise UsageError("scan needs --grid start:stop:step")
    grid = parse_grid(args.grid)
    spec = build_map(args, need_param=False)
    if spec.kind == "linear2":
        raise UsageError("scan needs a one-parameter nonlinear map")
    loc = cyc.locus(spec, order, grid)
    if args.out:
        write_csv(args.out, ("param", "u", "v", "a", "b", "inside"),
                  [(p.param, p.u, p.v, p.a, p.b, p.inside) for p in loc.points])
    payload = {"alpha": order.alpha, "map": spec.describe(), "points": len(grid),
               "stable_points": int(loc.inside.sum())}
    try:
        lo, hi = cyc.scan_window(spec, order, grid, tol=args.tol)
    except cyc.WindowError as exc:
        payload["window"] = None
        emit(payload)
        say(f"scan: {exc}")
        return EXIT_NO_CYCLE
    payload["window"] = [lo, hi]
    emit(payload)
    say(f"scan: stable period-2 window ({lo:.6g}, {hi:.6g})")
    return EXIT_OK


def cmd_check(args) -> int:
    order = _order(args.alpha, open_interval=True)
    if args.a is None or args.b is None:
        raise UsageError("check needs --a and --b")
    reg = cyc.region_for(order.alpha, args.samples)
    inside = region.contains(reg, args.a, args.b)
    verdict = region.classify_by_simulation(args.a, args.b, order, T=max(500, args.steps))
    sys.stdout.write(("inside" if inside else "outside") + "\n")
    emit({"alpha": order.alpha, "a": args.a, "b": args.b,
          "inside": inside, "simulation": verdict})
    say(f"check: {'inside' if inside else 'outside'}, simulation says {verdict}")
    return EXIT_OK if inside else EXIT_OUTSIDE

# }}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracperiod", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mapped=True):
        p.add_argument("--alpha", type=float, required=True)
        if mapped:
            p.add_argument("--map", choices=MAP_CHOICES, required=True)
            p.add_argument("--expr")
            p.add_argument("--param-name")
            p.add_argument("--param", type=float)
            p.add_argument("--a", type=float)
            p.add_argument("--b", type=float)

    p = sub.add_parser("region", help="build the stability region")
    common(p, mapped=False)
    p.add_argument("--samples", type=int, default=region.DEFAULT_SAMPLES)
    p.add_argument("--out", help="boundary CSV (curve,param,a,b)")
    p.add_argument("--polygon-out", help="polygon CSV (a,b); defaults next to --out")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="iterate a fractional map")
    common(p)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--split", action="store_true", help="even/odd form, CSV t,p,q")
    p.add_argument("--tail", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cycle", help="solve for period-2 limit cycles")
    common(p)
    p.add_argument("--guess", help="u,v starting pair for Newton")
    p.add_argument("--verify", action="store_true", help="cross-check verdicts by simulation")
    p.add_argument("--steps", type=int, default=2000)
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("scan", help="trace the cycle locus over a parameter grid")
    common(p)
    p.add_argument("--grid")
    p.add_argument("--tol", type=float, default=1e-6, help="edge refinement tolerance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("check", help="region membership of (a, b)")
    common(p, mapped=False)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--samples", type=int, default=region.DEFAULT_SAMPLES)
    p.add_argument("--steps", type=int, default=500)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_normalize_argv(argv))
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except cyc.NoRealCycleError as exc:
        emit({"error": "no-cycle", "message": str(exc)})
        say(f"error: {exc}")
        return EXIT_NO_CYCLE
    except (UsageError, InvalidOrderError, maps.ExpressionSyntaxError, region.RegionError,
            ValueError, maps.MapDomainError) as exc:
        say(f"error: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

# vim: foldmethod=marker
