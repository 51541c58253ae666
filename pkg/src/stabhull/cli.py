"""Command line front end: stabhull <perimeter|area|exact|tpp|oracle> -i FILE ..."""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional

import numpy as np

from .geom_core import TOL, convex_hull
from .io import Instance, ParseError, Result, dump_result, parse_instance, verify_result
from .svg import render_svg

EXIT_OK, EXIT_PARSE, EXIT_INFINITE, EXIT_NONCONVERGENCE = 0, 2, 3, 4
COMMANDS = ("perimeter", "area", "exact", "tpp", "oracle")


class UsageError(ValueError):
    pass


def _from_solution(sol, extra=None) -> Result:
    if sol.polygon is None or not math.isfinite(sol.value):
        return Result("infinite", sol.objective, math.inf, None, {}, dict(sol.method))
    wits = {i: w for i, w in enumerate(sol.witnesses) if w is not None}
    method = dict(sol.method)
    if extra:
        method.update(extra)
    return Result("ok", sol.objective, float(sol.value), sol.polygon.vertices, wits, method)


def _order(text: str, n: int) -> list:
    try:
        idx = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad --order {text!r}") from None
    if not idx or any(i < 1 or i > n for i in idx):
        raise UsageError(f"--order indices must lie in 1..{n}")
    return [i - 1 for i in idx]


def run(command: str, flags, inst: Instance) -> Result:
    """Dispatch one command; ``flags`` is an argparse namespace (or anything with the same attributes)."""
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")
    cfg = inst.config
    eps = flags.eps if flags.eps is not None else cfg.get("eps", 0.25)
    tol = flags.tol if flags.tol is not None else cfg.get("tol", TOL)
    seed = flags.seed if flags.seed is not None else int(cfg.get("seed", 0))
    threads = max(1, int(flags.threads or 1))
    objs = inst.objects
    if command == "perimeter":
        from .fptas_perimeter import solve_perimeter

        if not 0 < eps <= 1:
            raise UsageError("--eps must lie in (0, 1]")
        return _from_solution(solve_perimeter(objs, eps, tol=tol, threads=threads))
    if command == "area":
        from .fptas_area import solve_area

        if not 0 < eps < 1:
            raise UsageError("--eps must lie in (0, 1)")
        kw = {"k_max": flags.resolution} if flags.resolution else {}
        return _from_solution(solve_area(objs, eps, tol=tol, threads=threads, seed=seed, **kw))
    if command == "exact":
        from .exact_segments import SUPPORTED, solve_exact

        bad = sorted({o.kind for o in objs if o.kind not in SUPPORTED})
        if bad:
            raise UsageError(f"exact handles segments, rays, lines and points, not {', '.join(bad)}")
        return _from_solution(solve_exact(objs, tol=tol))
    if command == "oracle":
        from .geom_core import witness_point
        from .oracle import oracle_area, oracle_perimeter

        grid_n = flags.resolution or 512
        if flags.objective == "area":
            ov = oracle_area(objs, grid_n=grid_n)
        else:
            ov = oracle_perimeter(objs, grid_n=grid_n)
        poly = convex_hull(ov.points)
        wits = {i: witness_point(o, poly) for i, o in enumerate(objs)}
        hv = poly.area if flags.objective == "area" else poly.perimeter
        return Result("ok", flags.objective, ov.value, poly.vertices, wits,
                      {"branch": "oracle", "grid_n": grid_n, "slack": ov.slack,
                       "lower": ov.lower, "witness_hull_value": hv})
    # tpp
    from .tpp_halfplanes import tour

    if flags.order is None:
        raise UsageError("tpp needs --order")
    order = _order(flags.order, len(objs))
    for i in order:
        if objs[i].kind == "polygon":
            raise UsageError("tpp visits points, segments, rays and lines only")
    start = np.asarray(inst.tour.get("start", np.zeros(2)), dtype=float)
    if flags.eps_ray is not None:
        if "start_dir" not in inst.tour:
            raise UsageError("--eps-ray needs tour.start_dir in the instance")
        start = start + flags.eps_ray * np.asarray(inst.tour["start_dir"], dtype=float)
    end = np.asarray(inst.tour.get("end", start), dtype=float)
    if "end" not in inst.tour:
        end = start
    path = tour(start, [objs[i] for i in order], end, tol=tol,
                max_iter=flags.max_iters or 100000, pseudo=flags.pseudo)
    wits = {}
    for i, p in zip(order, path.visits):
        wits.setdefault(i, p)
    return Result("ok", "tour", path.length, path.waypoints, wits,
                  {"branch": "tour", "order": [i + 1 for i in order], "pseudo": bool(flags.pseudo),
                   "start": start, "end": end, "contacts": list(path.contacts),
                   "exact_reconstruction": bool(path.exact)})


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stabhull",
                                 description="Smallest convex polygons meeting every input object.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("-i", "--input", required=True, help="instance JSON file")
    ap.add_argument("-o", "--output", help="result JSON file (default: stdout)")
    ap.add_argument("--svg", help="write an SVG drawing here")
    ap.add_argument("--eps", type=float, help="approximation parameter")
    ap.add_argument("--tol", type=float, help="geometric tolerance")
    ap.add_argument("--seed", type=int, help="seed for randomized search (default 0)")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--resolution", type=int,
                    help="area: cells per grid side; oracle: grid_n")
    ap.add_argument("--max-iters", type=int, help="tour iteration cap")
    ap.add_argument("--order", help="tpp: 1-based object indices, comma separated")
    ap.add_argument("--eps-ray", type=float,
                    help="tpp: move the start by this multiple of tour.start_dir")
    ap.add_argument("--pseudo", action="store_true",
                    help="tpp: rays and segments count as visited when their line is reached")
    ap.add_argument("--objective", choices=("perimeter", "area"), default="perimeter",
                    help="oracle objective")
    return ap


def main(argv: Optional[list] = None) -> int:
    from .tpp_halfplanes import TourNonConvergence

    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
        inst = parse_instance(text)
    except ParseError as e:
        print(f"stabhull: parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (OSError, UnicodeDecodeError) as e:
        print(f"stabhull: cannot read {args.input}: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        res = run(args.command, args, inst)
    except UsageError as e:
        print(f"stabhull: usage error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except TourNonConvergence as e:
        print(f"stabhull: {e}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    if not verify_result(res, inst):
        print("stabhull: internal error: witnesses do not verify", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    text = dump_result(res)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(render_svg(res, inst))
    return EXIT_OK if res.status == "ok" else EXIT_INFINITE


if __name__ == "__main__":
    sys.exit(main())
