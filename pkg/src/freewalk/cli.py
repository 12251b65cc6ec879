"""Command line surface.

Subcommands: zoo, harmonic, walk, forest, green, gff, embed, verify.
Every run is reproducible: stochastic subcommands require an explicit
seed, outputs are serialized with sorted keys and shortest round-trip
floats, and `--threads` splits replicas into contiguous ranges whose
per-replica streams make the merged output identical for every thread
count.

Exit codes: 0 success, 1 usage error, 2 numerical failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import RunConfig, load_config, merge_config
from .errors import FreewalkError
from .forest import aldous_broder_window, enumerate_ust, wilson_batch
from .graphs import Exhaustion, WeightedGraph, ZOO_NAMES, finite, truncate, zoo_oracle
from .green import gff_sample, green, validate_green
from .harmonic import harmonic_measure
from .planar import (
    boundary_trace,
    cylinder_map,
    export_svg,
    grid_map,
    pendant_map,
    ring_tree_map,
    tutte_embed,
    wheel_map,
)
from .verify import SUITES, run_suites
from .walk import (
    CoverSet,
    FixedSteps,
    HitSet,
    RateSchedule,
    build_kernel,
    consistency_check,
    schedule_report,
    simulate,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3

_ZOO_HELP = {
    "lattice_zd": "hypercubic lattice, params: d in {1,2,3}",
    "regular_tree": "b-regular tree, params: b >= 2",
    "biased_tree": "tree with depth-k conductance lam**k, params: b, lam",
    "binary_tree": "rooted binary tree in heap order",
    "finite": "finite graph from JSON, pass the file path as --graph",
}

_MAP_HELP = ("wheel:M | grid:R,C | pendant | ring_tree[:LAM] | "
             "cylinder[:M,LAM]")


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.format_usage()}{self.prog}: error: {message}\n")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=2) + "\n"


def _dumps_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(", ", ": ")) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _keys(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}")


def _parse_param(text: str):
    if "=" not in text:
        raise ValueError(f"--param expects key=value, got {text!r}")
    k, v = text.split("=", 1)
    for cast in (int, float):
        try:
            return k, cast(v)
        except ValueError:
            continue
    return k, v


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    over = {}
    for key in ("graph", "level", "hm_level", "seed", "replicas", "threads",
                "output", "rate_base", "rate_growth"):
        if hasattr(args, key):
            over[key] = getattr(args, key)
    params = dict(getattr(args, "param", None) or [])
    if params:
        over["params"] = params
    tol = {}
    if getattr(args, "tol", None) is not None:
        tol["escalation"] = args.tol
    if tol:
        over["tolerances"] = tol
    return merge_config(cfg, over)


def _resolve_graph(cfg: RunConfig):
    name = cfg.graph
    if not name:
        raise ValueError("no graph specified; use --graph NAME or a config file")
    if name.endswith(".json") or "/" in name:
        g = WeightedGraph.from_json(name)
        oracle = finite(g, int(cfg.params.get("root", 0)))
    else:
        params = {k: v for k, v in cfg.params.items() if k != "root"}
        oracle = zoo_oracle(name, **params)
    return oracle, Exhaustion(oracle)


def _resolve_map(desc: str):
    name, _, rest = desc.partition(":")
    parts = [p for p in rest.split(",") if p] if rest else []
    if name == "wheel":
        return wheel_map(int(parts[0]) if parts else 8)
    if name == "grid":
        if parts and len(parts) != 2:
            raise ValueError("grid takes rows,cols")
        r, c = (int(parts[0]), int(parts[1])) if parts else (3, 3)
        return grid_map(r, c)
    if name == "pendant":
        return pendant_map()
    if name == "ring_tree":
        return ring_tree_map(float(parts[0]) if parts else 4.0)
    if name == "cylinder":
        m = int(parts[0]) if parts else 6
        lam = float(parts[1]) if len(parts) > 1 else 2.0
        return cylinder_map(m, lam)
    raise ValueError(f"unknown map {desc!r}; expected {_MAP_HELP}")


def _ranges(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    step = -(-total // parts)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


# ---------------------------------------------------------------------------
# Subcommands.


def cmd_zoo(args) -> int:
    if not args.name:
        for name in ZOO_NAMES:
            sys.stdout.write(f"{name}: {_ZOO_HELP[name]}\n")
        return EXIT_OK
    cfg = _config_from_args(args)
    oracle = zoo_oracle(args.name, **cfg.params)
    exh = Exhaustion(oracle)
    levels = []
    for n in range(1, cfg.level + 1):
        lg = truncate(oracle, exh, n)
        levels.append({"level": n, "core": lg.n_core, "shell": lg.n_shell})
    _emit(_dumps({"name": args.name, "params": cfg.params, "root": oracle.root,
                  "levels": levels}), cfg.output)
    return EXIT_OK


def cmd_harmonic(args) -> int:
    cfg = _config_from_args(args)
    oracle, exh = _resolve_graph(cfg)
    targets = _keys(args.targets)
    viewpoints = _keys(args.viewpoints)
    hm = harmonic_measure(oracle, exh, targets, viewpoints,
                          tol=cfg.tolerances.escalation)
    rows = {str(v): [float(x) for x in hm.row(v)] for v in hm.viewpoint_keys}
    _emit(_dumps({
        "targets": [int(k) for k in hm.target_keys],
        "viewpoints": [int(k) for k in hm.viewpoint_keys],
        "rows": rows,
        "levels_used": list(hm.levels_used),
        "achieved_tol": hm.achieved_tol,
        "sum_deviation": hm.sum_deviation,
    }), cfg.output)
    return EXIT_OK


def cmd_walk(args) -> int:
    cfg = _config_from_args(args)
    oracle, exh = _resolve_graph(cfg)
    if args.walk_cmd == "simulate":
        stops = [s for s in (args.stop_hit, args.stop_steps, args.stop_cover)
                 if s is not None]
        if len(stops) != 1:
            raise ValueError("exactly one of --stop-hit, --stop-steps, "
                             "--stop-cover is required")
        if args.stop_hit is not None:
            stop = HitSet(_keys(args.stop_hit))
        elif args.stop_steps is not None:
            stop = FixedSteps(args.stop_steps)
        else:
            stop = CoverSet(_keys(args.stop_cover))
        kern = build_kernel(oracle, exh, cfg.level, hm_level=cfg.hm_level)
        rate = RateSchedule(cfg.rate_base, cfg.rate_growth)
        traj = simulate(kern, args.start, stop, seed=cfg.seed, rate=rate,
                        stream_index=args.stream_index)
        lines = [_dumps_line(e) for e in traj.json_events()]
        lines.append(_dumps_line({
            "type": "summary", "level": traj.level, "start_key": traj.start_key,
            "seed": traj.seed, "stream_index": traj.stream_index,
            "stopped": traj.stopped, "transitions": traj.transitions,
            "elapsed": traj.elapsed,
        }))
        _emit("".join(lines), cfg.output)
        return EXIT_OK
    if args.walk_cmd == "consistency":
        rep = consistency_check(oracle, exh, args.m, args.n,
                                tol=cfg.tolerances.consistency,
                                hm_level=cfg.hm_level)
        _emit(_dumps({
            "level_m": rep.level_m, "level_n": rep.level_n,
            "hm_truncation": rep.hm_truncation,
            "core_deviation": rep.core_deviation,
            "shell_deviation": rep.shell_deviation,
            "deviation": rep.deviation,
            "passed": rep.passed(cfg.tolerances.consistency),
        }), cfg.output)
        return EXIT_OK
    rep = schedule_report(oracle, exh, RateSchedule(cfg.rate_base, cfg.rate_growth),
                          _keys(args.levels), start_key=args.start)
    _emit(_dumps({
        "levels": list(rep.levels),
        "return_times": [float(x) for x in rep.return_times],
        "increments": [float(x) for x in rep.increments],
        "converging": rep.converging,
    }), cfg.output)
    return EXIT_OK


def _forest_lines(forests, base: int) -> list[str]:
    lines = []
    for i, f in enumerate(forests):
        lines.append(_dumps_line({
            "replica": base + i,
            "edges": sorted([int(u), int(v)] for u, v in f.edges),
            "via_infinity": sorted(int(k) for k in f.via_infinity),
            "n_components": f.n_components,
            "escaped_branches": int(f.n_escaped),
            "connected": f.is_connected,
            "method": f.method,
        }))
    return lines


def cmd_forest(args) -> int:
    cfg = _config_from_args(args)
    if args.forest_cmd == "exact":
        if not cfg.graph:
            raise ValueError("no graph specified; use --graph FILE.json")
        if not (cfg.graph.endswith(".json") or "/" in cfg.graph):
            raise ValueError("forest exact needs a finite graph JSON file")
        g = WeightedGraph.from_json(cfg.graph)
        dist = enumerate_ust(g)
        trees = [{"edges": sorted([dist.edges[e][0], dist.edges[e][1]]
                                  for e in tr),
                  "weight": float(dist.weights[i]),
                  "prob": float(dist.probs[i])}
                 for i, tr in enumerate(dist.trees)]
        _emit(_dumps({"n_trees": dist.n_trees,
                      "total_weight": dist.total_weight,
                      "trees": trees}), cfg.output)
        return EXIT_OK

    oracle, exh = _resolve_graph(cfg)
    kern = build_kernel(oracle, exh, cfg.level, hm_level=cfg.hm_level)
    ranges = _ranges(cfg.replicas, cfg.threads)
    if args.method == "wilson":
        def run(rg):
            return wilson_batch(kern, rg[1] - rg[0], seed=cfg.seed,
                                root_key=args.root, stream_offset=rg[0],
                                return_forests=True).forests
    else:
        window = args.window if args.window is not None else cfg.level
        def run(rg):
            out = aldous_broder_window(kern, args.start, window_level=window,
                                       cover_level=args.cover, seed=cfg.seed,
                                       n_replicas=rg[1] - rg[0],
                                       stream_offset=rg[0])
            return out if isinstance(out, list) else [out]
    if len(ranges) == 1:
        chunks = [run(ranges[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            chunks = list(pool.map(run, ranges))
    lines = []
    for rg, forests in zip(ranges, chunks):
        lines.extend(_forest_lines(forests, rg[0]))
    _emit("".join(lines), cfg.output)
    return EXIT_OK


def cmd_green(args) -> int:
    cfg = _config_from_args(args)
    oracle, exh = _resolve_graph(cfg)
    gm = green(oracle, exh, _keys(args.absorbing), _keys(args.window),
               tol=cfg.tolerances.escalation)
    payload = {
        "a_keys": [int(k) for k in gm.a_keys],
        "w_keys": [int(k) for k in gm.w_keys],
        "matrix": [[float(x) for x in row] for row in gm.values],
        "levels_used": list(gm.levels_used),
        "achieved_tol": gm.achieved_tol,
    }
    if args.validate:
        rep = validate_green(gm)
        payload["validation"] = {
            "harmonicity_residual": rep.harmonicity_residual,
            "laplacian_residual": rep.laplacian_residual,
            "symmetry_residual": rep.symmetry_residual,
            "min_eigenvalue": rep.min_eigenvalue,
            "max_eigenvalue": rep.max_eigenvalue,
            "ok": rep.ok(),
        }
    _emit(_dumps(payload), cfg.output)
    return EXIT_OK


def cmd_gff(args) -> int:
    cfg = _config_from_args(args)
    oracle, exh = _resolve_graph(cfg)
    gm = green(oracle, exh, _keys(args.absorbing), _keys(args.window),
               tol=cfg.tolerances.escalation)
    ranges = _ranges(cfg.replicas, cfg.threads)

    def run(rg):
        return gff_sample(gm, rg[1] - rg[0], seed=cfg.seed,
                          stream_offset=rg[0]).samples

    if len(ranges) == 1:
        blocks = [run(ranges[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            blocks = list(pool.map(run, ranges))
    samples = np.vstack(blocks)
    keys = [int(k) for k in gm.w_keys]
    lines = [",".join(f"v{k}" for k in keys) + "\n"]
    for row in samples:
        lines.append(",".join(repr(float(x)) for x in row) + "\n")
    _emit("".join(lines), cfg.output)
    return EXIT_OK


def cmd_embed(args) -> int:
    cfg = _config_from_args(args)
    target = _resolve_map(args.map)
    emb = tutte_embed(target, tol=cfg.tolerances.escalation, n_max=args.n_max)
    if args.svg:
        export_svg(emb, path=args.svg)
    payload = {
        "map": args.map,
        "levels_used": list(emb.levels_used),
        "achieved_tol": emb.achieved_tol,
        "boundary": [int(k) for k in emb.boundary_keys],
        "cumulative_measure": [float(x) for x in emb.cumulative_measure],
        "positions": {str(int(k)): [float(z.real), float(z.imag)]
                      for k, z in sorted(emb.positions.items())},
    }
    _emit(_dumps(payload), cfg.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config_from_args(args)
    report = run_suites(args.suite or None, seed=cfg.seed,
                        echo=lambda line: sys.stdout.write(line + "\n"))
    if cfg.output:
        Path(cfg.output).write_text(_dumps(report.to_json()))
    sys.stdout.write(f"{'ALL PASSED' if report.all_passed else 'FAILURES'} "
                     f"({sum(r.passed for r in report.results)}"
                     f"/{len(report.results)} checks)\n")
    return EXIT_OK if report.all_passed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# Parser assembly.


def _add_common(p: argparse.ArgumentParser, *, seed_required: bool = False,
                graph: bool = True) -> None:
    p.add_argument("--config", help="TOML config file; flags override it")
    p.add_argument("--output", help="write to this file instead of stdout")
    if graph:
        p.add_argument("--graph", help="zoo family name or graph JSON path")
        p.add_argument("--param", action="append", type=_parse_param,
                       metavar="K=V", help="graph family parameter, repeatable")
    if seed_required:
        p.add_argument("--seed", type=int, required=True,
                       help="stream seed (required; no wall-clock default)")
    p.add_argument("--tol", type=float, help="escalation tolerance override")


def build_parser() -> _Parser:
    top = _Parser(prog="freewalk",
                  description="Random walk reflected off of infinity: "
                              "samplers, solvers, embeddings.")
    sub = top.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("zoo", help="list built-in graph families or size one")
    p.add_argument("name", nargs="?", choices=list(ZOO_NAMES))
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--param", action="append", type=_parse_param,
                   metavar="K=V", help="graph family parameter, repeatable")
    _add_common(p, graph=False)
    p.set_defaults(fn=cmd_zoo)

    p = sub.add_parser("harmonic", help="harmonic measure of a target set")
    _add_common(p)
    p.add_argument("--targets", required=True, help="comma-separated keys")
    p.add_argument("--viewpoints", required=True, help="comma-separated keys")
    p.set_defaults(fn=cmd_harmonic)

    p = sub.add_parser("walk", help="simulate or check the level chains")
    wsub = p.add_subparsers(dest="walk_cmd", required=True)
    w = wsub.add_parser("simulate", help="one trajectory as JSON lines")
    _add_common(w, seed_required=True)
    w.add_argument("--level", type=int)
    w.add_argument("--hm-level", type=int, dest="hm_level",
                   help="fixed truncation for re-entry rows (lattices)")
    w.add_argument("--start", type=int, required=True)
    w.add_argument("--stop-hit", help="stop when hitting these keys")
    w.add_argument("--stop-steps", type=int, help="stop after this many steps")
    w.add_argument("--stop-cover", help="stop when all these keys are visited")
    w.add_argument("--stream-index", type=int, default=0)
    w.add_argument("--rate-base", type=float, dest="rate_base")
    w.add_argument("--rate-growth", type=float, dest="rate_growth")
    w.set_defaults(fn=cmd_walk)
    w = wsub.add_parser("consistency", help="coarse kernel vs watched fine chain")
    _add_common(w)
    w.add_argument("--m", type=int, required=True)
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--hm-level", type=int, dest="hm_level")
    w.set_defaults(fn=cmd_walk)
    w = wsub.add_parser("schedule", help="expected excursion times per level")
    _add_common(w)
    w.add_argument("--levels", required=True, help="comma-separated levels")
    w.add_argument("--start", type=int)
    w.add_argument("--rate-base", type=float, dest="rate_base")
    w.add_argument("--rate-growth", type=float, dest="rate_growth")
    w.set_defaults(fn=cmd_walk)

    p = sub.add_parser("forest", help="sample spanning forests or enumerate trees")
    fsub = p.add_subparsers(dest="forest_cmd", required=True)
    f = fsub.add_parser("sample", help="forest replicas as JSON lines")
    _add_common(f, seed_required=True)
    f.add_argument("--method", choices=("wilson", "aldous-broder"),
                   default="wilson")
    f.add_argument("--level", type=int)
    f.add_argument("--hm-level", type=int, dest="hm_level",
                   help="fixed truncation for re-entry rows (lattices)")
    f.add_argument("--replicas", type=int)
    f.add_argument("--threads", type=int)
    f.add_argument("--root", type=int, help="forest root (wilson)")
    f.add_argument("--start", type=int, help="walk start (aldous-broder)")
    f.add_argument("--window", type=int, help="window level (aldous-broder)")
    f.add_argument("--cover", type=int, help="cover level (aldous-broder)")
    f.set_defaults(fn=cmd_forest)
    f = fsub.add_parser("exact", help="enumerate the spanning tree law")
    _add_common(f)
    f.set_defaults(fn=cmd_forest)

    p = sub.add_parser("green", help="Green's function on a window")
    _add_common(p)
    p.add_argument("--absorbing", required=True, help="comma-separated keys")
    p.add_argument("--window", required=True, help="comma-separated keys")
    p.add_argument("--validate", action="store_true",
                   help="include identity residuals in the output")
    p.set_defaults(fn=cmd_green)

    p = sub.add_parser("gff", help="sample the free field as CSV")
    _add_common(p, seed_required=True)
    p.add_argument("--absorbing", required=True, help="comma-separated keys")
    p.add_argument("--window", required=True, help="comma-separated keys")
    p.add_argument("--replicas", type=int)
    p.add_argument("--threads", type=int)
    p.set_defaults(fn=cmd_gff)

    p = sub.add_parser("embed", help="Tutte embedding, JSON and optional SVG")
    _add_common(p, graph=False)
    p.add_argument("--map", required=True, help=_MAP_HELP)
    p.add_argument("--n-max", type=int, default=30, dest="n_max")
    p.add_argument("--svg", help="also write an SVG to this path")
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("verify", help="run verification suites")
    _add_common(p, seed_required=True, graph=False)
    p.add_argument("--suite", action="append", choices=list(SUITES),
                   help="run only this suite, repeatable")
    p.set_defaults(fn=cmd_verify)

    return top


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except FreewalkError as e:
        sys.stderr.write(f"freewalk: numerical failure: {e}\n")
        return EXIT_NUMERICAL
    except (ValueError, KeyError, FileNotFoundError) as e:
        sys.stderr.write(f"freewalk: error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
