"""Command-line interface: validate, throughput, design, sweep, metrics, gen-case.

Every run echoes a short configuration hash over the subcommand, its
arguments, and the content of any input file, so results can be traced back
to exact inputs.  Exit codes: 0 success (and a clean validate), 1 validation
findings, 2 malformed input file, 3 solver failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from typing import Optional

import numpy as np

from . import __version__
from .design import (
    DesignSpec,
    solve_design,
    validate_selection,
)
from .errors import FileFormatError, SolverError, ValidationError, VertiflowError
from .extension import build_backup_topology
from .fileio import NetworkFile, gen_case, load_network_file, write_network_file
from .lp import format_mip_text
from .metrics import max_landing_distance, throughput_enhancement, travel_diversity
from .network import build_incidence, enumerate_scenarios, validate_network
from .sweep import SweepConfig, run_sweep, scenario_label, write_bundle
from .throughput import default_big_m, throughput

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_BAD_FILE = 2
EXIT_SOLVER = 3

DESIGN_FORMAT = "vertiflow-design/1"


def _out_dir(args) -> str:
    return args.out_dir or os.environ.get("VERTIFLOW_OUT", ".")


def _config_hash(args: argparse.Namespace, file_paths: list[str]) -> str:
    payload: dict = {"version": __version__}
    for key, value in sorted(vars(args).items()):
        if key in ("func",):
            continue
        payload[key] = value
    h = hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode())
    for p in file_paths:
        try:
            with open(p, "rb") as fh:
                h.update(hashlib.sha256(fh.read()).digest())
        except OSError:
            pass
    return h.hexdigest()[:12]


def _echo_config(args, files) -> None:
    print(f"config-hash: {_config_hash(args, files)}")


def _build_spec(nf: NetworkFile, budget: float, w: float) -> DesignSpec:
    if nf.candidates is None or nf.policy is None:
        raise ValidationError("this command needs candidates and a policy in the network file")
    topology = build_backup_topology(nf.network, nf.candidates, nf.policy)
    for warning in topology.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return DesignSpec(network=nf.network, demands=nf.demands,
                      candidates=nf.candidates, topology=topology,
                      budget=budget, valuation=w)


# -- subcommands -------------------------------------------------------------


def _cmd_validate(args) -> int:
    nf = load_network_file(args.network)
    _echo_config(args, [args.network])
    report = validate_network(nf.network, nf.demands)
    if not report:
        print("ok: network, demands, and disruption model satisfy all invariants")
        return EXIT_OK
    for line in report:
        print(f"invalid: {line}")
    return EXIT_FINDINGS


def _cmd_throughput(args) -> int:
    nf = load_network_file(args.network)
    _echo_config(args, [args.network])
    indicators = build_incidence(nf.network, nf.demands)
    scenarios = enumerate_scenarios(nf.network)
    big_m = default_big_m(nf.network.node_capacities())
    rows = []
    for s in scenarios:
        res = throughput(s, indicators, big_m=big_m)
        rows.append((scenario_label(s.key()), s.level, s.probability,
                     res.throughput, res.verified))
    print(f"{'element':>10} {'level':>5} {'probability':>12} {'throughput':>11} {'verified':>8}")
    for label, level, p, v, ok in rows:
        print(f"{label:>10} {level:>5d} {p:>12.6f} {v:>11.6f} {str(ok):>8}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("element,level,probability,throughput,verified\n")
            for label, level, p, v, ok in rows:
                fh.write(f"{label},{level},{p:.9g},{v:.9g},{ok}\n")
        print(f"wrote {args.csv}")
    expected = sum(p * v for _, _, p, v, _ in rows)
    print(f"expected throughput (no reserve): {expected:.9g}")
    return EXIT_OK


def _cmd_design(args) -> int:
    nf = load_network_file(args.network)
    _echo_config(args, [args.network])
    spec = _build_spec(nf, args.budget, args.w)
    if args.dump_model:
        from .design import build_direct_milp, build_dual_milp

        model = build_dual_milp(spec) if args.method == "dual-milp" else build_direct_milp(spec)
        with open(args.dump_model, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(format_mip_text(model))
        print(f"wrote {args.dump_model}")
    result = solve_design(spec, method=args.method)
    doc = {
        "format": DESIGN_FORMAT,
        "budget": args.budget,
        "w": args.w,
        "method": result.method,
        "objective": result.objective,
        "expected_throughput": result.expected_throughput,
        "total_cost": result.total_cost,
        "selection": [[int(z) for z in row] for row in result.Z],
        "built_capacities": [float(c) for c in result.built_caps],
        "per_scenario": [
            {"element": scenario_label(key), "level": key[2],
             "probability": p, "throughput": v}
            for key, p, v in result.per_scenario
        ],
    }
    out = args.out or os.path.join(_out_dir(args), "design.json")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(doc, indent=2) + "\n")
    built = int(np.sum(result.built_caps > 0))
    print(f"method {result.method}: objective {result.objective:.9g}, "
          f"expected throughput {result.expected_throughput:.9g}, "
          f"cost {result.total_cost:.9g}, {built} backup node(s) built")
    print(f"wrote {out}")
    return EXIT_OK


def _parse_grid(text: str) -> tuple[float, ...]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValidationError("grid step must be positive")
        out = []
        v = start
        while v <= stop + 1e-9:
            out.append(round(v, 9))
            v += step
        return tuple(out)
    return tuple(float(p) for p in text.split(","))


def _cmd_sweep(args) -> int:
    nf = load_network_file(args.network)
    _echo_config(args, [args.network])
    cfg = SweepConfig(
        budgets=_parse_grid(args.budgets),
        ws=_parse_grid(args.w),
        method=args.method,
        out_dir=_out_dir(args),
    )
    rows = run_sweep(nf, cfg)
    files = write_bundle(rows, cfg.out_dir, render=not args.no_figures)
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK


def _cmd_metrics(args) -> int:
    nf = load_network_file(args.network)
    try:
        with open(args.design, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(str(exc), path=args.design) from exc
    _echo_config(args, [args.network, args.design])
    if doc.get("format") != DESIGN_FORMAT:
        raise FileFormatError(f"expected format {DESIGN_FORMAT!r}", path=args.design)
    spec = _build_spec(nf, float(doc["budget"]), float(doc["w"]))
    Z = np.array(doc["selection"], dtype=int)
    validate_selection(Z, spec.candidates)
    caps = (spec.candidates.cap_levels * Z).sum(axis=1)

    enh = throughput_enhancement(spec, caps)
    div = travel_diversity(spec, caps)
    cov = max_landing_distance(spec, caps)
    print(f"throughput enhancement: total {enh.total:.9g}, expected {enh.expected:.9g}")
    print(f"{'pair':>12} {'paths':>6} {'max landing dist':>17} {'t*':>6}")
    for pair, count, dist, t in zip(div.pairs, div.counts, cov.distances, cov.t_stars):
        print(f"{str(pair):>12} {count:>6d} {dist:>17.6f} {t:>6.3f}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("origin,destination,effective_paths,max_landing_km,t_star\n")
            for pair, count, dist, t in zip(div.pairs, div.counts, cov.distances, cov.t_stars):
                fh.write(f"{pair[0]},{pair[1]},{count},{dist:.9g},{t:.9g}\n")
        print(f"wrote {args.csv}")
    return EXIT_OK


def _cmd_gen_case(args) -> int:
    nf = gen_case(
        args.topology, args.seed,
        n_nodes=args.nodes, n_links=args.links,
        n_candidates=args.candidates, n_hubs=args.hubs,
    )
    _echo_config(args, [])
    out = args.out or os.path.join(_out_dir(args), f"{args.topology}-{args.seed}.json")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    write_network_file(nf, out)
    report = validate_network(nf.network, nf.demands)
    if report:
        for line in report:
            print(f"generator bug: {line}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"wrote {out} ({nf.network.n_nodes} nodes, {nf.network.n_links} links, "
          f"{nf.candidates.count if nf.candidates else 0} candidates)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vertiflow",
        description="Design and evaluate air-mobility networks with reserve capacity.",
    )
    parser.add_argument("--version", action="version", version=f"vertiflow {__version__}")
    parser.add_argument("--out-dir", default=None,
                        help="output directory (default: $VERTIFLOW_OUT or '.')")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a network file against all invariants")
    p.add_argument("--network", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("throughput", help="per-scenario throughput table")
    p.add_argument("--network", required=True)
    p.add_argument("--csv", default=None, help="also write the table as CSV")
    p.set_defaults(func=_cmd_throughput)

    p = sub.add_parser("design", help="solve one backup-vertiport selection")
    p.add_argument("--network", required=True)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--w", type=float, required=True, help="valuation factor")
    p.add_argument("--method", default="direct-milp",
                   choices=("dual-milp", "direct-milp", "brute-force"))
    p.add_argument("--out", default=None, help="design JSON path")
    p.add_argument("--dump-model", default=None,
                   help="write the MILP in LP-text form for external solvers")
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("sweep", help="grid of design solves with metrics and figures")
    p.add_argument("--network", required=True)
    p.add_argument("--budgets", required=True, help="start:stop:step or comma list")
    p.add_argument("--w", required=True, help="single value or comma list")
    p.add_argument("--method", default="direct-milp",
                   choices=("dual-milp", "direct-milp", "brute-force"))
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("metrics", help="redundancy metrics of a stored design")
    p.add_argument("--network", required=True)
    p.add_argument("--design", required=True, help="design JSON from 'design'")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("gen-case", help="emit a synthetic network file")
    p.add_argument("--topology", required=True,
                   choices=("star", "mesh-star", "multi-star"))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--links", type=int, default=None)
    p.add_argument("--candidates", type=int, default=None)
    p.add_argument("--hubs", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gen_case)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_FILE
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_FILE
    except VertiflowError as exc:  # pragma: no cover
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
