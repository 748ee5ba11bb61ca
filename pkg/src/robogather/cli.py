"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 a checker failed (or the robots did
not gather), 4 the round cap was hit.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .engine import SimConfig, run_simulation
from .errors import GraphError, RoundLimitExceeded, ScopeTooLarge, UnsupportedSize
from .graph import FAMILIES, PortGraph, generate_family, parse_graph
from .oracle import (
    check_detection_soundness,
    check_hop_lemma,
    check_step_dichotomy,
    dichotomy_rounds,
    gathered,
    undispersed,
)
from .placement import PLACEMENTS, format_robots, generate_placement, parse_robots
from .programs import (
    faster_gathering_program,
    hop_meeting_program,
    undispersed_gathering_program,
    uxs_gathering_program,
)
from .uxs import provide_sequence, verify_on_graphs, verify_universal

ALGORITHMS = ("uxs", "undispersed", "hop-meeting", "faster")
EXIT_OK, EXIT_INVALID, EXIT_ORACLE, EXIT_ROUNDS = 0, 2, 3, 4


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    """Everything that determines one run; embedded in every output."""

    graph: dict
    robots: str
    algorithm: str
    config: dict
    outputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "graph": self.graph,
            "robots": self.robots,
            "algorithm": self.algorithm,
            "config": self.config,
            "outputs": self.outputs,
            "version": __version__,
        }


def _load_graph(args) -> tuple[PortGraph, dict]:
    if args.graph:
        try:
            with open(args.graph) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read graph file: {exc}")
        return parse_graph(text), {"file": args.graph}
    if args.family is None or args.n is None:
        raise UsageError("give --graph FILE or --family with --n")
    g = generate_family(args.family, args.n, args.seed)
    return g, {"family": args.family, "n": args.n, "seed": args.seed}


def _build_program(args, g: PortGraph):
    n, b = g.n, args.b
    delta = g.max_degree if args.delta_aware else None
    if args.algorithm == "undispersed":
        return undispersed_gathering_program(n, b), None
    if args.algorithm == "hop-meeting":
        if args.hop_i is None:
            raise UsageError("--hop-i is required for hop-meeting")
        return hop_meeting_program(args.hop_i, n, b, delta), None
    seq = provide_sequence(n, args.provider, args.uxs_seed)
    if seq.provenance == "heuristic-corpus-verified" and not verify_on_graphs(seq, [g]):
        raise UsageError("heuristic sequence does not explore this graph; try another --uxs-seed")
    if args.algorithm == "uxs":
        return uxs_gathering_program(n, b, seq), seq
    return faster_gathering_program(n, b, seq, args.start_step, delta), seq


def _simulate(args) -> tuple[int, dict, object]:
    g, source = _load_graph(args)
    if args.robots:
        robots = parse_robots(args.robots)
    elif args.k is not None:
        robots = generate_placement(g, args.k, args.placement, args.b, args.placement_seed)
    else:
        raise UsageError("give --robots or --k with --placement")
    program, seq = _build_program(args, g)
    checkpoints = frozenset()
    if args.algorithm == "faster":
        checkpoints = frozenset(dichotomy_rounds(program.schedule, args.start_step))
    config = SimConfig(
        b=args.b,
        max_rounds=args.max_rounds,
        delta_aware=args.delta_aware,
        record=args.record,
        checkpoints=checkpoints,
    )
    manifest = RunManifest(
        graph=source,
        robots=format_robots(robots),
        algorithm=args.algorithm if args.algorithm != "hop-meeting" else f"hop-meeting({args.hop_i})",
        config={
            "b": args.b,
            "delta_aware": args.delta_aware,
            "max_rounds": args.max_rounds,
            "start_step": args.start_step,
            "provider": args.provider,
            "uxs_seed": args.uxs_seed,
            "record": args.record,
        },
        outputs={"trace": args.trace_out, "metrics": args.metrics_out},
    ).to_dict()
    try:
        trace = run_simulation(g, robots, program, config)
        status = None
    except RoundLimitExceeded as exc:
        trace = exc.trace
        status = EXIT_ROUNDS
    metrics = _metrics(trace, program, args, seq)
    if status is None:
        status = EXIT_OK if metrics["success"] else EXIT_ORACLE
    if args.trace_out:
        trace.write(args.trace_out, manifest)
    _write_metrics(args.metrics_out, manifest, metrics, trace)
    return status, metrics, trace


def _metrics(trace, program, args, seq) -> dict:
    out = {
        "total_rounds": trace.num_rounds,
        "gathering_round": trace.gathering_round,
        "gathered": gathered(trace),
        "detection_sound": check_detection_soundness(trace),
    }
    if seq is not None:
        out["uxs_length"] = seq.T
    if args.algorithm == "faster":
        out["dichotomy"] = check_step_dichotomy(trace, program.schedule, args.start_step)
        out["success"] = out["gathered"] and out["detection_sound"] and out["dichotomy"]
    elif args.algorithm == "hop-meeting":
        end = program.duration
        out["undispersed_at_end"] = undispersed(trace.positions_at(end - 1))
        out["success"] = out["undispersed_at_end"]
    else:
        out["success"] = out["gathered"] and out["detection_sound"]
    return out


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _write_metrics(path, manifest, metrics, trace) -> None:
    lines = [f"# robogather {__version__}", "# manifest " + json.dumps(manifest, sort_keys=True)]
    lines.append("metric\tvalue")
    for key, value in metrics.items():
        lines.append(f"{key}\t{_fmt(value)}")
    lines.append("")
    lines.append("label\tmoves\ttermination_round")
    for lab in trace.labels:
        lines.append(
            f"{lab}\t{trace.move_counts.get(lab, 0)}\t{_fmt(trace.termination_round.get(lab))}"
        )
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _k_for(rule: str, n: int) -> int:
    if rule == "half+1":
        return n // 2 + 1
    if rule == "third+1":
        return n // 3 + 1
    return int(rule)


def _sweep(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()] if args.sizes else []
    if not sizes:
        raise UsageError("empty corpus: give --sizes")
    rows = []
    status = EXIT_OK
    for n in sizes:
        g = generate_family(args.family, n, args.seed)
        k = _k_for(args.k, n)
        seq = provide_sequence(n, args.provider, args.uxs_seed)
        if args.algorithm == "faster":
            program = faster_gathering_program(n, args.b, seq)
        elif args.algorithm == "uxs":
            program = uxs_gathering_program(n, args.b, seq)
        elif args.algorithm == "undispersed":
            program = undispersed_gathering_program(n, args.b)
        else:
            raise UsageError("sweeps support uxs, undispersed and faster")
        results = []
        for run in range(args.runs):
            robots = generate_placement(g, k, args.placement, args.b, args.seed * 1000 + run)
            config = SimConfig(b=args.b, record="summary", max_rounds=args.max_rounds)
            try:
                trace = run_simulation(g, robots, program, config)
            except RoundLimitExceeded:
                status = EXIT_ROUNDS
                results.append(None)
                continue
            ok = gathered(trace) and check_detection_soundness(trace)
            if not ok and status == EXIT_OK:
                status = EXIT_ORACLE
            results.append(trace.gathering_round if ok else None)
        done = [r for r in results if r is not None]
        rows.append(
            (args.family, n, k, len(results), len(done),
             float(np.mean(done)) if done else math.nan, max(done) if done else -1)
        )
    out = [f"# robogather {__version__}",
           "# manifest " + json.dumps({"sweep": vars_for_manifest(args), "version": __version__},
                                      sort_keys=True),
           "family\tn\tk\truns\tgathered\tmean_round\tmax_round"]
    for fam, n, k, runs, ok, mean, mx in rows:
        out.append(f"{fam}\t{n}\t{k}\t{runs}\t{ok}\t{mean:.1f}\t{mx}")
    usable = [(n, mean) for _, n, _, _, _, mean, _ in rows if mean > 0]
    if len(usable) >= 2:
        xs = np.log([n for n, _ in usable])
        ys = np.log([m for _, m in usable])
        slope = float(np.polyfit(xs, ys, 1)[0])
        out.append(f"# slope\t{slope:.4f}")
    text = "\n".join(out) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def vars_for_manifest(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}


def _lemma(args) -> int:
    report = check_hop_lemma(args.n_max, args.c, args.bound)
    text = report.render()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(f"# robogather {__version__}\n" + text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_ORACLE


def _sequence(args) -> int:
    seq = provide_sequence(args.n, args.provider, args.seed)
    record = seq.to_json()
    record["memory_bits"] = seq.memory_bits
    if args.verify:
        record["universal"] = verify_universal(seq, args.n, allow_long=args.n == 5)
    text = json.dumps(record, separators=(",", ":")) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.verify and not record["universal"]:
        return EXIT_ORACLE
    return EXIT_OK


def _add_graph_args(p):
    p.add_argument("--graph", help="graph file (n=<int> then one port table per node)")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0, help="seed for random families")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robogather", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"robogather {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one simulation")
    _add_graph_args(sim)
    sim.add_argument("--robots", help="explicit robots, e.g. 3@0,5@2")
    sim.add_argument("--k", type=int)
    sim.add_argument("--placement", choices=PLACEMENTS, default="dispersed-random")
    sim.add_argument("--placement-seed", type=int, default=0)
    sim.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    sim.add_argument("--hop-i", type=int)
    sim.add_argument("--b", type=int, default=2)
    sim.add_argument("--delta-aware", action="store_true")
    sim.add_argument("--start-step", type=int, default=1,
                     help="begin the staged algorithm at this step (1..7) when the initial hop distance is known")
    sim.add_argument("--provider", choices=("brute-force", "heuristic", "auto"), default="auto")
    sim.add_argument("--uxs-seed", type=int, default=0)
    sim.add_argument("--record", choices=("full", "summary"), default="full")
    sim.add_argument("--trace-out")
    sim.add_argument("--metrics-out")
    sim.add_argument("--max-rounds", type=int)
    sim.set_defaults(func=lambda a: _simulate(a)[0])

    sw = sub.add_parser("sweep", help="run a family over several sizes")
    sw.add_argument("--family", choices=FAMILIES, required=True)
    sw.add_argument("--sizes", help="comma-separated n values")
    sw.add_argument("--k", default="half+1", help="robot count: an integer, half+1 or third+1")
    sw.add_argument("--placement", choices=PLACEMENTS, default="dispersed-random")
    sw.add_argument("--runs", type=int, default=10)
    sw.add_argument("--algorithm", choices=ALGORITHMS, default="faster")
    sw.add_argument("--b", type=int, default=2)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--provider", choices=("brute-force", "heuristic", "auto"), default="auto")
    sw.add_argument("--uxs-seed", type=int, default=0)
    sw.add_argument("--max-rounds", type=int)
    sw.add_argument("--out")
    sw.set_defaults(func=_sweep)

    lem = sub.add_parser("lemma", help="exhaustive hop-distance check")
    lem.add_argument("--n-max", type=int, default=8)
    lem.add_argument("--c", type=int, default=2)
    lem.add_argument("--bound", type=int, help="override the 2c-2 bound (tightness check)")
    lem.add_argument("--out")
    lem.set_defaults(func=_lemma)

    sq = sub.add_parser("sequence", help="produce (and optionally verify) an exploration sequence")
    sq.add_argument("--n", type=int, required=True)
    sq.add_argument("--provider", choices=("brute-force", "heuristic", "auto"), default="brute-force")
    sq.add_argument("--seed", type=int, default=0)
    sq.add_argument("--verify", action="store_true",
                    help="exhaustive check over all port labelings (n <= 4; n = 5 is slow)")
    sq.add_argument("--out")
    sq.set_defaults(func=_sequence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, GraphError, UnsupportedSize, ScopeTooLarge, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
