"""Command-line driver: route a QASM file over seeded trials and report CSV rows."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .arch import CouplingMapError, load_map, tokyo_map
from .qasm import QasmError, emit, load
from .router import STRATEGIES, RoutingError, RoutingResult, cost_model, route_circuit
from .verify import SimulationLimitError, check_coupling, check_equivalence

CSV_HEADER = ["name", "qubits", "gates", "strategy", "cost_model", "seed", "swaps",
              "teleports", "cost", "verified", "ms"]


@dataclass
class RunRecord:
    name: str
    qubits: int
    gates: int
    strategy: str
    cost_model: str
    seed: str
    swaps: int | None
    teleports: int | None
    cost: float | None
    verified: str = ""
    ms: float | None = None

    def row(self, timing: bool) -> list[str]:
        def num(x):
            if x is None:
                return ""
            return str(int(x)) if float(x).is_integer() else repr(float(x))
        ms = f"{self.ms:.1f}" if timing and self.ms is not None else ""
        return [self.name, str(self.qubits), str(self.gates), self.strategy, self.cost_model,
                self.seed, num(self.swaps), num(self.teleports), num(self.cost), self.verified, ms]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="telemap", description=__doc__)
    p.add_argument("--input", required=True, help="OpenQASM 2.0 circuit")
    p.add_argument("--arch", default="tokyo", help="'tokyo' or a coupling-map JSON file")
    p.add_argument("--strategy", choices=STRATEGIES, default="swap+teleport")
    p.add_argument("--cost", choices=("ibm", "equal"), default="ibm")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lookahead", choices=("on", "off"), default="on")
    p.add_argument("--output", help="write the best mapped circuit here")
    p.add_argument("--csv", help="append one row per trial plus a best row")
    p.add_argument("--verify", action="store_true",
                   help="check coupling and simulate equivalence of the best trial")
    p.add_argument("--compare", action="store_true",
                   help="run swap and swap+teleport and print the relative cost")
    p.add_argument("--initial", help="comma-separated physical qubit for each logical qubit")
    p.add_argument("--timing", action="store_true",
                   help="fill the ms column (otherwise left blank so reruns match byte for byte)")
    p.add_argument("--time-limit", type=float, default=10.0, help="seconds per trial")
    return p


def _verify(circuit, trial, cmap) -> tuple[str, str]:
    verdict = check_coupling(trial.program, cmap)
    if not verdict:
        return "fail", verdict.message
    try:
        verdict = check_equivalence(circuit, trial.program)
    except SimulationLimitError as exc:
        return "coupling-only", str(exc)
    return ("pass" if verdict else "fail"), verdict.message


def _records(name, circuit, result: RoutingResult, verified: str) -> list[RunRecord]:
    model = result.cost_model.name
    out = []
    for t in result.trials:
        if t.timed_out:
            out.append(RunRecord(name, circuit.num_qubits, len(circuit), result.strategy, model,
                                 str(t.seed), None, None, None, "timeout", t.ms))
        else:
            out.append(RunRecord(name, circuit.num_qubits, len(circuit), result.strategy, model,
                                 str(t.seed), t.swaps + t.bridges, t.teleports, t.cost, "", t.ms))
    best = result.best
    out.append(RunRecord(name, circuit.num_qubits, len(circuit), result.strategy, model,
                         f"best:{best.seed}", best.swaps + best.bridges, best.teleports, best.cost,
                         verified, sum(t.ms for t in result.trials)))
    return out


def _append_csv(path: str, records: list[RunRecord], timing: bool):
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new:
            writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.row(timing))


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.trials < 1:
        print("error: --trials must be at least 1", file=sys.stderr)
        return 2
    try:
        circuit = load(args.input)
    except QasmError as exc:
        print(f"error: {args.input}:{exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        cmap = tokyo_map() if args.arch == "tokyo" else load_map(args.arch)
    except (OSError, ValueError, CouplingMapError) as exc:
        print(f"error: coupling map: {exc}", file=sys.stderr)
        return 1
    initial = None
    if args.initial:
        try:
            initial = tuple(int(x) for x in args.initial.split(","))
        except ValueError:
            print("error: --initial expects comma-separated integers", file=sys.stderr)
            return 2
        if len(initial) != circuit.num_qubits:
            print(f"error: --initial lists {len(initial)} qubits, circuit has {circuit.num_qubits}",
                  file=sys.stderr)
            return 2

    name = Path(args.input).stem
    cost = cost_model(args.cost)
    strategies = ["swap", "swap+teleport"] if args.compare else [args.strategy]
    results: dict[str, RoutingResult] = {}
    records: list[RunRecord] = []
    status = 0
    for strategy in strategies:
        try:
            result = route_circuit(circuit, cmap, cost, strategy, args.seed, args.trials,
                                   lookahead=args.lookahead == "on", initial=initial,
                                   time_limit=args.time_limit)
            best = result.best
        except (RoutingError, ValueError) as exc:
            print(f"error: routing ({strategy}): {exc}", file=sys.stderr)
            return 1
        verified = ""
        if args.verify:
            verified, message = _verify(circuit, best, cmap)
            print(f"verify {strategy}: {verified} ({message})")
            if verified == "fail":
                status = 1
        results[strategy] = result
        records += _records(name, circuit, result, verified)
        print(f"{name} {strategy} {cost.name}: best seed {best.seed}, cost {best.cost:g}, "
              f"swaps {best.swaps + best.bridges}, teleports {best.teleports}")

    if args.compare:
        c_swap = results["swap"].best.cost
        c_tel = results["swap+teleport"].best.cost
        rel = (c_tel - c_swap) / c_swap if c_swap else 0.0
        print(f"rel cost (swap+teleport vs swap): {rel:+.4f} ({c_tel:g} vs {c_swap:g})")

    if args.csv:
        _append_csv(args.csv, records, args.timing)
    if args.output:
        chosen = results[strategies[-1]].best
        Path(args.output).write_text(emit(chosen.program.circuit), encoding="utf-8")
    return status


def main():
    sys.exit(run())
