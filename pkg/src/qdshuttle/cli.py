"""Command-line entry point: ``qdshuttle <verb> [flags]``.

Exit status: 0 success, 1 violations found, 2 usage or input error,
3 internal error. Failures print ``{"error": code, "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .array import ArrayConfig, build_standard_array
from .circuit import parse_circuit, random_circuit
from .compiler import CompileOptions, compile_circuit, procedure_stats
from .constraints import certify_conditions, check_procedure
from .errors import InternalError, QdsError, ReplayError
from .fidelity import FidelityParams, count_events, fidelity
from .machine import Procedure

EXIT_OK, EXIT_VIOLATIONS, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
STATS_COLUMNS = (
    "n", "m", "mode", "crosstalk", "shuttle_ops", "gate_ops", "measure_ops", "steps", "wall_time_ms", "fidelity",
)


class UsageError(QdsError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _load_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _array(spec: str | None) -> ArrayConfig:
    if spec in (None, "standard"):
        return build_standard_array()
    return ArrayConfig.from_json(_load_json(spec))


def _emit(data, out: str | None) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def stats_path(procedure_path: str | Path) -> Path:
    p = Path(procedure_path)
    return p.with_name(p.stem + ".stats.json")


# -- verbs ---------------------------------------------------------------------------


def _compile(args) -> int:
    config = _array(args.array)
    dag = parse_circuit(_read(args.circuit))
    options = CompileOptions(mode=args.mode, crosstalk=args.crosstalk, seed=args.seed)
    result = compile_circuit(config, dag, options)
    text = result.procedure.dumps() + "\n"
    if args.out:
        Path(args.out).write_text(text)
        stats_path(args.out).write_text(json.dumps(result.stats.to_json(), indent=2) + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _verify(args) -> int:
    config = _array(args.array) if args.array else None
    dag = parse_circuit(_read(args.circuit))
    procedure = Procedure.loads(_read(args.procedure), config)
    rule = "count" if args.count_crosstalk else "enforce"
    try:
        report = check_procedure(procedure, dag, rule).to_json()
    except ReplayError as exc:
        report = {
            "violations": [v.to_json() for v in exc.violations],
            "crosstalk_events": None,
            "replay_error": {"step": exc.step, "message": exc.message},
        }
    _emit(report, args.out)
    return EXIT_OK if not report["violations"] and "replay_error" not in report else EXIT_VIOLATIONS


def _fidelity(args) -> int:
    procedure = Procedure.loads(_read(args.procedure))
    params = FidelityParams(args.f_sh, args.f_ct, args.theta_model)
    try:
        counts = count_events(procedure)
    except QdsError as exc:
        raise ReplayError(f"procedure cannot be replayed: {exc.message}") from exc
    _emit(fidelity(counts, params).to_json(), args.out)
    return EXIT_OK


def _randgen(args) -> int:
    dag = random_circuit(args.qubits, args.gates, args.seed, args.measure_all)
    _emit(dag.to_json(), args.out)
    return EXIT_OK


def _certify(args) -> int:
    report = certify_conditions(_array(args.array), args.electrons, args.budget)
    _emit(report.to_json(), args.out)
    return EXIT_OK


def _stats(args) -> int:
    root = Path(args.procedures)
    if not root.is_dir():
        raise UsageError(f"{root} is not a directory")
    params = FidelityParams(args.f_sh, args.f_ct)
    rows = []
    for path in sorted(root.glob("*.json")):
        if path.name.endswith(".stats.json"):
            continue
        procedure = Procedure.loads(path.read_text())
        counts = procedure_stats(procedure)
        meta = procedure.meta
        side = stats_path(path)
        wall = json.loads(side.read_text()).get("wall_time_ms", "") if side.exists() else ""
        rows.append({
            "n": meta.get("qubits", len(procedure.initial)),
            "m": meta.get("gates", ""),
            "mode": meta.get("mode", ""),
            "crosstalk": meta.get("crosstalk", ""),
            "shuttle_ops": counts.shuttle_ops,
            "gate_ops": counts.gate_ops,
            "measure_ops": counts.measure_ops,
            "steps": counts.steps,
            "wall_time_ms": wall,
            "fidelity": fidelity(count_events(procedure), params).fidelity,
        })
    handle = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(handle, fieldnames=STATS_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            handle.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdshuttle", description="Shuttling compiler and verifier for quantum dot arrays.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("compile", help="compile a circuit into an operation procedure")
    p.add_argument("--array", default="standard", help="array JSON file or 'standard' (16x8, bus row 4)")
    p.add_argument("--circuit", required=True)
    p.add_argument("--mode", choices=("heuristic", "naive"), default="heuristic")
    p.add_argument("--crosstalk", choices=("avoid", "allow"), default="avoid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="procedure path; stats go next to it as <stem>.stats.json")
    p.set_defaults(func=_compile)

    p = sub.add_parser("verify", help="check a procedure against the array rules and its circuit")
    p.add_argument("--array", help="override the array embedded in the procedure")
    p.add_argument("--circuit", required=True)
    p.add_argument("--procedure", required=True)
    p.add_argument("--count-crosstalk", action="store_true", help="count adjacent-column events instead of failing")
    p.add_argument("--out")
    p.set_defaults(func=_verify)

    p = sub.add_parser("fidelity", help="estimate procedure fidelity")
    p.add_argument("--procedure", required=True)
    p.add_argument("--f-sh", type=float, default=0.996)
    p.add_argument("--f-ct", type=float, default=0.905)
    p.add_argument("--theta-model", action="store_true", help="derive crosstalk fidelity from each gate angle")
    p.add_argument("--out")
    p.set_defaults(func=_fidelity)

    p = sub.add_parser("randgen", help="generate a random native-gate circuit")
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--gates", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--measure-all", action="store_true", help="append a measurement of every qubit")
    p.add_argument("--out")
    p.set_defaults(func=_randgen)

    p = sub.add_parser("certify", help="decide conditions C1..C6 on a small array")
    p.add_argument("--array", default="standard")
    p.add_argument("--electrons", type=int, required=True)
    p.add_argument("--budget", type=int, default=1_000_000)
    p.add_argument("--out")
    p.set_defaults(func=_certify)

    p = sub.add_parser("stats", help="tabulate compiled procedures as CSV")
    p.add_argument("--procedures", required=True, help="directory of procedure JSON files")
    p.add_argument("--f-sh", type=float, default=0.996)
    p.add_argument("--f-ct", type=float, default=0.905)
    p.add_argument("--out")
    p.set_defaults(func=_stats)
    return parser


def _fail(exc: QdsError, status: int) -> int:
    sys.stderr.write(json.dumps(exc.to_json()) + "\n")
    return status


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except InternalError as exc:
        return _fail(exc, EXIT_INTERNAL)
    except ReplayError as exc:
        return _fail(exc, EXIT_VIOLATIONS)
    except QdsError as exc:
        return _fail(exc, EXIT_USAGE)
    except ValueError as exc:
        return _fail(UsageError(str(exc)), EXIT_USAGE)
    except Exception as exc:  # noqa: BLE001 - last-resort reporting
        return _fail(InternalError(f"{type(exc).__name__}: {exc}"), EXIT_INTERNAL)


run = main

if __name__ == "__main__":
    sys.exit(main())
