"""Native-gate circuits and their dependency DAG."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import GateAfterMeasure, NonNativeGate, NotDownwardClosed, OperandOutOfRange, ParseError

SINGLE_QUBIT_KINDS = ("rx", "ry")
NATIVE_KINDS = ("rx", "ry", "swap_pow", "measure")


@dataclass(frozen=True)
class Gate:
    id: int
    kind: str
    qubits: tuple[int, ...]
    param: float | None = None

    def __post_init__(self):
        if self.kind not in NATIVE_KINDS:
            raise NonNativeGate(f"gate kind {self.kind!r} is not native", kind=self.kind)
        want = 2 if self.kind == "swap_pow" else 1
        if len(self.qubits) != want:
            raise ParseError(f"{self.kind} takes {want} operand(s), got {len(self.qubits)}")
        if want == 2 and self.qubits[0] == self.qubits[1]:
            raise ParseError("swap_pow operands must be distinct")

    @property
    def is_g1(self) -> bool:
        return self.kind in SINGLE_QUBIT_KINDS

    @property
    def is_g2(self) -> bool:
        return self.kind == "swap_pow"

    @property
    def is_measure(self) -> bool:
        return self.kind == "measure"

    def to_json(self) -> dict:
        if self.kind == "swap_pow":
            return {"kind": "swap_pow", "alpha": self.param, "q1": self.qubits[0], "q2": self.qubits[1]}
        if self.kind == "measure":
            return {"kind": "measure", "q": self.qubits[0]}
        return {"kind": self.kind, "theta": self.param, "q": self.qubits[0]}


@dataclass(frozen=True)
class CircuitDag:
    qubit_count: int
    gates: tuple[Gate, ...]
    edges: frozenset[tuple[int, int]]
    preds: Mapping[int, tuple[int, ...]] = field(repr=False, compare=False)
    succs: Mapping[int, tuple[int, ...]] = field(repr=False, compare=False)

    @property
    def ope(self) -> tuple[Gate, ...]:
        return self.gates

    @property
    def ord(self) -> frozenset[tuple[int, int]]:
        return self.edges

    def gate(self, gid: int) -> Gate:
        return self.gates[gid]

    def __len__(self) -> int:
        return len(self.gates)

    def to_json(self) -> dict:
        return {"qubits": self.qubit_count, "gates": [g.to_json() for g in self.gates]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def build_dag(qubit_count: int, gates: Iterable[Gate]) -> CircuitDag:
    """Per-qubit last-writer dependency edges; gate ids must be 0..m-1 in order."""
    gates = tuple(gates)
    last: dict[int, int] = {}
    measured: set[int] = set()
    preds: dict[int, list[int]] = {g.id: [] for g in gates}
    succs: dict[int, list[int]] = {g.id: [] for g in gates}
    edges = set()
    for i, g in enumerate(gates):
        if g.id != i:
            raise ParseError(f"gate ids must be consecutive from 0, got {g.id} at position {i}")
        for q in g.qubits:
            if not 0 <= q < qubit_count:
                raise OperandOutOfRange(f"gate {g.id} uses qubit {q}, circuit has {qubit_count}", gate=g.id)
            if q in measured:
                raise GateAfterMeasure(f"gate {g.id} acts on qubit {q} after its measurement", gate=g.id)
            if q in last and (last[q], g.id) not in edges:
                edges.add((last[q], g.id))
                preds[g.id].append(last[q])
                succs[last[q]].append(g.id)
            last[q] = g.id
        if g.is_measure:
            measured.add(g.qubits[0])
    return CircuitDag(
        qubit_count,
        gates,
        frozenset(edges),
        {k: tuple(v) for k, v in preds.items()},
        {k: tuple(v) for k, v in succs.items()},
    )


def _gate_from_json(i: int, item: Mapping) -> Gate:
    try:
        kind = item["kind"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"gate {i} has no kind") from exc
    if kind not in NATIVE_KINDS:
        raise NonNativeGate(f"gate {i}: kind {kind!r} is not native", kind=kind)
    try:
        if kind == "swap_pow":
            return Gate(i, kind, (int(item["q1"]), int(item["q2"])), float(item["alpha"]))
        if kind == "measure":
            return Gate(i, kind, (int(item["q"]),))
        return Gate(i, kind, (int(item["q"]),), float(item["theta"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"gate {i}: malformed {kind}: {exc}") from exc


def circuit_from_json(data: Mapping) -> CircuitDag:
    try:
        n = int(data["qubits"])
        items = data["gates"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"circuit needs 'qubits' and 'gates': {exc}") from exc
    if n < 0 or not isinstance(items, list):
        raise ParseError("bad circuit header")
    return build_dag(n, [_gate_from_json(i, item) for i, item in enumerate(items)])


def parse_circuit(text: str) -> CircuitDag:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"circuit is not valid JSON: {exc}") from exc
    return circuit_from_json(data)


def front_layer(dag: CircuitDag, executed: Iterable[int] = ()) -> list[Gate]:
    """Unexecuted gates whose predecessors have all executed, in id order."""
    done = set(executed)
    for gid in done:
        if not 0 <= gid < len(dag.gates):
            raise NotDownwardClosed(f"unknown gate id {gid}")
        for p in dag.preds[gid]:
            if p not in done:
                raise NotDownwardClosed(f"gate {gid} executed before its predecessor {p}", gate=gid)
    return [g for g in dag.gates if g.id not in done and all(p in done for p in dag.preds[g.id])]


def random_circuit(qubits: int, gates: int, seed: int, measure_all: bool = True) -> CircuitDag:
    if qubits < 1 or gates < 0:
        raise ParseError("random circuits need at least one qubit and a non-negative gate count")
    rng = random.Random(seed)
    kinds = ("rx", "ry", "swap_pow") if qubits >= 2 else ("rx", "ry")
    out: list[Gate] = []
    for i in range(gates):
        kind = rng.choice(kinds)
        if kind == "swap_pow":
            q1, q2 = rng.sample(range(qubits), 2)
            out.append(Gate(i, kind, (q1, q2), 1.0 - rng.random()))
        else:
            out.append(Gate(i, kind, (rng.randrange(qubits),), rng.random() * 2 * math.pi))
    if measure_all:
        for q in range(qubits):
            out.append(Gate(len(out), "measure", (q,)))
    return build_dag(qubits, out)
