"""Front-layer compiler from circuits to verified operation procedures.

The main loop never searches: every front-layer operation is realized by one
ready-to-ready template, so the loop runs exactly once per circuit gate. The
heuristic mode chooses g1 evacuation sides by shuttle cost and g2 outcomes by
a decayed look-ahead over upcoming two-qubit gates; the naive mode takes the
first option each time.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field

from .array import ArrayConfig, Dot, manhattan
from .circuit import CircuitDag, Gate, front_layer
from .errors import QdsError, InternalError, TooManyQubits
from .machine import MachineState, Procedure
from .planner import (
    PlanSegment,
    enumerate_g2_outcomes,
    g1_cost,
    g1_side_feasible,
    plan_g1,
    plan_measure,
    resolve_g1_side,
)


@dataclass(frozen=True)
class CompileOptions:
    mode: str = "heuristic"
    crosstalk: str = "avoid"
    lookahead_depth: int = 5
    lookahead_decay: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("heuristic", "naive"):
            raise ValueError(f"mode must be 'heuristic' or 'naive', not {self.mode!r}")
        if self.crosstalk not in ("avoid", "allow"):
            raise ValueError(f"crosstalk must be 'avoid' or 'allow', not {self.crosstalk!r}")
        if self.lookahead_depth < 1:
            raise ValueError("lookahead_depth must be at least 1")
        if not 0 < self.lookahead_decay <= 1:
            raise ValueError("lookahead_decay must lie in (0, 1]")


@dataclass
class CompileStats:
    shuttle_ops: int = 0
    gate_ops: int = 0
    measure_ops: int = 0
    steps: int = 0
    wall_time_ms: float = 0.0

    @property
    def total_ops(self) -> int:
        return self.shuttle_ops + self.gate_ops + self.measure_ops

    def to_json(self) -> dict:
        return {
            "shuttle_ops": self.shuttle_ops,
            "gate_ops": self.gate_ops,
            "measure_ops": self.measure_ops,
            "steps": self.steps,
            "wall_time_ms": self.wall_time_ms,
        }


@dataclass
class CompileResult:
    procedure: Procedure
    stats: CompileStats
    final_state: MachineState | None = field(default=None, repr=False)


def procedure_stats(procedure: Procedure) -> CompileStats:
    """Operation counts of a procedure (wall time left at zero)."""
    kinds = Counter(op.kind for label in procedure.steps for op in label)
    return CompileStats(
        shuttle_ops=sum(v for k, v in kinds.items() if k.startswith("sh-")),
        gate_ops=kinds["g1"] + kinds["g2"],
        measure_ops=kinds["m"],
        steps=len(procedure.steps),
    )


# -- placement ----------------------------------------------------------------------


def interaction_weights(dag: CircuitDag) -> Counter:
    """Number of g2 gates per unordered qubit pair."""
    return Counter(frozenset(g.qubits) for g in dag.gates if g.is_g2)


def initial_placement(config: ArrayConfig, dag: CircuitDag) -> MachineState:
    """Greedy seat assignment: busy qubits first, near partners, early-measured ones near the measurement column."""
    n = dag.qubit_count
    seats = config.seat_list
    if n > len(seats):
        raise TooManyQubits(f"{n} qubits exceed the {len(seats)} seat dots of the array", qubits=n, seats=len(seats))
    weights = interaction_weights(dag)
    neighbours: dict[int, dict[int, int]] = {q: {} for q in range(n)}
    for pair, w in weights.items():
        a, b = sorted(pair)
        neighbours[a][b] = w
        neighbours[b][a] = w
    degree = {q: sum(neighbours[q].values()) for q in range(n)}
    measures = [g.qubits[0] for g in dag.gates if g.is_measure]
    measure_weight = {q: len(measures) - i for i, q in enumerate(measures)}
    mu = 1.0 / n if n else 0.0

    placed: dict[int, Dot] = {}
    free = list(seats)
    for q in sorted(range(n), key=lambda q: (-degree[q], q)):
        mw = measure_weight.get(q, 0)

        def cost(seat: Dot) -> float:
            pull = sum(w * manhattan(seat, placed[k]) for k, w in neighbours[q].items() if k in placed)
            return pull + mu * mw * (config.measure_col - seat.col)

        best = min(free, key=cost)
        placed[q] = best
        free.remove(best)
    return MachineState(config, placed)


def lookahead_pairs(dag: CircuitDag, executed, depth: int = 5) -> list[tuple[int, tuple[int, int]]]:
    """(layer, qubit pair) for unexecuted g2 gates in the next ``depth`` front layers."""
    done = set(executed)
    out = []
    for layer in range(depth):
        front = front_layer(dag, done)
        if not front:
            break
        for g in front:
            if g.is_g2:
                out.append((layer, g.qubits))
        done.update(g.id for g in front)
    return out


def score_pairs(state: MachineState, pairs, decay: float = 0.5) -> float:
    pos = state.placement
    return -sum(decay**layer * manhattan(pos[a], pos[b]) for layer, (a, b) in pairs)


def eval_placement(
    state: MachineState, dag: CircuitDag, executed, depth: int = 5, decay: float = 0.5
) -> float:
    """Negative decayed distance sum over upcoming g2 pairs; higher is better."""
    return score_pairs(state, lookahead_pairs(dag, executed, depth), decay)


def count_cost(state: MachineState, target: int, side: str, crosstalk: str = "avoid") -> int:
    """Shuttles the g1 template spends evacuating towards ``side`` and back."""
    return g1_cost(state, target, side, crosstalk)


# -- main loop ----------------------------------------------------------------------


def _choose_g1_side(state: MachineState, target: int, options: CompileOptions) -> str:
    if options.mode == "naive":
        return "left" if g1_side_feasible(state, target, "left", options.crosstalk) else "right"
    return resolve_g1_side(state, target, "auto", options.crosstalk)


def _plan_gate(state: MachineState, gate: Gate, dag: CircuitDag, executed: set[int], options: CompileOptions) -> PlanSegment:
    if gate.is_g1:
        q = gate.qubits[0]
        side = _choose_g1_side(state, q, options)
        return plan_g1(state, q, side, options.crosstalk, gate.kind, gate.param)
    if gate.is_measure:
        return plan_measure(state, gate.qubits[0])
    outcomes = enumerate_g2_outcomes(state, gate.qubits[0], gate.qubits[1], gate.param)
    if options.mode == "naive" or len(outcomes) == 1:
        return outcomes[0].segment
    pairs = lookahead_pairs(dag, executed, options.lookahead_depth)
    best = max(
        enumerate(outcomes),
        key=lambda io: (score_pairs(io[1].end_state, pairs, options.lookahead_decay), -io[1].shuttle_count, -io[0]),
    )
    return best[1].segment


def compile_circuit(config: ArrayConfig, dag: CircuitDag, options: CompileOptions | None = None) -> CompileResult:
    """Translate ``dag`` into a procedure; qubit ``q`` is carried by electron ``q``."""
    options = options or CompileOptions()
    t0 = time.perf_counter()
    state = initial_placement(config, dag)
    procedure = Procedure(
        config,
        state,
        [],
        {"mode": options.mode, "crosstalk": options.crosstalk, "qubits": dag.qubit_count, "gates": len(dag.gates),
         "seed": options.seed},
    )
    executed: set[int] = set()
    front = front_layer(dag, executed)
    while front:
        for gate in front:
            executed.add(gate.id)
            try:
                segment = _plan_gate(state, gate, dag, executed, options)
            except QdsError as exc:
                if isinstance(exc, TooManyQubits):
                    raise
                raise InternalError(f"template for gate {gate.id} ({gate.kind}) failed: {exc.message}",
                                    gate=gate.id, cause=exc.code) from exc
            procedure.steps.extend(segment.labels)
            state = segment.end_state
        front = front_layer(dag, executed)
    stats = procedure_stats(procedure)
    stats.wall_time_ms = (time.perf_counter() - t0) * 1000.0
    return CompileResult(procedure, stats, state)
