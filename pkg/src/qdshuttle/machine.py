"""Machine states, transition labels, and one-step transition semantics."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .array import ArrayConfig, Dot
from .errors import (
    CollisionError,
    InvalidLabel,
    OffGridError,
    ParseError,
    StateBudgetExceeded,
    UnknownElectron,
)

SHUTTLE_KINDS = ("sh-u", "sh-d", "sh-l", "sh-r")
OP_KINDS = ("g1", "g2", "m") + SHUTTLE_KINDS
DELTA = {"sh-u": (-1, 0), "sh-d": (1, 0), "sh-l": (0, -1), "sh-r": (0, 1)}
REVERSE = {"sh-u": "sh-d", "sh-d": "sh-u", "sh-l": "sh-r", "sh-r": "sh-l"}


@dataclass(frozen=True)
class Op:
    """One operation inside a label.

    ``gate_kind``/``param`` carry the gate payload opaquely (``rx``/``ry`` with
    an angle for g1, ``swap_pow`` with an exponent for g2).
    """

    kind: str
    electrons: tuple[int, ...]
    gate_kind: str | None = None
    param: float | None = None

    @property
    def is_shuttle(self) -> bool:
        return self.kind in DELTA

    def to_json(self) -> dict:
        out: dict = {"op": self.kind}
        if self.kind == "g2":
            out["e1"], out["e2"] = self.electrons
        else:
            out["e"] = self.electrons[0]
        if self.gate_kind is not None:
            gate = {"kind": self.gate_kind}
            if self.param is not None:
                gate["alpha" if self.gate_kind == "swap_pow" else "theta"] = self.param
            out["gate"] = gate
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Op":
        try:
            kind = data["op"]
            if kind not in OP_KINDS:
                raise ParseError(f"unknown operation {kind!r}")
            electrons = (int(data["e1"]), int(data["e2"])) if kind == "g2" else (int(data["e"]),)
            gate = data.get("gate")
            if gate is None:
                return cls(kind, electrons)
            param = gate.get("alpha", gate.get("theta"))
            return cls(kind, electrons, gate["kind"], None if param is None else float(param))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed operation {data!r}: {exc}") from exc


Label = tuple[Op, ...]


def g1(e: int, gate_kind: str | None = None, theta: float | None = None) -> Op:
    return Op("g1", (e,), gate_kind, theta)


def g2(e1: int, e2: int, alpha: float | None = None) -> Op:
    return Op("g2", (e1, e2), "swap_pow" if alpha is not None else None, alpha)


def measure(e: int) -> Op:
    return Op("m", (e,))


def shuttle(direction: str, e: int) -> Op:
    kind = direction if direction.startswith("sh-") else f"sh-{direction}"
    if kind not in DELTA:
        raise InvalidLabel(f"bad shuttle direction {direction!r}")
    return Op(kind, (e,))


def label_electrons(label: Iterable[Op]) -> list[int]:
    return [e for op in label for e in op.electrons]


class MachineState:
    """Immutable snapshot of electron positions over a fixed array."""

    __slots__ = ("config", "placement", "occupied", "_key", "_hash")

    def __init__(self, config: ArrayConfig, placement: Mapping[int, Dot]):
        pos = {int(e): Dot(*d) for e, d in placement.items()}
        occ: dict[Dot, int] = {}
        for e, d in pos.items():
            if not config.contains(d):
                raise OffGridError(f"electron {e} placed off the array at {tuple(d)}", electron=e)
            if d in occ:
                raise CollisionError(f"electrons {occ[d]} and {e} share dot {tuple(d)}", dot=list(d))
            occ[d] = e
        object.__setattr__(self, "config", config)
        object.__setattr__(self, "placement", pos)
        object.__setattr__(self, "occupied", occ)
        object.__setattr__(self, "_key", tuple(sorted(pos.items())))
        object.__setattr__(self, "_hash", hash(self._key))

    def __setattr__(self, name, value):
        raise AttributeError("MachineState is immutable")

    def __eq__(self, other):
        if not isinstance(other, MachineState) or self._hash != other._hash or self._key != other._key:
            return False
        return self.config is other.config or self.config == other.config

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{e}:({d.row},{d.col})" for e, d in self._key)
        return f"MachineState({body})"

    @property
    def key(self) -> tuple:
        return self._key

    @property
    def electrons(self) -> list[int]:
        return [e for e, _ in self._key]

    def __len__(self) -> int:
        return len(self.placement)

    def pos(self, e: int) -> Dot:
        try:
            return self.placement[e]
        except KeyError:
            raise UnknownElectron(f"electron {e} is not placed", electron=e) from None

    def at(self, dot: Dot) -> int | None:
        return self.occupied.get(dot)

    def moved(self, updates: Mapping[int, Dot | None]) -> "MachineState":
        pos = dict(self.placement)
        for e, d in updates.items():
            if d is None:
                del pos[e]
            else:
                pos[e] = d
        return MachineState(self.config, pos)

    def placement_json(self) -> dict:
        return {str(e): [d.row, d.col] for e, d in self._key}


def is_ready_state(state: MachineState) -> bool:
    seats = state.config.seats
    return all(d in seats for d in state.placement.values())


def apply_step(state: MachineState, label: Sequence[Op]) -> MachineState:
    """Synchronous update: every shuttle in ``label`` happens at once.

    Gate and measurement operations are loop transitions. ``sh-r`` from the
    measurement column ejects the electron from the array.
    """
    config = state.config
    seen: set[int] = set()
    moves: dict[int, Dot | None] = {}
    for op in label:
        for e in op.electrons:
            if e not in state.placement:
                raise UnknownElectron(f"label references unplaced electron {e}", electron=e)
        if op.kind == "g2" and op.electrons[0] == op.electrons[1]:
            raise InvalidLabel("g2 needs two distinct electrons")
        for e in op.electrons:
            if e in seen:
                raise InvalidLabel(f"electron {e} appears in more than one operation", electron=e)
            seen.add(e)
        if op.kind in DELTA:
            e = op.electrons[0]
            src = state.placement[e]
            dr, dc = DELTA[op.kind]
            dst = Dot(src.row + dr, src.col + dc)
            if config.contains(dst):
                moves[e] = dst
            elif op.kind == "sh-r" and src.col == config.measure_col:
                moves[e] = None
            else:
                raise OffGridError(f"electron {e} would leave the array via {op.kind}", electron=e)
    if not moves:
        return state
    landing: dict[Dot, int] = {}
    for e, dst in moves.items():
        if dst is None:
            continue
        if dst in landing:
            raise CollisionError(f"electrons {landing[dst]} and {e} both move to {tuple(dst)}", dot=list(dst))
        landing[dst] = e
        other = state.occupied.get(dst)
        if other is not None and other not in moves:
            raise CollisionError(f"electron {e} moves onto stationary electron {other}", dot=list(dst))
        if other is not None and moves[other] == state.placement[e]:
            raise CollisionError(f"electrons {e} and {other} would swap through each other", dot=list(dst))
    return state.moved(moves)


@dataclass
class Procedure:
    config: ArrayConfig
    initial: MachineState
    steps: list[Label] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def replay(self) -> list[MachineState]:
        """States before each step, followed by the final state."""
        states = [self.initial]
        s = self.initial
        for label in self.steps:
            s = apply_step(s, label)
            states.append(s)
        return states

    def final_state(self) -> MachineState:
        return self.replay()[-1]

    def to_json(self) -> dict:
        out = {
            "array": self.config.to_json(),
            "electrons": self.initial.placement_json(),
            "steps": [[op.to_json() for op in label] for label in self.steps],
        }
        if self.meta:
            out["meta"] = self.meta
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, data: Mapping, config: ArrayConfig | None = None) -> "Procedure":
        try:
            cfg = config or ArrayConfig.from_json(data["array"])
            initial = MachineState(cfg, {int(e): Dot(*d) for e, d in data["electrons"].items()})
            steps = [tuple(Op.from_json(op) for op in label) for label in data["steps"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed procedure: {exc}") from exc
        return cls(cfg, initial, steps, dict(data.get("meta", {})))

    @classmethod
    def loads(cls, text: str, config: ArrayConfig | None = None) -> "Procedure":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"procedure is not valid JSON: {exc}") from exc
        return cls.from_json(data, config)


def reachable(
    config: ArrayConfig,
    start: MachineState,
    goal: MachineState,
    legal_labels: Callable[[MachineState], Iterable[Sequence[Op]]],
    budget: int = 1_000_000,
) -> bool:
    """Explicit-state BFS over the transitions produced by ``legal_labels``."""
    if start == goal:
        return True
    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for label in legal_labels(s):
            t = apply_step(s, label)
            if t == goal:
                return True
            if t not in seen:
                if len(seen) >= budget:
                    raise StateBudgetExceeded(f"explored {len(seen)} states without a verdict", explored=len(seen))
                seen.add(t)
                queue.append(t)
    return False
