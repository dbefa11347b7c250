"""Ready-to-ready transition templates for g1, g2 and measurement.

Every template starts from a ready state (all electrons on seat dots), brings
the target into a position where the operation runs without side effects,
executes it in a label of its own and returns to a ready state. The geometry
assumes the standard layout: seats in odd columns, aisles in even columns,
one bus row.
"""

from __future__ import annotations

from dataclasses import dataclass

from .array import Dot, manhattan
from .errors import InfeasibleSide, NoFeasibleSide, NoReturnSeat, NotReadyState, UnknownElectron
from .machine import REVERSE, Label, MachineState, Op, apply_step, is_ready_state

SIDES = ("left", "right")
STEP = {"left": "sh-l", "right": "sh-r"}


@dataclass
class PlanSegment:
    labels: list[Label]
    gate_step: int | None
    start_state: MachineState
    end_state: MachineState

    @property
    def shuttle_count(self) -> int:
        return sum(op.is_shuttle for label in self.labels for op in label)


@dataclass
class G2Outcome:
    mover: int
    stayer: int
    seat_of_e1: Dot
    seat_of_e2: Dot
    shuttle_count: int
    end_state: MachineState
    segment: PlanSegment


class _Tape:
    """Appends labels while tracking the state they lead to."""

    def __init__(self, state: MachineState):
        self.start = state
        self.state = state
        self.labels: list[Label] = []
        self.gate_step: int | None = None

    def step(self, *ops: Op) -> None:
        if not ops:
            return
        label = tuple(ops)
        self.state = apply_step(self.state, label)
        self.labels.append(label)

    def move(self, electrons, kind: str) -> None:
        self.step(*(Op(kind, (e,)) for e in electrons))

    def walk(self, e: int, kind: str, count: int) -> None:
        for _ in range(count):
            self.step(Op(kind, (e,)))

    def walk_to_row(self, e: int, row: int) -> None:
        r = self.state.placement[e].row
        self.walk(e, "sh-d" if row > r else "sh-u", abs(row - r))

    def walk_to_col(self, e: int, col: int) -> None:
        c = self.state.placement[e].col
        self.walk(e, "sh-r" if col > c else "sh-l", abs(col - c))

    def gate(self, op: Op) -> None:
        self.gate_step = len(self.labels)
        self.step(op)

    def segment(self) -> PlanSegment:
        return PlanSegment(self.labels, self.gate_step, self.start, self.state)


def _require_ready(state: MachineState, *electrons: int) -> None:
    for e in electrons:
        state.pos(e)
    if not is_ready_state(state):
        raise NotReadyState("templates start from a ready state (every electron on a seat dot)")


# -- single-qubit gates -------------------------------------------------------------


def _g1_layout(state: MachineState, target: int, side: str, crosstalk_mode: str):
    """(companions, stage-one movers) for evacuating towards ``side``; raises if impossible."""
    if side not in SIDES:
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    config = state.config
    t = state.placement[target]
    d = -1 if side == "left" else 1
    companions = sorted(e for e, p in state.placement.items() if p.col == t.col and e != target)
    if not companions:
        return companions, []
    if crosstalk_mode == "allow":
        if not 1 <= t.col + d <= config.cols:
            raise InfeasibleSide(f"no column {t.col + d} to park electrons of column {t.col}", side=side)
        return companions, []
    if not 1 <= t.col + 2 * d <= config.cols:
        raise InfeasibleSide(f"no column {t.col + 2 * d} to evacuate column {t.col} into", side=side)
    rows = {state.placement[e].row for e in companions}
    blockers = sorted(k for r in rows if (k := state.at(Dot(r, t.col + 2 * d))) is not None)
    if blockers and not 1 <= t.col + 3 * d <= config.cols:
        raise InfeasibleSide(f"no column {t.col + 3 * d} to clear column {t.col + 2 * d} into", side=side)
    return companions, blockers


def g1_side_feasible(state: MachineState, target: int, side: str, crosstalk_mode: str = "avoid") -> bool:
    try:
        _g1_layout(state, target, side, crosstalk_mode)
    except InfeasibleSide:
        return False
    return True


def g1_cost(state: MachineState, target: int, side: str, crosstalk_mode: str = "avoid") -> int:
    """Shuttles emitted by :func:`plan_g1` for ``side``, both directions included."""
    companions, blockers = _g1_layout(state, target, side, crosstalk_mode)
    if crosstalk_mode == "allow":
        return 2 * len(companions)
    return 2 * (len(blockers) + 2 * len(companions))


def resolve_g1_side(state: MachineState, target: int, side: str = "auto", crosstalk_mode: str = "avoid") -> str:
    """Pick the evacuation side; ``auto`` applies the edge rules, then the cheaper side (ties go left)."""
    if side in SIDES:
        _g1_layout(state, target, side, crosstalk_mode)
        return side
    if side != "auto":
        raise ValueError(f"side must be 'left', 'right' or 'auto', not {side!r}")
    ok = {s: g1_side_feasible(state, target, s, crosstalk_mode) for s in SIDES}
    if not any(ok.values()):
        raise NoFeasibleSide(f"electron {target} cannot be isolated on either side", electron=target)
    if not all(ok.values()):
        return "left" if ok["left"] else "right"
    c = state.placement[target].col
    cols = state.config.cols
    if c >= cols - 2:
        return "left"
    if c <= 3:
        return "right"
    if g1_cost(state, target, "left", crosstalk_mode) > g1_cost(state, target, "right", crosstalk_mode):
        return "right"
    return "left"


def plan_g1(
    state: MachineState,
    target: int,
    side: str = "auto",
    crosstalk_mode: str = "avoid",
    gate_kind: str | None = None,
    theta: float | None = None,
) -> PlanSegment:
    """Isolate ``target`` in its column, run the single-qubit gate, and undo the evacuation.

    ``avoid`` clears the target's column two columns over so both neighbouring
    columns are empty at the gate. ``allow`` parks companions in the adjacent
    aisle and accepts one crosstalk event per parked electron.
    """
    if crosstalk_mode not in ("avoid", "allow"):
        raise ValueError(f"crosstalk_mode must be 'avoid' or 'allow', not {crosstalk_mode!r}")
    _require_ready(state, target)
    side = resolve_g1_side(state, target, side, crosstalk_mode)
    companions, blockers = _g1_layout(state, target, side, crosstalk_mode)
    out, back = STEP[side], REVERSE[STEP[side]]
    tape = _Tape(state)
    if crosstalk_mode == "allow":
        tape.move(companions, out)
        tape.gate(Op("g1", (target,), gate_kind, theta))
        tape.move(companions, back)
        return tape.segment()
    tape.move(blockers, out)
    tape.move(companions, out)
    tape.move(companions, out)
    tape.gate(Op("g1", (target,), gate_kind, theta))
    tape.move(companions, back)
    tape.move(companions, back)
    tape.move(blockers, back)
    return tape.segment()


# -- two-qubit gates ----------------------------------------------------------------


def meeting_aisle(mover_col: int, stayer_col: int) -> int:
    """Aisle beside the stayer facing the mover; the right aisle for a same-column pair."""
    if mover_col < stayer_col:
        return stayer_col - 1
    return stayer_col + 1


def exit_aisle(mover_col: int, stayer_col: int) -> int:
    """Aisle the mover leaves its seat through: the one facing the stayer."""
    return mover_col + 1 if mover_col <= stayer_col else mover_col - 1


def _nearest(origin: Dot, candidates) -> list[Dot]:
    best = None
    ties: list[Dot] = []
    for d in sorted(candidates):
        dist = manhattan(origin, d)
        if best is None or dist < best:
            best, ties = dist, [d]
        elif dist == best:
            ties.append(d)
    return ties


def stayer_return_seats(state: MachineState, stayer: int) -> list[Dot]:
    """Nearest free seats beside the stayer's aisle on its own side of the bus row."""
    config = state.config
    p = state.placement[stayer]
    above = p.row < config.bus_row
    cands = [
        Dot(r, c)
        for c in (p.col - 1, p.col + 1)
        if 1 <= c <= config.cols
        for r in range(1, config.rows + 1)
        if (r < config.bus_row if above else r > config.bus_row)
        and config.is_seat(Dot(r, c))
        and Dot(r, c) not in state.occupied
    ]
    if not cands:
        raise NoReturnSeat(f"no free seat beside column {p.col} for electron {stayer}", electron=stayer)
    return _nearest(p, cands)


def mover_return_seats(state: MachineState, mover: int) -> list[Dot]:
    """Nearest free seats anywhere, measured from the mover's bus-row position."""
    p = state.placement[mover]
    cands = [d for d in state.config.seat_list if d not in state.occupied]
    if not cands:
        raise NoReturnSeat(f"no free seat for electron {mover}", electron=mover)
    return _nearest(p, cands)


def _seat_aisle(config, seat: Dot, origin_col: int) -> int:
    options = [c for c in (seat.col - 1, seat.col + 1) if 1 <= c <= config.cols and c in config.r_columns]
    if not options:
        raise NoReturnSeat(f"seat {tuple(seat)} has no adjacent aisle")
    return min(options, key=lambda c: (abs(c - origin_col), c))


def _g2_approach(state: MachineState, e1: int, e2: int, mover: int, alpha: float | None) -> _Tape:
    stayer = e2 if mover == e1 else e1
    config = state.config
    pm, ps = state.placement[mover], state.placement[stayer]
    aisle = meeting_aisle(pm.col, ps.col)
    tape = _Tape(state)
    tape.walk_to_col(mover, exit_aisle(pm.col, ps.col))
    tape.walk_to_row(mover, config.bus_row)
    tape.walk_to_col(mover, aisle)
    tape.walk_to_col(stayer, aisle)
    tape.walk_to_row(stayer, config.bus_row - 1 if ps.row < config.bus_row else config.bus_row + 1)
    tape.gate(Op("g2", (e1, e2), "swap_pow" if alpha is not None else None, alpha))
    return tape


def _seat_from_aisle(tape: _Tape, e: int, seat: Dot) -> None:
    tape.walk_to_row(e, seat.row)
    tape.walk_to_col(e, seat.col)


def _mover_home(tape: _Tape, mover: int, seat: Dot) -> None:
    p = tape.state.placement[mover]
    tape.walk_to_col(mover, _seat_aisle(tape.state.config, seat, p.col))
    _seat_from_aisle(tape, mover, seat)


def _mover_id(e1: int, e2: int, mover: str | int) -> int:
    if mover in ("e1_to_e2", e1):
        return e1
    if mover in ("e2_to_e1", e2):
        return e2
    raise ValueError(f"mover must be 'e1_to_e2' or 'e2_to_e1', not {mover!r}")


def _outcome(e1: int, e2: int, mover: int, segment: PlanSegment) -> G2Outcome:
    end = segment.end_state
    return G2Outcome(
        mover,
        e2 if mover == e1 else e1,
        end.placement[e1],
        end.placement[e2],
        segment.shuttle_count,
        end,
        segment,
    )


def plan_g2(
    state: MachineState,
    e1: int,
    e2: int,
    mover: str | int = "e1_to_e2",
    alpha: float | None = None,
    stayer_seat: Dot | None = None,
    mover_seat: Dot | None = None,
) -> tuple[PlanSegment, G2Outcome]:
    """Bring the pair vertically together on an aisle, run g2, reseat both electrons.

    The stayer returns first, then the mover. Either uses the given seat, or
    the first (row-then-column) of its nearest free seats.
    """
    _require_ready(state, e1, e2)
    if e1 == e2:
        raise UnknownElectron("g2 needs two distinct electrons", electron=e1)
    m = _mover_id(e1, e2, mover)
    s = e2 if m == e1 else e1
    tape = _g2_approach(state, e1, e2, m, alpha)
    seat = stayer_seat or stayer_return_seats(tape.state, s)[0]
    _seat_from_aisle(tape, s, seat)
    seat = mover_seat or mover_return_seats(tape.state, m)[0]
    _mover_home(tape, m, seat)
    segment = tape.segment()
    return segment, _outcome(e1, e2, m, segment)


def enumerate_g2_outcomes(state: MachineState, e1: int, e2: int, alpha: float | None = None) -> list[G2Outcome]:
    """Every (mover, tied stayer seat, tied mover seat) combination, mover e1 first."""
    _require_ready(state, e1, e2)
    if e1 == e2:
        raise UnknownElectron("g2 needs two distinct electrons", electron=e1)
    outcomes = []
    for m in (e1, e2):
        s = e2 if m == e1 else e1
        approach = _g2_approach(state, e1, e2, m, alpha)
        for sseat in stayer_return_seats(approach.state, s):
            after_stayer = _Tape(approach.state)
            _seat_from_aisle(after_stayer, s, sseat)
            for mseat in mover_return_seats(after_stayer.state, m):
                tape = _Tape(state)
                tape.labels = approach.labels + after_stayer.labels
                tape.gate_step = approach.gate_step
                tape.state = after_stayer.state
                _mover_home(tape, m, mseat)
                outcomes.append(_outcome(e1, e2, m, tape.segment()))
    return outcomes


# -- measurement -------------------------------------------------------------------


def plan_measure(state: MachineState, target: int) -> PlanSegment:
    """Carry the target to the measurement column, measure it, and eject it to the reservoir."""
    _require_ready(state, target)
    config = state.config
    p = state.placement[target]
    tape = _Tape(state)
    if p.col == config.measure_col - 1:
        tape.step(Op("sh-r", (target,)))
    elif p.col != config.measure_col:
        tape.walk_to_col(target, p.col + 1)
        tape.walk_to_row(target, config.bus_row)
        tape.walk_to_col(target, config.measure_col)
    tape.gate(Op("m", (target,)))
    tape.step(Op("sh-r", (target,)))
    return tape.segment()
