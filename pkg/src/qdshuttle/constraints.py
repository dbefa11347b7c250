"""Rule checker for array operation procedures and a small-array condition certifier.

``check_label`` evaluates a single transition label against the gate,
measurement and shuttling rules (F4..F21 plus COLLISION for two movers sharing
a destination). ``check_procedure`` replays a whole procedure and adds the
circuit-order requirements REQ22/REQ23. ``certify_conditions`` explores the
full state space of a small array and decides conditions C1..C6.
"""

from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import networkx as nx

from .array import ArrayConfig, Dot, adjacency
from .circuit import CircuitDag
from .errors import CollisionError, InvalidLabel, OffGridError, ReplayError, UnknownElectron
from .machine import DELTA, MachineState, Op, Procedure, apply_step, is_ready_state

RULES = tuple(f"F{i}" for i in range(4, 22)) + ("REQ22", "REQ23", "COLLISION")
PARAM_TOL = 1e-9


@dataclass
class Violation:
    rule: str
    step_index: int | None
    detail: dict
    message: str

    def to_json(self) -> dict:
        return {"rule": self.rule, "step": self.step_index, "detail": self.detail, "message": self.message}


@dataclass
class ProcedureReport:
    violations: list[Violation]
    crosstalk_events: int

    @property
    def clean(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"violations": [v.to_json() for v in self.violations], "crosstalk_events": self.crosstalk_events}


def _index(state: MachineState):
    by_col: dict[int, list[int]] = defaultdict(list)
    by_row: dict[int, list[int]] = defaultdict(list)
    for e, d in state.key:
        by_col[d.col].append(e)
        by_row[d.row].append(e)
    return by_col, by_row


def crosstalk_events(state: MachineState, label: Sequence[Op]) -> list[tuple[int, int]]:
    """(target, victim) pairs for every electron in a column adjacent to a g1 target."""
    events = []
    pos = state.placement
    by_col = None
    for op in label:
        if op.kind != "g1":
            continue
        if by_col is None:
            by_col, _ = _index(state)
        e = op.electrons[0]
        if e not in pos:
            continue
        c = pos[e].col
        for k in (*by_col.get(c - 1, ()), *by_col.get(c + 1, ())):
            events.append((e, k))
    return events


def check_label(state: MachineState, label: Sequence[Op], crosstalk_rule: str = "enforce") -> list[Violation]:
    """Violations of one label taken from ``state``; empty iff the transition is legal.

    With ``crosstalk_rule="count"`` the adjacent-column rule (F5) is left out
    of the result; use :func:`crosstalk_events` to count those occurrences.
    """
    if crosstalk_rule not in ("enforce", "count"):
        raise ValueError(f"crosstalk_rule must be 'enforce' or 'count', not {crosstalk_rule!r}")
    config = state.config
    pos = state.placement
    occ = state.occupied
    out: list[Violation] = []

    def bad(rule, msg, **detail):
        out.append(Violation(rule, None, detail, msg))

    ops_of: dict[int, list[Op]] = defaultdict(list)
    for op in label:
        for e in op.electrons:
            if e not in pos:
                raise UnknownElectron(f"label references unplaced electron {e}", electron=e)
            ops_of[e].append(op)

    for e, ops in ops_of.items():
        if len(ops) > 1:
            bad("F21", f"electron {e} is the target of {len(ops)} simultaneous operations", electron=e,
                ops=[o.kind for o in ops])

    g1s = set()
    ms = set()
    g2s = []
    g2_pairs = set()
    shuttles: dict[str, set[int]] = {k: set() for k in DELTA}
    for op in label:
        if op.kind == "g1":
            g1s.add(op.electrons[0])
        elif op.kind == "m":
            ms.add(op.electrons[0])
        elif op.kind == "g2":
            g2s.append(op.electrons)
            g2_pairs.add(frozenset(op.electrons))
        else:
            shuttles[op.kind].add(op.electrons[0])

    by_col = by_row = None
    if g1s or ms or g2s or shuttles["sh-l"] or shuttles["sh-r"] or shuttles["sh-u"] or shuttles["sh-d"]:
        by_col, by_row = _index(state)

    # single-qubit gates
    for e in sorted(g1s):
        d = pos[e]
        for k in by_col[d.col]:
            if k != e and k not in g1s:
                bad("F4", f"g1 on {e} also drives electron {k} in column {d.col}", electron=e, other=k)
        if crosstalk_rule == "enforce":
            for c in (d.col - 1, d.col + 1):
                for k in by_col.get(c, ()):
                    bad("F5", f"g1 on {e} disturbs electron {k} in adjacent column {c}", electron=e, other=k)

    # two-qubit gates
    for j1, j2 in g2s:
        if j1 == j2:
            bad("F6", f"g2 needs two distinct electrons, got {j1} twice", electrons=[j1, j2])
            continue
        a, b = pos[j1], pos[j2]
        adj = adjacency(config, a, b)
        if not (adj.adj_hor or adj.adj_ver):
            bad("F6", f"g2 on {j1},{j2}: dots {tuple(a)} and {tuple(b)} are not channel-adjacent",
                electrons=[j1, j2])
            continue
        if adj.adj_hor:
            for k1 in by_col[a.col]:
                k2 = occ.get(Dot(pos[k1].row, b.col))
                if k1 in (j1, j2) or k2 is None or k2 in (j1, j2):
                    continue
                if adjacency(config, pos[k1], pos[k2]).adj_hor and frozenset((k1, k2)) not in g2_pairs:
                    bad("F7", f"horizontal g2 on {j1},{j2} also acts on {k1},{k2}", electrons=[j1, j2],
                        others=[k1, k2])
            for r in range(1, config.rows + 1):
                x, y = Dot(r, a.col), Dot(r, b.col)
                if config.has_channel(x, y) and ((x in occ) != (y in occ)):
                    k = occ.get(x, occ.get(y))
                    bad("F9", f"horizontal g2 on {j1},{j2} disturbs electron {k} in row {r}", electrons=[j1, j2],
                        other=k)
        else:
            for k1 in by_row[a.row]:
                k2 = occ.get(Dot(b.row, pos[k1].col))
                if k1 in (j1, j2) or k2 is None or k2 in (j1, j2):
                    continue
                if adjacency(config, pos[k1], pos[k2]).adj_ver and frozenset((k1, k2)) not in g2_pairs:
                    bad("F8", f"vertical g2 on {j1},{j2} also acts on {k1},{k2}", electrons=[j1, j2],
                        others=[k1, k2])
            for c in range(1, config.cols + 1):
                x, y = Dot(a.row, c), Dot(b.row, c)
                if config.has_channel(x, y) and ((x in occ) != (y in occ)):
                    k = occ.get(x, occ.get(y))
                    bad("F10", f"vertical g2 on {j1},{j2} disturbs electron {k} in column {c}", electrons=[j1, j2],
                        other=k)

    # measurements
    for e in sorted(ms):
        d = pos[e]
        if d.col != config.measure_col:
            bad("F11", f"measurement of {e} outside the measurement column (column {d.col})", electron=e)
        for k in by_col[d.col]:
            if k != e and k not in ms:
                bad("F12", f"measurement of {e} also measures electron {k}", electron=e, other=k)

    # shuttle preconditions
    rule_of = {"sh-u": "F13", "sh-d": "F14", "sh-l": "F15", "sh-r": "F16"}
    landing: dict[Dot, int] = {}
    for kind, movers in shuttles.items():
        dr, dc = DELTA[kind]
        for e in sorted(movers):
            src = pos[e]
            dst = Dot(src.row + dr, src.col + dc)
            if kind == "sh-r" and src.col == config.measure_col:
                continue  # ejection into the reservoir
            reasons = []
            if not config.contains(dst):
                reasons.append("off the array")
            else:
                if dr and not config.is_r(src):
                    reasons.append(f"column {src.col} has no row-shared gate")
                if not config.has_channel(src, dst):
                    reasons.append("no channel")
                if dst in occ:
                    reasons.append(f"destination holds electron {occ[dst]}")
                if dst in landing:
                    bad("COLLISION", f"electrons {landing[dst]} and {e} both land on {tuple(dst)}",
                        electrons=[landing[dst], e], dot=list(dst))
                landing[dst] = e
            if reasons:
                bad(rule_of[kind], f"{kind} of {e} from {tuple(src)}: " + "; ".join(reasons), electron=e)

    # horizontal co-movement unless block control holds
    for kind, rule in (("sh-l", "F17"), ("sh-r", "F18")):
        dc = DELTA[kind][1]
        movers = shuttles[kind]
        for e in sorted(movers):
            c = pos[e].col
            for k in by_col[c]:
                if k in movers:
                    continue
                vk = pos[k]
                nxt = Dot(vk.row, vk.col + dc)
                if not config.contains(nxt) or not config.has_channel(vk, nxt):
                    continue
                blockable = nxt not in occ and config.is_r(vk) != config.is_r(nxt)
                if not blockable:
                    bad(rule, f"{kind} of {e} drags electron {k} (block control impossible)", electron=e, other=k)

    # vertical co-movement along row-shared gates
    for kind, rule in (("sh-u", "F19"), ("sh-d", "F20")):
        dr = DELTA[kind][0]
        movers = shuttles[kind]
        for e in sorted(movers):
            r = pos[e].row
            for k in by_row[r]:
                if k in movers:
                    continue
                vk = pos[k]
                nxt = Dot(vk.row + dr, vk.col)
                if config.is_r(vk) and config.contains(nxt) and config.has_channel(vk, nxt):
                    bad(rule, f"{kind} of {e} also moves electron {k} on the shared row gate", electron=e, other=k)

    return out


# -- procedures -------------------------------------------------------------------


def _dag_key(kind: str, electrons: tuple[int, ...]):
    if kind == "swap_pow":
        return ("g2", frozenset(electrons))
    if kind == "measure":
        return ("m", electrons)
    return ("g1", electrons)


def _op_key(op: Op):
    if op.kind == "g2":
        return ("g2", frozenset(op.electrons))
    return (op.kind, op.electrons)


def check_procedure(procedure: Procedure, dag: CircuitDag, crosstalk_rule: str = "enforce") -> ProcedureReport:
    """Replay ``procedure`` and report rule violations plus circuit-order requirements.

    Label operations are matched to DAG nodes by operation kind, operand
    electrons and occurrence order (rx and ry are both g1; a g2 pair is
    unordered). A payload carried by the label must agree with the node. Raises :class:`ReplayError` when a step cannot be
    applied at all (carrying the violations found so far).
    """
    queues: dict[tuple, deque[int]] = defaultdict(deque)
    for g in dag.gates:
        queues[_dag_key(g.kind, g.qubits)].append(g.id)
    step_of: dict[int, int] = {}
    violations: list[Violation] = []
    events = 0
    state = procedure.initial
    for i, label in enumerate(procedure.steps):
        try:
            found = check_label(state, label, crosstalk_rule)
        except UnknownElectron as exc:
            raise ReplayError(f"step {i}: {exc.message}", step=i, violations=violations) from exc
        for v in found:
            v.step_index = i
        violations.extend(found)
        events += len(crosstalk_events(state, label))
        for op in label:
            if op.is_shuttle:
                continue
            q = queues.get(_op_key(op))
            if not q:
                violations.append(Violation("REQ23", i, {"op": op.to_json()},
                                            f"{op.kind} on {list(op.electrons)} is not a pending circuit operation"))
                continue
            gid = q.popleft()
            gate = dag.gates[gid]
            kind_ok = op.gate_kind is None or op.gate_kind == gate.kind
            param_ok = op.param is None or gate.param is None or abs(op.param - gate.param) <= PARAM_TOL
            if not (kind_ok and param_ok):
                violations.append(Violation("REQ23", i, {"op": op.to_json(), "gate": gid},
                                            f"{op.kind} payload does not match circuit gate {gid} ({gate.kind})"))
            step_of[gid] = i
        try:
            state = apply_step(state, label)
        except (CollisionError, OffGridError, InvalidLabel) as exc:
            raise ReplayError(f"step {i}: {exc.message}", step=i, violations=violations) from exc
    for g in dag.gates:
        if g.id not in step_of:
            violations.append(Violation("REQ22", None, {"gate": g.id}, f"circuit gate {g.id} ({g.kind}) never executes"))
    for a, b in sorted(dag.edges):
        if a in step_of and b in step_of and step_of[b] <= step_of[a]:
            violations.append(Violation("REQ22", step_of[b], {"before": a, "after": b},
                                        f"gate {b} runs at step {step_of[b]} but depends on gate {a} at step {step_of[a]}"))
    return ProcedureReport(violations, events)


# -- certification ----------------------------------------------------------------


def candidate_moves(state: MachineState, e: int) -> list[Op]:
    """Shuttles of ``e`` that pass the single-electron preconditions on their own (no ejection)."""
    config = state.config
    src = state.placement[e]
    out = []
    for kind, (dr, dc) in DELTA.items():
        dst = Dot(src.row + dr, src.col + dc)
        if not config.contains(dst) or dst in state.occupied or not config.has_channel(src, dst):
            continue
        if dr and not config.is_r(src):
            continue
        out.append(Op(kind, (e,)))
    return out


def forced_comovers(state: MachineState, op: Op) -> set[int]:
    """Electrons that must make the same shuttle as ``op`` (the F17..F20 co-movement)."""
    config = state.config
    e = op.electrons[0]
    src = state.placement[e]
    dr, dc = DELTA[op.kind]
    out = set()
    for k, vk in state.placement.items():
        if k == e:
            continue
        nxt = Dot(vk.row + dr, vk.col + dc)
        if not config.contains(nxt) or not config.has_channel(vk, nxt):
            continue
        if dc and vk.col == src.col:
            if not (nxt not in state.occupied and config.is_r(vk) != config.is_r(nxt)):
                out.add(k)
        elif dr and vk.row == src.row and config.is_r(vk):
            out.add(k)
    return out


def legal_shuttle_labels(state: MachineState, exhaustive: bool = False) -> Iterator[tuple[Op, ...]]:
    """Every non-empty shuttle-only label accepted by :func:`check_label`.

    Gate and measurement operations are loop transitions, so shuttle labels
    induce the complete reachability relation. Ejection is excluded: the
    certified conditions range over a fixed electron set. Combinations are
    prefiltered on co-movement and shared destinations, then confirmed by
    :func:`check_label`; ``exhaustive`` skips the prefilter.
    """
    choices = [[None] + candidate_moves(state, e) for e in state.electrons]
    forced = {op: forced_comovers(state, op) for ops in choices for op in ops[1:]}
    for combo in itertools.product(*choices):
        label = tuple(op for op in combo if op is not None)
        if not label:
            continue
        if not exhaustive:
            kind_of = {op.electrons[0]: op.kind for op in label}
            if any(kind_of.get(k) != op.kind for op in label for k in forced[op]):
                continue
            dests = {state.placement[op.electrons[0]] + DELTA[op.kind] for op in label}
            dests = {(p[0] + p[2], p[1] + p[3]) for p in dests}
            if len(dests) != len(label):
                continue
        if not check_label(state, label):
            yield label


@dataclass
class Verdict:
    status: str  # holds | fails | unknown
    witness: dict | None = None

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class CertReport:
    verdicts: dict[str, Verdict]
    states_explored: int
    ready_states: int = 0
    operation_states: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(v.status == "holds" for v in self.verdicts.values())

    def to_json(self) -> dict:
        return {
            "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
            "states_explored": self.states_explored,
            "ready_states": self.ready_states,
            "operation_states": self.operation_states,
        }


def _state_json(state: MachineState) -> dict:
    return state.placement_json()


def _lone_ops(state: MachineState) -> Iterator[tuple[str, tuple[int, ...]]]:
    """Lone gate/measure operations executable from ``state`` with no violation."""
    es = state.electrons
    for e in es:
        if not check_label(state, (Op("g1", (e,)),)):
            yield ("C1", (e,))
        if not check_label(state, (Op("m", (e,)),)):
            yield ("C3", (e,))
    for a, b in itertools.combinations(es, 2):
        if not check_label(state, (Op("g2", (a, b)),)):
            yield ("C2", (a, b))


def ready_states(config: ArrayConfig, n: int) -> Iterator[MachineState]:
    for seats in itertools.permutations(config.seat_list, n):
        yield MachineState(config, dict(enumerate(seats)))


def certify_conditions(
    config: ArrayConfig,
    electron_count: int,
    state_budget: int = 1_000_000,
    initial: MachineState | None = None,
) -> CertReport:
    """Decide C1..C6 by exhaustive exploration from every ready state.

    OS is taken as the reachable states that admit at least one lone g1, g2 or
    measurement; C1..C3 quantify over reachable states only.
    """
    n = electron_count
    verdicts: dict[str, Verdict] = {}
    rs = list(ready_states(config, n))
    if initial is None and rs:
        initial = rs[0]
    if initial is None:
        verdicts["C5"] = Verdict("fails", {"reason": f"no ready state exists for {n} electrons"})
    elif is_ready_state(initial):
        verdicts["C5"] = Verdict("holds")
    else:
        verdicts["C5"] = Verdict("fails", {"state": _state_json(initial)})

    succ: dict[MachineState, set[MachineState]] = {s: set() for s in rs}
    order: list[MachineState] = list(succ)
    queue = deque(order)
    truncated = len(order) > state_budget
    while queue and not truncated:
        s = queue.popleft()
        out = succ[s]
        for label in legal_shuttle_labels(s):
            t = apply_step(s, label)
            out.add(t)
            if t not in succ:
                if len(order) >= state_budget:
                    truncated = True
                    break
                succ[t] = set()
                order.append(t)
                queue.append(t)
    graph = nx.DiGraph(succ)
    seen = order

    found: dict[str, set] = {"C1": set(), "C2": set(), "C3": set()}
    os_states = []
    for s in seen:
        lone = list(_lone_ops(s))
        if lone:
            os_states.append(s)
        for cond, ops in lone:
            found[cond].add(frozenset(ops) if cond == "C2" else ops[0])

    electrons = list(range(n))
    wanted = {
        "C1": [(e,) for e in electrons],
        "C2": list(itertools.combinations(electrons, 2)),
        "C3": [(e,) for e in electrons],
    }
    for cond, items in wanted.items():
        missing = [it for it in items if (frozenset(it) if cond == "C2" else it[0]) not in found[cond]]
        if not missing:
            verdicts[cond] = Verdict("holds")
        elif truncated:
            verdicts[cond] = Verdict("unknown", {"reason": "state budget exceeded"})
        else:
            verdicts[cond] = Verdict("fails", {"electrons": list(missing[0]),
                                               "reason": "no reachable state admits the lone operation"})

    if truncated:
        for cond in ("C4", "C6"):
            verdicts[cond] = Verdict("unknown", {"reason": "state budget exceeded"})
    else:
        verdicts["C4"] = _check_c4(graph, rs, os_states)
        verdicts["C6"] = _check_c6(graph, rs)

    order = ["C1", "C2", "C3", "C4", "C5", "C6"]
    return CertReport({k: verdicts[k] for k in order}, len(seen), len(rs), len(os_states))


def _check_c4(graph: nx.DiGraph, rs: list[MachineState], os_states: list[MachineState]) -> Verdict:
    if not rs or not os_states:
        return Verdict("holds")
    cond = nx.condensation(graph)
    member = cond.graph["mapping"]
    # bitset of reachable components per component, filled in reverse topological order
    reach: dict[int, int] = {}
    for comp in reversed(list(nx.topological_sort(cond))):
        bits = 1 << comp
        for nxt in cond.successors(comp):
            bits |= reach[nxt]
        reach[comp] = bits
    wanted = 0
    for o in os_states:
        wanted |= 1 << member[o]
    for s in rs:
        missing = wanted & ~reach[member[s]]
        if missing:
            comp = (missing & -missing).bit_length() - 1
            o = next(o for o in os_states if member[o] == comp)
            return Verdict("fails", {"ready_state": _state_json(s), "operation_state": _state_json(o)})
    return Verdict("holds")


def _check_c6(graph: nx.DiGraph, rs: list[MachineState]) -> Verdict:
    back = set(rs)
    queue = deque(rs)
    while queue:
        s = queue.popleft()
        for p in graph.predecessors(s):
            if p not in back:
                back.add(p)
                queue.append(p)
    for s in graph.nodes:
        if s not in back:
            return Verdict("fails", {"state": _state_json(s), "reason": "cannot return to any ready state"})
    return Verdict("holds")
