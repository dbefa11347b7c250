"""Multiplicative fidelity model over shuttle and crosstalk events.

Every shuttle costs a factor ``f_sh`` and every crosstalk event (one electron
sitting in a column next to a single-qubit gate) costs ``f_ct``. Gates and
measurements are treated as perfect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constraints import crosstalk_events
from .machine import Procedure, apply_step

CROSSTALK_AMPLITUDE = 0.2


def crosstalk_fidelity(theta: float) -> float:
    """cos²(0.2·θ/2) with θ folded into [0, π]; 0.905 at θ = π."""
    t = math.fmod(abs(theta), 2 * math.pi)
    if t > math.pi:
        t = 2 * math.pi - t
    return math.cos(CROSSTALK_AMPLITUDE * t / 2) ** 2


@dataclass(frozen=True)
class FidelityParams:
    f_sh: float = 0.996
    f_ct: float = 0.905
    theta_model: bool = False

    def __post_init__(self):
        for name in ("f_sh", "f_ct"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")

    def event_fidelity(self, theta: float | None) -> float:
        if self.theta_model and theta is not None:
            return crosstalk_fidelity(theta)
        return self.f_ct


@dataclass(frozen=True)
class EventCounts:
    n_shuttle: int
    n_crosstalk: int
    crosstalk_thetas: tuple[float | None, ...] = ()

    def to_json(self) -> dict:
        return {"n_shuttle": self.n_shuttle, "n_crosstalk": self.n_crosstalk}


@dataclass(frozen=True)
class FidelityReport:
    n_shuttle: int
    n_crosstalk: int
    fidelity: float
    log_fidelity: float

    def to_json(self) -> dict:
        return {
            "n_shuttle": self.n_shuttle,
            "n_crosstalk": self.n_crosstalk,
            "fidelity": self.fidelity,
            "log_fidelity": self.log_fidelity,
        }


def count_events(procedure: Procedure) -> EventCounts:
    """Shuttles (ejections included) and per-electron crosstalk events over a replay."""
    shuttles = 0
    thetas: list[float | None] = []
    state = procedure.initial
    for label in procedure.steps:
        shuttles += sum(op.is_shuttle for op in label)
        events = crosstalk_events(state, label)
        if events:
            angle = {op.electrons[0]: op.param for op in label if op.kind == "g1"}
            thetas.extend(angle[target] for target, _ in events)
        state = apply_step(state, label)
    return EventCounts(shuttles, len(thetas), tuple(thetas))


def fidelity(counts: EventCounts, params: FidelityParams | None = None) -> FidelityReport:
    params = params or FidelityParams()
    log_f = counts.n_shuttle * math.log(params.f_sh)
    if params.theta_model and counts.crosstalk_thetas:
        log_f += sum(math.log(params.event_fidelity(t)) for t in counts.crosstalk_thetas)
        value = params.f_sh**counts.n_shuttle * math.prod(params.event_fidelity(t) for t in counts.crosstalk_thetas)
    else:
        log_f += counts.n_crosstalk * math.log(params.f_ct)
        value = params.f_sh**counts.n_shuttle * params.f_ct**counts.n_crosstalk
    return FidelityReport(counts.n_shuttle, counts.n_crosstalk, value, log_f)


@dataclass(frozen=True)
class AsymptoticEstimate:
    shuttle_estimate: float
    crosstalk_estimate: float
    log_fidelity: float
    log_fidelity_slope: float

    def to_json(self) -> dict:
        return {
            "shuttle_estimate": self.shuttle_estimate,
            "crosstalk_estimate": self.crosstalk_estimate,
            "log_fidelity": self.log_fidelity,
            "log_fidelity_slope": self.log_fidelity_slope,
        }


def asymptotic_estimate(
    n: int, m: int, params: FidelityParams | None = None, mode: str = "avoid", rounded: bool = False
) -> AsymptoticEstimate:
    """Order-of-growth event counts for ``m`` random gates on ``n`` qubits.

    Single-qubit gates cost 6√n shuttles each when avoiding crosstalk (2√n
    plus √n crosstalk events otherwise), two-qubit gates (5/4)√(2n), and
    measuring every qubit once (9/8)n√(2n). ``log_fidelity_slope`` is the
    derivative in ``m``; ``rounded`` replaces the per-gate shuttle
    coefficients by 8√n and 4√n.
    """
    if mode not in ("avoid", "allow"):
        raise ValueError(f"mode must be 'avoid' or 'allow', not {mode!r}")
    if n < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    params = params or FidelityParams()
    rn, r2n = math.sqrt(n), math.sqrt(2 * n)
    g1 = 6 * rn if mode == "avoid" else 2 * rn
    per_gate = g1 + 1.25 * r2n
    if rounded:
        per_gate = 8 * rn if mode == "avoid" else 4 * rn
    shuttles = (g1 + 1.25 * r2n) * m + 1.125 * n * r2n
    crosstalk = m * rn if mode == "allow" else 0.0
    ln_sh, ln_ct = math.log(params.f_sh), math.log(params.f_ct)
    slope = per_gate * ln_sh + (rn * ln_ct if mode == "allow" else 0.0)
    return AsymptoticEstimate(shuttles, crosstalk, shuttles * ln_sh + crosstalk * ln_ct, slope)
