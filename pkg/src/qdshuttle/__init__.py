"""Shuttling compiler, rule checker and condition certifier for quantum dot arrays with shared control gates."""

from .array import ArrayConfig, Dot, adjacency, adjacency_predicates, block_control, build_standard_array, seat_dots
from .circuit import CircuitDag, Gate, build_dag, front_layer, parse_circuit, random_circuit
from .compiler import CompileOptions, CompileResult, compile_circuit, count_cost, eval_placement, initial_placement
from .constraints import CertReport, Violation, certify_conditions, check_label, check_procedure
from .errors import QdsError
from .fidelity import FidelityParams, FidelityReport, asymptotic_estimate, count_events, fidelity
from .machine import MachineState, Op, Procedure, apply_step, is_ready_state, reachable
from .planner import G2Outcome, PlanSegment, enumerate_g2_outcomes, plan_g1, plan_g2, plan_measure

__all__ = [
    "ArrayConfig", "Dot", "adjacency", "adjacency_predicates", "block_control", "build_standard_array", "seat_dots",
    "CircuitDag", "Gate", "build_dag", "front_layer", "parse_circuit", "random_circuit",
    "CompileOptions", "CompileResult", "compile_circuit", "count_cost", "eval_placement", "initial_placement",
    "CertReport", "Violation", "certify_conditions", "check_label", "check_procedure",
    "QdsError",
    "FidelityParams", "FidelityReport", "asymptotic_estimate", "count_events", "fidelity",
    "MachineState", "Op", "Procedure", "apply_step", "is_ready_state", "reachable",
    "G2Outcome", "PlanSegment", "enumerate_g2_outcomes", "plan_g1", "plan_g2", "plan_measure",
]
