"""
LangGraph definition of the ``crosscheck`` command.

The graph runs every decision procedure on one structure and reconciles
them:

    kaledin → formalize → verify_witness | audit_obstruction
            → euler → degeneration → reconcile → END

The branch after ``formalize`` depends on whether the gauge loop produced a
witness. ``reconcile`` assembles the Report and raises InvariantViolation
if the procedures disagree, since that can only be a bug.
"""

import time
from typing import Dict, Optional, TypedDict, Union

from langgraph.graph import END, StateGraph

from operformal.coder import PInfStructure
from operformal.errors import InvariantViolation
from operformal.kaledin import (
    FormalityWitness,
    KaledinReport,
    certificate_holds,
    formalize,
    truncated_class,
    verify_witness,
)
from operformal.logger import logger
from operformal.report import (
    Report,
    check_consistency,
    euler_payload,
    kaledin_payload,
    obstruction_payload,
    summarize,
    witness_payload,
)
from operformal.spectral import EulerPush, degenerates_at_E2, push_euler


class CrosscheckState(TypedDict, total=False):
    """
    State passed between the nodes of the crosscheck graph.

    Only ``structure`` is required on entry; every node adds its own result.
    """

    structure: PInfStructure
    kaledin: KaledinReport
    formalization: Union[FormalityWitness, KaledinReport]
    witness_verified: Optional[bool]
    euler: EulerPush
    degeneration: bool
    report: Report
    timings: Dict[str, float]


def _timed(state: CrosscheckState, name: str, started: float) -> Dict[str, float]:
    timings = dict(state.get("timings") or {})
    timings[name] = time.perf_counter() - started
    return timings


def kaledin_node(state: CrosscheckState) -> CrosscheckState:
    """Truncated Kaledin classes up to the cutoff, solved jointly."""
    started = time.perf_counter()
    q = state["structure"]
    if q.cutoff >= 2:
        result = truncated_class(q, q.cutoff)
    else:
        result = KaledinReport(q.cutoff, q.cutoff)
    new_state = state.copy()
    new_state["kaledin"] = result
    new_state["timings"] = _timed(state, "kaledin", started)
    logger.info(f"kaledin node: vanishing level {result.vanishing_level}.")
    return new_state


def formalize_node(state: CrosscheckState) -> CrosscheckState:
    """Weight-by-weight gauge loop."""
    started = time.perf_counter()
    new_state = state.copy()
    new_state["formalization"] = formalize(state["structure"])
    new_state["timings"] = _timed(state, "formalize", started)
    return new_state


def route_after_formalize(state: CrosscheckState) -> str:
    if isinstance(state["formalization"], FormalityWitness):
        return "verify_witness"
    return "audit_obstruction"


def verify_witness_node(state: CrosscheckState) -> CrosscheckState:
    """Re-applies the gauge steps; a mismatch is an internal error."""
    started = time.perf_counter()
    if not verify_witness(state["structure"], state["formalization"]):
        raise InvariantViolation("re-applying the formality witness does not reach a strict structure")
    new_state = state.copy()
    new_state["witness_verified"] = True
    new_state["timings"] = _timed(state, "verify_witness", started)
    return new_state


def audit_obstruction_node(state: CrosscheckState) -> CrosscheckState:
    """
    Checks the joint-system certificate against a freshly assembled system.

    The gauge loop failed, so the joint system must have failed too, at the
    same weight, with a certificate y satisfying yᵀA = 0 and yᵀb = 1.
    """
    started = time.perf_counter()
    q = state["structure"]
    joint = state["kaledin"]
    loop = state["formalization"]
    if joint.obstruction is None:
        raise InvariantViolation(
            f"gauge loop is obstructed at weight {loop.obstruction.weight} "
            "but the joint Kaledin system is solvable"
        )
    if not certificate_holds(q, joint.obstruction):
        raise InvariantViolation(
            f"obstruction certificate at weight {joint.obstruction.weight} does not certify"
        )
    new_state = state.copy()
    new_state["witness_verified"] = None
    new_state["timings"] = _timed(state, "audit_obstruction", started)
    return new_state


def euler_node(state: CrosscheckState) -> CrosscheckState:
    started = time.perf_counter()
    new_state = state.copy()
    new_state["euler"] = push_euler(state["structure"])
    new_state["timings"] = _timed(state, "euler", started)
    return new_state


def degeneration_node(state: CrosscheckState) -> CrosscheckState:
    started = time.perf_counter()
    new_state = state.copy()
    new_state["degeneration"] = degenerates_at_E2(state["structure"])
    new_state["timings"] = _timed(state, "degeneration", started)
    return new_state


def reconcile_node(state: CrosscheckState) -> CrosscheckState:
    """Builds the Report and enforces agreement of all criteria."""
    q = state["structure"]
    formalization = state["formalization"]
    formal = isinstance(formalization, FormalityWitness)
    report = Report(
        command="crosscheck",
        verdict="formal_up_to_W" if formal else "non_formal",
        structure=summarize(q),
        kaledin=kaledin_payload(q, state["kaledin"]),
        euler=euler_payload(state["euler"]),
        degeneration=state["degeneration"],
        witness=witness_payload(formalization) if formal else None,
        obstruction=None if formal else obstruction_payload(q, formalization.obstruction),
        timings=state.get("timings") or {},
    )
    check_consistency(report, q.cutoff)
    logger.info(f"crosscheck verdict: {report.verdict}.")
    new_state = state.copy()
    new_state["report"] = report
    return new_state


workflow = StateGraph(CrosscheckState)

workflow.add_node("kaledin", kaledin_node)
workflow.add_node("formalize", formalize_node)
workflow.add_node("verify_witness", verify_witness_node)
workflow.add_node("audit_obstruction", audit_obstruction_node)
workflow.add_node("euler", euler_node)
workflow.add_node("degeneration", degeneration_node)
workflow.add_node("reconcile", reconcile_node)

workflow.set_entry_point("kaledin")
workflow.add_edge("kaledin", "formalize")
workflow.add_conditional_edges(
    "formalize",
    route_after_formalize,
    {
        "verify_witness": "verify_witness",
        "audit_obstruction": "audit_obstruction",
    },
)
workflow.add_edge("verify_witness", "euler")
workflow.add_edge("audit_obstruction", "euler")
workflow.add_edge("euler", "degeneration")
workflow.add_edge("degeneration", "reconcile")
workflow.add_edge("reconcile", END)

app = workflow.compile()


def run_crosscheck(q: PInfStructure) -> Report:
    """Runs the compiled graph on one structure and returns its Report."""
    final = app.invoke({"structure": q, "timings": {}})
    return final["report"]
