"""
Machine- and human-readable reports.

Every CLI command produces a ``Report``. With ``--json`` it is dumped as-is;
otherwise ``render_text`` prints a short summary, using pandas tables for
spectral sequence pages. Coefficients are exact rational strings and term
records use the shifted (suspended) convention.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from operformal.algcore import MultilinearOp
from operformal.coder import Coderivation, PInfStructure, concentrated_weight
from operformal.errors import InvariantViolation
from operformal.exactla import format_rational, rank
from operformal.kaledin import FormalityWitness, KaledinObstruction, KaledinReport
from operformal.spectral import ClassHandle, EulerPush, SSPage

Verdict = Literal["formal_up_to_W", "non_formal"]


class TermRecord(BaseModel):
    """A component value on one input tuple, shifted convention."""

    weight: int
    inputs: List[str]
    output: Dict[str, str]


class CertificateEntry(BaseModel):
    weight: int
    inputs: List[str]
    output: str
    coefficient: str


class ObstructionPayload(BaseModel):
    weight: int = Field(..., description="Weight of the first unsolvable equation")
    representative: List[TermRecord]
    certificate: List[CertificateEntry] = Field(
        default_factory=list, description="Nonzero entries of y with yᵀA = 0, yᵀb = 1"
    )


class KaledinPayload(BaseModel):
    max_weight_checked: int
    vanishing_level: int
    witness: Optional[List[TermRecord]] = None
    obstruction: Optional[ObstructionPayload] = None


class GaugeStepPayload(BaseModel):
    target_weight: int
    tau: List[TermRecord]


class EulerPayload(BaseModel):
    survives_to: int
    first_nonzero_page: Optional[int] = None
    first_nonzero_cell: Optional[Tuple[int, int]] = None
    first_nonzero_value: Optional[List[TermRecord]] = None


class CellPayload(BaseModel):
    p: int
    q: int
    dim: int


class DifferentialPayload(BaseModel):
    p: int
    q: int
    rank: int


class PagePayload(BaseModel):
    r: int
    cells: List[CellPayload]
    nonzero_differentials: List[DifferentialPayload] = Field(default_factory=list)


class StructureSummary(BaseModel):
    operad: str
    basis: List[Tuple[str, int]]
    weights: List[int] = Field(default_factory=list, description="Weights with nonzero components")
    max_weight: int
    cohomology: Optional[Dict[int, int]] = None
    concentrated_weight: Optional[int] = Field(
        None, description="k when Q has a single nonzero component q_k; then d_r = 0 for r > k"
    )


class Report(BaseModel):
    """Result of one command; optional sections are omitted when not computed."""

    model_config = ConfigDict(populate_by_name=True)

    schema_version: Literal["operformal/1"] = Field("operformal/1", alias="schema")
    command: str
    verdict: Optional[Verdict] = None
    structure: Optional[StructureSummary] = None
    kaledin: Optional[KaledinPayload] = None
    euler: Optional[EulerPayload] = None
    degeneration: Optional[bool] = None
    witness: Optional[List[GaugeStepPayload]] = None
    obstruction: Optional[ObstructionPayload] = None
    pages: Optional[List[PagePayload]] = None
    timings: Dict[str, float] = Field(default_factory=dict)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, exclude_none=True, indent=2)


# ───────────────────────── builders ─────────────────────────


def op_records(op: MultilinearOp, weight: int) -> List[TermRecord]:
    names = op.space.names
    return [
        TermRecord(
            weight=weight,
            inputs=[names[i] for i in key],
            output={names[o]: format_rational(c) for o, c in sorted(outs.items())},
        )
        for key, outs in sorted(op.coeffs.items())
    ]


def coderivation_records(x: Coderivation) -> List[TermRecord]:
    return [r for w, op in x.components.items() for r in op_records(op, w)]


def summarize(q: PInfStructure, cohomology: Optional[Dict[int, int]] = None) -> StructureSummary:
    space = q.space
    return StructureSummary(
        operad=q.operad,
        basis=list(zip(space.names, space.degrees)),
        weights=q.q.weights,
        max_weight=q.cutoff,
        cohomology=cohomology,
        concentrated_weight=concentrated_weight(q),
    )


def obstruction_payload(q: PInfStructure, obstruction: KaledinObstruction) -> ObstructionPayload:
    names = q.space.names
    return ObstructionPayload(
        weight=obstruction.weight,
        representative=op_records(obstruction.representative, obstruction.weight),
        certificate=[
            CertificateEntry(
                weight=w,
                inputs=[names[i] for i in key],
                output=names[out],
                coefficient=format_rational(c),
            )
            for (w, key, out), c in obstruction.support()
        ],
    )


def kaledin_payload(q: PInfStructure, report: KaledinReport) -> KaledinPayload:
    return KaledinPayload(
        max_weight_checked=report.max_weight_checked,
        vanishing_level=report.vanishing_level,
        witness=coderivation_records(report.witness) if report.witness is not None else None,
        obstruction=obstruction_payload(q, report.obstruction) if report.obstruction else None,
    )


def witness_payload(witness: FormalityWitness) -> List[GaugeStepPayload]:
    return [
        GaugeStepPayload(target_weight=s.target_weight, tau=coderivation_records(s.tau))
        for s in witness.steps
    ]


def euler_payload(push: EulerPush) -> EulerPayload:
    handle: Optional[ClassHandle] = push.first_nonzero
    if handle is None:
        return EulerPayload(survives_to=push.survives_to)
    return EulerPayload(
        survives_to=push.survives_to,
        first_nonzero_page=handle.page,
        first_nonzero_cell=(handle.p, handle.q),
        first_nonzero_value=coderivation_records(handle.representative) if handle.representative else None,
    )


def page_payload(page: SSPage) -> PagePayload:
    return PagePayload(
        r=page.r,
        cells=[CellPayload(p=p, q=q, dim=d) for (p, q), d in page.dimensions().items()],
        nonzero_differentials=[
            DifferentialPayload(p=p, q=q, rank=rank(m)) for (p, q), m in page.nonzero_differentials().items()
        ],
    )


def check_consistency(report: Report, cutoff: int) -> None:
    """
    Enforces that every decision procedure in a report agrees.

    Raises:
        InvariantViolation: Listing the disagreeing quantities.
    """
    votes: Dict[str, Any] = {}
    if report.kaledin is not None:
        votes["kaledin"] = report.kaledin.vanishing_level == cutoff
    if report.euler is not None:
        votes["euler"] = report.euler.survives_to == cutoff
    if report.degeneration is not None:
        votes["degeneration"] = report.degeneration
    if report.witness is not None or report.obstruction is not None:
        votes["formalize"] = report.obstruction is None
    if report.verdict is not None:
        votes["verdict"] = report.verdict == "formal_up_to_W"
    if report.kaledin is not None and report.euler is not None:
        if report.kaledin.vanishing_level != report.euler.survives_to:
            raise InvariantViolation(
                f"Kaledin vanishing level {report.kaledin.vanishing_level} differs from "
                f"Euler survival page {report.euler.survives_to}"
            )
    if report.kaledin is not None and report.obstruction is not None and report.kaledin.obstruction is not None:
        if report.kaledin.obstruction.weight != report.obstruction.weight:
            raise InvariantViolation(
                f"obstruction weights differ: {report.kaledin.obstruction.weight} "
                f"(joint system) vs {report.obstruction.weight} (gauge loop)"
            )
    if len(set(votes.values())) > 1:
        raise InvariantViolation(f"decision procedures disagree: {votes}")


# ───────────────────────── text ─────────────────────────


def page_table(page: PagePayload) -> pd.DataFrame:
    """Dimensions of E_r as a p × q grid, 0 for empty cells."""
    if not page.cells:
        return pd.DataFrame()
    frame = pd.DataFrame([c.model_dump() for c in page.cells])
    grid = frame.pivot_table(index="p", columns="q", values="dim", aggfunc="sum", fill_value=0)
    return grid.sort_index()


def _terms(records: List[TermRecord], indent: str = "    ") -> List[str]:
    out = []
    for rec in records:
        value = " + ".join(f"{c}·{n}" for n, c in rec.output.items())
        out.append(f"{indent}w{rec.weight} ({', '.join(rec.inputs)}) -> {value}")
    return out or [f"{indent}(zero)"]


def render_text(report: Report) -> str:
    lines = [f"operformal {report.command}"]
    if report.structure is not None:
        s = report.structure
        basis = ", ".join(f"{n}:{d}" for n, d in s.basis)
        lines.append(f"  structure: {s.operad} on [{basis}], weights {s.weights}, W = {s.max_weight}")
        if s.cohomology is not None:
            lines.append(f"  cohomology dims by degree: {s.cohomology}")
        if s.concentrated_weight is not None and s.concentrated_weight >= 2:
            k = s.concentrated_weight
            lines.append(f"  Q is concentrated in weight {k}: d_r = 0 for r > {k}")
    if report.verdict is not None:
        lines.append(f"  verdict: {report.verdict}")
    if report.kaledin is not None:
        k = report.kaledin
        lines.append(f"  Kaledin class vanishes up to weight {k.vanishing_level} (checked {k.max_weight_checked})")
        if k.obstruction is not None:
            lines.append(f"  obstruction at weight {k.obstruction.weight}, representative:")
            lines.extend(_terms(k.obstruction.representative))
    if report.witness is not None:
        lines.append(f"  formality witness: {len(report.witness)} gauge step(s)")
        for step in report.witness:
            lines.append(f"   step removing weight {step.target_weight}:")
            lines.extend(_terms(step.tau, indent="      "))
    if report.obstruction is not None and report.kaledin is None:
        lines.append(f"  obstruction at weight {report.obstruction.weight}, representative:")
        lines.extend(_terms(report.obstruction.representative))
    if report.euler is not None:
        e = report.euler
        lines.append(f"  Euler class survives to E_{e.survives_to}")
        if e.first_nonzero_page is not None:
            lines.append(f"  first nonzero d_{e.first_nonzero_page} lands in cell {e.first_nonzero_cell}")
    if report.degeneration is not None:
        lines.append(f"  degenerates at E_2: {'yes' if report.degeneration else 'no'}")
    for page in report.pages or []:
        lines.append(f"  E_{page.r}:")
        table = page_table(page)
        lines.extend("    " + row for row in (table.to_string().splitlines() if not table.empty else ["(zero)"]))
        for d in page.nonzero_differentials:
            lines.append(f"    d_{page.r} out of ({d.p}, {d.q}) has rank {d.rank}")
    if report.timings:
        spent = ", ".join(f"{k} {v:.3f}s" for k, v in report.timings.items())
        lines.append(f"  timings: {spent}")
    return "\n".join(lines)
