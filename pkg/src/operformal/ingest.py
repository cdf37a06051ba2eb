"""
Input/output boundary.

Users write structures in classical conventions: an A∞ operation m_n or an
L∞ operation l_n of degree 2 − n on A, the latter graded antisymmetric. The
engine works on the suspension sA, where every component of Q has degree 1
and Lie operations are graded symmetric. The dictionary between the two is
the décalage sign

    b_n(s x_1, …, s x_n) = (−1)^{Σ_i (n − i)(|x_i| − 1)} s m_n(x_1, …, x_n),

applied entrywise on basis tuples. It is an involution on coefficients, so
the same function serves both directions.

Documents are versioned JSON (``"schema": "operformal/1"``) validated with
pydantic. A ``kind`` of ``"minimal"`` (default) describes a ProblemSpec; a
``kind`` of ``"dga"`` describes a strict dg associative algebra, handled by
``operformal.transfer``.
"""

import json
import re
from fractions import Fraction
from typing import Any, Dict, List, Literal, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from operformal.algcore import (
    GradedSpace,
    Key,
    MultilinearOp,
    SymmetryType,
    has_repeated_odd,
    sort_with_sign,
)
from operformal.coder import Coderivation, PInfStructure, mc_check
from operformal.errors import ContractViolation, InputError, MaurerCartanError
from operformal.exactla import format_rational
from operformal.logger import logger

SCHEMA_TAG = "operformal/1"
_RATIONAL = re.compile(r"^\s*-?\d+(\s*/\s*\d+)?\s*$")


# ───────────────────────── schemas ─────────────────────────


def _rational_string(value: Union[str, int]) -> str:
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, int):
        return str(value)
    if not isinstance(value, str) or not _RATIONAL.match(value):
        raise ValueError(f"{value!r} is not a rational string like '3/2' or '-1'")
    if "/" in value and int(value.split("/")[1]) == 0:
        raise ValueError(f"{value!r} has a zero denominator")
    return value.replace(" ", "")


class BasisEntry(BaseModel):
    """One basis element with its classical degree."""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1, description="Unique basis element name")
    degree: int = Field(..., description="Classical cohomological degree")


class OperationRecord(BaseModel):
    """A single value m_{w+1}(inputs) = Σ coeff·output, classical conventions."""

    model_config = ConfigDict(extra="forbid")

    weight: int = Field(..., ge=1, description="Weight w; the operation has arity w + 1")
    inputs: List[str] = Field(..., description="Basis names, length w + 1")
    output: Dict[str, str] = Field(default_factory=dict, description="Output name → rational string")

    @field_validator("output", mode="before")
    @classmethod
    def _rationals(cls, value: Any) -> Dict[str, str]:
        if not isinstance(value, dict):
            raise ValueError("output must be an object mapping names to rationals")
        return {k: _rational_string(v) for k, v in value.items()}


class ProblemSpec(BaseModel):
    """
    A minimal homotopy algebra in classical conventions.

    Degree rule: a weight-w record describes m_{w+1} (or l_{w+1}) of classical
    degree 1 − w, so ``deg(output) − Σ deg(inputs) = 1 − w`` for every
    nonzero coefficient. Example: ``m_3(e, e, e) = f`` with ``deg e = 1``,
    ``deg f = 2`` is a weight-2 record (2 − 3 = −1 = 1 − 2).
    """

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    schema_version: Literal["operformal/1"] = Field(SCHEMA_TAG, alias="schema")
    kind: Literal["minimal"] = "minimal"
    operad: Literal["ass", "lie"] = Field(..., description="Operad tag")
    basis: List[BasisEntry] = Field(..., min_length=1)
    operations: List[OperationRecord] = Field(default_factory=list)
    max_weight: int = Field(..., ge=1, description="Weight cutoff W")
    options: Dict[str, Any] = Field(default_factory=dict)


class ProductRecord(BaseModel):
    """A product value a·b = Σ coeff·output."""

    model_config = ConfigDict(extra="forbid")

    inputs: List[str] = Field(..., min_length=2, max_length=2)
    output: Dict[str, str] = Field(default_factory=dict)

    @field_validator("output", mode="before")
    @classmethod
    def _rationals(cls, value: Any) -> Dict[str, str]:
        if not isinstance(value, dict):
            raise ValueError("output must be an object mapping names to rationals")
        return {k: _rational_string(v) for k, v in value.items()}


class DgAlgebraSpec(BaseModel):
    """
    A strict dg associative algebra, to be transferred to its cohomology.

    ``differential`` maps a basis name to the vector d(name); ``product``
    lists the nonzero products of basis elements.
    """

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    schema_version: Literal["operformal/1"] = Field(SCHEMA_TAG, alias="schema")
    kind: Literal["dga"] = "dga"
    basis: List[BasisEntry] = Field(..., min_length=1)
    differential: Dict[str, Dict[str, str]] = Field(default_factory=dict)
    product: List[ProductRecord] = Field(default_factory=list)
    max_weight: int = Field(..., ge=1)
    options: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("differential", mode="before")
    @classmethod
    def _rationals(cls, value: Any) -> Dict[str, Dict[str, str]]:
        if not isinstance(value, dict):
            raise ValueError("differential must be an object")
        return {k: {o: _rational_string(c) for o, c in v.items()} for k, v in value.items()}


Document = Union[ProblemSpec, DgAlgebraSpec]


def _validation_to_input_error(exc: ValidationError) -> InputError:
    first = exc.errors()[0]
    location = ".".join(str(part) if not isinstance(part, int) else f"[{part}]" for part in first["loc"])
    location = location.replace(".[", "[")
    return InputError(first["msg"], location=location or None)


def load_document(text: str) -> Document:
    """
    Parses JSON text into a ProblemSpec or DgAlgebraSpec.

    Raises:
        InputError: On malformed JSON or schema violations.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(raw, dict):
        raise InputError("top-level JSON value must be an object")
    try:
        if raw.get("kind", "minimal") == "dga":
            return DgAlgebraSpec.model_validate(raw)
        return ProblemSpec.model_validate(raw)
    except ValidationError as exc:
        raise _validation_to_input_error(exc) from exc


def build_space(basis: Sequence[BasisEntry]) -> GradedSpace:
    names = [b.name for b in basis]
    seen = set()
    for i, name in enumerate(names):
        if name in seen:
            raise InputError(f"duplicate basis name {name!r}", location=f"basis[{i}].name")
        seen.add(name)
    return GradedSpace(tuple(names), tuple(b.degree for b in basis))


# ───────────────────────── décalage ─────────────────────────


def decalage_sign(degrees: Sequence[int]) -> int:
    """Sign relating classical and shifted coefficients on inputs of these classical degrees."""
    n = len(degrees)
    exponent = sum((n - 1 - k) * (d - 1) for k, d in enumerate(degrees))
    return -1 if exponent % 2 else 1


def to_shifted(space: GradedSpace, key: Key, coef: Fraction) -> Fraction:
    return decalage_sign([space.degree(i) for i in key]) * coef


def to_classical(space: GradedSpace, key: Key, coef: Fraction) -> Fraction:
    return decalage_sign([space.degree(i) for i in key]) * coef


# ───────────────────────── parse / emit ─────────────────────────


def format_op(op: MultilinearOp, indent: str = "  ") -> str:
    """Lists the stored values of an operation, one per line, with basis names."""
    names = op.space.names
    lines = []
    for key, out, coef in op.entries():
        args = ", ".join(names[i] for i in key)
        lines.append(f"{indent}({args}) -> {format_rational(coef)}·{names[out]}")
    return "\n".join(lines) if lines else f"{indent}(zero)"


def relation_dump(residual: MultilinearOp) -> str:
    return "[Q, Q] on the suspension is nonzero at:\n" + format_op(residual)


def structure_from_spec(spec: ProblemSpec) -> PInfStructure:
    """
    Validates a ProblemSpec and converts it to the shifted convention.

    Raises:
        InputError: On arity, degree, antisymmetry or consistency violations.
        MaurerCartanError: If [Q, Q] ≠ 0 below the cutoff.
    """
    space = build_space(spec.basis)
    symmetry = SymmetryType.for_operad(spec.operad)
    shifted = space.shifted_degrees
    W = spec.max_weight
    values: Dict[int, Dict[Key, Dict[int, Fraction]]] = {}
    origin: Dict[Tuple[int, Key, int], str] = {}

    for r, record in enumerate(spec.operations):
        where = f"operations[{r}]"
        w = record.weight
        if len(record.inputs) != w + 1:
            raise InputError(
                f"weight {w} needs {w + 1} inputs, got {len(record.inputs)}", location=f"{where}.inputs"
            )
        if w > W:
            raise InputError(f"weight {w} exceeds max_weight {W}", location=f"{where}.weight")
        try:
            key = tuple(space.index(x) for x in record.inputs)
            outs = {space.index(o): Fraction(c) for o, c in record.output.items()}
        except ContractViolation as exc:
            raise InputError(str(exc), location=where) from exc
        source = sum(space.degree(i) for i in key)
        for out, coef in outs.items():
            if coef == 0:
                continue
            if space.degree(out) - source != 1 - w:
                raise InputError(
                    f"output {space.names[out]!r} has degree {space.degree(out)}; an arity-{w + 1} "
                    f"operation on these inputs must land in degree {source + 1 - w}",
                    location=f"{where}.output",
                )
        canonical, sign = key, 1
        if symmetry is SymmetryType.SYMMETRIC:
            if has_repeated_odd(key, shifted) and any(outs.values()):
                raise InputError(
                    "antisymmetry forces this value to vanish (an even element is repeated)",
                    location=f"{where}.inputs",
                )
            canonical, sign = sort_with_sign(key, shifted)
        slot = values.setdefault(w, {}).setdefault(canonical, {})
        for out, coef in outs.items():
            shifted_coef = sign * to_shifted(space, key, coef)
            tag = (w, canonical, out)
            if tag in origin:
                if slot.get(out, Fraction(0)) != shifted_coef:
                    raise InputError(
                        f"conflicts with {origin[tag]} on the same inputs", location=f"{where}.output"
                    )
                continue
            origin[tag] = where
            if shifted_coef:
                slot[out] = shifted_coef

    comps = {
        w: MultilinearOp(space, w + 1, 1, symmetry, {k: v for k, v in by_key.items() if v})
        for w, by_key in values.items()
    }
    q = Coderivation(space, symmetry, 1, W, comps)
    verdict = mc_check(q)
    if not verdict.ok:
        raise MaurerCartanError(verdict.failing_weight, relation_dump(verdict.residual))
    unknown = set(spec.options) - {"pages", "max_weight_check"}
    if unknown:
        logger.warning(f"Ignoring unknown options: {sorted(unknown)}")
    logger.info(
        f"Parsed {spec.operad} structure on {space.dim} basis elements, "
        f"weights {q.weights}, cutoff {W}."
    )
    return PInfStructure(q)


def parse(text: str) -> PInfStructure:
    """Parses ProblemSpec JSON text into a validated structure."""
    document = load_document(text)
    if isinstance(document, DgAlgebraSpec):
        raise InputError("expected a minimal structure, got a dga (use transfer)", location="kind")
    return structure_from_spec(document)


def emit(q: PInfStructure, options: Dict[str, Any] = None) -> ProblemSpec:
    """Writes a structure back in classical conventions."""
    space = q.space
    records = []
    for w, op in q.q.components.items():
        for key, outs in sorted(op.coeffs.items()):
            records.append(
                OperationRecord(
                    weight=w,
                    inputs=[space.names[i] for i in key],
                    output={
                        space.names[o]: format_rational(to_classical(space, key, c))
                        for o, c in sorted(outs.items())
                    },
                )
            )
    return ProblemSpec(
        schema=SCHEMA_TAG,
        operad=q.operad,
        basis=[BasisEntry(name=n, degree=d) for n, d in zip(space.names, space.degrees)],
        operations=records,
        max_weight=q.cutoff,
        options=options or {},
    )


def emit_json(q: PInfStructure) -> str:
    return emit(q).model_dump_json(by_alias=True, indent=2)


def spec_from_dict(data: Dict[str, Any]) -> ProblemSpec:
    """Validates a ProblemSpec given as a Python dict."""
    try:
        return ProblemSpec.model_validate(data)
    except ValidationError as exc:
        raise _validation_to_input_error(exc) from exc
