"""
The truncated dg Lie algebra of coderivations.

A coderivation on the cofree coalgebra over sA is determined by its
projection to sA, a family of multilinear maps indexed by weight (weight w =
arity − 1). This module stores those families with a weight cutoff W: every
statement and every computation is understood modulo weights above W.

The bracket is the graded commutator of the pre-Lie products from algcore.
A homotopy algebra is a degree-1 coderivation Q with zero weight-0 part and
[Q, Q] = 0; gauge transformations conjugate it by the exponential of a
degree-0 coderivation of positive weight.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, Iterable, List, Optional, Union

from operformal.algcore import GradedSpace, MultilinearOp, SymmetryType, compose
from operformal.errors import ContractViolation
from operformal.exactla import to_rational
from operformal.logger import logger


@dataclass(frozen=True)
class Coderivation:
    """
    Weight-indexed family of homogeneous multilinear maps.

    Attributes:
        space (GradedSpace): Underlying space A.
        symmetry (SymmetryType): Planar (associative) or symmetric (Lie).
        codegree (int): Cohomological degree of the coderivation.
        cutoff (int): Weight cutoff W; components above W are discarded.
        components (Dict[int, MultilinearOp]): Nonzero components by weight.
    """

    space: GradedSpace
    symmetry: SymmetryType
    codegree: int
    cutoff: int
    components: Dict[int, MultilinearOp] = field(default_factory=dict)

    def __post_init__(self):
        if self.cutoff < 1:
            raise ContractViolation(f"cutoff must be at least 1, got {self.cutoff}")
        kept = {}
        for w, op in self.components.items():
            if not 0 <= w <= self.cutoff:
                raise ContractViolation(f"weight {w} outside 0..{self.cutoff}")
            if op.arity != w + 1 or op.degree != self.codegree:
                raise ContractViolation(
                    f"weight {w} component has arity {op.arity} and degree {op.degree}; "
                    f"expected {w + 1} and {self.codegree}"
                )
            if op.symmetry is not self.symmetry or op.space != self.space:
                raise ContractViolation(f"weight {w} component has the wrong space or symmetry")
            if not op.is_zero():
                kept[w] = op
        object.__setattr__(self, "components", dict(sorted(kept.items())))

    @classmethod
    def zero(cls, space: GradedSpace, symmetry: SymmetryType, codegree: int, cutoff: int) -> "Coderivation":
        return cls(space, symmetry, codegree, cutoff, {})

    @classmethod
    def from_ops(cls, ops: Iterable[MultilinearOp], cutoff: int) -> "Coderivation":
        """Assembles components from operations, inferring weight from arity."""
        ops = list(ops)
        if not ops:
            raise ContractViolation("from_ops needs at least one operation")
        first = ops[0]
        comps: Dict[int, MultilinearOp] = {}
        for op in ops:
            w = op.arity - 1
            comps[w] = comps[w] + op if w in comps else op
        return cls(first.space, first.symmetry, first.degree, cutoff, comps)

    def like(self, codegree: Optional[int] = None, components: Optional[Dict[int, MultilinearOp]] = None) -> "Coderivation":
        return Coderivation(
            self.space,
            self.symmetry,
            self.codegree if codegree is None else codegree,
            self.cutoff,
            components or {},
        )

    def component(self, w: int) -> MultilinearOp:
        op = self.components.get(w)
        if op is None:
            return MultilinearOp.zero(self.space, w + 1, self.codegree, self.symmetry)
        return op

    @property
    def weights(self) -> List[int]:
        return list(self.components)

    @property
    def min_weight(self) -> Optional[int]:
        return self.weights[0] if self.components else None

    def is_zero(self) -> bool:
        return not self.components

    def _check_compatible(self, other: "Coderivation") -> None:
        if (self.space, self.symmetry, self.cutoff) != (other.space, other.symmetry, other.cutoff):
            raise ContractViolation("coderivations differ in space, symmetry or cutoff")

    def __add__(self, other: "Coderivation") -> "Coderivation":
        self._check_compatible(other)
        if self.codegree != other.codegree:
            raise ContractViolation("cannot add coderivations of different codegree")
        comps = dict(self.components)
        for w, op in other.components.items():
            comps[w] = comps[w] + op if w in comps else op
        return self.like(components=comps)

    def scale(self, coef) -> "Coderivation":
        coef = to_rational(coef)
        return self.like(components={w: op.scale(coef) for w, op in self.components.items()})

    def __neg__(self) -> "Coderivation":
        return self.scale(-1)

    def __sub__(self, other: "Coderivation") -> "Coderivation":
        return self + (-other)


def op_bracket(f: MultilinearOp, g: MultilinearOp) -> MultilinearOp:
    """Graded commutator ``f • g − (−1)^{|f||g|} g • f`` of two operations."""
    sign = -1 if (f.degree * g.degree) % 2 else 1
    return compose(f, g) - compose(g, f).scale(sign)


def bracket(f: Coderivation, g: Coderivation) -> Coderivation:
    """
    Bracket of two coderivations, truncated at the shared cutoff.

    Args:
        f (Coderivation): Left argument.
        g (Coderivation): Right argument.

    Returns:
        Coderivation: Codegree ``f.codegree + g.codegree``; the weight-p
        component collects ``[f_i, g_j]`` over ``i + j = p ≤ W``.

    Raises:
        ContractViolation: If space, symmetry or cutoff differ.
    """
    f._check_compatible(g)
    comps: Dict[int, MultilinearOp] = {}
    for i, fi in f.components.items():
        for j, gj in g.components.items():
            p = i + j
            if p > f.cutoff:
                continue
            term = op_bracket(fi, gj)
            comps[p] = comps[p] + term if p in comps else term
    return f.like(codegree=f.codegree + g.codegree, components=comps)


def filtration_part(x: Coderivation, p_lo: int, p_hi: int) -> Coderivation:
    """Keeps only the components with weight in ``[p_lo, p_hi]``."""
    if not 0 <= p_lo <= p_hi <= x.cutoff:
        raise ContractViolation(f"filtration window [{p_lo}, {p_hi}] outside 0..{x.cutoff}")
    return x.like(components={w: op for w, op in x.components.items() if p_lo <= w <= p_hi})


@dataclass(frozen=True)
class MCVerdict:
    """Result of a Maurer–Cartan check; ``residual`` is [Q, Q] at the failing weight."""

    ok: bool
    failing_weight: Optional[int] = None
    residual: Optional[MultilinearOp] = None


def _require_structure_shape(q: Coderivation) -> None:
    if q.codegree != 1:
        raise ContractViolation(f"a structure needs codegree 1, got {q.codegree}")
    if 0 in q.components:
        raise ContractViolation("a minimal structure has no weight-0 component")


def mc_check(q: Coderivation) -> MCVerdict:
    """
    Checks [q, q] = 0 in every weight up to the cutoff.

    Raises:
        ContractViolation: If ``q`` has codegree ≠ 1 or a weight-0 component.
    """
    _require_structure_shape(q)
    square = bracket(q, q)
    if square.is_zero():
        return MCVerdict(True)
    w = square.min_weight
    logger.debug(f"Maurer-Cartan residual first appears at weight {w}.")
    return MCVerdict(False, w, square.components[w])


@dataclass(frozen=True)
class PInfStructure:
    """
    Minimal homotopy algebra: a codegree-1 coderivation squaring to zero.

    Construction validates shape and the Maurer–Cartan equation, so every
    instance in circulation is a valid structure.

    Attributes:
        q (Coderivation): The structure coderivation Q = q_1 + q_2 + …
    """

    q: Coderivation

    def __post_init__(self):
        verdict = mc_check(self.q)
        if not verdict.ok:
            raise ContractViolation(
                f"Maurer-Cartan equation fails at weight {verdict.failing_weight}"
            )

    @property
    def space(self) -> GradedSpace:
        return self.q.space

    @property
    def symmetry(self) -> SymmetryType:
        return self.q.symmetry

    @property
    def cutoff(self) -> int:
        return self.q.cutoff

    @property
    def operad(self) -> str:
        return self.q.symmetry.operad

    def weight(self, w: int) -> MultilinearOp:
        return self.q.component(w)

    def strict_part(self) -> "PInfStructure":
        return PInfStructure(filtration_part(self.q, 1, 1))

    def nonstrict_weights(self) -> List[int]:
        return [w for w in self.q.weights if w >= 2]

    def is_strict(self) -> bool:
        return not self.nonstrict_weights()


def concentrated_weight(q: PInfStructure) -> Optional[int]:
    """Returns k when Q has a single nonzero component q_k, else None."""
    weights = q.q.weights
    return weights[0] if len(weights) == 1 else None


def d_Q(q: PInfStructure, x: Coderivation) -> Coderivation:
    """The differential ``[Q, x]`` on coderivations."""
    return bracket(q.q, x)


@dataclass(frozen=True)
class GaugeStep:
    """
    One gauge transformation.

    Attributes:
        tau (Coderivation): Codegree-0 coderivation with zero weight-0 part.
        target_weight (int): Weight of the component this step eliminates.
    """

    tau: Coderivation
    target_weight: int

    def __post_init__(self):
        if self.tau.codegree != 0:
            raise ContractViolation(f"gauge parameter must have codegree 0, got {self.tau.codegree}")
        if 0 in self.tau.components:
            raise ContractViolation("gauge parameter must lie in F^1 (no weight-0 component)")


def gauge(q: PInfStructure, step: Union[GaugeStep, Coderivation]) -> PInfStructure:
    """
    Conjugates Q by the exponential of τ.

    ``R = Σ_k (−1)^k ad_τ^k(Q) / k!`` with ``ad_τ(X) = [X, τ]``, i.e.
    ``R = Q − [Q, τ] + ½[[Q, τ], τ] − …``. Each bracket raises the minimal
    weight by at least one, so the sum stops before the cutoff.

    Raises:
        ContractViolation: If τ has nonzero codegree or a weight-0 component.
    """
    if isinstance(step, Coderivation):
        step = GaugeStep(step, step.min_weight or 1)
    tau = step.tau
    q.q._check_compatible(tau)
    total = q.q
    term = q.q
    k = 0
    while True:
        k += 1
        term = bracket(term, tau)
        if term.is_zero():
            break
        coef = Fraction((-1) ** k, factorial(k))
        total = total + term.scale(coef)
    logger.debug(f"Gauge series for weight {step.target_weight} stopped after {k - 1} terms.")
    return PInfStructure(total)


def apply_steps(q: PInfStructure, steps: Iterable[GaugeStep]) -> PInfStructure:
    for step in steps:
        q = gauge(q, step)
    return q
