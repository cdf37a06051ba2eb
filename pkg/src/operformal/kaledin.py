"""
Kaledin class: cocycle, truncated classes and the formalization loop.

For a minimal structure Q = q_1 + q_2 + …, the Kaledin cocycle is
Q̃ = Σ (w − 1) q_w. Its truncation K^{≤n} vanishes iff there is a
codegree-0 coderivation T = t_1 + … + t_{n−1} with [Q, T] ≡ Q̃ modulo
weights above n. Two procedures decide this:

    truncated_class  assembles the coupled equations for every weight up
                     to n as one linear system over ℚ;
    formalize        kills the lowest non-strict component with a gauge
                     step, one weight at a time, using only [q_1, −].

They agree on every input, which the test-suite exploits as a sign check.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from operformal.algcore import Key, MultilinearOp
from operformal.coder import (
    Coderivation,
    GaugeStep,
    PInfStructure,
    apply_steps,
    bracket,
    filtration_part,
    gauge,
)
from operformal.errors import ContractViolation, InvariantViolation
from operformal.exactla import RatMatrix, SparseVector, dense, solve
from operformal.logger import logger
from operformal.spectral import CoderComplex

CertificateLabel = Tuple[int, Key, int]


@dataclass(frozen=True)
class KaledinObstruction:
    """
    A nonvanishing truncated Kaledin class.

    Attributes:
        weight (int): Weight at which the equations become unsolvable.
        representative (MultilinearOp): (weight − 1)·q_weight.
        certificate (Tuple[Fraction, ...]): Row vector y with yᵀA = 0 and
            yᵀb = 1 for the failing system.
        labels (Tuple[CertificateLabel, ...]): For each certificate entry,
            the (weight, input tuple, output) of the equation it weighs.
    """

    weight: int
    representative: MultilinearOp
    certificate: Tuple[Fraction, ...]
    labels: Tuple[CertificateLabel, ...] = ()

    def support(self) -> List[Tuple[CertificateLabel, Fraction]]:
        return [(lab, c) for lab, c in zip(self.labels, self.certificate) if c]


@dataclass(frozen=True)
class KaledinReport:
    """
    Outcome of a truncated class computation.

    Attributes:
        max_weight_checked (int): The truncation n that was requested.
        vanishing_level (int): Largest m ≤ n with K^{≤m} = 0.
        witness (Optional[Coderivation]): T with [Q, T] ≡ Q̃ mod F^{m+1}
            when the vanishing level is at least 2.
        obstruction (Optional[KaledinObstruction]): The first failure.
    """

    max_weight_checked: int
    vanishing_level: int
    witness: Optional[Coderivation] = None
    obstruction: Optional[KaledinObstruction] = None

    def __post_init__(self):
        vanished = self.vanishing_level == self.max_weight_checked
        if vanished == (self.obstruction is not None):
            raise InvariantViolation(
                "a Kaledin report must either vanish at the requested level or carry an obstruction"
            )

    @property
    def vanishes(self) -> bool:
        return self.obstruction is None


@dataclass(frozen=True)
class FormalityWitness:
    """
    Gauge steps carrying a structure to its strict part.

    Attributes:
        steps (Tuple[GaugeStep, ...]): Steps in application order.
        final (PInfStructure): Result of applying all steps; strict.
    """

    steps: Tuple[GaugeStep, ...] = field(default_factory=tuple)
    final: Optional[PInfStructure] = None

    def __post_init__(self):
        if self.final is not None and not self.final.is_strict():
            raise InvariantViolation("formality witness ends in a non-strict structure")


def kaledin_cocycle(q: PInfStructure) -> Coderivation:
    """
    Q̃ = Σ_w (w − 1)·q_w.

    Raises:
        InvariantViolation: If [Q, Q̃] does not vanish below the cutoff.
    """
    comps = {w: op.scale(w - 1) for w, op in q.q.components.items() if w >= 2}
    cocycle = q.q.like(components=comps)
    if not bracket(q.q, cocycle).is_zero():
        raise InvariantViolation("Kaledin cocycle is not d_Q-closed")
    return cocycle


def _component_vector(cx: CoderComplex, op: MultilinearOp, weight: int, D: int) -> SparseVector:
    index = cx.index.get((weight, D), {})
    vec: SparseVector = {}
    for key, outs in op.coeffs.items():
        for out, c in outs.items():
            vec[index[(key, out)]] = c
    return vec


def _labels(cx: CoderComplex, weights: List[int], D: int) -> Tuple[CertificateLabel, ...]:
    return tuple((p, key, out) for p in weights for key, out in cx.bases.get((p, D), []))


def _joint_system(cx: CoderComplex, q: PInfStructure, m: int) -> Tuple[RatMatrix, SparseVector]:
    """[Q, T] = Q̃ in weights 2..m, unknowns t_1..t_{m−1}."""
    row_off: Dict[int, int] = {}
    pos = 0
    for p in range(2, m + 1):
        row_off[p] = pos
        pos += cx.dim(p, 1)
    n_rows = pos
    col_off: Dict[int, int] = {}
    pos = 0
    for i in range(1, m):
        col_off[i] = pos
        pos += cx.dim(i, 0)
    n_cols = pos
    entries: Dict[Tuple[int, int], Fraction] = {}
    for i in range(1, m):
        for j, block in cx.blocks(i, 0).items():
            p = i + j
            if p > m:
                continue
            for (r, c), v in block.entries.items():
                entries[(row_off[p] + r, col_off[i] + c)] = v
    rhs: SparseVector = {}
    for p in range(2, m + 1):
        for r, v in _component_vector(cx, q.weight(p).scale(p - 1), p, 1).items():
            rhs[row_off[p] + r] = v
    return RatMatrix(n_rows, n_cols, entries), rhs


def _op_from_vector(cx: CoderComplex, values, weight: int, D: int) -> MultilinearOp:
    coeffs: Dict[Key, Dict[int, Fraction]] = {}
    for local, c in enumerate(values):
        if c:
            key, out = cx.bases[(weight, D)][local]
            coeffs.setdefault(key, {})[out] = c
    return MultilinearOp(cx.space, weight + 1, D, cx.symmetry, coeffs)


def _witness(cx: CoderComplex, solution: Tuple[Fraction, ...], m: int) -> Coderivation:
    comps = {}
    pos = 0
    for i in range(1, m):
        size = cx.dim(i, 0)
        comps[i] = _op_from_vector(cx, solution[pos : pos + size], i, 0)
        pos += size
    return Coderivation(cx.space, cx.symmetry, 0, cx.cutoff, comps)


def truncated_class(q: PInfStructure, n: int) -> KaledinReport:
    """
    Decides K^{≤m} = 0 for m = 2..n by solving the coupled system jointly.

    Args:
        q (PInfStructure): The structure.
        n (int): Truncation, 2 ≤ n ≤ W.

    Returns:
        KaledinReport: Vanishing level, witness T at that level and, if the
        class does not vanish at n, the first obstruction with certificate.

    Raises:
        ContractViolation: If n is outside 2..W.
    """
    if not 2 <= n <= q.cutoff:
        raise ContractViolation(f"truncation must lie in 2..{q.cutoff}, got {n}")
    cx = CoderComplex(q, degrees=(0, 1))
    cx.warm((i, 0) for i in range(1, n))
    cocycle = kaledin_cocycle(q)
    level, witness = 1, None
    for m in range(2, n + 1):
        system, rhs = _joint_system(cx, q, m)
        logger.debug(f"Kaledin system at weight {m}: {system.rows} x {system.cols}.")
        result = solve(system, dense(rhs, system.rows))
        if not result.solvable:
            obstruction = KaledinObstruction(
                weight=m,
                representative=q.weight(m).scale(m - 1),
                certificate=result.certificate,
                labels=_labels(cx, list(range(2, m + 1)), 1),
            )
            logger.info(f"Kaledin class obstructed at weight {m}.")
            return KaledinReport(n, level, witness, obstruction)
        level = m
        witness = _witness(cx, result.solution, m)
        if filtration_part(bracket(q.q, witness), 0, m) != filtration_part(cocycle, 0, m):
            raise InvariantViolation(f"Kaledin witness fails [Q, T] = Q̃ at weight {m}")
    logger.info(f"Kaledin class vanishes up to weight {n}.")
    return KaledinReport(n, level, witness, None)


def formalize(q: PInfStructure) -> Union[FormalityWitness, KaledinReport]:
    """
    Gauges away q_2, q_3, … one weight at a time.

    With q_2..q_{i−1} already zero, the step at weight i solves
    [q_1, t] = (i − 1)·q_i and gauges by τ = t/(i − 1), which removes q_i and
    leaves lower weights untouched.

    Returns:
        Union[FormalityWitness, KaledinReport]: The gauge steps when the
        structure is formal up to W, otherwise the report of the first
        unsolvable step.
    """
    steps: List[GaugeStep] = []
    current = q
    while True:
        pending = current.nonstrict_weights()
        if not pending:
            logger.info(f"Structure is formal up to weight {q.cutoff} after {len(steps)} gauge steps.")
            return FormalityWitness(tuple(steps), current)
        i = pending[0]
        cx = CoderComplex(current, degrees=(0, 1))
        system = cx.block(i - 1, 0, 1)
        target = current.weight(i).scale(i - 1)
        result = solve(system, dense(_component_vector(cx, target, i, 1), system.rows))
        if not result.solvable:
            obstruction = KaledinObstruction(
                weight=i,
                representative=target,
                certificate=result.certificate,
                labels=_labels(cx, [i], 1),
            )
            logger.info(f"Formalization obstructed at weight {i}.")
            return KaledinReport(q.cutoff, i - 1, None, obstruction)
        t = _op_from_vector(cx, result.solution, i - 1, 0)
        tau = Coderivation(cx.space, cx.symmetry, 0, cx.cutoff, {i - 1: t.scale(Fraction(1, i - 1))})
        step = GaugeStep(tau, i)
        current = gauge(current, step)
        if any(w <= i for w in current.nonstrict_weights()):
            raise InvariantViolation(f"gauge step failed to remove the weight-{i} component")
        steps.append(step)
        logger.info(f"Gauge step removed weight {i}.")


def verify_witness(q: PInfStructure, witness: FormalityWitness) -> bool:
    """Re-applies the steps and checks they land on the recorded strict structure."""
    result = apply_steps(q, witness.steps)
    return result == witness.final and result.is_strict()


def certificate_holds(q: PInfStructure, obstruction: KaledinObstruction) -> bool:
    """Checks yᵀA = 0 and yᵀb = 1 on the joint system at the obstruction weight."""
    cx = CoderComplex(q, degrees=(0, 1))
    system, rhs = _joint_system(cx, q, obstruction.weight)
    y = obstruction.certificate
    if len(y) != system.rows:
        return False
    if system.apply_left(y):
        return False
    return sum(y[r] * v for r, v in rhs.items()) == 1
