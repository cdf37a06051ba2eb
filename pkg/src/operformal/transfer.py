"""
Homotopy transfer from a strict dg associative algebra to its cohomology.

Given (A, d, ·) with d² = 0, Leibniz and associativity, a splitting of every
A^k as B ⊕ H ⊕ C (boundaries, cohomology representatives, complement of
cycles) yields a contraction (i, p, h) with dh + hd = 1 − ip and the side
conditions hi = 0, ph = 0, hh = 0. The transferred A∞ structure on sH is
given by the planar tree sum

    λ_1 = i,   λ_n = −h̄ Σ_{k+l=n} b_2(λ_k, λ_l),   q_n = p Σ_{k+l=n} b_2(λ_k, λ_l)

with b_2(sa, sb) = (−1)^{|a|−1} s(ab) and h̄ = s h s⁻¹.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Tuple

from operformal.algcore import GradedSpace, Key, MultilinearOp, SymmetryType
from operformal.coder import Coderivation, PInfStructure, mc_check
from operformal.errors import ContractViolation, InputError, InvariantViolation
from operformal.exactla import (
    RatMatrix,
    SparseVector,
    Subspace,
    add_scaled,
    image,
    kernel,
    quotient,
    solve,
)
from operformal.ingest import DgAlgebraSpec, build_space
from operformal.logger import logger


@dataclass(frozen=True)
class DgAlgebra:
    """
    Strict dg associative algebra on a finite basis.

    Attributes:
        space (GradedSpace): Basis with classical degrees.
        differential (Dict[int, SparseVector]): d(e_i) for each basis index.
        product (Dict[Tuple[int, int], SparseVector]): Nonzero e_i·e_j.
        max_weight (int): Cutoff for the transferred structure.
    """

    space: GradedSpace
    differential: Dict[int, SparseVector] = field(default_factory=dict)
    product: Dict[Tuple[int, int], SparseVector] = field(default_factory=dict)
    max_weight: int = 1

    def d(self, vec: SparseVector) -> SparseVector:
        out: SparseVector = {}
        for i, c in vec.items():
            add_scaled(out, c, self.differential.get(i, {}))
        return out

    def mul(self, u: SparseVector, v: SparseVector) -> SparseVector:
        out: SparseVector = {}
        for i, a in u.items():
            for j, b in v.items():
                value = self.product.get((i, j))
                if value:
                    add_scaled(out, a * b, value)
        return out

    def validate(self) -> None:
        """
        Checks d² = 0, the Leibniz rule and associativity on basis elements.

        Raises:
            InputError: Naming the first failing identity.
        """
        space = self.space
        names = space.names
        n = space.dim
        for i in range(n):
            unit = {i: Fraction(1)}
            if self.d(self.d(unit)):
                raise InputError(f"d(d({names[i]})) is nonzero", location="differential")
        for i, j in product(range(n), repeat=2):
            a, b = {i: Fraction(1)}, {j: Fraction(1)}
            lhs = self.d(self.mul(a, b))
            rhs = self.mul(self.d(a), b)
            sign = -1 if space.degree(i) % 2 else 1
            add_scaled(rhs, Fraction(sign), self.mul(a, self.d(b)))
            if lhs != rhs:
                raise InputError(
                    f"Leibniz rule fails on ({names[i]}, {names[j]})", location="product"
                )
        for i, j, k in product(range(n), repeat=3):
            a, b, c = {i: Fraction(1)}, {j: Fraction(1)}, {k: Fraction(1)}
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                raise InputError(
                    f"associativity fails on ({names[i]}, {names[j]}, {names[k]})",
                    location="product",
                )

    @classmethod
    def from_spec(cls, spec: DgAlgebraSpec) -> "DgAlgebra":
        """
        Builds and validates a dga from its document.

        Raises:
            InputError: On unknown names, inhomogeneous maps, or failed identities.
        """
        space = build_space(spec.basis)

        def vector(values: Dict[str, str], where: str) -> SparseVector:
            try:
                return {space.index(k): Fraction(v) for k, v in values.items() if Fraction(v)}
            except ContractViolation as exc:
                raise InputError(str(exc), location=where) from exc

        differential: Dict[int, SparseVector] = {}
        for name, values in spec.differential.items():
            where = f"differential.{name}"
            try:
                i = space.index(name)
            except ContractViolation as exc:
                raise InputError(str(exc), location=where) from exc
            vec = vector(values, where)
            for o in vec:
                if space.degree(o) != space.degree(i) + 1:
                    raise InputError(
                        f"d({name}) has a component {space.names[o]!r} outside degree {space.degree(i) + 1}",
                        location=where,
                    )
            if vec:
                differential[i] = vec

        products: Dict[Tuple[int, int], SparseVector] = {}
        for r, record in enumerate(spec.product):
            where = f"product[{r}]"
            try:
                i, j = (space.index(x) for x in record.inputs)
            except ContractViolation as exc:
                raise InputError(str(exc), location=f"{where}.inputs") from exc
            vec = vector(record.output, f"{where}.output")
            for o in vec:
                if space.degree(o) != space.degree(i) + space.degree(j):
                    raise InputError(
                        f"{space.names[o]!r} does not have degree {space.degree(i) + space.degree(j)}",
                        location=f"{where}.output",
                    )
            if (i, j) in products and products[(i, j)] != vec:
                raise InputError("conflicting product values for the same inputs", location=where)
            if vec:
                products[(i, j)] = vec

        dga = cls(space, differential, products, spec.max_weight)
        dga.validate()
        return dga


@dataclass(frozen=True)
class Contraction:
    """
    Homotopy retract data (i, p, h) onto the cohomology.

    Attributes:
        cohomology (GradedSpace): H with names ``[x]``, x the pivot element
            of the chosen representative.
        include (RatMatrix): dim A × dim H, columns are representatives.
        project (RatMatrix): dim H × dim A.
        homotopy (RatMatrix): dim A × dim A, degree −1.
    """

    cohomology: GradedSpace
    include: RatMatrix
    project: RatMatrix
    homotopy: RatMatrix

    def dims_by_degree(self) -> Dict[int, int]:
        dims: Dict[int, int] = {}
        for d in self.cohomology.degrees:
            dims[d] = dims.get(d, 0) + 1
        return dict(sorted(dims.items()))


def _local_differential(dga: DgAlgebra, src: List[int], tgt: List[int]) -> RatMatrix:
    position = {g: r for r, g in enumerate(tgt)}
    entries = {}
    for c, g in enumerate(src):
        for o, v in dga.differential.get(g, {}).items():
            entries[(position[o], c)] = v
    return RatMatrix(len(tgt), len(src), entries)


def contract(dga: DgAlgebra) -> Contraction:
    """
    Splits every degree of A and assembles (i, p, h).

    B is the echelon span of the image of d, H the quotient section of
    cycles modulo B, and C the coordinate span of the non-pivot columns of
    the cycle basis. h sends a boundary to its unique preimage in C.

    Raises:
        InputError: If the cohomology is zero.
    """
    space = dga.space
    n = space.dim
    by_degree: Dict[int, List[int]] = {}
    for g, d in enumerate(space.degrees):
        by_degree.setdefault(d, []).append(g)

    def local(k: int) -> List[int]:
        return by_degree.get(k, [])

    cycles: Dict[int, Subspace] = {}
    for k in by_degree:
        cycles[k] = kernel(_local_differential(dga, local(k), local(k + 1)))

    h_names: List[str] = []
    h_degrees: List[int] = []
    include_cols: List[SparseVector] = []
    project_entries: Dict[Tuple[int, int], Fraction] = {}
    homotopy_entries: Dict[Tuple[int, int], Fraction] = {}

    for k in sorted(by_degree):
        src = local(k)
        below = local(k - 1)
        z = cycles[k]
        b = image(_local_differential(dga, below, src)) if below else Subspace.zero(len(src))
        qmap = quotient(z, b)
        offset = len(h_names)
        for col, vec in enumerate(qmap.section.column_dicts()):
            pivot = min(vec)
            h_names.append(f"[{space.names[src[pivot]]}]")
            h_degrees.append(k)
            include_cols.append({src[r]: c for r, c in vec.items()})

        preimages: List[SparseVector] = []
        if b.dim:
            z_below = cycles[k - 1]
            free = [c for c in range(len(below)) if c not in set(z_below.pivots)]
            d_below = _local_differential(dga, below, src)
            restricted = RatMatrix(
                len(src),
                len(free),
                {(r, free.index(c)): v for (r, c), v in d_below.entries.items() if c in free},
            )
            for bvec in b.vectors():
                result = solve(restricted, {r: v for r, v in bvec.items()} if bvec else {})
                if not result.solvable:
                    raise InvariantViolation(f"boundary in degree {k} has no preimage in the complement")
                preimages.append({free[c]: v for c, v in enumerate(result.solution) if v})

        for j in range(len(src)):
            unit = {j: Fraction(1)}
            c_part = z.reduce(unit)
            z_part = dict(unit)
            add_scaled(z_part, Fraction(-1), c_part)
            eta = qmap.project(z_part)
            for i, v in eta.items():
                project_entries[(offset + i, src[j])] = v
            b_part = dict(z_part)
            add_scaled(b_part, Fraction(-1), qmap.lift(eta))
            if not b_part:
                continue
            hv: SparseVector = {}
            for i, beta in b.coordinates(b_part).items():
                add_scaled(hv, beta, preimages[i])
            for r, v in hv.items():
                homotopy_entries[(below[r], src[j])] = v

    if not h_names:
        raise InputError("the cohomology is zero; there is nothing to transfer", location="basis")
    cohomology = GradedSpace(tuple(h_names), tuple(h_degrees))
    logger.info(f"Cohomology has dimension {cohomology.dim}: {list(h_names)}.")
    return Contraction(
        cohomology,
        RatMatrix.from_sparse_columns(include_cols, n),
        RatMatrix(len(h_names), n, project_entries),
        RatMatrix(n, n, homotopy_entries),
    )


def check_contraction(dga: DgAlgebra, c: Contraction) -> bool:
    """Verifies dh + hd = 1 − ip and the side conditions on every basis vector."""
    n = dga.space.dim
    for j in range(n):
        unit = {j: Fraction(1)}
        lhs = dga.d(c.homotopy.apply(unit))
        add_scaled(lhs, Fraction(1), c.homotopy.apply(dga.d(unit)))
        rhs = dict(unit)
        add_scaled(rhs, Fraction(-1), c.include.apply(c.project.apply(unit)))
        if lhs != rhs:
            return False
        if c.homotopy.apply(c.homotopy.apply(unit)) or c.project.apply(c.homotopy.apply(unit)):
            return False
    for x in range(c.cohomology.dim):
        if c.homotopy.apply(c.include.apply({x: Fraction(1)})):
            return False
    return True


def transfer(dga: DgAlgebra, max_weight: int = None) -> PInfStructure:
    """
    Transfers the dga structure to an A∞ structure on its cohomology.

    Args:
        dga (DgAlgebra): Validated algebra.
        max_weight (int): Cutoff W; defaults to the algebra's own.

    Returns:
        PInfStructure: Planar structure on sH with components of weight 1..W.

    Raises:
        InputError: If the cohomology is zero.
        InvariantViolation: If the result fails the Maurer–Cartan check.
    """
    W = dga.max_weight if max_weight is None else max_weight
    if W < 1:
        raise ContractViolation(f"max_weight must be at least 1, got {W}")
    c = contract(dga)
    H = c.cohomology
    shifted_a = dga.space.shifted_degrees

    def b2(u: SparseVector, v: SparseVector) -> SparseVector:
        out: SparseVector = {}
        for i, a in u.items():
            sign = -1 if shifted_a[i] % 2 else 1
            for j, b in v.items():
                value = dga.product.get((i, j))
                if value:
                    add_scaled(out, sign * a * b, value)
        return out

    include_cols = c.include.column_dicts()
    lam: Dict[Key, SparseVector] = {}
    mu: Dict[Key, SparseVector] = {}

    def tree_sum(key: Key) -> SparseVector:
        if key not in mu:
            out: SparseVector = {}
            for k in range(1, len(key)):
                add_scaled(out, Fraction(1), b2(leaf(key[:k]), leaf(key[k:])))
            mu[key] = out
        return mu[key]

    def leaf(key: Key) -> SparseVector:
        if key not in lam:
            if len(key) == 1:
                lam[key] = include_cols[key[0]]
            else:
                lam[key] = {r: -v for r, v in c.homotopy.apply(tree_sum(key)).items()}
        return lam[key]

    shifted_h = H.shifted_degrees
    targets = set(shifted_h)
    comps: Dict[int, MultilinearOp] = {}
    for w in range(1, W + 1):
        coeffs: Dict[Key, SparseVector] = {}
        for key in product(range(H.dim), repeat=w + 1):
            if sum(shifted_h[i] for i in key) + 1 not in targets:
                continue
            value = c.project.apply(tree_sum(key))
            if value:
                coeffs[key] = value
        comps[w] = MultilinearOp(H, w + 1, 1, SymmetryType.PLANAR, coeffs)
        logger.debug(f"Transferred weight {w}: {len(coeffs)} nonzero input tuples.")

    q = Coderivation(H, SymmetryType.PLANAR, 1, W, comps)
    verdict = mc_check(q)
    if not verdict.ok:
        raise InvariantViolation(
            f"transferred structure fails the Maurer-Cartan equation at weight {verdict.failing_weight}"
        )
    return PInfStructure(q)
