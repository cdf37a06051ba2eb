"""
Spectral sequence of a filtered cochain complex, and its instance on
coderivations.

The engine (``FilteredComplex``) works on any finite complex whose
coordinates in each total degree carry a filtration weight. With
F^p the span of coordinates of weight ≥ p, it computes

    Z_r^{p,n} = F^p ∩ d^{-1}(F^{p+r})
    E_r^{p,n} = Z_r^{p,n} / (Z_{r-1}^{p+1,n} + d Z_{r-1}^{p-r+1,n-1})

and the page differential d_r: E_r^{p,n} → E_r^{p+r,n+1} induced by d.
Cells are reported with the usual (p, q = n − p) indexing.

``CoderComplex`` enumerates the component bases of Coder truncated at W and
assembles the blocks of d_Q = [Q, −]. The Euler derivation, its class on E_2
and the tests for its survival live on top of that.
"""

from bisect import bisect_left
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from operformal.algcore import GradedSpace, Key, MultilinearOp, SymmetryType, component_basis
from operformal.coder import Coderivation, PInfStructure, op_bracket
from operformal.config import engine_config
from operformal.errors import ContractViolation, InvariantViolation
from operformal.exactla import (
    QuotientMap,
    RatMatrix,
    SparseVector,
    Subspace,
    add_scaled,
    dense,
    kernel,
    quotient,
    solve,
    sparse,
)
from operformal.logger import logger

Cell = Tuple[int, int]


# ───────────────────────── page data ─────────────────────────


@dataclass(frozen=True)
class ClassHandle:
    """
    A class on page r, cell (p, q).

    Attributes:
        page (int): Page index r.
        p (int): Filtration index.
        q (int): Complementary index; total degree is p + q.
        coordinates (Tuple[Fraction, ...]): Coordinates in the cell basis.
        vector (Dict[int, Fraction]): Cocycle representative in C^{p+q}.
        representative (Optional[Coderivation]): Same representative as a
            coderivation, when the complex comes from Coder.
    """

    page: int
    p: int
    q: int
    coordinates: Tuple[Fraction, ...]
    vector: Dict[int, Fraction] = field(default_factory=dict)
    representative: Optional[Coderivation] = None

    @property
    def total_degree(self) -> int:
        return self.p + self.q

    def is_zero(self) -> bool:
        return not any(self.coordinates)


@dataclass(frozen=True)
class PageCell:
    """One nonzero cell E_r^{p,q} with explicit quotient coordinates."""

    p: int
    q: int
    cycles: Subspace
    boundaries: Subspace
    quotient: QuotientMap

    @property
    def dimension(self) -> int:
        return self.quotient.dimension


@dataclass(frozen=True)
class SSPage:
    """
    Page E_r.

    Attributes:
        r (int): Page index.
        cells (Dict[Cell, PageCell]): Nonzero cells keyed by (p, q).
        differentials (Dict[Cell, RatMatrix]): d_r out of cell (p, q) into
            (p + r, q − r + 1), present when both cells are nonzero.
    """

    r: int
    cells: Dict[Cell, PageCell]
    differentials: Dict[Cell, RatMatrix]

    def dimension(self, p: int, q: int) -> int:
        cell = self.cells.get((p, q))
        return cell.dimension if cell else 0

    def dimensions(self) -> Dict[Cell, int]:
        return {k: c.dimension for k, c in sorted(self.cells.items())}

    def target(self, p: int, q: int) -> Cell:
        return (p + self.r, q - self.r + 1)

    def nonzero_differentials(self) -> Dict[Cell, RatMatrix]:
        return {k: m for k, m in sorted(self.differentials.items()) if not m.is_zero()}

    def is_degenerate(self) -> bool:
        return not self.nonzero_differentials()


# ───────────────────────── generic engine ─────────────────────────


class FilteredComplex:
    """
    Finite cochain complex with a decreasing filtration by weight.

    Args:
        weights (Mapping[int, Sequence[int]]): For each total degree n, the
            filtration weight of every coordinate of C^n, non-decreasing.
        differentials (Mapping[int, RatMatrix]): d^n: C^n → C^{n+1} as a
            dim C^{n+1} × dim C^n matrix.
        max_weight (int): Largest weight; F^{max_weight+1} = 0.
        complete (bool): When True, degrees absent from ``weights`` are zero
            spaces. When False they are merely not built, and any computation
            that would need them raises.
    """

    def __init__(
        self,
        weights: Mapping[int, Sequence[int]],
        differentials: Mapping[int, RatMatrix],
        max_weight: int,
        complete: bool = True,
    ):
        self.weights: Dict[int, Tuple[int, ...]] = {n: tuple(w) for n, w in weights.items()}
        for n, ws in self.weights.items():
            if list(ws) != sorted(ws):
                raise ContractViolation(f"coordinate weights in degree {n} must be non-decreasing")
        self.max_weight = max_weight
        self.complete = complete
        self._d: Dict[int, RatMatrix] = {}
        for n, m in differentials.items():
            if m.shape != (self.dim(n + 1), self.dim(n)):
                raise ContractViolation(
                    f"d^{n} has shape {m.shape}, expected {(self.dim(n + 1), self.dim(n))}"
                )
            self._d[n] = m
        self._cycles: Dict[Tuple[int, int, int], Subspace] = {}

    @property
    def degrees(self) -> List[int]:
        return sorted(n for n, ws in self.weights.items() if ws)

    def dim(self, n: int) -> int:
        return len(self.weights.get(n, ()))

    def start(self, n: int, p: int) -> int:
        """Index of the first coordinate of C^n lying in F^p."""
        return bisect_left(self.weights.get(n, ()), p)

    def d(self, n: int) -> RatMatrix:
        if n in self._d:
            return self._d[n]
        if self.complete or (n in self.weights and n + 1 in self.weights and (self.dim(n) == 0 or self.dim(n + 1) == 0)):
            return RatMatrix.zeros(self.dim(n + 1), self.dim(n))
        raise ContractViolation(f"differential out of degree {n} was not built")

    def filtration(self, p: int, n: int) -> Subspace:
        return Subspace.coordinate(range(self.start(n, p), self.dim(n)), self.dim(n))

    def cycles(self, r: int, p: int, n: int) -> Subspace:
        """Z_r^{p,n}: elements of F^p C^n whose differential lies in F^{p+r}."""
        key = (r, p, n)
        cached = self._cycles.get(key)
        if cached is not None:
            return cached
        size = self.dim(n)
        lo = self.start(n, p)
        if lo >= size:
            result = Subspace.zero(size)
        elif r <= 0:
            result = self.filtration(p, n)
        else:
            d = self.d(n)
            hi = self.start(n + 1, p + r)
            rows = {(i, c - lo): v for (i, c), v in d.entries.items() if i < hi and c >= lo}
            if not rows:
                result = self.filtration(p, n)
            else:
                local = kernel(RatMatrix(hi, size - lo, rows))
                result = Subspace.span(
                    ({c + lo: v for c, v in vec.items()} for vec in local.vectors()), size
                )
        self._cycles[key] = result
        return result

    def boundaries(self, r: int, p: int, n: int) -> Subspace:
        """Z_{r-1}^{p+1,n} + d Z_{r-1}^{p-r+1,n-1}."""
        lower = self.cycles(r - 1, p + 1, n)
        if self.dim(n - 1) == 0 and (self.complete or n - 1 in self.weights):
            return lower
        return lower + self.cycles(r - 1, p - r + 1, n - 1).image_under(self.d(n - 1))

    def cell(self, r: int, p: int, n: int) -> PageCell:
        z = self.cycles(r, p, n)
        b = self.boundaries(r, p, n)
        return PageCell(p, n - p, z, b, quotient(z, b))

    def page(self, r: int) -> SSPage:
        """
        Builds E_r with its differential.

        Cells are computed concurrently; their order, and therefore every
        matrix, is independent of scheduling.
        """
        if r < 1:
            raise ContractViolation(f"page index must be at least 1, got {r}")
        slots = [(p, n) for n in self.degrees for p in range(0, self.max_weight + 1)]
        with engine_config.pool() as pool:
            computed = list(pool.map(lambda pn: self.cell(r, pn[0], pn[1]), slots))
        cells = {(c.p, c.q): c for c in computed if c.dimension > 0}
        differentials: Dict[Cell, RatMatrix] = {}
        for (p, q), cell in cells.items():
            target = cells.get((p + r, q - r + 1))
            if target is None:
                continue
            d = self.d(p + q)
            images = [d.apply(col) for col in cell.quotient.section.column_dicts()]
            columns = [target.quotient.project(v) for v in images]
            differentials[(p, q)] = RatMatrix.from_sparse_columns(columns, target.dimension)
        logger.info(f"Page E_{r}: {len(cells)} nonzero cells, "
                    f"{sum(1 for m in differentials.values() if not m.is_zero())} nonzero differentials.")
        return SSPage(r, cells, differentials)

    # ---- individual classes ----

    def class_of(self, vector, r: int, p: int, n: int) -> ClassHandle:
        """
        Wraps a cocycle representative as a class on page r.

        Raises:
            ContractViolation: If ``vector`` is not in Z_r^{p,n}.
        """
        vec = sparse(vector)
        cell = self.cell(r, p, n)
        if not cell.cycles.contains(vec):
            raise ContractViolation(f"vector is not an {r}-almost cocycle at ({p}, {n - p})")
        coords = dense(cell.quotient.project(vec), cell.dimension)
        return ClassHandle(r, p, n - p, coords, vec)

    def differential(self, handle: ClassHandle) -> ClassHandle:
        """d_r of a class, as a class in cell (p + r, q − r + 1)."""
        r, p, n = handle.page, handle.p, handle.total_degree
        image = self.d(n).apply(handle.vector)
        target = self.cell(r, p + r, n + 1)
        coords = dense(target.quotient.project(image), target.dimension)
        return ClassHandle(r, p + r, n + 1 - p - r, coords, image)

    def advance(self, handle: ClassHandle) -> Optional[ClassHandle]:
        """
        Carries a class to page r + 1 when its d_r vanishes.

        Writes dx = z + dy with z ∈ Z_{r-1}^{p+r+1} and y ∈ Z_{r-1}^{p+1},
        then represents the class by x − y. Returns None when d_r ≠ 0.
        """
        r, p, n = handle.page, handle.p, handle.total_degree
        image = self.d(n).apply(handle.vector)
        high = self.cycles(r - 1, p + r + 1, n + 1).vectors()
        lower = self.cycles(r - 1, p + 1, n).vectors()
        d = self.d(n)
        columns = high + [d.apply(y) for y in lower]
        coeffs: Sequence[Fraction] = ()
        if image:
            if not columns:
                return None
            system = RatMatrix.from_sparse_columns(columns, self.dim(n + 1))
            result = solve(system, dense(image, self.dim(n + 1)))
            if not result.solvable:
                return None
            coeffs = result.solution[len(high):]
        vec = dict(handle.vector)
        for coef, y in zip(coeffs, lower):
            if coef:
                add_scaled(vec, -coef, y)
        return self.class_of(vec, r + 1, p, n)


# ───────────────────────── coderivation complex ─────────────────────────


class CoderComplex:
    """
    The filtered complex (Coder truncated at W, d_Q), block by block.

    The component of weight p and codegree D has the elementary operations
    ``(key, output)`` of arity p + 1 and shifted degree D as its basis. The
    block ``(p, D, j)`` is the matrix of [q_j, −] from (p, D) to (p + j, D + 1).

    Args:
        structure (PInfStructure): The homotopy algebra Q.
        degrees (Optional[Iterable[int]]): Restrict to these codegrees; all
            degrees of the window by default.
    """

    def __init__(self, structure: PInfStructure, degrees: Optional[Iterable[int]] = None):
        self.structure = structure
        self.space: GradedSpace = structure.space
        self.symmetry: SymmetryType = structure.symmetry
        self.cutoff: int = structure.cutoff
        self.restricted = degrees is not None
        wanted = set(degrees) if degrees is not None else None
        self.bases: Dict[Tuple[int, int], List[Tuple[Key, int]]] = {}
        for p in range(0, self.cutoff + 1):
            for D, elems in component_basis(self.space, self.symmetry, p + 1).items():
                if wanted is None or D in wanted:
                    self.bases[(p, D)] = elems
        self.index: Dict[Tuple[int, int], Dict[Tuple[Key, int], int]] = {
            k: {e: i for i, e in enumerate(v)} for k, v in self.bases.items()
        }
        self.degrees: List[int] = sorted(wanted) if wanted is not None else sorted({D for _, D in self.bases})
        self._blocks: Dict[Tuple[int, int], Dict[int, RatMatrix]] = {}
        self._filtered: Optional[FilteredComplex] = None
        logger.debug(
            f"Coder complex: {len(self.bases)} nonzero components, "
            f"{sum(len(v) for v in self.bases.values())} basis operations."
        )

    def dim(self, p: int, D: int) -> int:
        return len(self.bases.get((p, D), ()))

    def elementary(self, p: int, D: int, i: int) -> MultilinearOp:
        key, out = self.bases[(p, D)][i]
        return MultilinearOp(self.space, p + 1, D, self.symmetry, {key: {out: Fraction(1)}})

    def _compute_blocks(self, p: int, D: int) -> Dict[int, RatMatrix]:
        q = self.structure.q
        source = self.bases.get((p, D), [])
        columns: Dict[int, List[SparseVector]] = {}
        for j in q.weights:
            if p + j > self.cutoff:
                continue
            columns[j] = []
        for i in range(len(source)):
            x = self.elementary(p, D, i)
            for j in columns:
                image = op_bracket(q.components[j], x)
                target = self.index.get((p + j, D + 1), {})
                col: SparseVector = {}
                for key, vec in image.coeffs.items():
                    for out, c in vec.items():
                        pos = target.get((key, out))
                        if pos is None:
                            raise InvariantViolation(
                                f"[q_{j}, x] leaves the component basis at weight {p + j}"
                            )
                        col[pos] = c
                columns[j].append(col)
        return {
            j: RatMatrix.from_sparse_columns(cols, self.dim(p + j, D + 1))
            for j, cols in columns.items()
        }

    def blocks(self, p: int, D: int) -> Dict[int, RatMatrix]:
        """All nonzero-source blocks d^{(j)}: (p, D) → (p + j, D + 1)."""
        if (p, D) not in self._blocks:
            self._blocks[(p, D)] = self._compute_blocks(p, D)
        return self._blocks[(p, D)]

    def block(self, p: int, D: int, j: int) -> RatMatrix:
        found = self.blocks(p, D).get(j)
        if found is None:
            return RatMatrix.zeros(self.dim(p + j, D + 1), self.dim(p, D))
        return found

    def warm(self, pairs: Iterable[Tuple[int, int]]) -> None:
        """Computes the blocks of the given components concurrently."""
        todo = [pd for pd in pairs if pd not in self._blocks]
        with engine_config.pool() as pool:
            for pd, result in zip(todo, pool.map(lambda pd: self._compute_blocks(*pd), todo)):
                self._blocks[pd] = result

    # ---- total-degree view ----

    def offsets(self, D: int) -> Dict[int, int]:
        out, pos = {}, 0
        for p in range(0, self.cutoff + 1):
            out[p] = pos
            pos += self.dim(p, D)
        return out

    def locate(self, pos: int, D: int) -> Tuple[int, int]:
        """Maps a coordinate of C^D to its (weight, index within the component)."""
        for p in range(0, self.cutoff + 1):
            size = self.dim(p, D)
            if pos < size:
                return p, pos
            pos -= size
        raise ContractViolation(f"coordinate outside C^{D}")

    def total_dim(self, D: int) -> int:
        return sum(self.dim(p, D) for p in range(0, self.cutoff + 1))

    def filtered(self) -> FilteredComplex:
        """Assembles the FilteredComplex over the built codegrees."""
        if self._filtered is not None:
            return self._filtered
        built = set(self.degrees)
        self.warm((p, D) for (p, D) in self.bases if D + 1 in built)
        weights = {D: [p for p in range(self.cutoff + 1) for _ in range(self.dim(p, D))] for D in self.degrees}
        differentials = {}
        for D in self.degrees:
            if D + 1 not in built:
                continue
            src, dst = self.offsets(D), self.offsets(D + 1)
            entries = {}
            for p in range(self.cutoff + 1):
                if not self.dim(p, D):
                    continue
                for j, m in self.blocks(p, D).items():
                    for (r, c), v in m.entries.items():
                        entries[(dst[p + j] + r, src[p] + c)] = v
            differentials[D] = RatMatrix(self.total_dim(D + 1), self.total_dim(D), entries)
        self._filtered = FilteredComplex(
            weights, differentials, self.cutoff, complete=not self.restricted
        )
        return self._filtered

    def vector_of(self, x: Coderivation) -> SparseVector:
        """Coordinates of a coderivation in C^{codegree}."""
        D = x.codegree
        offs = self.offsets(D)
        vec: SparseVector = {}
        for w, op in x.components.items():
            index = self.index.get((w, D), {})
            for key, outs in op.coeffs.items():
                for out, c in outs.items():
                    vec[offs[w] + index[(key, out)]] = c
        return vec

    def coderivation_of(self, vec: Mapping[int, Fraction], D: int) -> Coderivation:
        comps: Dict[int, Dict[Key, Dict[int, Fraction]]] = {}
        for pos, c in vec.items():
            p, local = self.locate(pos, D)
            key, out = self.bases[(p, D)][local]
            comps.setdefault(p, {}).setdefault(key, {})[out] = c
        ops = {
            p: MultilinearOp(self.space, p + 1, D, self.symmetry, coeffs)
            for p, coeffs in comps.items()
        }
        return Coderivation(self.space, self.symmetry, D, self.cutoff, ops)

    def with_representative(self, handle: ClassHandle) -> ClassHandle:
        return replace(handle, representative=self.coderivation_of(handle.vector, handle.total_degree))


# ───────────────────────── Euler class ─────────────────────────


def euler_derivation(
    space: GradedSpace, symmetry: SymmetryType = SymmetryType.PLANAR, cutoff: int = 1
) -> Coderivation:
    """
    The Euler derivation e_A, a weight-0, codegree-0 coderivation.

    On the suspension, a basis element of degree s is multiplied by s + 1,
    which is the classical degree of the element it suspends.
    """
    shifted = space.shifted_degrees
    op = MultilinearOp(
        space,
        1,
        0,
        symmetry,
        {(i,): {i: Fraction(s + 1)} for i, s in enumerate(shifted)},
    )
    return Coderivation(space, symmetry, 0, cutoff, {0: op})


def build_pages(q: PInfStructure, r_max: int) -> List[SSPage]:
    """
    Pages E_1..E_{r_max} of the weight spectral sequence of (Coder, d_Q).

    Raises:
        ContractViolation: If ``r_max`` is outside 1..W.
    """
    if not 1 <= r_max <= q.cutoff:
        raise ContractViolation(f"r_max must lie in 1..{q.cutoff}, got {r_max}")
    complex_ = CoderComplex(q).filtered()
    pages = [complex_.page(r) for r in range(1, r_max + 1)]
    logger.info(f"Built pages E_1..E_{r_max} at cutoff {q.cutoff}.")
    return pages


def _euler_complex(q: PInfStructure) -> CoderComplex:
    return CoderComplex(q, degrees=(-1, 0, 1, 2))


def _euler_class_in(complex_: CoderComplex, q: PInfStructure) -> ClassHandle:
    filtered = complex_.filtered()
    e = euler_derivation(q.space, q.symmetry, q.cutoff)
    first = filtered.class_of(complex_.vector_of(e), 1, 0, 0)
    if not filtered.differential(first).is_zero():
        raise InvariantViolation("d_1 of the Euler class is nonzero")
    second = filtered.advance(first)
    if second is None:
        raise InvariantViolation("Euler class failed to lift to E_2")
    return complex_.with_representative(second)


def euler_class(q: PInfStructure) -> ClassHandle:
    """
    The class of e_A on E_2^{0,0}.

    Raises:
        InvariantViolation: If d_1(e_A) ≠ 0, which no valid structure allows.
    """
    return _euler_class_in(_euler_complex(q), q)


@dataclass(frozen=True)
class EulerPush:
    """
    Survival of the Euler class.

    Attributes:
        survives_to (int): Largest r ≤ W with d_2 … d_r of e_A all zero
            (1 when d_2 already fails).
        first_nonzero (Optional[ClassHandle]): The first nonzero d_r(e_A),
            living on page r.
    """

    survives_to: int
    first_nonzero: Optional[ClassHandle] = None

    @property
    def failing_page(self) -> Optional[int]:
        return self.first_nonzero.page if self.first_nonzero else None


def push_euler(q: PInfStructure) -> EulerPush:
    """Tests d_r(e_A) = 0 for r = 2..W, lifting the class page by page."""
    complex_ = _euler_complex(q)
    filtered = complex_.filtered()
    handle = _euler_class_in(complex_, q)
    for r in range(2, q.cutoff + 1):
        image = filtered.differential(handle)
        if not image.is_zero():
            logger.info(f"Euler class hits a nonzero d_{r}.")
            return EulerPush(r - 1, complex_.with_representative(image))
        if r == q.cutoff:
            break
        lifted = filtered.advance(handle)
        if lifted is None:
            raise InvariantViolation(f"Euler class with d_{r} = 0 failed to lift")
        handle = lifted
    logger.info(f"Euler class survives to page {q.cutoff}.")
    return EulerPush(q.cutoff, None)


def degenerates_at_E2(q: PInfStructure) -> bool:
    """True iff every d_r, 2 ≤ r ≤ W, vanishes on every cell."""
    if q.cutoff < 2:
        return True
    complex_ = CoderComplex(q).filtered()
    for r in range(2, q.cutoff + 1):
        if not complex_.page(r).is_degenerate():
            logger.info(f"Spectral sequence has a nonzero d_{r}.")
            return False
    return True
