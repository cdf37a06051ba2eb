"""
Exact rational linear algebra.

Every computation in operformal bottoms out here: row reduction, linear
solves with unsolvability certificates, kernels, images and quotients of
subspaces. Scalars are ``fractions.Fraction``; row reduction is delegated to
sympy's sparse domain matrices over ``QQ`` (dense below a size threshold).

Vectors travel as sparse dicts ``{index: Fraction}`` with no stored zeros.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from sympy import QQ
from sympy.polys.matrices.ddm import DDM
from sympy.polys.matrices.sdm import SDM

from operformal.config import engine_config
from operformal.errors import ContractViolation

Rational = Fraction
SparseVector = Dict[int, Fraction]
VectorLike = Union[Mapping[int, Fraction], Sequence]


def to_rational(value) -> Fraction:
    """Parses ints, Fractions and strings like ``"-3/2"`` into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ContractViolation(f"boolean {value!r} is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ContractViolation(f"{value!r} is not a rational string") from exc
    raise ContractViolation(f"cannot interpret {value!r} as an exact rational")


def format_rational(value: Fraction) -> str:
    """Serializes a Fraction as ``"p/q"`` (or ``"p"`` for integers)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# ───────────────────── sparse vector helpers ─────────────────────


def sparse(values: VectorLike) -> SparseVector:
    """Normalizes a dense sequence or a mapping into a sparse vector."""
    if isinstance(values, Mapping):
        items = values.items()
    else:
        items = enumerate(values)
    return {int(k): to_rational(v) for k, v in items if v != 0}


def dense(vec: Mapping[int, Fraction], length: int) -> Tuple[Fraction, ...]:
    out = [Fraction(0)] * length
    for k, v in vec.items():
        out[k] = v
    return tuple(out)


def add_scaled(target: SparseVector, coef: Fraction, other: Mapping[int, Fraction]) -> SparseVector:
    """In place ``target += coef * other``; zeros are dropped."""
    if coef == 0:
        return target
    for k, x in other.items():
        value = target.get(k, 0) + coef * x
        if value == 0:
            target.pop(k, None)
        else:
            target[k] = value
    return target


def _to_qq(value: Fraction):
    return QQ(value.numerator, value.denominator)


def _from_qq(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


# ───────────────────────── matrices ─────────────────────────


@dataclass(frozen=True)
class RatMatrix:
    """
    Sparse exact matrix.

    Attributes:
        rows (int): Number of rows.
        cols (int): Number of columns.
        entries (Dict[Tuple[int, int], Fraction]): Nonzero entries only.
    """

    rows: int
    cols: int
    entries: Dict[Tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ContractViolation(f"negative shape {self.rows}x{self.cols}")
        cleaned = {}
        for (r, c), v in self.entries.items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ContractViolation(
                    f"entry ({r}, {c}) outside a {self.rows}x{self.cols} matrix"
                )
            v = to_rational(v)
            if v != 0:
                cleaned[(r, c)] = v
        object.__setattr__(self, "entries", cleaned)

    # ---- constructors ----

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols, {})

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, {(i, i): Fraction(1) for i in range(n)})

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: Optional[int] = None) -> "RatMatrix":
        """Builds a matrix from dense row lists, e.g. ``[[2, 4], [1, 2]]``."""
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        entries = {}
        for r, row in enumerate(rows):
            if len(row) != ncols:
                raise ContractViolation("ragged rows")
            for c, v in enumerate(row):
                if v != 0:
                    entries[(r, c)] = to_rational(v)
        return cls(len(rows), ncols, entries)

    @classmethod
    def from_sparse_rows(cls, rows: Sequence[Mapping[int, Fraction]], cols: int) -> "RatMatrix":
        entries = {(r, c): v for r, row in enumerate(rows) for c, v in row.items()}
        return cls(len(rows), cols, entries)

    @classmethod
    def from_sparse_columns(cls, columns: Sequence[Mapping[int, Fraction]], rows: int) -> "RatMatrix":
        entries = {(r, c): v for c, col in enumerate(columns) for r, v in col.items()}
        return cls(rows, len(columns), entries)

    # ---- access ----

    def get(self, r: int, c: int) -> Fraction:
        return self.entries.get((r, c), Fraction(0))

    def row_dicts(self) -> List[SparseVector]:
        out: List[SparseVector] = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def column_dicts(self) -> List[SparseVector]:
        out: List[SparseVector] = [dict() for _ in range(self.cols)]
        for (r, c), v in self.entries.items():
            out[c][r] = v
        return out

    def to_lists(self) -> List[List[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def is_zero(self) -> bool:
        return not self.entries

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    # ---- arithmetic ----

    def transpose(self) -> "RatMatrix":
        return RatMatrix(self.cols, self.rows, {(c, r): v for (r, c), v in self.entries.items()})

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise ContractViolation(f"cannot add {self.shape} and {other.shape}")
        entries = dict(self.entries)
        for k, v in other.entries.items():
            entries[k] = entries.get(k, 0) + v
        return RatMatrix(self.rows, self.cols, entries)

    def __neg__(self) -> "RatMatrix":
        return self.scale(Fraction(-1))

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        return self + (-other)

    def scale(self, coef) -> "RatMatrix":
        coef = to_rational(coef)
        return RatMatrix(self.rows, self.cols, {k: coef * v for k, v in self.entries.items()})

    def matmul(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ContractViolation(f"cannot multiply {self.shape} by {other.shape}")
        right_rows = other.row_dicts()
        entries: Dict[Tuple[int, int], Fraction] = {}
        for (r, k), v in self.entries.items():
            for c, w in right_rows[k].items():
                entries[(r, c)] = entries.get((r, c), 0) + v * w
        return RatMatrix(self.rows, other.cols, entries)

    __matmul__ = matmul

    def apply(self, vec: VectorLike) -> SparseVector:
        """Returns ``self · vec`` for a column vector given sparse or dense."""
        vec = sparse(vec)
        out: SparseVector = {}
        if not vec:
            return out
        for (r, c), v in self.entries.items():
            x = vec.get(c)
            if x is not None:
                add_scaled(out, v, {r: x})
        return out

    def apply_left(self, vec: VectorLike) -> SparseVector:
        """Returns the row vector ``vecᵀ · self``."""
        vec = sparse(vec)
        out: SparseVector = {}
        for (r, c), v in self.entries.items():
            y = vec.get(r)
            if y is not None:
                add_scaled(out, v, {c: y})
        return out

    # ---- sympy bridge ----

    def _to_sdm(self) -> SDM:
        dod: Dict[int, Dict[int, object]] = {}
        for (r, c), v in self.entries.items():
            dod.setdefault(r, {})[c] = _to_qq(v)
        return SDM(dod, (self.rows, self.cols), QQ)

    @classmethod
    def _from_sdm(cls, sdm: SDM) -> "RatMatrix":
        rows, cols = sdm.shape
        entries = {
            (r, c): _from_qq(v) for r, row in sdm.items() for c, v in row.items() if v
        }
        return cls(rows, cols, entries)


def hstack(*blocks: RatMatrix) -> RatMatrix:
    if not blocks:
        raise ContractViolation("hstack needs at least one block")
    rows = blocks[0].rows
    entries = {}
    offset = 0
    for block in blocks:
        if block.rows != rows:
            raise ContractViolation("hstack blocks must share the row count")
        for (r, c), v in block.entries.items():
            entries[(r, c + offset)] = v
        offset += block.cols
    return RatMatrix(rows, offset, entries)


def vstack(*blocks: RatMatrix) -> RatMatrix:
    if not blocks:
        raise ContractViolation("vstack needs at least one block")
    return hstack(*(b.transpose() for b in blocks)).transpose()


# ───────────────────────── reductions ─────────────────────────


def rref(m: RatMatrix) -> Tuple[RatMatrix, List[int]]:
    """
    Reduced row-echelon form.

    Args:
        m (RatMatrix): Matrix to reduce.

    Returns:
        Tuple[RatMatrix, List[int]]: The reduced matrix (same shape, zero rows
        last) and the pivot column of each nonzero row, increasing.
    """
    if m.is_zero():
        return RatMatrix.zeros(m.rows, m.cols), []
    sdm = m._to_sdm()
    if m.rows * m.cols < engine_config.dense_threshold:
        reduced, pivots = sdm.to_ddm().rref()
        reduced = SDM.from_ddm(reduced)
    else:
        reduced, pivots = sdm.rref()
    result = RatMatrix._from_sdm(reduced)
    # sympy keeps zero rows implicit; pack nonzero rows on top in pivot order
    rows = result.row_dicts()
    packed = sorted((row for row in rows if row), key=min)
    return RatMatrix.from_sparse_rows(packed + [{}] * (m.rows - len(packed)), m.cols), list(pivots)


@dataclass(frozen=True)
class Subspace:
    """
    Linear subspace of ℚ^ambient_dim held as an echelon basis.

    Attributes:
        ambient_dim (int): Dimension of the surrounding space.
        basis (RatMatrix): Reduced row-echelon basis, one row per vector.
        pivots (Tuple[int, ...]): Pivot column of each basis row.
    """

    ambient_dim: int
    basis: RatMatrix
    pivots: Tuple[int, ...] = ()

    @classmethod
    def span(cls, vectors: Iterable[VectorLike], ambient_dim: int) -> "Subspace":
        rows = [sparse(v) for v in vectors]
        rows = [r for r in rows if r]
        if any(k >= ambient_dim or k < 0 for r in rows for k in r):
            raise ContractViolation(f"vector index outside ambient dimension {ambient_dim}")
        if not rows:
            return cls.zero(ambient_dim)
        reduced, pivots = rref(RatMatrix.from_sparse_rows(rows, ambient_dim))
        kept = reduced.row_dicts()[: len(pivots)]
        return cls(ambient_dim, RatMatrix.from_sparse_rows(kept, ambient_dim), tuple(pivots))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, RatMatrix.zeros(0, ambient_dim), ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls.coordinate(range(ambient_dim), ambient_dim)

    @classmethod
    def coordinate(cls, indices: Iterable[int], ambient_dim: int) -> "Subspace":
        """Span of the given standard basis vectors."""
        idx = sorted(set(indices))
        rows = [{i: Fraction(1)} for i in idx]
        return cls(ambient_dim, RatMatrix.from_sparse_rows(rows, ambient_dim), tuple(idx))

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def vectors(self) -> List[SparseVector]:
        return self.basis.row_dicts()

    def reduce(self, vec: VectorLike) -> SparseVector:
        """Remainder of ``vec`` after eliminating every pivot coordinate."""
        rest = sparse(vec)
        for pivot, row in zip(self.pivots, self.vectors()):
            coef = rest.get(pivot)
            if coef:
                add_scaled(rest, -coef, row)
        return rest

    def contains(self, vec: VectorLike) -> bool:
        return not self.reduce(vec)

    def includes(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.vectors())

    def __add__(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise ContractViolation("subspaces live in different ambient spaces")
        if other.dim == 0:
            return self
        if self.dim == 0:
            return other
        return Subspace.span(self.vectors() + other.vectors(), self.ambient_dim)

    def image_under(self, m: RatMatrix) -> "Subspace":
        if m.cols != self.ambient_dim:
            raise ContractViolation("matrix does not act on this subspace")
        return Subspace.span((m.apply(v) for v in self.vectors()), m.rows)

    def coordinates(self, vec: VectorLike) -> SparseVector:
        """Coefficients of ``vec`` in the echelon basis; ``vec`` must lie in the span."""
        vec = sparse(vec)
        coords = {i: vec[p] for i, p in enumerate(self.pivots) if vec.get(p)}
        if self.reduce(vec):
            raise ContractViolation("vector is not in the subspace")
        return coords


def kernel(m: RatMatrix) -> Subspace:
    """Null space of ``m`` inside ℚ^cols."""
    reduced, pivots = rref(m)
    pivot_set = set(pivots)
    rows = reduced.row_dicts()
    vectors = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        vec = {free: Fraction(1)}
        for row, pivot in zip(rows, pivots):
            coef = row.get(free)
            if coef:
                vec[pivot] = -coef
        vectors.append(vec)
    return Subspace.span(vectors, m.cols)


def image(m: RatMatrix) -> Subspace:
    """Column space of ``m`` inside ℚ^rows."""
    return Subspace.span(m.column_dicts(), m.rows)


def rank(m: RatMatrix) -> int:
    return len(rref(m)[1])


@dataclass(frozen=True)
class SolveResult:
    """
    Outcome of ``solve``.

    Attributes:
        solution (Optional[Tuple[Fraction, ...]]): A particular solution, or
            None when the system is inconsistent.
        kernel (Subspace): Null space of the coefficient matrix.
        certificate (Optional[Tuple[Fraction, ...]]): Row vector y with
            yᵀa = 0 and yᵀb = 1, present exactly when unsolvable.
    """

    solution: Optional[Tuple[Fraction, ...]]
    kernel: Subspace
    certificate: Optional[Tuple[Fraction, ...]] = None

    @property
    def solvable(self) -> bool:
        return self.solution is not None


def solve(a: RatMatrix, b: VectorLike) -> SolveResult:
    """
    Solves ``a · x = b`` exactly.

    The augmented matrix ``[a | b | I]`` is row reduced once. A pivot in the
    ``b`` column exposes an inconsistent row whose identity part is the
    certificate; otherwise the particular solution is read off the pivots.

    Args:
        a (RatMatrix): Coefficient matrix.
        b (VectorLike): Right-hand side of length ``a.rows``.

    Returns:
        SolveResult: Solution or certificate, plus the kernel of ``a``.

    Raises:
        ContractViolation: If ``b`` does not match ``a.rows``.
    """
    if not isinstance(b, Mapping) and len(b) != a.rows:
        raise ContractViolation(f"right-hand side has length {len(b)}, expected {a.rows}")
    rhs = sparse(b)
    if any(k >= a.rows for k in rhs):
        raise ContractViolation("right-hand side index outside the row range")
    aug = hstack(
        a,
        RatMatrix.from_sparse_columns([rhs], a.rows),
        RatMatrix.identity(a.rows),
    )
    reduced, pivots = rref(aug)
    rows = reduced.row_dicts()
    c = a.cols
    null = kernel(a)
    for row, pivot in zip(rows, pivots):
        if pivot == c:
            cert = {k - c - 1: v for k, v in row.items() if k > c}
            return SolveResult(None, null, dense(cert, a.rows))
    x: SparseVector = {}
    for row, pivot in zip(rows, pivots):
        if pivot >= c:
            break
        if row.get(c):
            x[pivot] = row[c]
    return SolveResult(dense(x, a.cols), null, None)


@dataclass(frozen=True)
class QuotientMap:
    """
    The quotient V/U with explicit coordinates.

    Attributes:
        dimension (int): dim V − dim U.
        projection (RatMatrix): dimension × ambient matrix; on V it kills U
            exactly and maps the section onto the identity.
        section (RatMatrix): ambient × dimension matrix whose columns are
            representatives of the quotient basis.
    """

    dimension: int
    projection: RatMatrix
    section: RatMatrix

    def project(self, vec: VectorLike) -> SparseVector:
        return self.projection.apply(vec)

    def lift(self, coords: VectorLike) -> SparseVector:
        return self.section.apply(coords)


def quotient(v: Subspace, u: Subspace) -> QuotientMap:
    """
    Builds coordinates for V/U.

    The complement of U in V is the echelon form of V's basis reduced modulo
    U. Its rows are the section; the projection reads a vector's coordinates
    on the complement pivots after eliminating U's pivots.

    Raises:
        ContractViolation: If U is not contained in V.
    """
    if v.ambient_dim != u.ambient_dim:
        raise ContractViolation("quotient of subspaces in different ambient spaces")
    if not v.includes(u):
        raise ContractViolation("quotient requires u ⊆ v")
    n = v.ambient_dim
    complement = Subspace.span((u.reduce(vec) for vec in v.vectors()), n)
    k = complement.dim
    # projection row i: e_{kp_i} - sum_j U_j[kp_i] e_{p_j}
    u_rows = u.vectors()
    entries: Dict[Tuple[int, int], Fraction] = {}
    for i, kp in enumerate(complement.pivots):
        entries[(i, kp)] = Fraction(1)
        for pj, urow in zip(u.pivots, u_rows):
            coef = urow.get(kp)
            if coef:
                entries[(i, pj)] = entries.get((i, pj), 0) - coef
    projection = RatMatrix(k, n, entries)
    section = RatMatrix.from_sparse_columns(complement.vectors(), n)
    return QuotientMap(k, projection, section)
