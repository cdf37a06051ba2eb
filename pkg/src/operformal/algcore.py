"""
Graded spaces, Koszul signs and multilinear operations.

Everything here lives on the suspension sA of the user's graded space A: a
basis element of classical degree d has shifted degree d − 1. Operations come
in two flavours:

    PLANAR     arbitrary ordered input tuples (associative side)
    SYMMETRIC  graded-symmetric maps stored on sorted input tuples only
               (Lie side, symmetric once shifted)

A ``MultilinearOp`` of arity n and degree k maps n-fold tensors of sA to sA,
raising the total shifted degree by k. Two composition products are provided:
planar slot insertion and the symmetric unshuffle convolution. Both are the
pre-Lie products underlying the coderivation bracket.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from operformal.errors import ContractViolation
from operformal.exactla import SparseVector, add_scaled, dense, to_rational

Key = Tuple[int, ...]
Entry = Tuple[Key, int, Fraction]


class ShiftConvention:
    """Suspension policy: shifted degree is classical degree minus one."""

    OFFSET = 1

    @staticmethod
    def shift(degree: int) -> int:
        return degree - ShiftConvention.OFFSET

    @staticmethod
    def unshift(shifted: int) -> int:
        return shifted + ShiftConvention.OFFSET

    @staticmethod
    def classical_op_degree(weight: int, codegree: int = 1) -> int:
        """Classical degree of an arity-(w+1) map whose shifted degree is ``codegree``."""
        return codegree - weight


class SymmetryType(str, Enum):
    PLANAR = "planar"
    SYMMETRIC = "symmetric"

    @classmethod
    def for_operad(cls, operad: str) -> "SymmetryType":
        tag = operad.lower()
        if tag == "ass":
            return cls.PLANAR
        if tag == "lie":
            return cls.SYMMETRIC
        raise ContractViolation(f"unknown operad tag {operad!r}")

    @property
    def operad(self) -> str:
        return "ass" if self is SymmetryType.PLANAR else "lie"


@dataclass(frozen=True)
class GradedSpace:
    """
    Finite ordered basis with integer (classical) degrees.

    Attributes:
        names (Tuple[str, ...]): Basis element names, unique.
        degrees (Tuple[int, ...]): Classical cohomological degrees.
    """

    names: Tuple[str, ...]
    degrees: Tuple[int, ...]
    _index: Dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)
    _shifted: Tuple[int, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if len(self.names) != len(self.degrees):
            raise ContractViolation("names and degrees differ in length")
        if not self.names:
            raise ContractViolation("a graded space needs at least one basis element")
        if len(set(self.names)) != len(self.names):
            raise ContractViolation("basis names must be unique")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})
        object.__setattr__(self, "_shifted", tuple(ShiftConvention.shift(d) for d in self.degrees))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[str, int]]) -> "GradedSpace":
        pairs = list(pairs)
        return cls(tuple(n for n, _ in pairs), tuple(d for _, d in pairs))

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: Union[str, int]) -> int:
        if isinstance(name, int):
            if not 0 <= name < self.dim:
                raise ContractViolation(f"basis index {name} out of range")
            return name
        try:
            return self._index[name]
        except KeyError as exc:
            raise ContractViolation(f"unknown basis element {name!r}") from exc

    def degree(self, i: int) -> int:
        return self.degrees[i]

    def shifted_degree(self, i: int) -> int:
        return ShiftConvention.shift(self.degrees[i])

    @property
    def shifted_degrees(self) -> Tuple[int, ...]:
        return self._shifted

    @property
    def degree_range(self) -> Tuple[int, int]:
        return (min(self.degrees), max(self.degrees))


# ───────────────────────── signs ─────────────────────────


def koszul_sign(perm: Sequence[int], degrees: Sequence[int]) -> Fraction:
    """
    Koszul sign of rearranging ``(x_0, …, x_{n-1})`` into
    ``(x_{perm[0]}, …, x_{perm[n-1]})``.

    ``degrees[i]`` is the degree of the i-th element of the ORIGINAL
    sequence. Every pair of elements whose relative order is reversed
    contributes ``(-1)^{d·d'}``.

    Raises:
        ContractViolation: If the lengths differ or ``perm`` is not a permutation.
    """
    n = len(perm)
    if n != len(degrees):
        raise ContractViolation("permutation and degree list differ in length")
    if sorted(perm) != list(range(n)):
        raise ContractViolation(f"{tuple(perm)} is not a permutation")
    odd = 0
    for a in range(n):
        da = degrees[perm[a]]
        if da % 2 == 0:
            continue
        for b in range(a + 1, n):
            if perm[a] > perm[b] and degrees[perm[b]] % 2:
                odd ^= 1
    return Fraction(-1) if odd else Fraction(1)


def sort_with_sign(key: Sequence[int], shifted: Sequence[int]) -> Tuple[Key, Fraction]:
    """Stable-sorts a tuple of basis indices, returning the Koszul sign."""
    perm = sorted(range(len(key)), key=lambda k: key[k])
    sign = koszul_sign(perm, [shifted[i] for i in key])
    return tuple(key[k] for k in perm), sign


def has_repeated_odd(key: Sequence[int], shifted: Sequence[int]) -> bool:
    seen = set()
    for i in key:
        if shifted[i] % 2:
            if i in seen:
                return True
            seen.add(i)
    return False


# ───────────────────────── operations ─────────────────────────


@dataclass(frozen=True)
class MultilinearOp:
    """
    Homogeneous multilinear map on the shifted space.

    Attributes:
        space (GradedSpace): The underlying space A.
        arity (int): Number of inputs, at least 1.
        degree (int): Shifted degree of the map.
        symmetry (SymmetryType): Planar or graded symmetric.
        coeffs (Dict[Key, Dict[int, Fraction]]): Input basis tuple mapped to a
            sparse output vector. Symmetric keys are sorted; zero values are
            never stored.
    """

    space: GradedSpace
    arity: int
    degree: int
    symmetry: SymmetryType
    coeffs: Dict[Key, Dict[int, Fraction]] = field(default_factory=dict)

    def __post_init__(self):
        if self.arity < 1:
            raise ContractViolation(f"arity must be at least 1, got {self.arity}")
        shifted = self.space.shifted_degrees
        cleaned: Dict[Key, Dict[int, Fraction]] = {}
        for key, vec in self.coeffs.items():
            key = tuple(key)
            if len(key) != self.arity:
                raise ContractViolation(f"key {key} does not have arity {self.arity}")
            if self.symmetry is SymmetryType.SYMMETRIC:
                if list(key) != sorted(key):
                    raise ContractViolation(f"symmetric key {key} is not sorted")
                if has_repeated_odd(key, shifted):
                    raise ContractViolation(f"symmetric key {key} repeats an odd element")
            vec = {int(o): to_rational(c) for o, c in vec.items() if c != 0}
            if not vec:
                continue
            source = sum(shifted[i] for i in key)
            for out in vec:
                if shifted[out] != source + self.degree:
                    raise ContractViolation(
                        f"entry {key} -> {out} breaks homogeneity of degree {self.degree}"
                    )
            cleaned[key] = vec
        object.__setattr__(self, "coeffs", cleaned)

    # ---- constructors ----

    @classmethod
    def zero(cls, space: GradedSpace, arity: int, degree: int, symmetry: SymmetryType) -> "MultilinearOp":
        return cls(space, arity, degree, symmetry, {})

    @classmethod
    def build(
        cls,
        space: GradedSpace,
        arity: int,
        degree: int,
        symmetry: SymmetryType,
        entries: Iterable[Entry],
    ) -> "MultilinearOp":
        """
        Accumulates ``(key, output, coefficient)`` triples into canonical form.

        Symmetric keys are sorted with their Koszul sign; keys with a repeated
        odd element are dropped, since graded symmetry forces them to zero.
        """
        shifted = space.shifted_degrees
        acc: Dict[Key, Dict[int, Fraction]] = {}
        for key, out, coef in entries:
            coef = to_rational(coef)
            if coef == 0:
                continue
            key = tuple(key)
            if symmetry is SymmetryType.SYMMETRIC:
                if has_repeated_odd(key, shifted):
                    continue
                key, sign = sort_with_sign(key, shifted)
                coef *= sign
            add_scaled(acc.setdefault(key, {}), coef, {out: Fraction(1)})
        return cls(space, arity, degree, symmetry, {k: v for k, v in acc.items() if v})

    # ---- queries ----

    def is_zero(self) -> bool:
        return not self.coeffs

    def value(self, key: Sequence[int]) -> SparseVector:
        """Sparse output on a basis tuple, applying the symmetric sorting sign."""
        key = tuple(key)
        if self.symmetry is SymmetryType.PLANAR:
            return dict(self.coeffs.get(key, {}))
        shifted = self.space.shifted_degrees
        if has_repeated_odd(key, shifted):
            return {}
        sorted_key, sign = sort_with_sign(key, shifted)
        stored = self.coeffs.get(sorted_key)
        if not stored:
            return {}
        return {o: sign * c for o, c in stored.items()}

    def entries(self) -> List[Entry]:
        return [(k, o, c) for k, vec in sorted(self.coeffs.items()) for o, c in sorted(vec.items())]

    # ---- vector space structure ----

    def _check_compatible(self, other: "MultilinearOp") -> None:
        if (self.space, self.arity, self.degree, self.symmetry) != (
            other.space,
            other.arity,
            other.degree,
            other.symmetry,
        ):
            raise ContractViolation("operations differ in space, arity, degree or symmetry")

    def __add__(self, other: "MultilinearOp") -> "MultilinearOp":
        self._check_compatible(other)
        acc = {k: dict(v) for k, v in self.coeffs.items()}
        for k, v in other.coeffs.items():
            add_scaled(acc.setdefault(k, {}), Fraction(1), v)
        return MultilinearOp(self.space, self.arity, self.degree, self.symmetry, acc)

    def scale(self, coef) -> "MultilinearOp":
        coef = to_rational(coef)
        if coef == 0:
            return MultilinearOp.zero(self.space, self.arity, self.degree, self.symmetry)
        return MultilinearOp(
            self.space,
            self.arity,
            self.degree,
            self.symmetry,
            {k: {o: coef * c for o, c in v.items()} for k, v in self.coeffs.items()},
        )

    def __neg__(self) -> "MultilinearOp":
        return self.scale(-1)

    def __sub__(self, other: "MultilinearOp") -> "MultilinearOp":
        return self + (-other)


def evaluate(op: MultilinearOp, inputs: Sequence[Union[int, str]]) -> Tuple[Fraction, ...]:
    """
    Evaluates ``op`` on a tuple of basis elements (indices or names).

    Returns:
        Tuple[Fraction, ...]: Dense output vector over the basis.

    Raises:
        ContractViolation: If the tuple length differs from the arity.
    """
    if len(inputs) != op.arity:
        raise ContractViolation(f"expected {op.arity} inputs, got {len(inputs)}")
    key = tuple(op.space.index(x) for x in inputs)
    return dense(op.value(key), op.space.dim)


def identity_op(space: GradedSpace, symmetry: SymmetryType) -> MultilinearOp:
    return MultilinearOp(
        space, 1, 0, symmetry, {(i,): {i: Fraction(1)} for i in range(space.dim)}
    )


# ───────────────────────── component bases ─────────────────────────


def canonical_keys(space: GradedSpace, symmetry: SymmetryType, arity: int) -> Iterable[Key]:
    """Input tuples that index independent coefficients, in lexicographic order."""
    if symmetry is SymmetryType.PLANAR:
        return product(range(space.dim), repeat=arity)
    shifted = space.shifted_degrees
    return (
        key
        for key in combinations_with_replacement(range(space.dim), arity)
        if not has_repeated_odd(key, shifted)
    )


def component_basis(
    space: GradedSpace, symmetry: SymmetryType, arity: int, degree: Optional[int] = None
) -> Dict[int, List[Tuple[Key, int]]]:
    """
    Enumerates the elementary operations of a given arity.

    Returns:
        Dict[int, List[Tuple[Key, int]]]: Degree mapped to the ordered list of
        ``(key, output)`` pairs spanning operations of that degree. Restricted
        to ``degree`` when given.
    """
    shifted = space.shifted_degrees
    by_degree: Dict[int, List[Tuple[Key, int]]] = {}
    outputs_by_degree: Dict[int, List[int]] = {}
    for o, s in enumerate(shifted):
        outputs_by_degree.setdefault(s, []).append(o)
    for key in canonical_keys(space, symmetry, arity):
        source = sum(shifted[i] for i in key)
        for target, outs in sorted(outputs_by_degree.items()):
            d = target - source
            if degree is not None and d != degree:
                continue
            by_degree.setdefault(d, []).extend((key, o) for o in outs)
    return by_degree


# ───────────────────────── composition ─────────────────────────


def _require(f: MultilinearOp, g: MultilinearOp, symmetry: SymmetryType, what: str) -> None:
    if f.symmetry is not symmetry or g.symmetry is not symmetry:
        raise ContractViolation(f"{what} needs two {symmetry.value} operations")
    if f.space != g.space:
        raise ContractViolation(f"{what} of operations on different spaces")


def insert_planar(f: MultilinearOp, g: MultilinearOp, i: int) -> MultilinearOp:
    """
    Inserts ``g`` into input slot ``i`` (1-based) of ``f``.

    ``(f ∘_i g)(x_1…) = (−1)^{|g|·(|x_1|+…+|x_{i−1}|)} f(x_1…x_{i−1}, g(x_i…), …)``
    with shifted degrees throughout.

    Raises:
        ContractViolation: On symmetry mismatch or a slot outside 1..arity(f).
    """
    _require(f, g, SymmetryType.PLANAR, "insert_planar")
    if not 1 <= i <= f.arity:
        raise ContractViolation(f"slot {i} outside 1..{f.arity}")
    shifted = f.space.shifted_degrees
    m = g.arity
    slot = i - 1
    g_by_output: Dict[int, List[Tuple[Key, Fraction]]] = {}
    for gkey, gvec in g.coeffs.items():
        for o, c in gvec.items():
            g_by_output.setdefault(o, []).append((gkey, c))
    acc: Dict[Key, SparseVector] = {}
    for fkey, fvec in f.coeffs.items():
        inner = g_by_output.get(fkey[slot])
        if not inner:
            continue
        left, right = fkey[:slot], fkey[slot + 1 :]
        left_degree = sum(shifted[x] for x in left)
        sign = -1 if (g.degree * left_degree) % 2 else 1
        for gkey, c in inner:
            add_scaled(acc.setdefault(left + gkey + right, {}), sign * c, fvec)
    return MultilinearOp(f.space, f.arity + m - 1, f.degree + g.degree, SymmetryType.PLANAR, acc)


def _unshuffle_sign(key: Key, chosen: Sequence[int], shifted: Sequence[int]) -> int:
    """Sign of moving the ``chosen`` positions to the front, keeping relative order."""
    chosen_set = set(chosen)
    odd = 0
    parity_before = 0
    for pos, x in enumerate(key):
        if pos in chosen_set:
            if shifted[x] % 2:
                odd ^= parity_before
        else:
            parity_before ^= shifted[x] % 2
    return -1 if odd else 1


def convolve_symmetric(f: MultilinearOp, g: MultilinearOp) -> MultilinearOp:
    """
    Symmetric pre-Lie product ``f • g``.

    ``(f • g)(x_1…x_N) = Σ_σ ε(σ) f(g(x_σ(1)…x_σ(n)), x_σ(n+1)…)`` over the
    (n, m−1)-unshuffles σ, with n = arity(g), m = arity(f).

    Raises:
        ContractViolation: On symmetry mismatch.
    """
    _require(f, g, SymmetryType.SYMMETRIC, "convolve_symmetric")
    space = f.space
    shifted = space.shifted_degrees
    n = g.arity
    total = f.arity + n - 1
    degree = f.degree + g.degree

    g_outputs = {o for vec in g.coeffs.values() for o in vec}
    g_by_output: Dict[int, List[Key]] = {}
    for gkey, gvec in g.coeffs.items():
        for o in gvec:
            g_by_output.setdefault(o, []).append(gkey)
    candidates = set()
    for fkey in f.coeffs:
        for pos, o in enumerate(fkey):
            if o not in g_outputs:
                continue
            rest = fkey[:pos] + fkey[pos + 1 :]
            for gkey in g_by_output[o]:
                key = tuple(sorted(gkey + rest))
                if not has_repeated_odd(key, shifted):
                    candidates.add(key)

    f_cache: Dict[Key, SparseVector] = {}

    def f_value(key: Key) -> SparseVector:
        if key not in f_cache:
            f_cache[key] = f.value(key)
        return f_cache[key]

    acc: Dict[Key, SparseVector] = {}
    for key in sorted(candidates):
        out: SparseVector = {}
        for chosen in combinations(range(total), n):
            inner_key = tuple(key[k] for k in chosen)
            rest = tuple(key[k] for k in range(total) if k not in chosen)
            inner = g.coeffs.get(inner_key)
            if not inner:
                continue
            sign = _unshuffle_sign(key, chosen, shifted)
            for o, c in inner.items():
                add_scaled(out, sign * c, f_value((o,) + rest))
        if out:
            acc[key] = out
    return MultilinearOp(space, total, degree, SymmetryType.SYMMETRIC, acc)


def compose(f: MultilinearOp, g: MultilinearOp) -> MultilinearOp:
    """Pre-Lie product: slot insertions summed over slots, or the symmetric convolution."""
    if f.symmetry is SymmetryType.SYMMETRIC:
        return convolve_symmetric(f, g)
    result = MultilinearOp.zero(f.space, f.arity + g.arity - 1, f.degree + g.degree, SymmetryType.PLANAR)
    for i in range(1, f.arity + 1):
        result = result + insert_planar(f, g, i)
    return result
