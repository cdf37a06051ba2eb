"""
Named structures and seeded random corpora.

Every builder goes through ``structure_from_spec`` so the fixtures exercise
the classical-convention boundary exactly like user files do. Running

    python -m operformal.fixtures <dir>

writes the named fixtures as ``operformal/1`` JSON documents.
"""

import argparse
import random
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from operformal.algcore import GradedSpace, MultilinearOp, SymmetryType, component_basis
from operformal.coder import Coderivation, PInfStructure, gauge
from operformal.ingest import (
    BasisEntry,
    DgAlgebraSpec,
    OperationRecord,
    ProblemSpec,
    ProductRecord,
    emit,
    structure_from_spec,
)
from operformal.logger import logger

Basis = Sequence[Tuple[str, int]]
Records = Sequence[Tuple[Sequence[str], Mapping[str, str]]]


def build(operad: str, basis: Basis, records: Records, max_weight: int) -> PInfStructure:
    """Parses classical records ``(inputs, {output: coefficient})`` into a structure."""
    spec = ProblemSpec(
        operad=operad,
        basis=[BasisEntry(name=n, degree=d) for n, d in basis],
        operations=[
            OperationRecord(weight=len(inputs) - 1, inputs=list(inputs), output=dict(out))
            for inputs, out in records
        ],
        max_weight=max_weight,
    )
    return structure_from_spec(spec)


# ───────────────────────── associative ─────────────────────────


def massey(max_weight: int = 4) -> PInfStructure:
    """m_3(e, e, e) = f with deg e = 1, deg f = 2; nothing else."""
    return build("ass", [("e", 1), ("f", 2)], [(("e", "e", "e"), {"f": "1"})], max_weight)


def massey_weight3(max_weight: int = 5) -> PInfStructure:
    return build("ass", [("e", 1), ("f", 2)], [(("e",) * 4, {"f": "1"})], max_weight)


def strict_square(max_weight: int = 5) -> PInfStructure:
    """e·e = f with deg e = 1, deg f = 2."""
    return build("ass", [("e", 1), ("f", 2)], [(("e", "e"), {"f": "1"})], max_weight)


def exterior(max_weight: int = 5) -> PInfStructure:
    """Reduced exterior algebra on x, y: x·y = w = −y·x."""
    return build(
        "ass",
        [("x", 1), ("y", 1), ("w", 2)],
        [(("x", "y"), {"w": "1"}), (("y", "x"), {"w": "-1"})],
        max_weight,
    )


def unital_exterior(max_weight: int = 5) -> PInfStructure:
    """Exterior algebra on one odd generator, with its unit."""
    return build(
        "ass",
        [("u", 0), ("x", 1)],
        [(("u", "u"), {"u": "1"}), (("u", "x"), {"x": "1"}), (("x", "u"), {"x": "1"})],
        max_weight,
    )


def truncated_polynomial(max_weight: int = 5) -> PInfStructure:
    """t·t = s with deg t = 2, deg s = 4, all other products zero."""
    return build("ass", [("t", 2), ("s", 4)], [(("t", "t"), {"s": "1"})], max_weight)


def mixed_ass(max_weight: int = 4, coefficient: str = "1") -> PInfStructure:
    """e·e = f together with m_3(e, e, e) = λ f."""
    return build(
        "ass",
        [("e", 1), ("f", 2)],
        [(("e", "e"), {"f": "1"}), (("e", "e", "e"), {"f": coefficient})],
        max_weight,
    )


# ───────────────────────── Lie ─────────────────────────


def sl2(max_weight: int = 5) -> PInfStructure:
    return build(
        "lie",
        [("e", 0), ("f", 0), ("h", 0)],
        [
            (("h", "e"), {"e": "2"}),
            (("h", "f"), {"f": "-2"}),
            (("e", "f"), {"h": "1"}),
        ],
        max_weight,
    )


def heisenberg(max_weight: int = 5) -> PInfStructure:
    return build("lie", [("x", 0), ("y", 0), ("z", 0)], [(("x", "y"), {"z": "1"})], max_weight)


def graded_lie(max_weight: int = 5) -> PInfStructure:
    """[a, b] = c with deg a = deg b = 1, deg c = 2."""
    return build("lie", [("a", 1), ("b", 1), ("c", 2)], [(("a", "b"), {"c": "1"})], max_weight)


def lie_semidirect(max_weight: int = 4) -> PInfStructure:
    """x of degree 0 acting on y, z of degree 1 with weights 1 and −1."""
    return build(
        "lie",
        [("x", 0), ("y", 1), ("z", 1)],
        [(("x", "y"), {"y": "1"}), (("x", "z"), {"z": "-1"})],
        max_weight,
    )


def lie_massey(max_weight: int = 4) -> PInfStructure:
    """l_3(a, a, a) = c with deg a = 1, deg c = 2."""
    return build("lie", [("a", 1), ("c", 2)], [(("a", "a", "a"), {"c": "1"})], max_weight)


def lie_massey_weight3(max_weight: int = 5) -> PInfStructure:
    return build("lie", [("a", 1), ("c", 2)], [(("a",) * 4, {"c": "1"})], max_weight)


def mixed_lie(max_weight: int = 4, coefficient: str = "1") -> PInfStructure:
    """[a, b] = c together with l_3(a, a, a) = λ c."""
    return build(
        "lie",
        [("a", 1), ("b", 1), ("c", 2)],
        [(("a", "b"), {"c": "1"}), (("a", "a", "a"), {"c": coefficient})],
        max_weight,
    )


# ───────────────────────── dgas ─────────────────────────


def _dga(basis: Basis, differential: Dict[str, Dict[str, str]], products: Records, max_weight: int) -> DgAlgebraSpec:
    return DgAlgebraSpec(
        basis=[BasisEntry(name=n, degree=d) for n, d in basis],
        differential=differential,
        product=[ProductRecord(inputs=list(i), output=dict(o)) for i, o in products],
        max_weight=max_weight,
    )


def massey_dga(max_weight: int = 4) -> DgAlgebraSpec:
    """
    dx = a·b and dy = b·c, so ⟨[a], [b], [c]⟩ is defined; x·c = z survives.

    Every product not listed is zero, a·y included, so the Massey product is
    represented by x·c alone.

    H is spanned by [a], [b], [c], [z] and the transferred m_3([a], [b], [c])
    is −[z].
    """
    return _dga(
        [("a", 1), ("b", 1), ("c", 1), ("x", 1), ("y", 1), ("u", 2), ("v", 2), ("z", 2)],
        {"x": {"u": "1"}, "y": {"v": "1"}},
        [(("a", "b"), {"u": "1"}), (("b", "c"), {"v": "1"}), (("x", "c"), {"z": "1"})],
        max_weight,
    )


def exterior_dga(max_weight: int = 4) -> DgAlgebraSpec:
    """The reduced exterior algebra on x, y with zero differential."""
    return _dga(
        [("x", 1), ("y", 1), ("w", 2)],
        {},
        [(("x", "y"), {"w": "1"}), (("y", "x"), {"w": "-1"})],
        max_weight,
    )


def acyclic_dga(max_weight: int = 3) -> DgAlgebraSpec:
    return _dga([("x", 1), ("u", 2)], {"x": {"u": "1"}}, [], max_weight)


def reorder_basis(spec: DgAlgebraSpec, order: Sequence[str]) -> DgAlgebraSpec:
    """The same dga with its basis listed in another order."""
    by_name = {b.name: b for b in spec.basis}
    return spec.model_copy(update={"basis": [by_name[n] for n in order]})


# ───────────────────────── random corpora ─────────────────────────


def random_tau(
    space: GradedSpace,
    symmetry: SymmetryType,
    cutoff: int,
    rng: random.Random,
    density: float = 0.5,
    coefficient_range: int = 3,
) -> Coderivation:
    """A codegree-0 coderivation in F^1 with random small integer coefficients."""
    comps: Dict[int, MultilinearOp] = {}
    for w in range(1, cutoff):
        coeffs: Dict[Tuple[int, ...], Dict[int, Fraction]] = {}
        for key, out in component_basis(space, symmetry, w + 1, degree=0).get(0, []):
            if rng.random() < density:
                c = rng.randint(-coefficient_range, coefficient_range)
                if c:
                    coeffs.setdefault(key, {})[out] = Fraction(c)
        comps[w] = MultilinearOp(space, w + 1, 0, symmetry, coeffs)
    return Coderivation(space, symmetry, 0, cutoff, comps)


def gauged(q: PInfStructure, rng: random.Random, density: float = 0.5) -> PInfStructure:
    return gauge(q, random_tau(q.space, q.symmetry, q.cutoff, rng, density))


STRICT_BASES = {
    "ass": [(strict_square, (3, 4, 5)), (truncated_polynomial, (3, 4, 5)), (unital_exterior, (3, 4)), (exterior, (3, 4))],
    "lie": [(graded_lie, (3, 4, 5)), (lie_semidirect, (3, 4))],
}

MIXED_BASES = [(mixed_ass, (3, 4)), (mixed_lie, (3, 4)), (massey, (3, 4)), (lie_massey, (3, 4))]


def gauged_corpus(operad: str, count: int, seed: int = 0, density: float = 0.5) -> List[PInfStructure]:
    """Strict structures conjugated by random gauge parameters; all formal."""
    rng = random.Random(seed)
    corpus = []
    for _ in range(count):
        builder, cutoffs = rng.choice(STRICT_BASES[operad])
        corpus.append(gauged(builder(rng.choice(cutoffs)), rng, density))
    logger.info(f"Built {count} gauged {operad} instances from seed {seed}.")
    return corpus


def mixed_corpus(count: int, seed: int = 0, density: float = 0.3) -> List[PInfStructure]:
    """Strict-plus-higher structures, partially gauged."""
    rng = random.Random(seed)
    corpus = []
    for _ in range(count):
        builder, cutoffs = rng.choice(MIXED_BASES)
        q = builder(rng.choice(cutoffs))
        corpus.append(gauged(q, rng, density) if rng.random() < 0.7 else q)
    return corpus


def named_fixtures() -> Dict[str, object]:
    return {
        "massey": massey(),
        "massey_weight3": massey_weight3(),
        "strict_square": strict_square(),
        "exterior": exterior(),
        "unital_exterior": unital_exterior(),
        "truncated_polynomial": truncated_polynomial(),
        "mixed_ass": mixed_ass(),
        "strict_sl2": sl2(),
        "heisenberg": heisenberg(),
        "graded_lie": graded_lie(),
        "lie_massey": lie_massey(),
        "mixed_lie": mixed_lie(),
        "gauged": gauged(strict_square(5), random.Random(7)),
        "massey_dga": massey_dga(),
        "exterior_dga": exterior_dga(),
    }


def write_fixtures(directory: Path) -> List[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, value in named_fixtures().items():
        document = emit(value) if isinstance(value, PInfStructure) else value
        path = directory / f"{name}.json"
        path.write_text(document.model_dump_json(by_alias=True, indent=2) + "\n", encoding="utf-8")
        written.append(path)
    logger.info(f"Wrote {len(written)} fixtures to {directory}.")
    return written


def main(argv: Optional[List[str]] = None) -> None:
    parser = argparse.ArgumentParser(description="Write the named operformal fixtures as JSON.")
    parser.add_argument("directory", help="output directory")
    args = parser.parse_args(argv)
    for path in write_fixtures(Path(args.directory)):
        print(path)


if __name__ == "__main__":
    main()
