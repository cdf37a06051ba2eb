import unittest
from fractions import Fraction
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from operformal.algcore import (
    GradedSpace,
    MultilinearOp,
    ShiftConvention,
    SymmetryType,
    canonical_keys,
    component_basis,
    compose,
    convolve_symmetric,
    evaluate,
    identity_op,
    insert_planar,
    koszul_sign,
    sort_with_sign,
)
from operformal.errors import ContractViolation

PLANAR = SymmetryType.PLANAR
SYMMETRIC = SymmetryType.SYMMETRIC

# classical degree 0, so both elements are odd after the shift
ODD = GradedSpace(("x", "y"), (0, 0))
# classical degrees 1 and 2: e is even, f is odd after the shift
EF = GradedSpace(("e", "f"), (1, 2))


class TestGradedSpace(unittest.TestCase):

    def test_shifted_degrees(self):
        """Test the suspension lowers every degree by one."""
        self.assertEqual(EF.shifted_degrees, (0, 1))
        self.assertEqual(ShiftConvention.unshift(EF.shifted_degree(1)), 2)

    def test_duplicate_names(self):
        """Test basis names must be unique."""
        with self.assertRaises(ContractViolation):
            GradedSpace(("a", "a"), (0, 1))

    def test_index_lookup(self):
        """Test lookup by name and by index."""
        self.assertEqual(EF.index("f"), 1)
        self.assertEqual(EF.index(0), 0)
        with self.assertRaises(ContractViolation):
            EF.index("g")

    def test_operad_tags(self):
        """Test operad tags map to symmetry types and back."""
        self.assertIs(SymmetryType.for_operad("ass"), PLANAR)
        self.assertEqual(SymmetryType.for_operad("Lie").operad, "lie")
        with self.assertRaises(ContractViolation):
            SymmetryType.for_operad("com")


class TestSigns(unittest.TestCase):

    def test_swap_two_odd(self):
        """Test swapping two odd elements costs a sign."""
        self.assertEqual(koszul_sign((1, 0), (1, 1)), -1)

    def test_swap_odd_even(self):
        """Test swapping an odd past an even element is free."""
        self.assertEqual(koszul_sign((1, 0), (1, 0)), 1)

    def test_cycle_of_three_odd(self):
        """Test a 3-cycle of odd elements has two inversions."""
        self.assertEqual(koszul_sign((1, 2, 0), (1, 1, 1)), 1)

    def test_not_a_permutation(self):
        """Test malformed permutations are rejected."""
        with self.assertRaises(ContractViolation):
            koszul_sign((0, 0), (1, 1))

    def test_sort_with_sign(self):
        """Test sorting returns the Koszul sign of the rearrangement."""
        self.assertEqual(sort_with_sign((1, 0), ODD.shifted_degrees), ((0, 1), -1))
        self.assertEqual(sort_with_sign((1, 0), EF.shifted_degrees), ((0, 1), 1))


class TestMultilinearOp(unittest.TestCase):

    def test_homogeneity_enforced(self):
        """Test an entry breaking the declared degree is rejected."""
        with self.assertRaises(ContractViolation):
            MultilinearOp(EF, 2, 1, PLANAR, {(0, 0): {0: 1}})

    def test_symmetric_keys_sorted(self):
        """Test symmetric operations only store sorted keys."""
        with self.assertRaises(ContractViolation):
            MultilinearOp(ODD, 2, 1, SYMMETRIC, {(1, 0): {0: 1}})

    def test_symmetric_repeated_odd(self):
        """Test graded symmetry forbids repeating an odd element."""
        with self.assertRaises(ContractViolation):
            MultilinearOp(ODD, 2, 1, SYMMETRIC, {(0, 0): {0: 1}})

    def test_build_canonicalizes(self):
        """Test build sorts symmetric keys with their sign and drops forced zeros."""
        op = MultilinearOp.build(ODD, 2, 1, SYMMETRIC, [((1, 0), 0, 2), ((1, 1), 0, 5)])
        self.assertEqual(op.coeffs, {(0, 1): {0: Fraction(-2)}})
        self.assertEqual(op.value((1, 0)), {0: Fraction(2)})

    def test_vector_space_ops(self):
        """Test addition, scaling and cancellation."""
        op = MultilinearOp(EF, 2, 1, PLANAR, {(0, 0): {1: 1}})
        self.assertTrue((op - op).is_zero())
        self.assertEqual(op.scale(Fraction(1, 2)).coeffs, {(0, 0): {1: Fraction(1, 2)}})
        self.assertTrue(op.scale(0).is_zero())

    def test_evaluate(self):
        """Test evaluation by names returns a dense vector."""
        op = MultilinearOp(EF, 2, 1, PLANAR, {(0, 0): {1: 3}})
        self.assertEqual(evaluate(op, ["e", "e"]), (0, 3))
        with self.assertRaises(ContractViolation):
            evaluate(op, ["e"])


class TestComponentBasis(unittest.TestCase):

    def test_planar_count(self):
        """Test every (key, output) pair appears exactly once across degrees."""
        basis = component_basis(EF, PLANAR, 2)
        self.assertEqual(sum(len(v) for v in basis.values()), 8)
        self.assertEqual(sorted(basis), [-2, -1, 0, 1])

    def test_symmetric_keys(self):
        """Test symmetric keys are sorted multisets without repeated odd elements."""
        self.assertEqual(list(canonical_keys(ODD, SYMMETRIC, 2)), [(0, 1)])
        self.assertEqual(list(canonical_keys(EF, SYMMETRIC, 2)), [(0, 0), (0, 1)])

    def test_degree_filter(self):
        """Test the degree argument restricts the enumeration."""
        basis = component_basis(EF, PLANAR, 2, degree=1)
        self.assertEqual(list(basis), [1])
        self.assertEqual(basis[1], [((0, 0), 1)])


class TestComposition(unittest.TestCase):

    def setUp(self):
        self.f = MultilinearOp(ODD, 2, 1, PLANAR, {(0, 0): {1: 1}})
        self.g = MultilinearOp(ODD, 2, 1, PLANAR, {(0, 0): {0: 1}})

    def test_insert_first_slot(self):
        """Test inserting in slot 1 carries no sign."""
        result = insert_planar(self.f, self.g, 1)
        self.assertEqual(result.coeffs, {(0, 0, 0): {1: Fraction(1)}})

    def test_insert_second_slot_sign(self):
        """Test an odd map passing an odd input picks up a sign."""
        result = insert_planar(self.f, self.g, 2)
        self.assertEqual(result.coeffs, {(0, 0, 0): {1: Fraction(-1)}})

    def test_compose_sums_slots(self):
        """Test the pre-Lie product sums the slot insertions."""
        self.assertTrue(compose(self.f, self.g).is_zero())

    def test_bad_slot(self):
        """Test slots are 1-based and bounded by the arity."""
        with self.assertRaises(ContractViolation):
            insert_planar(self.f, self.g, 3)

    def test_identity_is_neutral(self):
        """Test inserting the identity counts the slots."""
        ident = identity_op(ODD, PLANAR)
        self.assertEqual(compose(self.f, ident), self.f.scale(2))
        self.assertEqual(compose(ident, self.f), self.f)

    def test_symmetric_identity(self):
        """Test the symmetric convolution with the identity."""
        op = MultilinearOp(EF, 2, 1, SYMMETRIC, {(0, 0): {1: 1}})
        ident = identity_op(EF, SYMMETRIC)
        self.assertEqual(convolve_symmetric(op, ident), op.scale(2))
        self.assertEqual(convolve_symmetric(ident, op), op)

    def test_mixed_symmetry_rejected(self):
        """Test composing planar with symmetric operations fails."""
        sym = MultilinearOp(EF, 2, 1, SYMMETRIC, {(0, 0): {1: 1}})
        with self.assertRaises(ContractViolation):
            convolve_symmetric(sym, identity_op(EF, PLANAR))


if __name__ == '__main__':
    unittest.main()
