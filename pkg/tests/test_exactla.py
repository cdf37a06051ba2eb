import unittest
from fractions import Fraction
from unittest.mock import patch
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from operformal.config import engine_config
from operformal.errors import ContractViolation
from operformal.exactla import (
    RatMatrix,
    Subspace,
    format_rational,
    hstack,
    image,
    kernel,
    quotient,
    rank,
    rref,
    solve,
    to_rational,
    vstack,
)


class TestScalars(unittest.TestCase):

    def test_to_rational_strings(self):
        """Test rational strings parse exactly."""
        self.assertEqual(to_rational("3/2"), Fraction(3, 2))
        self.assertEqual(to_rational(" -1 "), Fraction(-1))
        self.assertEqual(to_rational(4), Fraction(4))

    def test_to_rational_rejects(self):
        """Test floats, booleans and garbage are refused."""
        for bad in (0.5, True, "1/0", "abc"):
            with self.assertRaises(ContractViolation):
                to_rational(bad)

    def test_format_rational(self):
        """Test serialization as p/q or p."""
        self.assertEqual(format_rational(Fraction(-3, 6)), "-1/2")
        self.assertEqual(format_rational(Fraction(4, 2)), "2")


class TestRatMatrix(unittest.TestCase):

    def test_zero_entries_dropped(self):
        """Test zeros are never stored."""
        m = RatMatrix.from_rows([[0, 1], [0, 0]])
        self.assertEqual(m.entries, {(0, 1): Fraction(1)})

    def test_out_of_bounds(self):
        """Test an entry outside the shape is a contract violation."""
        with self.assertRaises(ContractViolation):
            RatMatrix(2, 2, {(2, 0): 1})

    def test_matmul_and_apply(self):
        """Test products agree with hand computation."""
        a = RatMatrix.from_rows([[1, 2], [3, 4]])
        b = RatMatrix.from_rows([[0, 1], [1, 0]])
        self.assertEqual((a @ b).to_lists(), [[2, 1], [4, 3]])
        self.assertEqual(a.apply([1, 1]), {0: 3, 1: 7})
        self.assertEqual(a.apply_left([1, 0]), {0: 1, 1: 2})

    def test_stacking(self):
        """Test hstack and vstack shapes and entries."""
        a = RatMatrix.identity(2)
        self.assertEqual(hstack(a, a).shape, (2, 4))
        self.assertEqual(vstack(a, a).get(3, 1), 1)

    def test_shape_mismatch(self):
        """Test adding differently shaped matrices fails."""
        with self.assertRaises(ContractViolation):
            RatMatrix.identity(2) + RatMatrix.identity(3)


class TestReductions(unittest.TestCase):

    def test_rref_rank_deficient(self):
        """Test rref of a rank-one matrix."""
        reduced, pivots = rref(RatMatrix.from_rows([[2, 4], [1, 2]]))
        self.assertEqual(reduced.to_lists(), [[1, 2], [0, 0]])
        self.assertEqual(pivots, [0])

    def test_rref_dense_and_sparse_agree(self):
        """Test both sympy kernels give the same reduced form."""
        m = RatMatrix.from_rows([[0, 3, 1, 2], [1, 1, 0, 0], [1, 4, 1, 2], [2, 0, Fraction(1, 2), 0]])
        with patch.object(engine_config, "dense_threshold", 10**6):
            dense_result = rref(m)
        with patch.object(engine_config, "dense_threshold", 1):
            sparse_result = rref(m)
        self.assertEqual(dense_result[0], sparse_result[0])
        self.assertEqual(dense_result[1], sparse_result[1])
        self.assertEqual(rank(m), 3)

    def test_kernel_and_image(self):
        """Test kernel and image dimensions add up to the column count."""
        m = RatMatrix.from_rows([[1, 1, 0], [0, 0, 1]])
        k = kernel(m)
        self.assertEqual(k.dim, 1)
        self.assertTrue(k.contains([1, -1, 0]))
        self.assertEqual(image(m).dim, 2)

    def test_solve_consistent(self):
        """Test a solvable system returns an exact solution."""
        a = RatMatrix.from_rows([[1, 0], [0, 2]])
        result = solve(a, [3, 4])
        self.assertTrue(result.solvable)
        self.assertEqual(result.solution, (Fraction(3), Fraction(2)))
        self.assertIsNone(result.certificate)

    def test_solve_certificate(self):
        """Test an inconsistent system returns y with yA = 0 and yb = 1."""
        a = RatMatrix.from_rows([[1], [1]])
        b = [1, 2]
        result = solve(a, b)
        self.assertFalse(result.solvable)
        y = result.certificate
        self.assertEqual(a.apply_left(y), {})
        self.assertEqual(sum(yi * bi for yi, bi in zip(y, b)), 1)

    def test_solve_length_mismatch(self):
        """Test the right-hand side must match the row count."""
        with self.assertRaises(ContractViolation):
            solve(RatMatrix.identity(2), [1, 2, 3])


class TestSubspaces(unittest.TestCase):

    def test_span_and_membership(self):
        """Test a span contains combinations of its generators only."""
        s = Subspace.span([[1, 1, 0], [0, 1, 1]], 3)
        self.assertEqual(s.dim, 2)
        self.assertTrue(s.contains([1, 2, 1]))
        self.assertFalse(s.contains([1, 0, 0]))

    def test_sum(self):
        """Test subspace sums."""
        a = Subspace.coordinate([0], 3)
        b = Subspace.span([[1, 1, 0]], 3)
        self.assertEqual((a + b).dim, 2)
        self.assertTrue((a + b).includes(a))

    def test_quotient_coordinates(self):
        """Test the projection kills U and inverts the section."""
        v = Subspace.full(3)
        u = Subspace.span([[1, 1, 0]], 3)
        q = quotient(v, u)
        self.assertEqual(q.dimension, 2)
        self.assertEqual(q.project([1, 1, 0]), {})
        for i in range(q.dimension):
            unit = {i: Fraction(1)}
            self.assertEqual(q.project(q.lift(unit)), unit)

    def test_quotient_requires_inclusion(self):
        """Test U must lie in V."""
        with self.assertRaises(ContractViolation):
            quotient(Subspace.coordinate([0], 2), Subspace.coordinate([1], 2))

    def test_coordinates(self):
        """Test coordinates in the echelon basis reconstruct the vector."""
        s = Subspace.span([[1, 2, 0], [0, 0, 1]], 3)
        coords = s.coordinates([2, 4, 5])
        rebuilt = {}
        for i, c in coords.items():
            for k, x in s.vectors()[i].items():
                rebuilt[k] = rebuilt.get(k, 0) + c * x
        self.assertEqual({k: v for k, v in rebuilt.items() if v}, {0: 2, 1: 4, 2: 5})


if __name__ == '__main__':
    unittest.main()
