import random
import unittest
from unittest.mock import patch
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "../src")))

from operformal import fixtures
from operformal.errors import InvariantViolation
from operformal.kaledin import FormalityWitness, formalize
from operformal.pipeline import (
    app as crosscheck_app,
    route_after_formalize,
    run_crosscheck,
)
from operformal.spectral import EulerPush


class TestRouting(unittest.TestCase):

    def test_route_to_witness_check(self):
        """Test a witness sends the graph to verify_witness."""
        state = {"formalization": FormalityWitness((), fixtures.sl2(3))}
        self.assertEqual(route_after_formalize(state), "verify_witness")

    def test_route_to_audit(self):
        """Test an obstruction sends the graph to audit_obstruction."""
        state = {"formalization": formalize(fixtures.massey(3))}
        self.assertEqual(route_after_formalize(state), "audit_obstruction")


class TestCrosscheck(unittest.TestCase):

    def test_massey_non_formal(self):
        """Test every criterion agrees the Massey structure is not formal."""
        report = run_crosscheck(fixtures.massey(4))
        self.assertEqual(report.verdict, "non_formal")
        self.assertEqual(report.kaledin.vanishing_level, 1)
        self.assertEqual(report.euler.survives_to, 1)
        self.assertFalse(report.degeneration)
        self.assertEqual(report.obstruction.weight, 2)
        self.assertIsNone(report.witness)
        self.assertIn("audit_obstruction", report.timings)

    def test_sl2_formal(self):
        """Test a strict Lie algebra is formal with an empty witness."""
        report = run_crosscheck(fixtures.sl2(3))
        self.assertEqual(report.verdict, "formal_up_to_W")
        self.assertEqual(report.witness, [])
        self.assertTrue(report.degeneration)
        self.assertIn("verify_witness", report.timings)

    def test_gauged_formal(self):
        """Test a gauged strict structure is formal with a nonempty witness."""
        rng = random.Random(3)
        q = fixtures.gauged(fixtures.strict_square(3), rng)
        while q.is_strict():
            q = fixtures.gauged(fixtures.strict_square(3), rng)
        report = run_crosscheck(q)
        self.assertEqual(report.verdict, "formal_up_to_W")
        self.assertTrue(report.witness)
        self.assertEqual(report.kaledin.vanishing_level, 3)

    @patch("operformal.pipeline.push_euler")
    def test_disagreement_is_an_invariant_violation(self, mock_push):
        """Test reconcile refuses a report whose criteria disagree."""
        mock_push.return_value = EulerPush(4)
        with self.assertRaises(InvariantViolation):
            run_crosscheck(fixtures.massey(4))

    def test_compiled_graph_returns_full_state(self):
        """Test invoking the compiled graph directly fills every state key."""
        final = crosscheck_app.invoke({"structure": fixtures.heisenberg(3), "timings": {}})
        for key in ("kaledin", "formalization", "euler", "degeneration", "report"):
            self.assertIn(key, final)
        self.assertTrue(final["witness_verified"])


if __name__ == "__main__":
    unittest.main()
