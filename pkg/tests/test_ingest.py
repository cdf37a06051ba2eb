import json
import random
import unittest
from fractions import Fraction
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from operformal import fixtures
from operformal.algcore import evaluate
from operformal.errors import InputError, MaurerCartanError
from operformal.ingest import (
    DgAlgebraSpec,
    OperationRecord,
    ProblemSpec,
    decalage_sign,
    emit,
    emit_json,
    load_document,
    parse,
    spec_from_dict,
)


def document(operad="ass", basis=None, operations=None, max_weight=4, **extra):
    data = {
        "schema": "operformal/1",
        "operad": operad,
        "basis": basis if basis is not None else [{"name": "e", "degree": 1}, {"name": "f", "degree": 2}],
        "operations": operations if operations is not None else [],
        "max_weight": max_weight,
    }
    data.update(extra)
    return json.dumps(data)


MASSEY_OPS = [{"weight": 2, "inputs": ["e", "e", "e"], "output": {"f": "1"}}]


class TestParse(unittest.TestCase):

    def test_massey(self):
        """Test the Massey document parses to a single weight-2 component."""
        q = parse(document(operations=MASSEY_OPS))
        self.assertEqual(q.q.weights, [2])
        self.assertEqual(q.cutoff, 4)
        self.assertEqual(evaluate(q.weight(2), ["e", "e", "e"]), (0, 1))

    def test_empty_operations(self):
        """Test a structure without operations is the zero structure."""
        q = parse(document())
        self.assertTrue(q.q.is_zero())
        self.assertTrue(q.is_strict())

    def test_rational_coefficients(self):
        """Test fractions survive exactly."""
        ops = [{"weight": 2, "inputs": ["e", "e", "e"], "output": {"f": "-3/4"}}]
        q = parse(document(operations=ops))
        self.assertEqual(evaluate(q.weight(2), ["e", "e", "e"])[1], Fraction(-3, 4))

    def test_dga_is_not_a_minimal_structure(self):
        """Test parse refuses dga documents."""
        with self.assertRaises(InputError) as ctx:
            parse(fixtures.massey_dga().model_dump_json(by_alias=True))
        self.assertEqual(ctx.exception.location, "kind")

    def test_load_document_dispatches_on_kind(self):
        """Test the kind field selects the schema."""
        dga = load_document(fixtures.exterior_dga().model_dump_json(by_alias=True))
        self.assertIsInstance(dga, DgAlgebraSpec)
        self.assertIsInstance(load_document(document()), ProblemSpec)

    def test_unknown_options_warn(self):
        """Test unrecognised options are logged and ignored."""
        with self.assertLogs("operformal", level="WARNING") as logs:
            parse(document(options={"colour": "blue", "pages": 2}))
        self.assertTrue(any("colour" in line for line in logs.output))


class TestInputErrors(unittest.TestCase):

    def assertLocation(self, text, location):
        with self.assertRaises(InputError) as ctx:
            parse(text)
        self.assertEqual(ctx.exception.location, location)
        return ctx.exception

    def test_malformed_json(self):
        """Test invalid JSON is an input error."""
        with self.assertRaises(InputError):
            parse("{")

    def test_arity_mismatch(self):
        """Test a weight-2 record needs three inputs."""
        ops = [{"weight": 2, "inputs": ["e", "e"], "output": {"f": "1"}}]
        self.assertLocation(document(operations=ops), "operations[0].inputs")

    def test_degree_rule(self):
        """Test outputs must have degree Σ inputs + 1 − w."""
        ops = [{"weight": 2, "inputs": ["e", "e", "e"], "output": {"e": "1"}}]
        self.assertLocation(document(operations=ops), "operations[0].output")

    def test_weight_above_cutoff(self):
        """Test records above max_weight are rejected."""
        ops = [{"weight": 3, "inputs": ["e"] * 4, "output": {"f": "1"}}]
        self.assertLocation(document(operations=ops, max_weight=2), "operations[0].weight")

    def test_unknown_name(self):
        """Test unknown basis names are reported on their record."""
        ops = [{"weight": 2, "inputs": ["e", "e", "g"], "output": {"f": "1"}}]
        self.assertLocation(document(operations=ops), "operations[0]")

    def test_bad_rational(self):
        """Test non-rational coefficient strings fail schema validation."""
        for bad in ("1.5", "x", "1/0"):
            ops = [{"weight": 2, "inputs": ["e", "e", "e"], "output": {"f": bad}}]
            self.assertLocation(document(operations=ops), "operations[0].output")

    def test_missing_basis(self):
        """Test the basis field is required."""
        data = json.loads(document())
        del data["basis"]
        self.assertLocation(json.dumps(data), "basis")

    def test_duplicate_basis(self):
        """Test basis names must be unique."""
        basis = [{"name": "e", "degree": 1}, {"name": "e", "degree": 2}]
        self.assertLocation(document(basis=basis), "basis[1].name")

    def test_unknown_schema(self):
        """Test a foreign schema tag is refused."""
        with self.assertRaises(InputError):
            parse(document(schema="operformal/2"))

    def test_maurer_cartan_failure(self):
        """Test a non-associative product is reported with its residual."""
        basis = [{"name": "e", "degree": 0}, {"name": "f", "degree": 0}]
        ops = [
            {"weight": 1, "inputs": ["e", "e"], "output": {"f": "1"}},
            {"weight": 1, "inputs": ["f", "e"], "output": {"e": "1"}},
        ]
        with self.assertRaises(MaurerCartanError) as ctx:
            parse(document(basis=basis, operations=ops, max_weight=2))
        self.assertEqual(ctx.exception.weight, 2)
        self.assertIn("(e, e, e)", ctx.exception.relation_dump)


class TestLie(unittest.TestCase):

    BASIS = [{"name": "x", "degree": 0}, {"name": "y", "degree": 0}, {"name": "z", "degree": 0}]

    def test_repeated_even_element(self):
        """Test [x, x] must vanish for x of even degree."""
        ops = [{"weight": 1, "inputs": ["x", "x"], "output": {"z": "1"}}]
        with self.assertRaises(InputError) as ctx:
            parse(document(operad="lie", basis=self.BASIS, operations=ops))
        self.assertEqual(ctx.exception.location, "operations[0].inputs")

    def test_conflicting_orders(self):
        """Test [x, y] = z and [y, x] = z contradict antisymmetry."""
        ops = [
            {"weight": 1, "inputs": ["x", "y"], "output": {"z": "1"}},
            {"weight": 1, "inputs": ["y", "x"], "output": {"z": "1"}},
        ]
        with self.assertRaises(InputError) as ctx:
            parse(document(operad="lie", basis=self.BASIS, operations=ops))
        self.assertEqual(ctx.exception.location, "operations[1].output")

    def test_consistent_orders(self):
        """Test [y, x] = −z restates [x, y] = z."""
        ops = [
            {"weight": 1, "inputs": ["x", "y"], "output": {"z": "1"}},
            {"weight": 1, "inputs": ["y", "x"], "output": {"z": "-1"}},
        ]
        q = parse(document(operad="lie", basis=self.BASIS, operations=ops))
        self.assertEqual(q, fixtures.heisenberg(4))

    def test_sl2_signs(self):
        """Test the shifted bracket of sl2 picks up the décalage sign."""
        q = fixtures.sl2(3)
        self.assertEqual(evaluate(q.weight(1), ["e", "f"]), (0, 0, -1))
        self.assertEqual(evaluate(q.weight(1), ["f", "e"]), (0, 0, 1))


class TestDecalage(unittest.TestCase):

    def test_signs(self):
        """Test the sign on a few degree patterns."""
        self.assertEqual(decalage_sign((1, 1, 1)), 1)
        self.assertEqual(decalage_sign((0, 0)), -1)
        self.assertEqual(decalage_sign((2, 1)), -1)
        self.assertEqual(decalage_sign((1, 2)), 1)
        self.assertEqual(decalage_sign((5,)), 1)


class TestEmit(unittest.TestCase):

    def test_massey_records(self):
        """Test emit writes classical records back."""
        spec = emit(fixtures.massey(4))
        self.assertEqual(spec.operations, [OperationRecord(weight=2, inputs=["e", "e", "e"], output={"f": "1"})])
        self.assertEqual(spec.max_weight, 4)
        self.assertEqual(spec.schema_version, "operformal/1")

    def test_round_trip(self):
        """Test parse inverts emit on associative, Lie and gauged structures."""
        structures = [
            fixtures.massey(4),
            fixtures.sl2(4),
            fixtures.mixed_lie(4, coefficient="2/3"),
            fixtures.gauged(fixtures.strict_square(4), random.Random(5)),
        ]
        for q in structures:
            self.assertEqual(parse(emit_json(q)), q)

    def test_emit_json_uses_schema_alias(self):
        """Test the JSON carries the schema tag under its public name."""
        data = json.loads(emit_json(fixtures.massey(3)))
        self.assertEqual(data["schema"], "operformal/1")
        self.assertNotIn("schema_version", data)

    def test_shipped_fixture_files(self):
        """Test the JSON files under fixtures/ match the named builders."""
        root = os.path.abspath(os.path.join(os.path.dirname(__file__), "../fixtures"))
        with open(os.path.join(root, "massey.json"), encoding="utf-8") as fh:
            self.assertEqual(parse(fh.read()), fixtures.massey(4))
        with open(os.path.join(root, "strict_sl2.json"), encoding="utf-8") as fh:
            self.assertEqual(parse(fh.read()), fixtures.sl2(5))
        with open(os.path.join(root, "massey_dga.json"), encoding="utf-8") as fh:
            self.assertIsInstance(load_document(fh.read()), DgAlgebraSpec)

    def test_spec_from_dict(self):
        """Test dict validation maps schema errors to InputError."""
        with self.assertRaises(InputError):
            spec_from_dict({"operad": "com", "basis": [], "max_weight": 1})


if __name__ == '__main__':
    unittest.main()
