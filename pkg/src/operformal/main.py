"""
Command-line entry point.

    operformal validate   <file>
    operformal kaledin    <file> [--max-weight n]
    operformal formalize  <file>
    operformal ss         <file> [--pages r]
    operformal euler      <file>
    operformal transfer   <file> [--max-weight n] [--emit out.json]
    operformal crosscheck <file>

Every subcommand accepts ``--json`` and ``-v/-vv``. Formality commands given
a dga document transfer it to its cohomology first.

Exit codes: 0 formal or success, 1 non-formal, 2 input error, 3 internal
invariant violation.
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import ValidationError

from operformal.coder import PInfStructure
from operformal.errors import ContractViolation, InputError, InvariantViolation
from operformal.ingest import DgAlgebraSpec, Document, emit_json, load_document, structure_from_spec
from operformal.kaledin import FormalityWitness, KaledinReport, formalize, truncated_class, verify_witness
from operformal.logger import logger, set_verbosity
from operformal.pipeline import run_crosscheck
from operformal.report import (
    Report,
    check_consistency,
    euler_payload,
    kaledin_payload,
    obstruction_payload,
    page_payload,
    render_text,
    summarize,
    witness_payload,
)
from operformal.spectral import build_pages, push_euler
from operformal.transfer import DgAlgebra, contract, transfer

EXIT_FORMAL = 0
EXIT_NON_FORMAL = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

Outcome = Tuple[int, Report]


def read_document(path: str) -> Document:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return load_document(text)


def structure_of(document: Document) -> PInfStructure:
    """A minimal structure directly, or the transfer of a dga to its cohomology."""
    if isinstance(document, DgAlgebraSpec):
        return transfer(DgAlgebra.from_spec(document))
    return structure_from_spec(document)


def _option(document: Document, name: str) -> Optional[int]:
    value = document.options.get(name)
    if value is None:
        return None
    if not isinstance(value, int) or isinstance(value, bool):
        raise InputError(f"option {name!r} must be an integer", location=f"options.{name}")
    return value


def _first_given(*values: Optional[int]) -> Optional[int]:
    """The first value that was actually supplied; an explicit 0 counts."""
    return next((v for v in values if v is not None), None)


def _verdict(formal: bool) -> str:
    return "formal_up_to_W" if formal else "non_formal"


# ───────────────────────── subcommands ─────────────────────────


def cmd_validate(args: argparse.Namespace) -> Outcome:
    document = read_document(args.file)
    if isinstance(document, DgAlgebraSpec):
        dga = DgAlgebra.from_spec(document)
        cohomology = contract(dga).dims_by_degree()
        q = transfer(dga)
        return EXIT_FORMAL, Report(command="validate", structure=summarize(q, cohomology))
    q = structure_from_spec(document)
    return EXIT_FORMAL, Report(command="validate", structure=summarize(q))


def cmd_kaledin(args: argparse.Namespace) -> Outcome:
    document = read_document(args.file)
    q = structure_of(document)
    n = _first_given(args.max_weight, _option(document, "max_weight_check"), q.cutoff)
    if not 1 <= n <= q.cutoff:
        raise ContractViolation(f"--max-weight must lie in 1..{q.cutoff}, got {n}")
    result = truncated_class(q, n) if n >= 2 else KaledinReport(n, n)
    report = Report(
        command="kaledin",
        verdict=_verdict(result.vanishes),
        structure=summarize(q),
        kaledin=kaledin_payload(q, result),
    )
    check_consistency(report, n)
    return (EXIT_FORMAL if result.vanishes else EXIT_NON_FORMAL), report


def cmd_formalize(args: argparse.Namespace) -> Outcome:
    q = structure_of(read_document(args.file))
    result = formalize(q)
    if isinstance(result, FormalityWitness):
        if not verify_witness(q, result):
            raise InvariantViolation("formality witness does not reproduce the strict structure")
        report = Report(
            command="formalize",
            verdict="formal_up_to_W",
            structure=summarize(q),
            witness=witness_payload(result),
        )
        return EXIT_FORMAL, report
    report = Report(
        command="formalize",
        verdict="non_formal",
        structure=summarize(q),
        obstruction=obstruction_payload(q, result.obstruction),
    )
    return EXIT_NON_FORMAL, report


def cmd_ss(args: argparse.Namespace) -> Outcome:
    document = read_document(args.file)
    q = structure_of(document)
    r = _first_given(args.pages, _option(document, "pages"), q.cutoff)
    pages = build_pages(q, r)
    report = Report(command="ss", structure=summarize(q), pages=[page_payload(p) for p in pages])
    return EXIT_FORMAL, report


def cmd_euler(args: argparse.Namespace) -> Outcome:
    q = structure_of(read_document(args.file))
    push = push_euler(q)
    formal = push.survives_to == q.cutoff
    report = Report(
        command="euler",
        verdict=_verdict(formal),
        structure=summarize(q),
        euler=euler_payload(push),
    )
    check_consistency(report, q.cutoff)
    return (EXIT_FORMAL if formal else EXIT_NON_FORMAL), report


def cmd_transfer(args: argparse.Namespace) -> Outcome:
    document = read_document(args.file)
    if not isinstance(document, DgAlgebraSpec):
        raise InputError("transfer needs a dga document", location="kind")
    dga = DgAlgebra.from_spec(document)
    if args.max_weight is not None and args.max_weight < 1:
        raise ContractViolation(f"--max-weight must be at least 1, got {args.max_weight}")
    q = transfer(dga, args.max_weight)
    if args.emit:
        Path(args.emit).write_text(emit_json(q) + "\n", encoding="utf-8")
        logger.info(f"Wrote transferred structure to {args.emit}.")
    report = Report(command="transfer", structure=summarize(q, contract(dga).dims_by_degree()))
    return EXIT_FORMAL, report


def cmd_crosscheck(args: argparse.Namespace) -> Outcome:
    q = structure_of(read_document(args.file))
    report = run_crosscheck(q)
    return (EXIT_FORMAL if report.verdict == "formal_up_to_W" else EXIT_NON_FORMAL), report


COMMANDS: Dict[str, Callable[[argparse.Namespace], Outcome]] = {
    "validate": cmd_validate,
    "kaledin": cmd_kaledin,
    "formalize": cmd_formalize,
    "ss": cmd_ss,
    "euler": cmd_euler,
    "transfer": cmd_transfer,
    "crosscheck": cmd_crosscheck,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the report as JSON on stdout")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug (stderr)")

    parser = argparse.ArgumentParser(
        prog="operformal",
        description="Exact formality checks for minimal A-infinity and L-infinity algebras.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="parse and check a structure or dga").add_argument("file")

    p = sub.add_parser("kaledin", parents=[common], help="truncated Kaledin classes")
    p.add_argument("file")
    p.add_argument("--max-weight", type=int, default=None, help="truncation n (default: W)")

    sub.add_parser("formalize", parents=[common], help="gauge to the strict part or report the obstruction").add_argument("file")

    p = sub.add_parser("ss", parents=[common], help="pages of the weight spectral sequence")
    p.add_argument("file")
    p.add_argument("--pages", type=int, default=None, help="last page r (default: W)")

    sub.add_parser("euler", parents=[common], help="survival of the Euler class").add_argument("file")

    p = sub.add_parser("transfer", parents=[common], help="homotopy transfer of a dga to its cohomology")
    p.add_argument("file")
    p.add_argument("--max-weight", type=int, default=None, help="cutoff W (default: the document's)")
    p.add_argument("--emit", default=None, help="write the transferred structure as JSON here")

    sub.add_parser("crosscheck", parents=[common], help="run every criterion and reconcile").add_argument("file")
    return parser


def run_cli(argv: Optional[List[str]] = None) -> int:
    """
    Parses arguments, runs one subcommand and prints its report.

    Returns:
        int: The exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    set_verbosity(args.verbose)

    try:
        code, report = COMMANDS[args.command](args)
    except InvariantViolation as exc:
        logger.error(f"Internal invariant violated: {exc}")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InputError, ContractViolation, ValidationError) as exc:
        logger.error(f"Rejected input: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    print(report.to_json() if args.json else render_text(report))
    return code


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
