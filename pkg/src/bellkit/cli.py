"""Command-line interface tying the toolkit together.

Every subcommand emits one structured report on standard output, JSON by
default (``--format plain`` for flat ``key = value`` lines).  Reports are
deterministic: identical inputs, including seeds, produce byte-identical
output.  Exact rationals appear as separate ``exact``/``value`` keys and are
never conflated with floats; numeric groups name the method that produced
them.  Exit codes: 0 success, 1 input error, 2 internal failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .builtins import builtin_expression, builtin_magnitude, builtin_names
from .errors import (
    BellkitError,
    DegenerateExpressionError,
    NoRootError,
    NoViolationError,
)
from .exprformat import parse_expansion, parse_expression
from .fixtures import g_paper_expansion_fixture_path
from .lhv import (
    DEFAULT_ENUMERATION_CAP,
    diff_expansion,
    expand_full_joint,
    local_bounds,
)
from .noise import tolerance_by_root_scan, white_noise_tolerance
from .optimize import OptimizerConfig, optimize_measurements
from .quantum import (
    expression_value,
    ghz_state,
    paper_model,
    parse_model,
    violation_report,
)
from .scenario import BellExpression, as_probability_form

SCHEMA_VERSION = 1


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; route through code 1 instead
    def error(self, message):
        raise _UsageError(message)


def _f12(value: Optional[float]) -> Optional[float]:
    """Round to 12 significant digits for stable, readable reports."""
    if value is None:
        return None
    return float(f"{value:.12g}")


def _rational(value: Fraction) -> dict:
    return {"exact": str(value), "value": _f12(float(value))}


def _digits(assignment) -> str:
    return "".join(str(outcome) for row in assignment for outcome in row)


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _load_expression(args):
    if args.builtin is not None and args.expr is not None:
        raise _UsageError("give either an expression file or --builtin, not both")
    if args.builtin is not None:
        expr = builtin_expression(args.builtin)
        identity = {"builtin": args.builtin}
        default_magnitude = builtin_magnitude(args.builtin)
    elif args.expr is not None:
        text = Path(args.expr).read_text(encoding="utf-8")
        expr = parse_expression(text)
        identity = {"path": args.expr, "sha256": _sha256(text)}
        default_magnitude = False
    else:
        raise _UsageError(
            f"an expression file or --builtin is required "
            f"(builtins: {', '.join(builtin_names())})"
        )
    magnitude = default_magnitude if args.magnitude is None else args.magnitude
    return expr, identity, magnitude


def _load_model(spec: str):
    if spec == "paper":
        return ghz_state(3), paper_model(), "paper"
    text = Path(spec).read_text(encoding="utf-8")
    state, model = parse_model(text)
    return state, model, {"path": spec, "sha256": _sha256(text)}


def _load_state(spec: str, parties: int):
    if spec == "ghz":
        return ghz_state(parties), "ghz"
    text = Path(spec).read_text(encoding="utf-8")
    state, _ = parse_model(text)
    return state, {"path": spec, "sha256": _sha256(text)}


def _envelope(command: str, inputs: dict, payload: dict) -> dict:
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "bellkit", "version": __version__},
        "command": command,
        "inputs": inputs,
    }
    report.update(payload)
    return report


def _local_block(bounds, strategy_count: int) -> dict:
    return {
        "method": "exhaustive enumeration of deterministic strategies",
        "strategy_count": strategy_count,
        "max": _rational(bounds.max),
        "min": _rational(bounds.min),
        "magnitude": _rational(bounds.magnitude),
        "maximizers": [_digits(s) for s in bounds.maximizers],
        "minimizers": [_digits(s) for s in bounds.minimizers],
    }


def _quantum_block(valuation, magnitude: bool) -> dict:
    return {
        "method": "projector expectation values",
        "value": _f12(valuation.value),
        "magnitude": _f12(abs(valuation.value)),
        "magnitude_convention": magnitude,
        "breakdown": [
            {
                "settings": list(term.settings),
                "outcomes": None if term.outcomes is None else list(term.outcomes),
                "coefficient": _rational(term.coefficient),
                "term_value": _f12(term.term_value),
                "contribution": _f12(term.contribution),
            }
            for term in valuation.terms
        ],
    }


def _violation_block(report) -> dict:
    return {
        "quantum_value": _f12(report.quantum_value),
        "local_bound": _rational(report.local_max),
        "factor": _f12(report.violation_factor),
        "amount": _f12(report.violation_amount),
        "violated": report.violated,
        "magnitude_convention": report.magnitude,
    }


def _noise_block(expr, state, model, magnitude: bool, cap: int) -> dict:
    closed = white_noise_tolerance(expr, state, model, magnitude=magnitude, cap=cap)
    scanned = tolerance_by_root_scan(expr, state, model, magnitude=magnitude, cap=cap)
    term_count_value = closed.p_critical_term_count
    return {
        "quantum_value": _f12(closed.quantum_value),
        "local_bound": _rational(closed.local_max),
        "outcome_cells": closed.outcome_cells,
        "coefficient_sum": _rational(closed.coefficient_sum),
        "positive_terms": closed.positive_terms,
        "negative_terms": closed.negative_terms,
        "magnitude_convention": closed.magnitude,
        "p_critical": {
            "value": _f12(closed.p_critical),
            "method": "closed form from affine mixing",
        },
        "p_critical_root_scan": {
            "value": _f12(scanned),
            "method": "bisection on the mixing fraction",
            "agrees_with_closed_form": abs(scanned - closed.p_critical) <= 1e-9,
        },
        "p_critical_term_count_rule": {
            "value": _f12(term_count_value),
            "method": "positive-minus-negative term count in place of the coefficient sum",
            "agrees_with_closed_form": closed.interpretations_agree,
        },
    }


def _expansion_block(expansion, list_terms: bool) -> dict:
    values = expansion.coefficients.values()
    block = {
        "method": "per-term completion of unmeasured slots",
        "assignment_count": len(expansion.coefficients),
        "coefficient_sum": _rational(expansion.coefficient_sum),
        "min": _rational(min(values)),
        "max": _rational(max(values)),
    }
    if list_terms:
        block["terms"] = [
            {"assignment": _digits(assignment), "coefficient": _rational(coefficient)}
            for assignment, coefficient in expansion.coefficients.items()
        ]
    return block


def _diff_block(expansion, fixture_path: str) -> dict:
    text = Path(fixture_path).read_text(encoding="utf-8")
    fixture = parse_expansion(text)
    report = diff_expansion(expansion, fixture)
    return {
        "fixture": str(fixture_path),
        "fixture_sha256": _sha256(text),
        "mismatches": len(report),
        "entries": [
            {
                "assignment": _digits(entry.assignment),
                "computed": _rational(entry.computed),
                "fixture": _rational(entry.fixture),
            }
            for entry in report
        ],
    }


def _cmd_bound(args) -> dict:
    expr, identity, magnitude = _load_expression(args)
    probability_form = as_probability_form(expr)
    bounds = local_bounds(probability_form, args.cap)
    inputs = {"expression": identity, "magnitude": magnitude}
    return _envelope(
        "bound",
        inputs,
        {"local": _local_block(bounds, probability_form.scenario.assignment_count)},
    )


def _cmd_expand(args) -> dict:
    expr, identity, _ = _load_expression(args)
    probability_form = as_probability_form(expr)
    expansion = expand_full_joint(probability_form, args.cap)
    payload = {"expansion": _expansion_block(expansion, list_terms=True)}
    inputs = {"expression": identity, "diff": args.diff}
    if args.diff is not None:
        # mismatches are findings, not failures; exit stays 0
        payload["diff"] = _diff_block(expansion, args.diff)
    return _envelope("expand", inputs, payload)


def _cmd_quantum(args) -> dict:
    expr, identity, magnitude = _load_expression(args)
    state, model, model_identity = _load_model(args.model)
    valuation = expression_value(expr, state, model)
    inputs = {"expression": identity, "model": model_identity, "magnitude": magnitude}
    return _envelope("quantum", inputs, {"quantum": _quantum_block(valuation, magnitude)})


def _cmd_noise(args) -> dict:
    expr, identity, magnitude = _load_expression(args)
    state, model, model_identity = _load_model(args.model)
    inputs = {"expression": identity, "model": model_identity, "magnitude": magnitude}
    return _envelope(
        "noise", inputs, {"noise": _noise_block(expr, state, model, magnitude, args.cap)}
    )


def _cmd_optimize(args) -> dict:
    expr, identity, magnitude = _load_expression(args)
    state, state_identity = _load_state(args.state, expr.scenario.parties)
    config = OptimizerConfig(
        restarts=args.restarts,
        seed=args.seed,
        tolerance=args.tolerance,
        max_evals=args.max_evals,
    )
    result = optimize_measurements(expr, state, config, magnitude=magnitude)
    if args.state == "ghz":
        state_document = "ghz"
    else:
        state_document = {
            "amplitudes": [[a.real, a.imag] for a in state.amplitudes]
        }
    model_document = {
        "state": state_document,
        "measurements": [
            [{"angles": [theta, phi]} for theta, phi in row]
            for row in result.best_angles.angles
        ],
    }
    inputs = {
        "expression": identity,
        "state": state_identity,
        "magnitude": magnitude,
        "restarts": args.restarts,
        "seed": args.seed,
        "tolerance": args.tolerance,
        "max_evals": args.max_evals,
    }
    return _envelope(
        "optimize",
        inputs,
        {
            "optimization": {
                "method": "Nelder-Mead simplex with seeded random restarts",
                "best_value": _f12(result.best_value),
                "evaluations": result.evaluations,
                "restarts": result.restarts,
                "seed": result.seed,
                "magnitude_convention": magnitude,
                "model": model_document,
            }
        },
    )


def _cmd_report(args) -> dict:
    expr, identity, magnitude = _load_expression(args)
    state, model, model_identity = _load_model(args.model)
    probability_form = as_probability_form(expr)
    bounds = local_bounds(probability_form, args.cap)
    valuation = expression_value(expr, state, model)
    violation = violation_report(expr, state, model, magnitude=magnitude, cap=args.cap)
    expansion = expand_full_joint(probability_form, args.cap)

    diff_path = args.diff
    if diff_path is None and identity.get("builtin") == "g-paper":
        diff_path = str(g_paper_expansion_fixture_path())

    try:
        noise_block = _noise_block(expr, state, model, magnitude, args.cap)
        noise_block["defined"] = True
    except (NoViolationError, NoRootError, DegenerateExpressionError) as exc:
        noise_block = {"defined": False, "reason": str(exc)}

    scenario = expr.scenario
    expression_block = {
        "kind": "probability" if isinstance(expr, BellExpression) else "correlator",
        "scenario": {
            "parties": scenario.parties,
            "settings_per_party": list(scenario.settings_per_party),
            "outcomes_per_setting": [list(row) for row in scenario.outcomes_per_setting],
        },
        "term_count": probability_form.term_count,
        "stored_term_count": expr.term_count,
        "coefficient_sum": _rational(
            sum(probability_form.terms.values(), Fraction(0))
        ),
    }

    expansion_block = _expansion_block(expansion, list_terms=False)
    if diff_path is not None:
        expansion_block["diff"] = _diff_block(expansion, diff_path)

    inputs = {
        "expression": identity,
        "model": model_identity,
        "magnitude": magnitude,
        "diff": diff_path,
    }
    return _envelope(
        "report",
        inputs,
        {
            "expression": expression_block,
            "local": _local_block(bounds, scenario.assignment_count),
            "quantum": _quantum_block(valuation, magnitude),
            "violation": _violation_block(violation),
            "noise": noise_block,
            "expansion": expansion_block,
        },
    )


_HANDLERS = {
    "bound": _cmd_bound,
    "expand": _cmd_expand,
    "quantum": _cmd_quantum,
    "noise": _cmd_noise,
    "optimize": _cmd_optimize,
    "report": _cmd_report,
}


def _add_expression_arguments(parser) -> None:
    parser.add_argument("expr", nargs="?", help="expression document path")
    parser.add_argument(
        "--builtin",
        metavar="NAME",
        help=f"use a builtin expression ({', '.join(builtin_names())})",
    )
    parser.add_argument(
        "--magnitude",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="report by |value| (default: the builtin's convention, else signed)",
    )
    parser.add_argument(
        "--format", choices=("json", "plain"), default="json", help="output format"
    )
    parser.add_argument(
        "--cap",
        type=int,
        default=DEFAULT_ENUMERATION_CAP,
        help="enumeration size cap for the strategy space",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="bellkit",
        description="Exact local bounds, quantum values, and noise robustness "
        "for Bell expressions.",
    )
    parser.add_argument("--version", action="version", version=f"bellkit {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="command")

    p_bound = subparsers.add_parser("bound", help="exact local bounds and extremizers")
    _add_expression_arguments(p_bound)

    p_expand = subparsers.add_parser(
        "expand", help="full-joint expansion, optionally diffed against a fixture"
    )
    _add_expression_arguments(p_expand)
    p_expand.add_argument("--diff", metavar="FIXTURE", help="expansion fixture to audit")

    p_quantum = subparsers.add_parser(
        "quantum", help="quantum value with per-term breakdown"
    )
    _add_expression_arguments(p_quantum)
    p_quantum.add_argument(
        "--model", default="paper", help="'paper' or a model document path"
    )

    p_noise = subparsers.add_parser("noise", help="white-noise tolerance")
    _add_expression_arguments(p_noise)
    p_noise.add_argument(
        "--model", default="paper", help="'paper' or a model document path"
    )

    p_optimize = subparsers.add_parser(
        "optimize", help="search measurement angles for the best value"
    )
    _add_expression_arguments(p_optimize)
    p_optimize.add_argument(
        "--state", default="ghz", help="'ghz' or a model document path (its state is used)"
    )
    p_optimize.add_argument("--restarts", type=int, default=20)
    p_optimize.add_argument("--seed", type=int, default=0)
    p_optimize.add_argument("--tolerance", type=float, default=1e-9)
    p_optimize.add_argument("--max-evals", type=int, default=6000)

    p_report = subparsers.add_parser("report", help="full analysis report")
    _add_expression_arguments(p_report)
    p_report.add_argument(
        "--model", default="paper", help="'paper' or a model document path"
    )
    p_report.add_argument(
        "--diff",
        metavar="FIXTURE",
        help="expansion fixture to audit (default: the packaged g-paper table)",
    )

    return parser


def _plain_lines(value, prefix: str, out: list) -> None:
    if isinstance(value, dict):
        for key, item in value.items():
            _plain_lines(item, f"{prefix}.{key}" if prefix else key, out)
    elif isinstance(value, list):
        if all(not isinstance(item, (dict, list)) for item in value):
            out.append(f"{prefix} = {json.dumps(value)}")
        else:
            for index, item in enumerate(value):
                _plain_lines(item, f"{prefix}[{index}]", out)
    else:
        out.append(f"{prefix} = {json.dumps(value)}")


def _emit(report: dict, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    else:
        lines: list = []
        _plain_lines(report, "", lines)
        sys.stdout.write("\n".join(lines) + "\n")


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """Parse and run one command; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        sys.stderr.write(parser.format_usage())
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if args.command is None:
        sys.stderr.write(parser.format_usage())
        return 1
    try:
        report = _HANDLERS[args.command](args)
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (BellkitError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except Exception as exc:  # pragma: no cover - internal invariant failure
        sys.stderr.write(f"internal error: {exc!r}\n")
        return 2
    _emit(report, args.format)
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
