"""Line-oriented text format for Bell expressions and full-joint expansions.

Documents are UTF-8 with LF or CRLF line endings accepted and LF emitted.
``#`` starts a comment (to end of line) and blank lines are ignored.  The
first significant line must be the header::

    scenario <parties> <settings> <outcomes>

declaring uniform cardinalities: every party has the same number of settings
and every setting the same number of outcomes.  Term lines follow, all of one
kind per document::

    <coeff> P(A0 B1 C0 | 1 0 1)     joint-probability term
    <coeff> E(A0 B1 C1)             correlator term (binary outcomes only)
    <coeff> L(010011)               full-joint expansion term

``<coeff>`` is an optionally signed integer or fraction ``n/d``.  Party
tokens use consecutive uppercase letters starting at ``A``, each followed by
a setting index; in a ``P(...)`` line the fields after ``|`` list one outcome
label per party.  An ``L(...)`` key lists one outcome digit per
(party, setting) slot in party-major, setting-minor order, so the tripartite
two-setting case reads ``L(<a><a'><b><b'><c><c'>)``; this compact form
requires single-digit outcome labels.  Duplicate keys merge by rational
addition and emit a :class:`DuplicateTermWarning`.

Serialization is canonical: terms sorted by key, coefficients in lowest terms
with an explicit sign.  ``parse_expression(serialize_expression(e))``
reproduces the coefficient map of ``e`` exactly, and serialized fixtures diff
stably line by line.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, ScenarioError, UnsupportedScenarioError
from .lhv import FullJointExpansion
from .scenario import BellExpression, CorrelatorExpression, Expression, Scenario


class DuplicateTermWarning(UserWarning):
    """A document repeated a term key; the coefficients were merged."""


_HEADER_RE = re.compile(r"^scenario\s+(\d+)\s+(\d+)\s+(\d+)\s*$")
_TERM_RE = re.compile(r"^([+-]?\d+(?:/\d+)?)\s+([PEL])\(([^()]*)\)\s*$")
_TOKEN_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class DocumentTerm:
    """One parsed term line; exactly one of the key payloads is set."""

    line: int
    kind: str  # "P", "E", or "L"
    coefficient: Fraction
    settings: tuple | None = None
    outcomes: tuple | None = None
    assignment: tuple | None = None


@dataclass(frozen=True)
class ExpressionDocument:
    """Parsed document: declared scenario, term records, and comment text."""

    scenario: Scenario
    terms: tuple
    comments: tuple

    @property
    def kind(self) -> str:
        return self.terms[0].kind if self.terms else "P"


def _party_letter(party: int) -> str:
    if party >= 26:
        raise UnsupportedScenarioError("the text format supports at most 26 parties")
    return chr(ord("A") + party)


def _parse_party_tokens(
    scenario: Scenario, part: str, offset: int, line_no: int
) -> tuple:
    """Parse 'A0 B1 C0'-style setting tokens, reporting real columns."""
    tokens = list(_TOKEN_RE.finditer(part))
    if len(tokens) != scenario.parties:
        raise ParseError(
            f"expected {scenario.parties} party tokens, got {len(tokens)}",
            line_no,
            offset + 1,
        )
    settings = []
    for party, match in enumerate(tokens):
        token = match.group(0)
        column = offset + match.start() + 1
        expected = _party_letter(party)
        if not (len(token) >= 2 and token[0] == expected and token[1:].isdigit()):
            raise ParseError(
                f"expected token {expected}<setting>, got {token!r}", line_no, column
            )
        setting = int(token[1:])
        if setting >= scenario.settings_per_party[party]:
            raise ParseError(
                f"setting {setting} out of range in token {token!r}", line_no, column
            )
        settings.append(setting)
    return tuple(settings)


def _parse_outcome_tokens(
    scenario: Scenario, settings: tuple, part: str, offset: int, line_no: int
) -> tuple:
    tokens = list(_TOKEN_RE.finditer(part))
    if len(tokens) != scenario.parties:
        raise ParseError(
            f"expected {scenario.parties} outcome labels, got {len(tokens)}",
            line_no,
            offset + 1,
        )
    outcomes = []
    for party, match in enumerate(tokens):
        token = match.group(0)
        column = offset + match.start() + 1
        if not token.isdigit():
            raise ParseError(f"outcome label must be an integer, got {token!r}", line_no, column)
        outcome = int(token)
        if outcome >= scenario.outcomes_per_setting[party][settings[party]]:
            raise ParseError(
                f"outcome {token!r} out of range for party {_party_letter(party)} "
                f"setting {settings[party]}",
                line_no,
                column,
            )
        outcomes.append(outcome)
    return tuple(outcomes)


def _parse_assignment_digits(
    scenario: Scenario, digits: str, offset: int, line_no: int
) -> tuple:
    slots = scenario.slots()
    if len(digits) != len(slots):
        raise ParseError(
            f"expected {len(slots)} outcome digits, got {len(digits)}", line_no, offset + 1
        )
    flat = []
    for i, ((party, setting), ch) in enumerate(zip(slots, digits)):
        outcome = int(ch)
        if outcome >= scenario.outcomes_per_setting[party][setting]:
            raise ParseError(
                f"outcome digit {ch!r} out of range for party {_party_letter(party)} "
                f"setting {setting}",
                line_no,
                offset + i + 1,
            )
        flat.append(outcome)
    assignment = []
    start = 0
    for n_settings in scenario.settings_per_party:
        assignment.append(tuple(flat[start : start + n_settings]))
        start += n_settings
    return tuple(assignment)


def parse_document(text: str) -> ExpressionDocument:
    """Parse a document into its header scenario and raw term records.

    Every rejection carries a 1-based line number (and a column where one is
    meaningful); term kinds must not mix within one document.
    """
    scenario = None
    terms: list = []
    comments: list = []
    kind = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if "#" in line:
            comments.append(line[line.index("#") + 1 :].strip())
            line = line[: line.index("#")]
        if not line.strip():
            continue
        if scenario is None:
            header = _HEADER_RE.match(line)
            if header is None:
                raise ParseError(
                    "expected header 'scenario <parties> <settings> <outcomes>'", line_no, 1
                )
            parties, settings, outcomes = (int(g) for g in header.groups())
            try:
                scenario = Scenario.uniform(parties, settings, outcomes)
            except ScenarioError as exc:
                raise ParseError(str(exc), line_no, 1) from None
            continue
        if _HEADER_RE.match(line):
            raise ParseError("duplicate scenario header", line_no, 1)
        match = _TERM_RE.match(line)
        if match is None:
            raise ParseError(
                "malformed term line; expected '<coeff> P(...)', 'E(...)' or 'L(...)'",
                line_no,
                1,
            )
        coefficient = Fraction(match.group(1))
        term_kind = match.group(2)
        body = match.group(3)
        body_offset = match.start(3)
        if kind is None:
            kind = term_kind
        elif term_kind != kind:
            raise ParseError(
                f"cannot mix {kind}(...) and {term_kind}(...) terms in one document",
                line_no,
                match.start(2) + 1,
            )
        if term_kind == "P":
            if body.count("|") != 1:
                raise ParseError(
                    "expected one '|' separating settings from outcomes",
                    line_no,
                    body_offset + 1,
                )
            settings_part, outcomes_part = body.split("|")
            settings = _parse_party_tokens(scenario, settings_part, body_offset, line_no)
            outcomes = _parse_outcome_tokens(
                scenario,
                settings,
                outcomes_part,
                body_offset + len(settings_part) + 1,
                line_no,
            )
            terms.append(DocumentTerm(line_no, "P", coefficient, settings, outcomes))
        elif term_kind == "E":
            if not scenario.is_binary:
                raise ParseError(
                    "correlator terms need a binary scenario", line_no, match.start(2) + 1
                )
            settings = _parse_party_tokens(scenario, body, body_offset, line_no)
            terms.append(DocumentTerm(line_no, "E", coefficient, settings))
        else:
            digits = body.strip()
            if not digits.isdigit():
                raise ParseError(
                    "L(...) expects a run of outcome digits", line_no, body_offset + 1
                )
            assignment = _parse_assignment_digits(
                scenario, digits, body_offset + body.index(digits), line_no
            )
            terms.append(DocumentTerm(line_no, "L", coefficient, assignment=assignment))
    if scenario is None:
        raise ParseError("document has no scenario header", 1, 1)
    return ExpressionDocument(scenario, tuple(terms), tuple(comments))


def _merge(document: ExpressionDocument, key_of) -> dict:
    merged: dict = {}
    first_line: dict = {}
    for term in document.terms:
        key = key_of(term)
        if key in merged:
            warnings.warn(
                f"duplicate term at line {term.line} merges with line {first_line[key]}",
                DuplicateTermWarning,
                stacklevel=3,
            )
            merged[key] = merged[key] + term.coefficient
        else:
            merged[key] = term.coefficient
            first_line[key] = term.line
    return merged


def parse_expression(text: str) -> Expression:
    """Parse a P- or E-document; empty documents yield an empty probability form."""
    document = parse_document(text)
    if document.kind == "L":
        raise ParseError(
            "document holds full-joint L(...) terms; use parse_expansion",
            document.terms[0].line,
        )
    if document.kind == "E" and document.terms:
        merged = _merge(document, lambda t: t.settings)
        return CorrelatorExpression(document.scenario, merged)
    merged = _merge(document, lambda t: (t.settings, t.outcomes))
    return BellExpression(document.scenario, merged)


def parse_expansion(text: str) -> FullJointExpansion:
    """Parse an L-document into a complete (zero-filled) expansion."""
    document = parse_document(text)
    if document.terms and document.kind != "L":
        raise ParseError(
            "document holds expression terms; use parse_expression",
            document.terms[0].line,
        )
    merged = _merge(document, lambda t: t.assignment)
    return FullJointExpansion(document.scenario, merged)


def _format_coefficient(value: Fraction) -> str:
    text = str(value)  # lowest terms by construction
    return f"+{text}" if value > 0 else text


def _header_line(scenario: Scenario) -> str:
    cardinalities = scenario.uniform_cardinalities()
    if cardinalities is None:
        raise UnsupportedScenarioError(
            "the text format only covers uniform scenarios"
        )
    parties, settings, outcomes = cardinalities
    if parties > 26:
        raise UnsupportedScenarioError("the text format supports at most 26 parties")
    return f"scenario {parties} {settings} {outcomes}"


def serialize_expression(expr: Expression) -> str:
    """Canonical text: header, then terms sorted by key, LF-terminated."""
    lines = [_header_line(expr.scenario)]
    if isinstance(expr, CorrelatorExpression):
        for settings in sorted(expr.terms):
            tokens = " ".join(
                f"{_party_letter(p)}{s}" for p, s in enumerate(settings)
            )
            lines.append(f"{_format_coefficient(expr.terms[settings])} E({tokens})")
    else:
        for settings, outcomes in sorted(expr.terms):
            tokens = " ".join(
                f"{_party_letter(p)}{s}" for p, s in enumerate(settings)
            )
            labels = " ".join(str(o) for o in outcomes)
            coefficient = _format_coefficient(expr.terms[(settings, outcomes)])
            lines.append(f"{coefficient} P({tokens} | {labels})")
    return "\n".join(lines) + "\n"


def serialize_expansion(
    expansion: FullJointExpansion, include_zeros: bool = False
) -> str:
    """Canonical text for an expansion, sorted by assignment."""
    scenario = expansion.scenario
    if any(o > 10 for row in scenario.outcomes_per_setting for o in row):
        raise UnsupportedScenarioError("L(...) digit keys need outcome labels 0-9")
    lines = [_header_line(scenario)]
    for assignment in sorted(expansion.coefficients):
        coefficient = expansion.coefficients[assignment]
        if coefficient == 0 and not include_zeros:
            continue
        digits = "".join(str(o) for row in assignment for o in row)
        lines.append(f"{_format_coefficient(coefficient)} L({digits})")
    return "\n".join(lines) + "\n"
