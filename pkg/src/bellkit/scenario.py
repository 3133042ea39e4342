"""Measurement scenarios and Bell expressions with exact rational coefficients.

A scenario fixes, for every party, how many measurement settings it has and
how many outcomes each setting produces.  A Bell expression is a finite
linear combination of joint-probability terms; each term names one setting
and one outcome per party and carries an exact rational coefficient.  When
every measurement is binary the same functional can be written in correlator
form, as a signed sum of full correlators E(settings).

Everything in this module is exact: coefficients are `fractions.Fraction`
and no float arithmetic is performed, so polytope bounds computed downstream
are exact rationals rather than approximations.  Floats are rejected as
coefficient inputs instead of being silently converted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

from .errors import ScenarioError, ScenarioMismatchError, UnsupportedScenarioError

SettingsKey = tuple  # one setting index per party
OutcomesKey = tuple  # one outcome label per party
TermKey = tuple      # (SettingsKey, OutcomesKey)

RationalInput = Union[Fraction, int, str]


def as_fraction(value: RationalInput) -> Fraction:
    """Coerce to an exact rational; floats and bools are rejected outright."""
    if isinstance(value, (float, bool)):
        raise ScenarioError(f"coefficients must be exact rationals, got {value!r}")
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"not a rational coefficient: {value!r}") from exc


@dataclass(frozen=True)
class Scenario:
    """Cardinalities of a finite measurement scenario.

    ``outcomes_per_setting[p][s]`` is the number of outcome labels
    (``0 .. count-1``) of party ``p``'s setting ``s``.  The canonical
    tripartite case used throughout the builtins is
    ``Scenario.uniform(3, 2, 2)``.
    """

    parties: int
    settings_per_party: tuple
    outcomes_per_setting: tuple

    def __post_init__(self):
        object.__setattr__(self, "parties", int(self.parties))
        object.__setattr__(
            self, "settings_per_party", tuple(int(s) for s in self.settings_per_party)
        )
        object.__setattr__(
            self,
            "outcomes_per_setting",
            tuple(tuple(int(o) for o in row) for row in self.outcomes_per_setting),
        )
        if self.parties < 1:
            raise ScenarioError("a scenario needs at least one party")
        if len(self.settings_per_party) != self.parties:
            raise ScenarioError("settings_per_party must list one count per party")
        if len(self.outcomes_per_setting) != self.parties:
            raise ScenarioError("outcomes_per_setting must list one row per party")
        for p, (n_settings, row) in enumerate(
            zip(self.settings_per_party, self.outcomes_per_setting)
        ):
            if n_settings < 1:
                raise ScenarioError(f"party {p} needs at least one setting")
            if len(row) != n_settings:
                raise ScenarioError(
                    f"party {p}: expected {n_settings} outcome counts, got {len(row)}"
                )
            for s, n_outcomes in enumerate(row):
                if n_outcomes < 2:
                    raise ScenarioError(f"party {p} setting {s}: need at least two outcomes")

    @classmethod
    def uniform(cls, parties: int, settings: int, outcomes: int) -> "Scenario":
        return cls(parties, (settings,) * parties, ((outcomes,) * settings,) * parties)

    @property
    def is_binary(self) -> bool:
        return all(o == 2 for row in self.outcomes_per_setting for o in row)

    def uniform_cardinalities(self) -> tuple | None:
        """(parties, settings, outcomes) when uniform, else None."""
        settings = self.settings_per_party[0]
        outcomes = self.outcomes_per_setting[0][0]
        uniform = all(s == settings for s in self.settings_per_party) and all(
            o == outcomes for row in self.outcomes_per_setting for o in row
        )
        return (self.parties, settings, outcomes) if uniform else None

    @property
    def assignment_count(self) -> int:
        """Size of the complete-assignment (deterministic strategy) space."""
        n = 1
        for row in self.outcomes_per_setting:
            for outcomes in row:
                n *= outcomes
        return n

    def slots(self) -> tuple:
        """(party, setting) pairs in party-major, setting-minor order."""
        return tuple(
            (p, s) for p in range(self.parties) for s in range(self.settings_per_party[p])
        )

    def validate_term(self, settings: Sequence[int], outcomes: Sequence[int]) -> TermKey:
        """Range-check a term key against this scenario and return it as tuples."""
        settings = tuple(int(s) for s in settings)
        outcomes = tuple(int(o) for o in outcomes)
        if len(settings) != self.parties or len(outcomes) != self.parties:
            raise ScenarioError(
                f"term must list one setting and one outcome for each of "
                f"{self.parties} parties, got settings={settings} outcomes={outcomes}"
            )
        for p, (s, o) in enumerate(zip(settings, outcomes)):
            if not 0 <= s < self.settings_per_party[p]:
                raise ScenarioError(f"party {p}: setting {s} out of range")
            if not 0 <= o < self.outcomes_per_setting[p][s]:
                raise ScenarioError(f"party {p}: outcome {o} out of range for setting {s}")
        return (settings, outcomes)

    def validate_settings(self, settings: Sequence[int]) -> SettingsKey:
        settings = tuple(int(s) for s in settings)
        if len(settings) != self.parties:
            raise ScenarioError(f"expected {self.parties} setting indices, got {settings}")
        for p, s in enumerate(settings):
            if not 0 <= s < self.settings_per_party[p]:
                raise ScenarioError(f"party {p}: setting {s} out of range")
        return settings


@dataclass(frozen=True)
class MarginalTerm:
    """One joint-probability term: a setting and an outcome per party, with weight."""

    settings: tuple
    outcomes: tuple
    coefficient: Fraction

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(int(s) for s in self.settings))
        object.__setattr__(self, "outcomes", tuple(int(o) for o in self.outcomes))
        object.__setattr__(self, "coefficient", as_fraction(self.coefficient))
        if len(self.settings) != len(self.outcomes):
            raise ScenarioError("settings and outcomes must have one entry per party")


@dataclass(frozen=True, eq=False)
class BellExpression:
    """Exact linear combination of joint-probability terms over one scenario.

    The term map preserves construction order, which downstream per-term
    value breakdowns follow; equality compares coefficient maps and ignores
    order.  Instances are immutable and safe to share across threads.
    """

    scenario: Scenario
    terms: Mapping

    def __post_init__(self):
        validated = {}
        for key, coefficient in dict(self.terms).items():
            settings, outcomes = key
            key = self.scenario.validate_term(settings, outcomes)
            coefficient = as_fraction(coefficient)
            if coefficient != 0:
                validated[key] = coefficient
        object.__setattr__(self, "terms", MappingProxyType(validated))

    def __eq__(self, other):
        if not isinstance(other, BellExpression):
            return NotImplemented
        return self.scenario == other.scenario and dict(self.terms) == dict(other.terms)

    __hash__ = None

    @property
    def term_count(self) -> int:
        return len(self.terms)

    def coefficient(self, settings: Sequence[int], outcomes: Sequence[int]) -> Fraction:
        """Stored coefficient of a term key, or 0 when absent."""
        return self.terms.get(self.scenario.validate_term(settings, outcomes), Fraction(0))

    def scale(self, factor: RationalInput) -> "BellExpression":
        factor = as_fraction(factor)
        return BellExpression(
            self.scenario, {key: factor * c for key, c in self.terms.items()}
        )

    def __add__(self, other: "BellExpression") -> "BellExpression":
        if not isinstance(other, BellExpression):
            return NotImplemented
        if self.scenario != other.scenario:
            raise ScenarioMismatchError("cannot add expressions over different scenarios")
        merged = dict(self.terms)
        for key, c in other.terms.items():
            merged[key] = merged.get(key, Fraction(0)) + c
        return BellExpression(self.scenario, merged)

    def __neg__(self) -> "BellExpression":
        return self.scale(-1)


@dataclass(frozen=True, eq=False)
class CorrelatorExpression:
    """Signed sum of full correlators E(settings); binary outcomes only.

    Each term maps a per-party settings choice to a rational coefficient.
    The correlator uses the sign convention that outcome 1 carries eigenvalue
    +1 and outcome 0 carries -1, so a term expands over outcome tuples with
    sign (-1)^z where z counts zero outcomes.
    """

    scenario: Scenario
    terms: Mapping

    def __post_init__(self):
        if not self.scenario.is_binary:
            raise UnsupportedScenarioError(
                "correlator expressions require two outcomes for every measurement"
            )
        validated = {}
        for settings, coefficient in dict(self.terms).items():
            settings = self.scenario.validate_settings(settings)
            coefficient = as_fraction(coefficient)
            if coefficient != 0:
                validated[settings] = coefficient
        object.__setattr__(self, "terms", MappingProxyType(validated))

    def __eq__(self, other):
        if not isinstance(other, CorrelatorExpression):
            return NotImplemented
        return self.scenario == other.scenario and dict(self.terms) == dict(other.terms)

    __hash__ = None

    @property
    def term_count(self) -> int:
        return len(self.terms)

    def coefficient(self, settings: Sequence[int]) -> Fraction:
        return self.terms.get(self.scenario.validate_settings(settings), Fraction(0))

    def scale(self, factor: RationalInput) -> "CorrelatorExpression":
        factor = as_fraction(factor)
        return CorrelatorExpression(
            self.scenario, {key: factor * c for key, c in self.terms.items()}
        )

    def __add__(self, other: "CorrelatorExpression") -> "CorrelatorExpression":
        if not isinstance(other, CorrelatorExpression):
            return NotImplemented
        if self.scenario != other.scenario:
            raise ScenarioMismatchError("cannot add expressions over different scenarios")
        merged = dict(self.terms)
        for key, c in other.terms.items():
            merged[key] = merged.get(key, Fraction(0)) + c
        return CorrelatorExpression(self.scenario, merged)

    def __neg__(self) -> "CorrelatorExpression":
        return self.scale(-1)


Expression = Union[BellExpression, CorrelatorExpression]


def make_expression(scenario: Scenario, terms: Iterable[MarginalTerm]) -> BellExpression:
    """Build a probability-form expression, merging duplicate keys by addition.

    Exact cancellations are dropped, so the result never stores a zero
    coefficient.  Input order only affects the order of the surviving keys,
    never the coefficients.
    """
    merged: dict = {}
    for term in terms:
        try:
            key = scenario.validate_term(term.settings, term.outcomes)
        except ScenarioError as exc:
            raise ScenarioError(f"{exc} in term {term}") from None
        merged[key] = merged.get(key, Fraction(0)) + term.coefficient
    return BellExpression(scenario, merged)


def make_correlator_expression(
    scenario: Scenario, terms: Iterable
) -> CorrelatorExpression:
    """Build a correlator-form expression from (settings, coefficient) pairs."""
    merged: dict = {}
    for settings, coefficient in terms:
        key = scenario.validate_settings(settings)
        merged[key] = merged.get(key, Fraction(0)) + as_fraction(coefficient)
    return CorrelatorExpression(scenario, merged)


def correlator_to_probability(expr: CorrelatorExpression) -> BellExpression:
    """Expand every correlator term into its 2^parties signed probability terms.

    A term with coefficient c contributes c * (-1)^z at each outcome tuple,
    z being the number of outcome labels equal to 0.  Conversion is linear
    and merges overlapping keys exactly.
    """
    if not isinstance(expr, CorrelatorExpression):
        raise UnsupportedScenarioError("correlator_to_probability expects a correlator form")
    pieces = []
    parties = expr.scenario.parties
    for settings, coefficient in expr.terms.items():
        for outcomes in product((0, 1), repeat=parties):
            sign = -1 if outcomes.count(0) % 2 else 1
            pieces.append(MarginalTerm(settings, outcomes, coefficient * sign))
    return make_expression(expr.scenario, pieces)


def as_probability_form(expr: Expression) -> BellExpression:
    """Return the expression itself, or its probability-form conversion."""
    if isinstance(expr, BellExpression):
        return expr
    if isinstance(expr, CorrelatorExpression):
        return correlator_to_probability(expr)
    raise TypeError(f"not a Bell expression: {type(expr).__name__}")


def term_count(expr: Expression) -> int:
    """Number of stored (merged, nonzero) terms."""
    return expr.term_count
