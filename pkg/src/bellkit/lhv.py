"""Deterministic local strategies: enumeration, full-joint expansion, exact bounds.

A deterministic strategy fixes one outcome for every (party, setting) slot.
These strategies are the vertices of the local polytope, so the exact minimum
and maximum of a Bell expression over all local models are attained on them;
enumerating the vertices therefore gives exact rational bounds.  The
full-joint expansion rewrites a marginal expression in the basis of complete
assignments: its coefficient at an assignment equals the expression value on
the corresponding deterministic strategy, which is why the extreme expansion
coefficients reproduce the enumerated bounds.

The canonical tripartite two-setting binary scenario has 2^6 = 64 strategies;
a configurable cap guards against accidentally enormous enumerations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from types import MappingProxyType
from typing import Mapping, Sequence

from .errors import EnumerationCapError, ScenarioMismatchError
from .scenario import BellExpression, Scenario, as_fraction

DEFAULT_ENUMERATION_CAP = 10**7

# One outcome per (party, setting): tuple of per-party tuples, e.g. the
# tripartite strategy ((a, a'), (b, b'), (c, c')).
DeterministicStrategy = tuple


def _check_cap(scenario: Scenario, cap: int) -> int:
    size = scenario.assignment_count
    if size > cap:
        raise EnumerationCapError(size, cap)
    return size


def validate_strategy(scenario: Scenario, strategy: Sequence) -> DeterministicStrategy:
    """Shape- and range-check a strategy against a scenario."""
    if len(strategy) != scenario.parties:
        raise ScenarioMismatchError(
            f"strategy lists {len(strategy)} parties, scenario has {scenario.parties}"
        )
    normalized = []
    for p, row in enumerate(strategy):
        row = tuple(int(o) for o in row)
        if len(row) != scenario.settings_per_party[p]:
            raise ScenarioMismatchError(
                f"party {p}: strategy lists {len(row)} settings, "
                f"scenario has {scenario.settings_per_party[p]}"
            )
        for s, o in enumerate(row):
            if not 0 <= o < scenario.outcomes_per_setting[p][s]:
                raise ScenarioMismatchError(
                    f"party {p} setting {s}: outcome {o} out of range"
                )
        normalized.append(row)
    return tuple(normalized)


def enumerate_strategies(
    scenario: Scenario, cap: int = DEFAULT_ENUMERATION_CAP
) -> list:
    """All deterministic strategies, lexicographic in party-major slot order."""
    _check_cap(scenario, cap)
    slot_ranges = [
        range(scenario.outcomes_per_setting[p][s]) for p, s in scenario.slots()
    ]
    offsets = []
    start = 0
    for n_settings in scenario.settings_per_party:
        offsets.append((start, start + n_settings))
        start += n_settings
    return [
        tuple(flat[lo:hi] for lo, hi in offsets) for flat in product(*slot_ranges)
    ]


def evaluate_on_strategy(expr: BellExpression, strategy: Sequence) -> Fraction:
    """Exact expression value when every measurement has a pre-assigned outcome.

    Under a deterministic strategy each joint probability is 0 or 1, so the
    value is the sum of coefficients of the terms the strategy hits.
    """
    strategy = validate_strategy(expr.scenario, strategy)
    total = Fraction(0)
    for (settings, outcomes), coefficient in expr.terms.items():
        if all(strategy[p][settings[p]] == outcomes[p] for p in range(expr.scenario.parties)):
            total += coefficient
    return total


@dataclass(frozen=True, eq=False)
class FullJointExpansion:
    """Coefficients of an expression in the complete-assignment basis.

    The map always covers the whole assignment space (zeros included) in
    enumeration order, so two expansions over one scenario are directly
    comparable key by key.
    """

    scenario: Scenario
    coefficients: Mapping

    def __post_init__(self):
        provided = {}
        for assignment, coefficient in dict(self.coefficients).items():
            provided[validate_strategy(self.scenario, assignment)] = as_fraction(coefficient)
        complete = {}
        for assignment in enumerate_strategies(self.scenario):
            complete[assignment] = provided.pop(assignment, Fraction(0))
        # enumerate_strategies covers the key space, so leftovers are impossible
        object.__setattr__(self, "coefficients", MappingProxyType(complete))

    def __eq__(self, other):
        if not isinstance(other, FullJointExpansion):
            return NotImplemented
        return self.scenario == other.scenario and dict(self.coefficients) == dict(
            other.coefficients
        )

    __hash__ = None

    def coefficient(self, assignment: Sequence) -> Fraction:
        return self.coefficients[validate_strategy(self.scenario, assignment)]

    @property
    def coefficient_sum(self) -> Fraction:
        return sum(self.coefficients.values(), Fraction(0))


def expand_full_joint(
    expr: BellExpression, cap: int = DEFAULT_ENUMERATION_CAP
) -> FullJointExpansion:
    """Rewrite a marginal expression over complete assignments.

    Each term distributes its coefficient over every completion of the slots
    it does not measure (marginalization run in reverse), so the coefficient
    at assignment t equals evaluate_on_strategy(expr, t).
    """
    scenario = expr.scenario
    _check_cap(scenario, cap)
    slots = scenario.slots()
    coefficients: dict = {}
    for (settings, outcomes), coefficient in expr.terms.items():
        fixed = {(p, settings[p]): outcomes[p] for p in range(scenario.parties)}
        free = [slot for slot in slots if slot not in fixed]
        free_ranges = [range(scenario.outcomes_per_setting[p][s]) for p, s in free]
        for combo in product(*free_ranges):
            values = dict(fixed)
            values.update(zip(free, combo))
            assignment = tuple(
                tuple(values[(p, s)] for s in range(scenario.settings_per_party[p]))
                for p in range(scenario.parties)
            )
            coefficients[assignment] = coefficients.get(assignment, Fraction(0)) + coefficient
    return FullJointExpansion(scenario, coefficients)


@dataclass(frozen=True)
class LocalBoundResult:
    """Exact extrema over deterministic strategies, with every tied extremizer."""

    max: Fraction
    min: Fraction
    maximizers: tuple
    minimizers: tuple

    @property
    def magnitude(self) -> Fraction:
        """Bound on |expression| over all local models."""
        return max(abs(self.max), abs(self.min))


def local_bounds(
    expr: BellExpression, cap: int = DEFAULT_ENUMERATION_CAP
) -> LocalBoundResult:
    """Exact local extrema by exhaustive vertex enumeration.

    Convex mixtures of strategies cover every local model, so the vertex
    extrema bound them all.  Tied extremizers are reported in enumeration
    order rather than picking an arbitrary winner.
    """
    best_max = None
    best_min = None
    maximizers: list = []
    minimizers: list = []
    for strategy in enumerate_strategies(expr.scenario, cap):
        value = evaluate_on_strategy(expr, strategy)
        if best_max is None or value > best_max:
            best_max = value
            maximizers = [strategy]
        elif value == best_max:
            maximizers.append(strategy)
        if best_min is None or value < best_min:
            best_min = value
            minimizers = [strategy]
        elif value == best_min:
            minimizers.append(strategy)
    return LocalBoundResult(best_max, best_min, tuple(maximizers), tuple(minimizers))


def trivial_bounds(
    expr: BellExpression, cap: int = DEFAULT_ENUMERATION_CAP
) -> tuple:
    """(lower, upper) from the extreme full-joint expansion coefficients.

    Deterministic strategies are the basis vectors of the assignment simplex,
    so these equal local_bounds exactly; computing them from the expansion
    rather than the vertex sweep keeps the two routes independent.
    """
    expansion = expand_full_joint(expr, cap)
    values = expansion.coefficients.values()
    return (min(values), max(values))


@dataclass(frozen=True)
class DiffEntry:
    assignment: DeterministicStrategy
    computed: Fraction
    fixture: Fraction


@dataclass(frozen=True)
class DiffReport:
    """Assignment-by-assignment mismatches between two expansions."""

    entries: tuple

    @property
    def is_empty(self) -> bool:
        return not self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def diff_expansion(computed: FullJointExpansion, fixture: FullJointExpansion) -> DiffReport:
    """List every assignment where the two expansions disagree, with both values."""
    if computed.scenario != fixture.scenario:
        raise ScenarioMismatchError("expansions cover different scenarios")
    entries = []
    for assignment, value in computed.coefficients.items():
        other = fixture.coefficients[assignment]
        if value != other:
            entries.append(DiffEntry(assignment, value, other))
    return DiffReport(tuple(entries))
