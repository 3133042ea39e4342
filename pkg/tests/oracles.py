"""Independent brute-force oracles the tests check the engine paths against.

Everything here stays deliberately close to the definitions: explicit loops
over assignments, term matching by comparing outcome labels slot by slot, and
observable expectations through one dense operator product.  None of it
shares code with the package's computational routines.
"""

from fractions import Fraction
from itertools import product

import numpy as np

from bellkit import MarginalTerm, MeasurementModel, make_expression

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def all_assignments(scenario):
    """Complete outcome assignments, built per party and then combined."""
    per_party = []
    for p in range(scenario.parties):
        per_party.append(
            list(product(*(range(n) for n in scenario.outcomes_per_setting[p])))
        )
    return [tuple(combo) for combo in product(*per_party)]


def term_matches(assignment, settings, outcomes):
    return all(
        assignment[p][settings[p]] == outcomes[p] for p in range(len(settings))
    )


def expansion_by_direct_evaluation(expr):
    """Coefficient at each assignment: the sum of coefficients of matching terms."""
    table = {}
    for assignment in all_assignments(expr.scenario):
        total = Fraction(0)
        for (settings, outcomes), coefficient in expr.terms.items():
            if term_matches(assignment, settings, outcomes):
                total += coefficient
        table[assignment] = total
    return table


def observable_expectation(state_vector, bloch_vectors):
    """<psi| tensor_p (n_p . sigma) |psi> via one dense operator product."""
    op = None
    for nx, ny, nz in bloch_vectors:
        single = nx * PAULI_X + ny * PAULI_Y + nz * PAULI_Z
        op = single if op is None else np.kron(op, single)
    return float(np.real(np.vdot(state_vector, op @ state_vector)))


def random_pure_amplitudes(rng, parties):
    raw = rng.normal(size=2**parties) + 1j * rng.normal(size=2**parties)
    return raw / np.linalg.norm(raw)


def random_bloch(rng):
    v = rng.normal(size=3)
    v = v / np.linalg.norm(v)
    return (float(v[0]), float(v[1]), float(v[2]))


def random_model(rng, parties=3, settings=2):
    return MeasurementModel(
        tuple(tuple(random_bloch(rng) for _ in range(settings)) for _ in range(parties))
    )


def random_rational(rng, span=9):
    return Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, 7)))


def random_expression(rng, scenario, max_terms=8):
    terms = []
    for _ in range(int(rng.integers(0, max_terms + 1))):
        settings = tuple(
            int(rng.integers(0, scenario.settings_per_party[p]))
            for p in range(scenario.parties)
        )
        outcomes = tuple(
            int(rng.integers(0, scenario.outcomes_per_setting[p][settings[p]]))
            for p in range(scenario.parties)
        )
        terms.append(MarginalTerm(settings, outcomes, random_rational(rng)))
    return make_expression(scenario, terms)


def product_distribution_probability(tables, settings, outcomes):
    """P(outcomes | settings) under independent per-(party, setting) tables.

    tables[p][s][o] is the exact probability that party p's setting s yields
    outcome o.
    """
    value = Fraction(1)
    for p, (s, o) in enumerate(zip(settings, outcomes)):
        value *= tables[p][s][o]
    return value


def evaluate_probability_expression(expr, tables):
    return sum(
        (
            c * product_distribution_probability(tables, settings, outcomes)
            for (settings, outcomes), c in expr.terms.items()
        ),
        Fraction(0),
    )


def evaluate_correlator_expression(expr, tables):
    total = Fraction(0)
    for settings, c in expr.terms.items():
        correlator = Fraction(0)
        for outcomes in product((0, 1), repeat=len(settings)):
            sign = -1 if outcomes.count(0) % 2 else 1
            correlator += sign * product_distribution_probability(
                tables, settings, outcomes
            )
        total += c * correlator
    return total


def random_outcome_tables(rng, scenario):
    """Random exact product distribution over outcomes for every slot."""
    tables = []
    for p in range(scenario.parties):
        rows = []
        for n in scenario.outcomes_per_setting[p]:
            raw = [int(rng.integers(0, 10)) + 1 for _ in range(n)]
            total = sum(raw)
            rows.append(tuple(Fraction(x, total) for x in raw))
        tables.append(tuple(rows))
    return tuple(tables)
