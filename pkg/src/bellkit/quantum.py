"""Born-rule evaluation for small multi-qubit systems under binary measurements.

Conventions, fixed so that amplitude-level fixtures are reproducible:

* party 0 is the leftmost tensor factor, and basis index 0 is the spin-up
  (+Z) state, so a three-party basis state reads ``|o0 o1 o2>``;
* a measurement setting is a Bloch unit vector ``n`` with observable ``n . sigma``;
  outcome 1 projects onto the +1 eigenspace ``(I + n.sigma)/2`` and outcome 0
  onto the -1 eigenspace, the sign convention under which the all-ones
  outcome enters a correlator with positive sign;
* probabilities always go through projector expectation values, never through
  amplitude shortcuts, so pure and mixed states share one code path.

Dense complex algebra only; dimensions are capped at 2^10.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    ParseError,
    ScenarioMismatchError,
)
from .lhv import DEFAULT_ENUMERATION_CAP, local_bounds
from .scenario import (
    BellExpression,
    CorrelatorExpression,
    Expression,
    Scenario,
    as_probability_form,
)

MAX_PARTIES = 10
STATE_ATOL = 1e-12
EIGENVALUE_FLOOR = -1e-10

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_IDENTITY = np.eye(2, dtype=complex)


def _parties_from_dim(dim: int, what: str) -> int:
    parties = int(round(math.log2(dim))) if dim > 0 else 0
    if dim <= 1 or 2**parties != dim:
        raise DimensionMismatchError(f"{what} dimension {dim} is not a power of two")
    if parties > MAX_PARTIES:
        raise DimensionMismatchError(
            f"{what} spans {parties} qubits; dense algebra is capped at {MAX_PARTIES}"
        )
    return parties


@dataclass(frozen=True, eq=False)
class PureState:
    """Complex amplitudes over the computational product basis, unit norm."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        _parties_from_dim(amplitudes.size, "state")
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > STATE_ATOL:
            raise DimensionMismatchError(f"state norm {norm!r} is not 1 within {STATE_ATOL}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def parties(self) -> int:
        return int(round(math.log2(self.dim)))

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix on qubits."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"density matrix must be square, got {matrix.shape}")
        _parties_from_dim(matrix.shape[0], "density matrix")
        if float(np.max(np.abs(matrix - matrix.conj().T))) > STATE_ATOL:
            raise DimensionMismatchError("density matrix is not Hermitian within 1e-12")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > STATE_ATOL:
            raise DimensionMismatchError(f"density matrix trace {trace!r} is not 1 within 1e-12")
        smallest = float(np.min(np.linalg.eigvalsh(matrix)))
        if smallest < EIGENVALUE_FLOOR:
            raise DimensionMismatchError(
                f"density matrix has eigenvalue {smallest!r} below {EIGENVALUE_FLOOR}"
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def parties(self) -> int:
        return int(round(math.log2(self.dim)))


State = Union[PureState, DensityMatrix]


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """Per party, per setting, the Bloch vector of a binary +/-1 observable."""

    bloch: tuple

    def __post_init__(self):
        rows = []
        for party, row in enumerate(self.bloch):
            vectors = []
            for setting, vector in enumerate(row):
                vector = tuple(float(x) for x in vector)
                if len(vector) != 3:
                    raise DimensionMismatchError(
                        f"party {party} setting {setting}: Bloch vector needs 3 components"
                    )
                norm = math.sqrt(sum(x * x for x in vector))
                if abs(norm - 1.0) > STATE_ATOL:
                    raise DimensionMismatchError(
                        f"party {party} setting {setting}: Bloch norm {norm!r} is not 1"
                    )
                vectors.append(vector)
            if not vectors:
                raise DimensionMismatchError(f"party {party} has no settings")
            rows.append(tuple(vectors))
        if not rows:
            raise DimensionMismatchError("model has no parties")
        if len(rows) > MAX_PARTIES:
            raise DimensionMismatchError(f"models are capped at {MAX_PARTIES} parties")
        object.__setattr__(self, "bloch", tuple(rows))

    @property
    def parties(self) -> int:
        return len(self.bloch)

    @property
    def settings_per_party(self) -> tuple:
        return tuple(len(row) for row in self.bloch)

    def scenario(self) -> Scenario:
        """The binary scenario this model measures."""
        settings = self.settings_per_party
        return Scenario(
            self.parties, settings, tuple((2,) * n for n in settings)
        )

    def observable(self, party: int, setting: int) -> np.ndarray:
        nx, ny, nz = self.bloch[party][setting]
        return nx * PAULI_X + ny * PAULI_Y + nz * PAULI_Z

    def projector(self, party: int, setting: int, outcome: int) -> np.ndarray:
        if outcome not in (0, 1):
            raise DimensionMismatchError(f"outcome must be 0 or 1, got {outcome}")
        sign = 1.0 if outcome == 1 else -1.0
        return (_IDENTITY + sign * self.observable(party, setting)) / 2.0


def ghz_state(parties: int) -> PureState:
    """Equal superposition of the all-up and all-down basis states."""
    if parties < 2:
        raise DimensionMismatchError("a GHZ state needs at least two parties")
    amplitudes = np.zeros(2**parties, dtype=complex)
    amplitudes[0] = amplitudes[-1] = 1.0 / math.sqrt(2.0)
    return PureState(amplitudes)


def paper_model() -> MeasurementModel:
    """Three parties, setting 0 measuring X and setting 1 measuring Y."""
    xy = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    return MeasurementModel((xy, xy, xy))


def _check_state_model(state: State, model: MeasurementModel) -> None:
    if state.parties != model.parties:
        raise DimensionMismatchError(
            f"state spans {state.parties} qubits but the model has {model.parties} parties"
        )


def _check_indices(model: MeasurementModel, settings, outcomes=None) -> tuple:
    settings = tuple(int(s) for s in settings)
    if len(settings) != model.parties:
        raise DimensionMismatchError(
            f"expected {model.parties} setting indices, got {len(settings)}"
        )
    for party, s in enumerate(settings):
        if not 0 <= s < len(model.bloch[party]):
            raise DimensionMismatchError(f"party {party}: setting {s} out of range")
    if outcomes is None:
        return settings, None
    outcomes = tuple(int(o) for o in outcomes)
    if len(outcomes) != model.parties:
        raise DimensionMismatchError(
            f"expected {model.parties} outcome labels, got {len(outcomes)}"
        )
    for party, o in enumerate(outcomes):
        if o not in (0, 1):
            raise DimensionMismatchError(f"party {party}: outcome {o} must be 0 or 1")
    return settings, outcomes


def _joint_projector(model: MeasurementModel, settings, outcomes) -> np.ndarray:
    projector = model.projector(0, settings[0], outcomes[0])
    for party in range(1, model.parties):
        projector = np.kron(projector, model.projector(party, settings[party], outcomes[party]))
    return projector


def joint_probability(
    state: State, model: MeasurementModel, settings: Sequence[int], outcomes: Sequence[int]
) -> float:
    """Born probability of one outcome tuple under one setting choice.

    Computed as the expectation value of the tensor-product projector; the
    result is clamped to [0, 1] against sub-1e-15 rounding excursions.
    """
    _check_state_model(state, model)
    settings, outcomes = _check_indices(model, settings, outcomes)
    projector = _joint_projector(model, settings, outcomes)
    if isinstance(state, PureState):
        value = float(np.real(np.vdot(state.amplitudes, projector @ state.amplitudes)))
    else:
        value = float(np.real(np.trace(state.matrix @ projector)))
    return min(1.0, max(0.0, value))


def correlator(state: State, model: MeasurementModel, settings: Sequence[int]) -> float:
    """Signed sum of joint probabilities: outcome 1 counts +1, outcome 0 counts -1."""
    _check_state_model(state, model)
    settings, _ = _check_indices(model, settings)
    total = 0.0
    for index in range(2**model.parties):
        outcomes = tuple((index >> (model.parties - 1 - p)) & 1 for p in range(model.parties))
        sign = -1.0 if outcomes.count(0) % 2 else 1.0
        total += sign * joint_probability(state, model, settings, outcomes)
    return total


@dataclass(frozen=True)
class TermContribution:
    """One expression term evaluated on a state: term value and weighted share."""

    settings: tuple
    outcomes: Optional[tuple]  # None for correlator terms
    coefficient: Fraction
    term_value: float  # probability, or correlator for E terms
    contribution: float


@dataclass(frozen=True)
class ExpressionValue:
    value: float
    terms: tuple

    @property
    def breakdown(self) -> tuple:
        """Per-term contributions, in the expression's term order."""
        return tuple(t.contribution for t in self.terms)


def _check_expression_model(expr: Expression, model: MeasurementModel) -> None:
    if expr.scenario != model.scenario():
        raise ScenarioMismatchError(
            "expression scenario does not match the measurement model"
        )


def expression_value(expr: Expression, state: State, model: MeasurementModel) -> ExpressionValue:
    """Evaluate an expression termwise, keeping the per-term breakdown.

    Terms are visited in the expression's stored order, so builtin
    expressions report their contributions in their declared term order.
    """
    _check_state_model(state, model)
    _check_expression_model(expr, model)
    contributions = []
    if isinstance(expr, CorrelatorExpression):
        for settings, coefficient in expr.terms.items():
            term_value = correlator(state, model, settings)
            contributions.append(
                TermContribution(
                    settings, None, coefficient, term_value, float(coefficient) * term_value
                )
            )
    else:
        for (settings, outcomes), coefficient in expr.terms.items():
            term_value = joint_probability(state, model, settings, outcomes)
            contributions.append(
                TermContribution(
                    settings, outcomes, coefficient, term_value, float(coefficient) * term_value
                )
            )
    total = math.fsum(t.contribution for t in contributions)
    return ExpressionValue(total, tuple(contributions))


def mix_with_white_noise(state: PureState, p: float) -> DensityMatrix:
    """(1-p) times the pure state plus p times the maximally mixed state."""
    if isinstance(state, DensityMatrix):
        raise DimensionMismatchError("white-noise mixing starts from a pure state")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DimensionMismatchError(f"noise fraction must lie in [0, 1], got {p}")
    dim = state.dim
    matrix = (1.0 - p) * state.density() + (p / dim) * np.eye(dim, dtype=complex)
    return DensityMatrix(matrix)


@dataclass(frozen=True)
class ViolationReport:
    """Quantum value against the exact local bound of the same expression.

    With ``magnitude`` set, both sides are magnitudes: |quantum value| against
    max(|local max|, |local min|).  The factor is absent when the local bound
    is not positive.
    """

    quantum_value: float
    local_max: Fraction
    violation_factor: Optional[float]
    violation_amount: float
    violated: bool
    magnitude: bool


def violation_report(
    expr: Expression,
    state: State,
    model: MeasurementModel,
    magnitude: bool = False,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> ViolationReport:
    value = expression_value(expr, state, model).value
    bounds = local_bounds(as_probability_form(expr), cap)
    if magnitude:
        quantum = abs(value)
        local = bounds.magnitude
    else:
        quantum = value
        local = bounds.max
    factor = quantum / float(local) if local > 0 else None
    amount = quantum - float(local)
    return ViolationReport(quantum, local, factor, amount, amount > 0, magnitude)


def _bloch_from_angles(theta: float, phi: float) -> tuple:
    return (
        math.sin(theta) * math.cos(phi),
        math.sin(theta) * math.sin(phi),
        math.cos(theta),
    )


def parse_model(text: str) -> tuple:
    """Parse a JSON model document into (state, measurement model).

    Schema::

        {
          "state": "ghz" | {"amplitudes": [[re, im], ...]},
          "measurements": [
            [{"bloch": [x, y, z]} | {"angles": [theta, phi]}, ...],   # party 0
            ...
          ]
        }

    The amplitude list must have length 2^parties, ordered with party 0 as
    the leftmost tensor factor and basis index 0 as spin-up.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"model document is not valid JSON: {exc.msg}", exc.lineno, exc.colno)
    if not isinstance(document, dict):
        raise ParseError("model document must be a JSON object")
    try:
        state_spec = document["state"]
        measurement_spec = document["measurements"]
    except KeyError as exc:
        raise ParseError(f"model document is missing the {exc.args[0]!r} key") from None

    rows = []
    if not isinstance(measurement_spec, list) or not measurement_spec:
        raise ParseError("'measurements' must be a non-empty list of per-party lists")
    for party, row in enumerate(measurement_spec):
        if not isinstance(row, list) or not row:
            raise ParseError(f"party {party}: expected a non-empty list of settings")
        vectors = []
        for setting, entry in enumerate(row):
            if not isinstance(entry, dict) or len(entry) != 1:
                raise ParseError(
                    f"party {party} setting {setting}: expected "
                    "{'bloch': [x, y, z]} or {'angles': [theta, phi]}"
                )
            if "bloch" in entry:
                vectors.append(tuple(float(x) for x in entry["bloch"]))
            elif "angles" in entry:
                theta, phi = (float(x) for x in entry["angles"])
                vectors.append(_bloch_from_angles(theta, phi))
            else:
                raise ParseError(
                    f"party {party} setting {setting}: unknown measurement key "
                    f"{next(iter(entry))!r}"
                )
        rows.append(tuple(vectors))
    try:
        model = MeasurementModel(tuple(rows))
    except DimensionMismatchError as exc:
        raise ParseError(str(exc)) from None

    if state_spec == "ghz":
        state: State = ghz_state(model.parties)
    elif isinstance(state_spec, dict) and "amplitudes" in state_spec:
        pairs = state_spec["amplitudes"]
        try:
            amplitudes = np.array(
                [complex(float(re), float(im)) for re, im in pairs], dtype=complex
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad amplitude list: {exc}") from None
        try:
            state = PureState(amplitudes)
        except DimensionMismatchError as exc:
            raise ParseError(str(exc)) from None
        if state.parties != model.parties:
            raise ParseError(
                f"state spans {state.parties} qubits but the model has "
                f"{model.parties} parties"
            )
    else:
        raise ParseError("'state' must be \"ghz\" or {'amplitudes': [[re, im], ...]}")
    return state, model
