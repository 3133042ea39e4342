"""Seeded random-restart search over measurement angles for a fixed state.

Measurements stay rank-1 projective qubit observables, parameterized per
(party, setting) by polar angles with Bloch vector
(sin t cos f, sin t sin f, cos t).  Each restart runs a Nelder-Mead simplex
from an independently seeded random start; one extra start is pinned at the
in-plane X/Y angles (t = pi/2, f = s * pi/2 for setting s).  Restart
generators are keyed by (seed, restart index), so results are deterministic
for a given seed and independent of restart execution order; ties go to the
earliest start.

The search objective uses an eigenbasis contraction that is fast for pure
states; the returned best value is always re-evaluated through the canonical
projector-based path, so the reported number never depends on the shortcut.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigError, DimensionMismatchError, UnsupportedScenarioError
from .quantum import MeasurementModel, PureState, State, expression_value
from .scenario import CorrelatorExpression, Expression


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 20  # random restarts; the pinned X/Y start always runs
    seed: int = 0
    tolerance: float = 1e-9  # value tolerance passed to the simplex
    max_evals: int = 6000  # objective-evaluation budget per start

    def __post_init__(self):
        if self.restarts < 0:
            raise ConfigError(f"restarts must be >= 0, got {self.restarts}")
        if self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_evals < 1:
            raise ConfigError(f"max_evals must be >= 1, got {self.max_evals}")


@dataclass(frozen=True, eq=False)
class AngleParameterization:
    """(theta, phi) per party per setting; Bloch vectors are unit by construction."""

    angles: tuple

    def __post_init__(self):
        object.__setattr__(
            self,
            "angles",
            tuple(
                tuple((float(t), float(f)) for t, f in row) for row in self.angles
            ),
        )

    def __eq__(self, other):
        if not isinstance(other, AngleParameterization):
            return NotImplemented
        return self.angles == other.angles

    __hash__ = None

    @property
    def settings_per_party(self) -> tuple:
        return tuple(len(row) for row in self.angles)

    def to_model(self) -> MeasurementModel:
        return MeasurementModel(
            tuple(
                tuple(
                    (
                        math.sin(t) * math.cos(f),
                        math.sin(t) * math.sin(f),
                        math.cos(t),
                    )
                    for t, f in row
                )
                for row in self.angles
            )
        )

    def flatten(self) -> np.ndarray:
        return np.array(
            [x for row in self.angles for pair in row for x in pair], dtype=float
        )

    @classmethod
    def from_flat(cls, values, settings_per_party) -> "AngleParameterization":
        values = list(float(x) for x in values)
        if len(values) != 2 * sum(settings_per_party):
            raise ConfigError(
                f"expected {2 * sum(settings_per_party)} angles, got {len(values)}"
            )
        rows = []
        cursor = 0
        for n_settings in settings_per_party:
            row = []
            for _ in range(n_settings):
                row.append((values[cursor], values[cursor + 1]))
                cursor += 2
            rows.append(tuple(row))
        return cls(tuple(rows))

    @classmethod
    def xy_plane_start(cls, settings_per_party) -> "AngleParameterization":
        """Equatorial angles: setting s points at azimuth s * pi/2 (X, then Y)."""
        return cls(
            tuple(
                tuple((math.pi / 2, s * math.pi / 2) for s in range(n))
                for n in settings_per_party
            )
        )


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    """Best value found (a lower bound on the quantum supremum), and how."""

    best_value: float
    best_angles: AngleParameterization
    restarts: int
    evaluations: int
    seed: int

    def __eq__(self, other):
        if not isinstance(other, OptimizationResult):
            return NotImplemented
        return (
            self.best_value == other.best_value
            and self.best_angles == other.best_angles
            and self.restarts == other.restarts
            and self.evaluations == other.evaluations
            and self.seed == other.seed
        )

    __hash__ = None


def _eigenrow_matrix(theta: float, phi: float) -> np.ndarray:
    """Rows are conjugated eigenvectors of n.sigma: row 0 the -1 branch, row 1 the +1."""
    half = theta / 2.0
    c = math.cos(half)
    s = math.sin(half)
    phase = cmath.exp(1j * phi)
    return np.array(
        [[-phase * s, c], [c, phase.conjugate() * s]], dtype=complex
    )


def _pure_state_value_fn(
    expr: Expression, state: PureState
) -> Callable[[np.ndarray], float]:
    """Fast evaluator for the search loop.

    One einsum contracts the state into every measurement eigenbasis at once,
    producing the joint outcome probabilities for all setting combinations;
    the expression is then a fixed weight tensor dotted against them.
    """
    parties = state.parties
    settings_per_party = expr.scenario.settings_per_party
    tensor = state.amplitudes.reshape((2,) * parties)

    # weights[s_0, .., s_k, o_0, .., o_k]: coefficient of P(outcomes | settings)
    weights = np.zeros(tuple(settings_per_party) + (2,) * parties)
    if isinstance(expr, CorrelatorExpression):
        for settings, coefficient in expr.terms.items():
            for outcomes in np.ndindex(*(2,) * parties):
                sign = -1.0 if outcomes.count(0) % 2 else 1.0
                weights[settings + outcomes] += float(coefficient) * sign
    else:
        for (settings, outcomes), coefficient in expr.terms.items():
            weights[settings + outcomes] += float(coefficient)
    flat_weights = weights.reshape(-1)

    # integer-labeled einsum: W_p[s_p, o_p, a_p] against state[a_0 .. a_k]
    operand_labels = []
    for party in range(parties):
        operand_labels.append([3 * party, 3 * party + 1, 3 * party + 2])
    state_label = [3 * party + 2 for party in range(parties)]
    output_label = [3 * party for party in range(parties)] + [
        3 * party + 1 for party in range(parties)
    ]

    def value(flat: np.ndarray) -> float:
        stacks = []
        cursor = 0
        for n_settings in settings_per_party:
            stack = np.empty((n_settings, 2, 2), dtype=complex)
            for s in range(n_settings):
                stack[s] = _eigenrow_matrix(flat[cursor], flat[cursor + 1])
                cursor += 2
            stacks.append(stack)
        operands: list = []
        for stack, labels in zip(stacks, operand_labels):
            operands.extend((stack, labels))
        operands.extend((tensor, state_label))
        amplitudes = np.einsum(*operands, output_label)
        probabilities = np.abs(amplitudes.reshape(-1)) ** 2
        return float(np.dot(flat_weights, probabilities))

    return value


def _generic_value_fn(
    expr: Expression, state: State, settings_per_party
) -> Callable[[np.ndarray], float]:
    def value(flat: np.ndarray) -> float:
        model = AngleParameterization.from_flat(flat, settings_per_party).to_model()
        return expression_value(expr, state, model).value

    return value


def optimize_measurements(
    expr: Expression,
    state: State,
    config: Optional[OptimizerConfig] = None,
    magnitude: bool = False,
) -> OptimizationResult:
    """Maximize the expression value (or its magnitude) over measurement angles.

    Deterministic for a fixed config; the best value across starts is
    reported, re-evaluated through the projector-based engine at the returned
    angles.  It is a lower bound on the quantum supremum, not a certificate.
    """
    if config is None:
        config = OptimizerConfig()
    scenario = expr.scenario
    if not scenario.is_binary:
        raise UnsupportedScenarioError("angle optimization needs binary outcomes")
    if state.parties != scenario.parties:
        raise DimensionMismatchError(
            f"state spans {state.parties} qubits but the expression has "
            f"{scenario.parties} parties"
        )
    settings_per_party = scenario.settings_per_party
    if isinstance(state, PureState):
        raw_value = _pure_state_value_fn(expr, state)
    else:
        raw_value = _generic_value_fn(expr, state, settings_per_party)

    evaluations = 0

    def objective(flat: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        value = raw_value(flat)
        return -(abs(value) if magnitude else value)

    slots = sum(settings_per_party)
    starts = [AngleParameterization.xy_plane_start(settings_per_party).flatten()]
    for index in range(config.restarts):
        rng = np.random.default_rng([config.seed, index])
        flat = np.empty(2 * slots)
        flat[0::2] = rng.uniform(0.0, math.pi, slots)
        flat[1::2] = rng.uniform(0.0, 2.0 * math.pi, slots)
        starts.append(flat)

    best_score = None
    best_flat = None
    for flat in starts:
        result = minimize(
            objective,
            flat,
            method="Nelder-Mead",
            options={
                "xatol": 1e-6,
                "fatol": config.tolerance,
                "maxfev": config.max_evals,
                "maxiter": config.max_evals,
            },
        )
        score = -float(result.fun)
        if best_score is None or score > best_score:
            best_score = score
            best_flat = np.array(result.x, dtype=float)

    best_angles = AngleParameterization.from_flat(best_flat, settings_per_party)
    final = expression_value(expr, state, best_angles.to_model()).value
    best_value = abs(final) if magnitude else final
    return OptimizationResult(
        best_value=best_value,
        best_angles=best_angles,
        restarts=config.restarts,
        evaluations=evaluations,
        seed=config.seed,
    )
