"""White-noise robustness: the mixing fraction at which a violation disappears.

Mixing a pure state with the maximally mixed state moves every joint
probability affinely in the mixing fraction p, so the expression value is
affine in p and the critical fraction has the closed form

    p = (Q - L) / (Q - S / 2^parties)

with Q the quantum value, L the local maximum, and S the coefficient sum of
the probability form (the value on the maximally mixed state times the number
of outcome cells).  A term-counting variant replaces S by the number of
positive terms minus the number of negative terms; both results are reported,
because the two only agree when every coefficient has unit magnitude, and a
disagreement is worth surfacing rather than hiding.

An independent bisection root scan cross-checks the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import DegenerateExpressionError, NoRootError, NoViolationError
from .lhv import DEFAULT_ENUMERATION_CAP, local_bounds
from .quantum import (
    MeasurementModel,
    PureState,
    State,
    expression_value,
    mix_with_white_noise,
)
from .scenario import Expression, as_probability_form

AGREEMENT_TOL = 1e-9

# quantum values are floats; margins inside this band count as zero-margin
# violations (tolerance 0) rather than as missing violations
MARGIN_TOL = 1e-9


def coefficient_sum(expr: Expression) -> Fraction:
    """Exact sum of probability-form coefficients (correlator input converts first).

    Equals 2^parties times the expression value on the maximally mixed state.
    """
    probability_form = as_probability_form(expr)
    return sum(probability_form.terms.values(), Fraction(0))


@dataclass(frozen=True)
class NoiseReport:
    """Critical white-noise fraction and the quantities that produce it.

    All fields describe the analyzed orientation: when ``magnitude`` is set
    and the signed quantum value is negative, the expression is negated first
    so that the violation is against the positive local bound.
    ``p_critical_term_count`` is the term-counting variant of the closed
    form (None when its denominator is not positive), and
    ``interpretations_agree`` records whether the two variants coincide
    within 1e-9.
    """

    p_critical: float
    quantum_value: float
    local_max: Fraction
    coefficient_sum: Fraction
    outcome_cells: int
    p_critical_term_count: Optional[float]
    positive_terms: int
    negative_terms: int
    interpretations_agree: bool
    magnitude: bool


def _analyzed_orientation(
    expr: Expression, state: State, model: MeasurementModel, magnitude: bool, cap: int
) -> tuple:
    """(probability form, quantum value, local bound) in the violating orientation."""
    probability_form = as_probability_form(expr)
    value = expression_value(expr, state, model).value
    bounds = local_bounds(probability_form, cap)
    if magnitude:
        if value < 0:
            return probability_form.scale(-1), -value, bounds.magnitude
        return probability_form, value, bounds.magnitude
    return probability_form, value, bounds.max


def white_noise_tolerance(
    expr: Expression,
    state: State,
    model: MeasurementModel,
    magnitude: bool = False,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> NoiseReport:
    """Closed-form critical fraction; requires an actual violation.

    The returned fraction is the unique p with
    (1-p) * Q + (p / 2^parties) * S = L, i.e. where the noisy value meets the
    local bound.  Margins within 1e-9 of zero count as zero-margin violations
    and give p = 0; clearly negative margins raise NoViolationError.
    """
    probability_form, quantum, local = _analyzed_orientation(
        expr, state, model, magnitude, cap
    )
    margin = quantum - float(local)
    if margin < -MARGIN_TOL:
        raise NoViolationError(
            f"quantum value {quantum} does not reach the local bound {local}; "
            "the noise tolerance is undefined"
        )
    cells = 2**expr.scenario.parties
    total = sum(probability_form.terms.values(), Fraction(0))
    denominator = quantum - float(total) / cells
    if denominator <= 0:
        # unreachable for honest quantum values: the uniform distribution is a
        # local model, so local >= S / cells; kept as a defensive guard
        raise DegenerateExpressionError(
            f"mixing denominator {denominator} is not positive"
        )
    p_critical = max(0.0, margin) / denominator

    positive = sum(1 for c in probability_form.terms.values() if c > 0)
    negative = sum(1 for c in probability_form.terms.values() if c < 0)
    denominator_tc = quantum - (positive - negative) / cells
    p_term_count = (
        max(0.0, margin) / denominator_tc if denominator_tc > 0 else None
    )
    agree = p_term_count is not None and abs(p_critical - p_term_count) <= AGREEMENT_TOL
    return NoiseReport(
        p_critical=p_critical,
        quantum_value=quantum,
        local_max=local,
        coefficient_sum=total,
        outcome_cells=cells,
        p_critical_term_count=p_term_count,
        positive_terms=positive,
        negative_terms=negative,
        interpretations_agree=agree,
        magnitude=magnitude,
    )


def tolerance_by_root_scan(
    expr: Expression,
    state: PureState,
    model: MeasurementModel,
    magnitude: bool = False,
    cap: int = DEFAULT_ENUMERATION_CAP,
    resolution: float = 1e-12,
) -> float:
    """Bisection on the mixing fraction, independent of the closed form.

    Solves value(noisy state at p) = local bound on p in [0, 1] down to the
    given interval width.  The noisy value is affine and decreasing across a
    violation, so a single sign change exists whenever the violation dies by
    p = 1.
    """
    bounds = local_bounds(as_probability_form(expr), cap)
    local = float(bounds.magnitude if magnitude else bounds.max)

    def overshoot(p: float) -> float:
        noisy = mix_with_white_noise(state, p)
        value = expression_value(expr, noisy, model).value
        return (abs(value) if magnitude else value) - local

    at_zero = overshoot(0.0)
    if at_zero < -MARGIN_TOL:
        raise NoViolationError(
            "no violation at p = 0; there is no crossing to scan for"
        )
    if at_zero <= 0:
        return 0.0  # zero-margin violation: the crossing sits at the start
    at_one = overshoot(1.0)
    if at_one > 0:
        raise NoRootError("the violation survives the whole interval; no root in [0, 1]")
    lo, hi = 0.0, 1.0
    while hi - lo > resolution:
        mid = (lo + hi) / 2.0
        if overshoot(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0
