"""Registry of named Bell expressions shipped with the toolkit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import UnknownBuiltinError
from .scenario import (
    BellExpression,
    CorrelatorExpression,
    Expression,
    MarginalTerm,
    Scenario,
    make_correlator_expression,
    make_expression,
)

TRIPARTITE_BINARY = Scenario.uniform(3, 2, 2)

# (coefficient, settings, outcomes); setting 0 is the unprimed measurement of
# each party (A, B, C), setting 1 the primed one (A', B', C').
_G_PAPER_TERMS = (
    (1, (0, 0, 0), (1, 1, 1)),
    (5, (0, 0, 0), (1, 0, 0)),
    (5, (0, 0, 0), (0, 0, 1)),
    (1, (0, 0, 0), (1, 0, 1)),
    (4, (0, 0, 0), (0, 0, 0)),
    (4, (0, 0, 0), (0, 1, 0)),
    (1, (0, 1, 1), (0, 0, 0)),
    (1, (0, 1, 1), (0, 1, 1)),
    (-4, (0, 1, 1), (0, 0, 1)),
    (-4, (0, 1, 1), (0, 1, 0)),
    (-1, (1, 1, 0), (0, 0, 1)),
    (-1, (1, 1, 0), (1, 1, 1)),
    (-4, (1, 1, 0), (0, 1, 0)),
    (-4, (1, 1, 0), (1, 0, 0)),
    (-5, (1, 0, 1), (1, 0, 0)),
    (-5, (1, 0, 1), (0, 0, 1)),
    (1, (1, 1, 1), (1, 1, 0)),
    (1, (1, 1, 1), (0, 0, 1)),
    (-4, (1, 1, 1), (1, 1, 1)),
    (-4, (1, 1, 1), (0, 0, 0)),
)


def _g_paper() -> BellExpression:
    return make_expression(
        TRIPARTITE_BINARY,
        [MarginalTerm(settings, outcomes, c) for c, settings, outcomes in _G_PAPER_TERMS],
    )


def _mermin() -> CorrelatorExpression:
    # Signed linear form E(A,B',C') + E(A',B,C') + E(A',B',C) - E(A,B,C); the
    # customary inequality takes its absolute value, which the analysis layer
    # applies when magnitudes are requested.
    return make_correlator_expression(
        TRIPARTITE_BINARY,
        [((0, 1, 1), 1), ((1, 0, 1), 1), ((1, 1, 0), 1), ((0, 0, 0), -1)],
    )


@dataclass(frozen=True)
class BuiltinEntry:
    factory: Callable[[], Expression]
    magnitude: bool  # whether analyses report this expression by |value|
    summary: str


_REGISTRY: dict = {
    "g-paper": BuiltinEntry(
        _g_paper, False, "20-term tripartite expression with local bound 1"
    ),
    "mermin": BuiltinEntry(
        _mermin, True, "tripartite correlator inequality, reported by magnitude"
    ),
}


def builtin_names() -> tuple:
    return tuple(sorted(_REGISTRY))


def builtin_expression(name: str) -> Expression:
    """Construct a fresh instance of a registered expression."""
    try:
        entry = _REGISTRY[name]
    except KeyError:
        raise UnknownBuiltinError(
            f"unknown builtin {name!r}; available: {', '.join(builtin_names())}"
        ) from None
    return entry.factory()


def builtin_magnitude(name: str) -> bool:
    """Whether analyses of this builtin report magnitudes by default."""
    try:
        return _REGISTRY[name].magnitude
    except KeyError:
        raise UnknownBuiltinError(
            f"unknown builtin {name!r}; available: {', '.join(builtin_names())}"
        ) from None


def register_builtin(
    name: str, factory: Callable[[], Expression], magnitude: bool = False, summary: str = ""
) -> None:
    """Add an expression to the registry; names must be unique."""
    if name in _REGISTRY:
        raise UnknownBuiltinError(f"builtin {name!r} is already registered")
    _REGISTRY[name] = BuiltinEntry(factory, magnitude, summary)
