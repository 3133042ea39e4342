import json
import math
from itertools import product

import numpy as np
import pytest

from bellkit import (
    DensityMatrix,
    DimensionMismatchError,
    MarginalTerm,
    MeasurementModel,
    ParseError,
    PureState,
    Scenario,
    ScenarioMismatchError,
    builtin_expression,
    correlator,
    expression_value,
    ghz_state,
    joint_probability,
    make_expression,
    mix_with_white_noise,
    paper_model,
    parse_model,
    violation_report,
)

import oracles

TRI = Scenario.uniform(3, 2, 2)

# per-term values of the g-paper expression on GHZ with the X/Y model,
# in the builtin's term order
G_BREAKDOWN = (
    [0.25, 1.25, 1.25, 0.0, 0.0, 1.0, 0.25, 0.25]
    + [0.0] * 8
    + [0.125, 0.125, -0.5, -0.5]
)


class TestStates:
    def test_ghz_amplitudes(self, ghz3):
        amplitudes = ghz3.amplitudes
        assert amplitudes[0] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
        assert amplitudes[-1] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
        assert np.all(amplitudes[1:-1] == 0)
        assert np.linalg.norm(amplitudes) == pytest.approx(1.0, abs=1e-15)

    def test_ghz_needs_two_parties(self):
        with pytest.raises(DimensionMismatchError):
            ghz_state(1)

    def test_pure_state_norm_checked(self):
        with pytest.raises(DimensionMismatchError, match="norm"):
            PureState(np.array([1.0, 1.0], dtype=complex))

    def test_pure_state_dimension_checked(self):
        with pytest.raises(DimensionMismatchError, match="power of two"):
            PureState(np.array([1.0, 0.0, 0.0], dtype=complex))

    def test_density_matrix_validation(self):
        with pytest.raises(DimensionMismatchError, match="Hermitian"):
            DensityMatrix(np.array([[0.5, 1.0], [0.0, 0.5]], dtype=complex))
        with pytest.raises(DimensionMismatchError, match="trace"):
            DensityMatrix(np.eye(2, dtype=complex))
        with pytest.raises(DimensionMismatchError, match="eigenvalue"):
            DensityMatrix(np.diag([1.5, -0.5]).astype(complex))

    def test_states_are_immutable(self, ghz3):
        with pytest.raises(ValueError):
            ghz3.amplitudes[0] = 0.0


class TestModel:
    def test_paper_model_vectors(self, xy_model):
        for party in range(3):
            assert xy_model.bloch[party][0] == (1.0, 0.0, 0.0)
            assert xy_model.bloch[party][1] == (0.0, 1.0, 0.0)

    def test_unit_norms(self, xy_model):
        for row in xy_model.bloch:
            for vector in row:
                assert math.isclose(sum(x * x for x in vector), 1.0, abs_tol=1e-15)

    def test_bloch_norm_checked(self):
        with pytest.raises(DimensionMismatchError, match="norm"):
            MeasurementModel((((1.0, 1.0, 0.0),),))

    def test_scenario_derivation(self, xy_model):
        assert xy_model.scenario() == TRI


class TestJointProbability:
    def test_xxx_all_ones(self, ghz3, xy_model):
        assert joint_probability(ghz3, xy_model, (0, 0, 0), (1, 1, 1)) == pytest.approx(
            0.25, abs=1e-12
        )

    def test_xxx_odd_excluded(self, ghz3, xy_model):
        assert joint_probability(ghz3, xy_model, (0, 0, 0), (1, 0, 1)) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_yyy_uniform(self, ghz3, xy_model):
        for outcomes in product((0, 1), repeat=3):
            assert joint_probability(
                ghz3, xy_model, (1, 1, 1), outcomes
            ) == pytest.approx(0.125, abs=1e-12)

    def test_dimension_mismatch(self, xy_model):
        with pytest.raises(DimensionMismatchError):
            joint_probability(ghz_state(2), xy_model, (0, 0, 0), (0, 0, 0))

    @pytest.mark.parametrize("seed", range(20))
    def test_normalization_on_random_states_and_models(self, seed):
        rng = np.random.default_rng(1000 + seed)
        state = PureState(oracles.random_pure_amplitudes(rng, 3))
        model = oracles.random_model(rng)
        for settings in product((0, 1), repeat=3):
            total = sum(
                joint_probability(state, model, settings, outcomes)
                for outcomes in product((0, 1), repeat=3)
            )
            assert total == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_no_signaling_marginals(self, seed):
        rng = np.random.default_rng(2000 + seed)
        state = PureState(oracles.random_pure_amplitudes(rng, 3))
        model = oracles.random_model(rng)
        table = {
            settings: {
                outcomes: joint_probability(state, model, settings, outcomes)
                for outcomes in product((0, 1), repeat=3)
            }
            for settings in product((0, 1), repeat=3)
        }
        parties = (0, 1, 2)
        for kept in [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]:
            dropped = [p for p in parties if p not in kept]
            for kept_settings in product((0, 1), repeat=len(kept)):
                for kept_outcomes in product((0, 1), repeat=len(kept)):
                    marginals = []
                    for other_settings in product((0, 1), repeat=len(dropped)):
                        settings = [0, 0, 0]
                        for p, s in zip(kept, kept_settings):
                            settings[p] = s
                        for p, s in zip(dropped, other_settings):
                            settings[p] = s
                        total = 0.0
                        for other_outcomes in product((0, 1), repeat=len(dropped)):
                            outcomes = [0, 0, 0]
                            for p, o in zip(kept, kept_outcomes):
                                outcomes[p] = o
                            for p, o in zip(dropped, other_outcomes):
                                outcomes[p] = o
                            total += table[tuple(settings)][tuple(outcomes)]
                        marginals.append(total)
                    assert max(marginals) - min(marginals) <= 1e-12


class TestCorrelator:
    def test_ghz_stabilizer_values(self, ghz3, xy_model):
        assert correlator(ghz3, xy_model, (0, 0, 0)) == pytest.approx(1.0, abs=1e-12)
        assert correlator(ghz3, xy_model, (0, 1, 1)) == pytest.approx(-1.0, abs=1e-12)
        assert correlator(ghz3, xy_model, (1, 1, 1)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_observable_expectation_oracle(self, seed):
        rng = np.random.default_rng(3000 + seed)
        amplitudes = oracles.random_pure_amplitudes(rng, 3)
        model = oracles.random_model(rng)
        state = PureState(amplitudes)
        for settings in product((0, 1), repeat=3):
            expected = oracles.observable_expectation(
                amplitudes, [model.bloch[p][settings[p]] for p in range(3)]
            )
            assert correlator(state, model, settings) == pytest.approx(
                expected, abs=1e-12
            )


class TestExpressionValue:
    def test_g_paper_value_and_breakdown(self, g_expr, ghz3, xy_model):
        valuation = expression_value(g_expr, ghz3, xy_model)
        assert valuation.value == pytest.approx(3.5, abs=1e-9)
        assert len(valuation.breakdown) == 20
        for got, expected in zip(valuation.breakdown, G_BREAKDOWN):
            assert got == pytest.approx(expected, abs=1e-9)

    def test_signed_mermin_value(self, mermin_expr, ghz3, xy_model):
        valuation = expression_value(mermin_expr, ghz3, xy_model)
        assert valuation.value == pytest.approx(-4.0, abs=1e-9)
        assert abs(valuation.value) == pytest.approx(4.0, abs=1e-9)

    def test_g_paper_on_maximally_mixed_state(self, g_expr, xy_model):
        mixed = DensityMatrix(np.eye(8, dtype=complex) / 8)
        valuation = expression_value(g_expr, mixed, xy_model)
        assert valuation.value == pytest.approx(-1.5, abs=1e-12)

    def test_scenario_mismatch(self, g_expr, ghz3):
        lopsided = MeasurementModel(
            (((1.0, 0.0, 0.0),), ((1.0, 0.0, 0.0),), ((1.0, 0.0, 0.0),))
        )
        with pytest.raises(ScenarioMismatchError):
            expression_value(g_expr, ghz3, lopsided)


class TestWhiteNoiseMixing:
    def test_zero_noise_preserves_probabilities(self, ghz3, xy_model):
        mixed = mix_with_white_noise(ghz3, 0.0)
        for settings in product((0, 1), repeat=3):
            for outcomes in product((0, 1), repeat=3):
                assert joint_probability(
                    mixed, xy_model, settings, outcomes
                ) == pytest.approx(
                    joint_probability(ghz3, xy_model, settings, outcomes), abs=1e-12
                )

    def test_full_noise_is_uniform(self, ghz3, xy_model):
        mixed = mix_with_white_noise(ghz3, 1.0)
        for outcomes in product((0, 1), repeat=3):
            assert joint_probability(
                mixed, xy_model, (0, 1, 0), outcomes
            ) == pytest.approx(0.125, abs=1e-12)

    def test_half_noise_g_value(self, g_expr, ghz3, xy_model):
        mixed = mix_with_white_noise(ghz3, 0.5)
        valuation = expression_value(g_expr, mixed, xy_model)
        # linearity: (1-p) * 3.5 + p * (-12/8)
        assert valuation.value == pytest.approx(1.0, abs=1e-9)

    def test_p_out_of_range(self, ghz3):
        with pytest.raises(DimensionMismatchError):
            mix_with_white_noise(ghz3, 1.5)
        with pytest.raises(DimensionMismatchError):
            mix_with_white_noise(ghz3, -0.1)

    def test_value_is_affine_in_p(self, g_expr, ghz3, xy_model):
        points = []
        for p in (0.1, 0.45, 0.8):
            mixed = mix_with_white_noise(ghz3, p)
            points.append((p, expression_value(g_expr, mixed, xy_model).value))
        (x0, y0), (x1, y1), (x2, y2) = points
        interpolated = y0 + (y2 - y0) * (x1 - x0) / (x2 - x0)
        assert abs(interpolated - y1) < 1e-10


class TestViolationReport:
    def test_g_paper(self, g_expr, ghz3, xy_model):
        report = violation_report(g_expr, ghz3, xy_model)
        assert report.quantum_value == pytest.approx(3.5, abs=1e-9)
        assert report.local_max == 1
        assert report.violation_factor == pytest.approx(3.5, abs=1e-9)
        assert report.violation_amount == pytest.approx(2.5, abs=1e-9)
        assert report.violated

    def test_mermin_by_magnitude(self, mermin_expr, ghz3, xy_model):
        report = violation_report(mermin_expr, ghz3, xy_model, magnitude=True)
        assert report.quantum_value == pytest.approx(4.0, abs=1e-9)
        assert report.local_max == 2
        assert report.violation_factor == pytest.approx(2.0, abs=1e-9)
        assert report.violation_amount == pytest.approx(2.0, abs=1e-9)

    def test_non_violating_expression(self, ghz3, xy_model):
        expr = make_expression(TRI, [MarginalTerm((0, 0, 0), (1, 1, 1), 1)])
        report = violation_report(expr, ghz3, xy_model)
        assert report.violation_amount < 0
        assert report.violation_factor < 1
        assert not report.violated

    def test_factor_absent_when_local_max_not_positive(self, ghz3, xy_model):
        expr = make_expression(TRI, [])
        report = violation_report(expr, ghz3, xy_model)
        assert report.violation_factor is None
        assert not report.violated


class TestModelDocuments:
    def test_ghz_with_bloch_vectors(self, g_expr, xy_model):
        document = {
            "state": "ghz",
            "measurements": [
                [{"bloch": [1, 0, 0]}, {"bloch": [0, 1, 0]}] for _ in range(3)
            ],
        }
        state, model = parse_model(json.dumps(document))
        assert isinstance(state, PureState)
        assert model.bloch == xy_model.bloch
        assert expression_value(g_expr, state, model).value == pytest.approx(
            3.5, abs=1e-9
        )

    def test_angle_entries(self):
        document = {
            "state": "ghz",
            "measurements": [
                [{"angles": [math.pi / 2, 0.0]}, {"angles": [math.pi / 2, math.pi / 2]}]
                for _ in range(3)
            ],
        }
        _, model = parse_model(json.dumps(document))
        for party in range(3):
            assert model.bloch[party][0][0] == pytest.approx(1.0, abs=1e-12)
            assert model.bloch[party][1][1] == pytest.approx(1.0, abs=1e-12)

    def test_explicit_amplitudes(self):
        amplitude = 1 / math.sqrt(2)
        document = {
            "state": {"amplitudes": [[amplitude, 0], [0, 0], [0, 0], [0, -amplitude]]},
            "measurements": [[{"bloch": [0, 0, 1]}] for _ in range(2)],
        }
        state, model = parse_model(json.dumps(document))
        assert state.parties == 2
        assert model.parties == 2

    @pytest.mark.parametrize(
        "document,match",
        [
            ("not json", "not valid JSON"),
            ("[]", "JSON object"),
            ('{"state": "ghz"}', "measurements"),
            ('{"measurements": [[{"bloch": [1, 0, 0]}]]}', "state"),
            (
                '{"state": "ghz", "measurements": [[{"spin": [1, 0, 0]}]]}',
                "unknown measurement key",
            ),
            (
                '{"state": "w", "measurements": [[{"bloch": [1, 0, 0]}], [{"bloch": [1, 0, 0]}]]}',
                "state",
            ),
            (
                '{"state": {"amplitudes": [[1, 0], [0, 0]]}, '
                '"measurements": [[{"bloch": [1, 0, 0]}], [{"bloch": [1, 0, 0]}]]}',
                "1 qubits but the model has 2",
            ),
        ],
    )
    def test_malformed_documents(self, document, match):
        with pytest.raises(ParseError, match=match):
            parse_model(document)
