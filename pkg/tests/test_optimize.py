import math

import numpy as np
import pytest

from bellkit import (
    AngleParameterization,
    ConfigError,
    DimensionMismatchError,
    OptimizerConfig,
    UnsupportedScenarioError,
    builtin_expression,
    expression_value,
    ghz_state,
    optimize_measurements,
    paper_model,
)
from bellkit.optimize import _pure_state_value_fn


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"restarts": -1},
            {"seed": -3},
            {"tolerance": 0.0},
            {"tolerance": -1e-9},
            {"max_evals": 0},
        ],
    )
    def test_invalid_configs(self, kwargs):
        with pytest.raises(ConfigError):
            OptimizerConfig(**kwargs)

    def test_defaults(self):
        config = OptimizerConfig()
        assert config.restarts == 20
        assert config.tolerance == 1e-9


class TestAngleParameterization:
    def test_xy_start_reproduces_the_paper_model(self):
        start = AngleParameterization.xy_plane_start((2, 2, 2))
        model = start.to_model()
        reference = paper_model()
        for party in range(3):
            for setting in range(2):
                got = model.bloch[party][setting]
                expected = reference.bloch[party][setting]
                assert all(
                    abs(g - e) < 1e-15 for g, e in zip(got, expected)
                ), (party, setting)

    def test_flatten_round_trip(self):
        start = AngleParameterization.xy_plane_start((2, 1))
        again = AngleParameterization.from_flat(start.flatten(), (2, 1))
        assert again == start

    def test_bloch_vectors_are_unit_norm_for_any_angles(self):
        rng = np.random.default_rng(0)
        angles = AngleParameterization.from_flat(rng.uniform(-9, 9, 12), (2, 2, 2))
        for row in angles.to_model().bloch:
            for vector in row:
                assert math.isclose(sum(x * x for x in vector), 1.0, abs_tol=1e-12)


class TestFastEvaluator:
    @pytest.mark.parametrize("name", ["g-paper", "mermin"])
    def test_matches_the_projector_path(self, name, ghz3):
        expr = builtin_expression(name)
        fast = _pure_state_value_fn(expr, ghz3)
        rng = np.random.default_rng(9)
        for _ in range(25):
            flat = np.empty(12)
            flat[0::2] = rng.uniform(0.0, math.pi, 6)
            flat[1::2] = rng.uniform(0.0, 2 * math.pi, 6)
            model = AngleParameterization.from_flat(flat, (2, 2, 2)).to_model()
            reference = expression_value(expr, ghz3, model).value
            assert fast(flat) == pytest.approx(reference, abs=1e-12)


class TestOptimization:
    def test_paper_start_alone_reproduces_the_quantum_value(self, g_expr, ghz3):
        result = optimize_measurements(g_expr, ghz3, OptimizerConfig(restarts=0))
        assert result.best_value == pytest.approx(3.5, abs=1e-9)
        assert result.restarts == 0
        assert result.evaluations > 0

    def test_best_value_is_the_reevaluated_value(self, g_expr, ghz3):
        result = optimize_measurements(g_expr, ghz3, OptimizerConfig(restarts=1))
        recomputed = expression_value(
            g_expr, ghz3, result.best_angles.to_model()
        ).value
        assert result.best_value == recomputed

    def test_mermin_magnitude_from_paper_start(self, mermin_expr, ghz3):
        result = optimize_measurements(
            mermin_expr, ghz3, OptimizerConfig(restarts=0), magnitude=True
        )
        assert result.best_value == pytest.approx(4.0, abs=1e-9)
        recomputed = expression_value(
            mermin_expr, ghz3, result.best_angles.to_model()
        ).value
        assert result.best_value == abs(recomputed)

    def test_restarts_only_improve(self, g_expr, ghz3):
        few = optimize_measurements(g_expr, ghz3, OptimizerConfig(restarts=2, seed=4))
        more = optimize_measurements(g_expr, ghz3, OptimizerConfig(restarts=5, seed=4))
        assert more.best_value >= few.best_value - 1e-12

    def test_identical_seeds_give_identical_results(self, g_expr, ghz3):
        config = OptimizerConfig(restarts=3, seed=11)
        first = optimize_measurements(g_expr, ghz3, config)
        second = optimize_measurements(g_expr, ghz3, config)
        assert first == second
        assert first.best_value == second.best_value
        assert first.best_angles.angles == second.best_angles.angles

    def test_best_value_never_exceeds_the_algebraic_ceiling(self, g_expr, ghz3):
        # the sum of positive coefficients (24) loosely caps any quantum value
        result = optimize_measurements(g_expr, ghz3, OptimizerConfig(restarts=4, seed=2))
        assert result.best_value <= 24

    def test_non_binary_scenario_rejected(self, ghz3):
        from bellkit import MarginalTerm, Scenario, make_expression

        ternary = Scenario.uniform(3, 2, 3)
        expr = make_expression(ternary, [MarginalTerm((0, 0, 0), (2, 2, 2), 1)])
        with pytest.raises(UnsupportedScenarioError):
            optimize_measurements(expr, ghz3)

    def test_state_size_must_match(self, g_expr):
        with pytest.raises(DimensionMismatchError):
            optimize_measurements(g_expr, ghz_state(2))

    def test_density_matrix_states_use_the_generic_path(self, g_expr, ghz3):
        from bellkit import mix_with_white_noise

        noisy = mix_with_white_noise(ghz3, 0.2)
        result = optimize_measurements(g_expr, noisy, OptimizerConfig(restarts=0))
        # the pinned start alone already reaches (1-p)*3.5 + p*(-1.5)
        assert result.best_value >= 2.5 - 1e-9
        recomputed = expression_value(
            g_expr, noisy, result.best_angles.to_model()
        ).value
        assert result.best_value == recomputed
