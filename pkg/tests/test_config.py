"""Config resolution: defaults snapshot, merging, per-field diagnostics."""

import json
import math

import pytest

from dualgp.config import (
    ConfigError,
    SCENARIOS,
    load_config,
    resolve_config,
    scenario_defaults,
)

# checked-in snapshot of every scenario's fully resolved defaults; a
# deliberate change here is a behavior change for every consumer
EXPECTED_DEFAULTS = {
    "logistic_linear": {
        "scenario": "logistic_linear",
        "plant": {"kind": "logistic", "r_param": 3.5, "coupling": "additive"},
        "x0": [0.1],
        "target": [0.8],
        "action_grid": {"min": -1.0, "max": 1.0, "step": 0.02},
        "kernel": {"signal_variance": 0.5, "length_scale": 1.0, "jitter": 1e-09},
        "noise_variance": 0.0,
        "weights": {"w1": 1.0, "w2_start": 1.0, "w2_end": 1.0, "schedule_steps": 0},
        "steps": 100,
        "seed": 0,
        "selection": "dual",
        "lookahead": 1,
        "initial_data": None,
    },
    "logistic_nonlinear": {
        "scenario": "logistic_nonlinear",
        "plant": {"kind": "logistic", "r_param": 3.8, "coupling": "cosine"},
        "x0": [0.1],
        "target": [0.8],
        "action_grid": {"min": 0.0, "max": 3.141592653589793, "step": 0.1},
        "kernel": {"signal_variance": 0.5, "length_scale": 1.0, "jitter": 1e-09},
        "noise_variance": 0.0,
        "weights": {"w1": 1.0, "w2_start": 0.0, "w2_end": 40.0, "schedule_steps": 100},
        "steps": 100,
        "seed": 0,
        "selection": "dual",
        "lookahead": 1,
        "initial_data": {"count": 10, "low": 0.0, "high": 1.2},
    },
    "cart_dual": {
        "scenario": "cart_dual",
        "plant": {
            "kind": "cart",
            "timestep": 0.05,
            "friction": 12.98,
            "cart_mass": 1.378,
            "arm_length": 0.325,
            "gravity": 9.8,
            "pendulum_mass": 0.051,
        },
        "x0": [0.0, 0.0, 0.6, 0.0],
        "target": [0.5],
        "action_grid": {"min": -10.0, "max": 10.0, "step": 1.0},
        "kernel": {"signal_variance": 0.5, "length_scale": 20.0, "jitter": 1e-09},
        "noise_variance": 0.01,
        "weights": {"w1": 1.0, "w2_start": 20.0, "w2_end": 20.0, "schedule_steps": 0},
        "steps": 100,
        "seed": 0,
        "selection": "dual",
        "lookahead": 1,
        "initial_data": None,
    },
    "cart_benchmark": {
        "scenario": "cart_benchmark",
        "plant": {
            "kind": "cart",
            "timestep": 0.05,
            "friction": 12.98,
            "cart_mass": 1.378,
            "arm_length": 0.325,
            "gravity": 9.8,
            "pendulum_mass": 0.051,
        },
        "x0": [0.0, 0.0, 0.6, 0.0],
        "target": [0.5],
        "action_grid": {"min": -10.0, "max": 10.0, "step": 1.0},
        "kernel": {"signal_variance": 0.5, "length_scale": 20.0, "jitter": 1e-09},
        "noise_variance": 0.0,
        "weights": {"w1": 1.0, "w2_start": 20.0, "w2_end": 20.0, "schedule_steps": 0},
        "steps": 100,
        "seed": 0,
        "selection": "benchmark",
        "lookahead": 1,
        "initial_data": None,
    },
}


class TestDefaults:
    def test_scenario_list(self):
        assert set(SCENARIOS) == set(EXPECTED_DEFAULTS)

    @pytest.mark.parametrize("scenario", sorted(EXPECTED_DEFAULTS))
    def test_resolved_defaults_snapshot(self, scenario):
        assert resolve_config({"scenario": scenario}) == EXPECTED_DEFAULTS[scenario]

    def test_defaults_copy_is_private(self):
        one = scenario_defaults("cart_dual")
        one["kernel"]["length_scale"] = 999
        assert scenario_defaults("cart_dual")["kernel"]["length_scale"] == 20.0

    def test_nonlinear_pi_grid_count(self):
        g = EXPECTED_DEFAULTS["logistic_nonlinear"]["action_grid"]
        count = int(math.floor((g["max"] - g["min"]) / g["step"] + 1e-9)) + 1
        assert count == 32


class TestMerging:
    def test_scalar_override(self):
        cfg = resolve_config({"scenario": "logistic_linear", "steps": 7, "seed": 3})
        assert cfg["steps"] == 7
        assert cfg["seed"] == 3

    def test_nested_partial_override_keeps_siblings(self):
        cfg = resolve_config({"scenario": "logistic_linear", "plant": {"r_param": 3.8}})
        assert cfg["plant"]["r_param"] == 3.8
        assert cfg["plant"]["coupling"] == "additive"

    def test_scalar_x0_promoted(self):
        cfg = resolve_config({"scenario": "logistic_linear", "x0": 0.3})
        assert cfg["x0"] == [0.3]

    def test_initial_data_replaced_wholesale(self):
        cfg = resolve_config({"scenario": "logistic_nonlinear", "initial_data": None})
        assert cfg["initial_data"] is None
        cfg = resolve_config(
            {"scenario": "logistic_nonlinear", "initial_data": {"count": 4, "low": 0.0, "high": 1.0}}
        )
        assert cfg["initial_data"] == {"count": 4, "low": 0.0, "high": 1.0}


class TestFieldErrors:
    def field_of(self, raw):
        with pytest.raises(ConfigError) as err:
            resolve_config(raw)
        return err.value.field

    def test_missing_scenario(self):
        assert self.field_of({}) == "scenario"

    def test_unknown_scenario(self):
        assert self.field_of({"scenario": "pendulum"}) == "scenario"

    def test_unknown_top_level_field(self):
        assert self.field_of({"scenario": "cart_dual", "bogus": 1}) == "bogus"

    def test_unknown_nested_field(self):
        field = self.field_of({"scenario": "cart_dual", "kernel": {"scale": 2}})
        assert field == "kernel.scale"

    def test_zero_grid_step(self):
        field = self.field_of({"scenario": "logistic_linear", "action_grid": {"step": 0}})
        assert field == "action_grid.step"

    def test_inverted_grid(self):
        field = self.field_of(
            {"scenario": "logistic_linear", "action_grid": {"min": 2.0, "max": 1.0}}
        )
        assert field == "action_grid.max"

    def test_negative_kernel_variance(self):
        field = self.field_of(
            {"scenario": "logistic_linear", "kernel": {"signal_variance": -0.5}}
        )
        assert field == "kernel.signal_variance"

    def test_cosine_wrong_r(self):
        field = self.field_of({"scenario": "logistic_nonlinear", "plant": {"r_param": 3.5}})
        assert field == "plant.r_param"

    def test_plant_kind_locked(self):
        field = self.field_of({"scenario": "cart_dual", "plant": {"kind": "logistic"}})
        assert field == "plant.kind"

    def test_cart_x0_length(self):
        field = self.field_of({"scenario": "cart_dual", "x0": [0.0, 0.0]})
        assert field == "x0"

    def test_degenerate_weights(self):
        field = self.field_of(
            {"scenario": "logistic_linear", "weights": {"w1": 0.0, "w2_start": 0.0, "w2_end": 0.0}}
        )
        assert field == "weights.w1"

    def test_zero_steps(self):
        assert self.field_of({"scenario": "cart_dual", "steps": 0}) == "steps"

    def test_bool_is_not_an_integer(self):
        assert self.field_of({"scenario": "cart_dual", "steps": True}) == "steps"

    def test_bad_selection(self):
        assert self.field_of({"scenario": "cart_dual", "selection": "greedy"}) == "selection"

    def test_nonfinite_target(self):
        assert self.field_of({"scenario": "cart_dual", "target": [math.inf]}) == "target"


class TestInitialData:
    def test_count_and_points_exclusive(self):
        with pytest.raises(ConfigError, match="initial_data"):
            resolve_config(
                {
                    "scenario": "logistic_nonlinear",
                    "initial_data": {"count": 2, "low": 0, "high": 1, "points": [[0, 0, 0]]},
                }
            )

    def test_random_draws_logistic_only(self):
        with pytest.raises(ConfigError, match="initial_data.count"):
            resolve_config(
                {"scenario": "cart_dual", "initial_data": {"count": 2, "low": 0, "high": 1}}
            )

    def test_benchmark_cannot_seed(self):
        with pytest.raises(ConfigError, match="initial_data"):
            resolve_config(
                {"scenario": "cart_benchmark", "initial_data": {"points": [[0, 0, 0, 0, 0]]}}
            )

    def test_points_width_checked(self):
        with pytest.raises(ConfigError, match=r"initial_data.points\[1\]"):
            resolve_config(
                {
                    "scenario": "logistic_linear",
                    "initial_data": {"points": [[0.1, 0.2, 0.3], [0.1, 0.2]]},
                }
            )

    def test_cart_points_width_is_five(self):
        cfg = resolve_config(
            {"scenario": "cart_dual", "initial_data": {"points": [[0.0, 0.1, 2.0, 0.01, 0.2]]}}
        )
        assert cfg["initial_data"] == {"points": [[0.0, 0.1, 2.0, 0.01, 0.2]]}

    def test_low_must_be_below_high(self):
        with pytest.raises(ConfigError, match="initial_data.high"):
            resolve_config(
                {"scenario": "logistic_nonlinear", "initial_data": {"count": 2, "low": 1, "high": 1}}
            )


class TestLoadConfig:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"scenario": "cart_dual", "steps": 5}), encoding="utf-8")
        cfg = resolve_config(load_config(path))
        assert cfg["steps"] == 5

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="no such file"):
            load_config(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(path)

    def test_non_object_top_level(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError, match="object"):
            load_config(path)
