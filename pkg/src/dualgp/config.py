"""Scenario configuration: JSON in, fully resolved and validated dict out.

Each experiment is one JSON file naming a scenario; every other field is
optional and overrides that scenario's baked-in defaults. Resolution
deep-merges the overrides, validates per field, and returns a plain dict
whose shape is stable enough to snapshot in tests. Errors carry the
dotted field path that caused them.
"""

import json
import math

__all__ = ["ConfigError", "SCENARIOS", "load_config", "resolve_config", "scenario_defaults"]

SCENARIOS = ("logistic_linear", "logistic_nonlinear", "cart_dual", "cart_benchmark")

_CART_PLANT = {
    "kind": "cart",
    "timestep": 0.05,
    "friction": 12.98,
    "cart_mass": 1.378,
    "arm_length": 0.325,
    "gravity": 9.8,
    "pendulum_mass": 0.051,
}

# one entry per scenario; values mirror the experiments the package
# reproduces, everything user-overridable except plant.kind
_DEFAULTS = {
    "logistic_linear": {
        "scenario": "logistic_linear",
        "plant": {"kind": "logistic", "r_param": 3.5, "coupling": "additive"},
        "x0": [0.1],
        "target": [0.8],
        "action_grid": {"min": -1.0, "max": 1.0, "step": 0.02},
        "kernel": {"signal_variance": 0.5, "length_scale": 1.0, "jitter": 1e-9},
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
        "action_grid": {"min": 0.0, "max": math.pi, "step": 0.1},
        "kernel": {"signal_variance": 0.5, "length_scale": 1.0, "jitter": 1e-9},
        "noise_variance": 0.0,
        "weights": {"w1": 1.0, "w2_start": 0.0, "w2_end": 40.0, "schedule_steps": 100},
        "steps": 100,
        "seed": 0,
        "selection": "dual",
        "lookahead": 1,
        # the cosine-coupled map punishes blind exploration hard (a single
        # overshoot past its recoverable band never comes back), so the
        # learner starts from a handful of random prior measurements
        "initial_data": {"count": 10, "low": 0.0, "high": 1.2},
    },
    "cart_dual": {
        "scenario": "cart_dual",
        "plant": dict(_CART_PLANT),
        "x0": [0.0, 0.0, 0.6, 0.0],
        "target": [0.5],
        "action_grid": {"min": -10.0, "max": 10.0, "step": 1.0},
        "kernel": {"signal_variance": 0.5, "length_scale": 20.0, "jitter": 1e-9},
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
        "plant": dict(_CART_PLANT),
        "x0": [0.0, 0.0, 0.6, 0.0],
        "target": [0.5],
        "action_grid": {"min": -10.0, "max": 10.0, "step": 1.0},
        "kernel": {"signal_variance": 0.5, "length_scale": 20.0, "jitter": 1e-9},
        "noise_variance": 0.0,
        "weights": {"w1": 1.0, "w2_start": 20.0, "w2_end": 20.0, "schedule_steps": 0},
        "steps": 100,
        "seed": 0,
        "selection": "benchmark",
        "lookahead": 1,
        "initial_data": None,
    },
}


class ConfigError(ValueError):
    """Validation failure tied to one dotted config field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def scenario_defaults(scenario: str) -> dict:
    """Deep copy of one scenario's fully resolved default config."""
    if scenario not in _DEFAULTS:
        raise ConfigError("scenario", f"unknown scenario {scenario!r}, expected one of {SCENARIOS}")
    return json.loads(json.dumps(_DEFAULTS[scenario]))


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("<config>", f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<config>", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("<config>", "top level must be a JSON object")
    return raw


def _merge(base: dict, override: dict, path: str) -> dict:
    out = dict(base)
    for key, value in override.items():
        field = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(field, "unknown field")
        if isinstance(base[key], dict) and key != "initial_data":
            if not isinstance(value, dict):
                raise ConfigError(field, f"expected an object, got {type(value).__name__}")
            out[key] = _merge(base[key], value, field)
        else:
            out[key] = value
    return out


def _number(cfg, field, *, minimum=None, exclusive=False, allow_zero_neg=False):
    parts = field.split(".")
    value = cfg
    for p in parts:
        value = value[p]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(field, f"must be finite, got {value!r}")
    if minimum is not None:
        if exclusive and not value > minimum:
            raise ConfigError(field, f"must be > {minimum}, got {value}")
        if not exclusive and not value >= minimum:
            raise ConfigError(field, f"must be >= {minimum}, got {value}")
    return value


def _integer(cfg, field, minimum):
    parts = field.split(".")
    value = cfg
    for p in parts:
        value = value[p]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(field, f"must be >= {minimum}, got {value}")
    return value


def _vector(cfg, field, length):
    value = cfg[field]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [float(value)]
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(field, f"expected a number list, got {value!r}")
    value = [float(v) for v in value]
    if len(value) != length:
        raise ConfigError(field, f"expected {length} component(s), got {len(value)}")
    if not all(math.isfinite(v) for v in value):
        raise ConfigError(field, f"must be finite, got {value}")
    return value


def _validate_initial_data(cfg):
    block = cfg["initial_data"]
    if block is None:
        return None
    if not isinstance(block, dict):
        raise ConfigError("initial_data", "expected null or an object")
    if cfg["selection"] == "benchmark":
        raise ConfigError("initial_data", "the full-knowledge planner does not learn; remove it")
    has_points = "points" in block
    has_count = "count" in block
    if has_points == has_count:
        raise ConfigError("initial_data", "give exactly one of 'points' or 'count'")
    if has_count:
        for key in block:
            if key not in ("count", "low", "high"):
                raise ConfigError(f"initial_data.{key}", "unknown field")
        if cfg["plant"]["kind"] != "logistic":
            raise ConfigError(
                "initial_data.count",
                "random draws need a scalar observation; give explicit points",
            )
        count = _integer({"initial_data": block}, "initial_data.count", 1)
        low = _number({"initial_data": block}, "initial_data.low")
        high = _number({"initial_data": block}, "initial_data.high")
        if not high > low:
            raise ConfigError("initial_data.high", f"must exceed low={low}, got {high}")
        return {"count": count, "low": low, "high": high}
    for key in block:
        if key != "points":
            raise ConfigError(f"initial_data.{key}", "unknown field")
    points = block["points"]
    obs = 1 if cfg["plant"]["kind"] == "logistic" else 2
    width = obs + 1 + obs  # observation, action, next observation
    if not isinstance(points, list) or not points:
        raise ConfigError("initial_data.points", "expected a nonempty list of rows")
    rows = []
    for i, row in enumerate(points):
        ok = (
            isinstance(row, list)
            and len(row) == width
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row)
            and all(math.isfinite(float(v)) for v in row)
        )
        if not ok:
            raise ConfigError(
                f"initial_data.points[{i}]",
                f"expected {width} finite numbers (observation, action, next observation)",
            )
        rows.append([float(v) for v in row])
    return {"points": rows}


def resolve_config(raw: dict) -> dict:
    """Merge a user config over its scenario defaults and validate every field."""
    if "scenario" not in raw:
        raise ConfigError("scenario", "required")
    base = scenario_defaults(raw["scenario"])
    cfg = _merge(base, raw, "")

    plant = cfg["plant"]
    if plant["kind"] != base["plant"]["kind"]:
        raise ConfigError("plant.kind", "fixed by the scenario, cannot be overridden")
    if plant["kind"] == "logistic":
        _number(cfg, "plant.r_param", minimum=0.0, exclusive=True)
        if plant["coupling"] not in ("additive", "cosine"):
            raise ConfigError("plant.coupling", f"expected 'additive' or 'cosine', got {plant['coupling']!r}")
        if plant["coupling"] == "cosine" and plant["r_param"] != 3.8:
            raise ConfigError("plant.r_param", "the cosine-coupled map is calibrated for r=3.8")
        cfg["x0"] = _vector(cfg, "x0", 1)
    else:
        for key in ("timestep", "friction", "cart_mass", "arm_length", "gravity", "pendulum_mass"):
            _number(cfg, f"plant.{key}", minimum=0.0, exclusive=True)
        cfg["x0"] = _vector(cfg, "x0", 4)

    cfg["target"] = _vector(cfg, "target", 1)

    lo = _number(cfg, "action_grid.min")
    hi = _number(cfg, "action_grid.max")
    step = _number(cfg, "action_grid.step", minimum=0.0, exclusive=True)
    if not hi > lo:
        raise ConfigError("action_grid.max", f"must exceed min={lo}, got {hi}")
    cfg["action_grid"] = {"min": lo, "max": hi, "step": step}

    _number(cfg, "kernel.signal_variance", minimum=0.0, exclusive=True)
    _number(cfg, "kernel.length_scale", minimum=0.0, exclusive=True)
    _number(cfg, "kernel.jitter", minimum=0.0)
    _number(cfg, "noise_variance", minimum=0.0)

    _number(cfg, "weights.w1", minimum=0.0)
    _number(cfg, "weights.w2_start", minimum=0.0)
    _number(cfg, "weights.w2_end", minimum=0.0)
    _integer(cfg, "weights.schedule_steps", 0)
    w = cfg["weights"]
    if w["w1"] + min(w["w2_start"], w["w2_end"]) <= 0:
        raise ConfigError("weights.w1", "w1 + w2(t) must stay positive for all t")

    cfg["steps"] = _integer(cfg, "steps", 1)
    cfg["seed"] = _integer(cfg, "seed", 0)
    cfg["lookahead"] = _integer(cfg, "lookahead", 1)

    if cfg["selection"] not in ("dual", "benchmark"):
        raise ConfigError("selection", f"expected 'dual' or 'benchmark', got {cfg['selection']!r}")

    cfg["initial_data"] = _validate_initial_data(cfg)
    return cfg
