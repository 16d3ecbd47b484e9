"""Ground-truth simulators the controller is not allowed to inspect.

Two benchmark systems: a logistic map with either an additive or a
cosine control coupling, and a cart balancing an inverted pendulum.
Each plant is a single-owner state machine advanced by step(); the
underlying transition functions are exposed as pure statics so planners
and tests can roll out hypothetical futures without touching the plant.
Observations go through a separate seeded channel that can add Gaussian
noise; observing never mutates the plant.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PlantDiverged",
    "LogisticPlant",
    "CartParams",
    "CartPlant",
    "ObservationChannel",
]


class PlantDiverged(RuntimeError):
    """A state update produced a non-finite component."""


def _require_finite(value, what: str):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise PlantDiverged(f"{what} is non-finite: {arr}")
    return arr


class LogisticPlant:
    """Scalar logistic map x' = r x (1 - x) driven through the control input.

    coupling "additive" adds u to the map; "cosine" adds cos(u) instead
    and pins r at 3.8 (the chaotic regime this variant is defined for).
    """

    COSINE_R = 3.8

    def __init__(self, r_param: float = 3.5, coupling: str = "additive",
                 state: float = 0.1):
        if coupling not in ("additive", "cosine"):
            raise ValueError(f"unknown coupling {coupling!r}")
        if coupling == "cosine" and r_param != self.COSINE_R:
            raise ValueError(
                f"cosine coupling requires r_param = {self.COSINE_R}, got {r_param}"
            )
        self.r_param = float(r_param)
        self.coupling = coupling
        self.state = float(_require_finite(state, "initial state"))

    @staticmethod
    def transition(state: float, u: float, r_param: float, coupling: str) -> float:
        """Pure one-step map; does not touch any plant instance."""
        base = r_param * state * (1.0 - state)
        if coupling == "additive":
            return base + u
        return base + np.cos(u)

    def step(self, u: float) -> float:
        new = self.transition(self.state, float(u), self.r_param, self.coupling)
        self.state = float(_require_finite(new, "logistic state"))
        return self.state

    def simulate(self, state, u: float) -> float:
        """One transition from an arbitrary state; the plant is untouched."""
        return self.transition(float(state), float(u), self.r_param, self.coupling)

    def output_of(self, state) -> np.ndarray:
        return np.atleast_1d(np.asarray(state, dtype=float))[:1].copy()

    def output(self) -> np.ndarray:
        """Noise-free observable, shape (1,)."""
        return np.array([self.state])

    def plan_output(self, state) -> float:
        """Tracked quantity a planner scores a hypothetical state by."""
        return float(np.asarray(state, dtype=float).reshape(-1)[0])


@dataclass(frozen=True)
class CartParams:
    """Physical constants of the cart with inverted pendulum."""

    timestep: float = 0.05      # T, sampling period (s)
    friction: float = 12.98     # b, cart friction coefficient
    cart_mass: float = 1.378    # M (kg)
    arm_length: float = 0.325   # L, pendulum arm (m)
    gravity: float = 9.8        # g (m/s^2)
    pendulum_mass: float = 0.051  # m (kg)

    def __post_init__(self):
        for name in ("timestep", "cart_mass", "arm_length", "pendulum_mass"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")


class CartPlant:
    """Cart with an inverted pendulum, 4-state discrete dynamics.

    State is [position, velocity, pendulum angle, angular velocity].
    The observable is position plus velocity (the controller's learned
    map consumes velocity directly instead of differencing positions).
    """

    def __init__(self, state=(0.0, 0.0, 0.0, 0.0), params: CartParams = CartParams()):
        state = _require_finite(state, "initial state").reshape(-1)
        if state.shape != (4,):
            raise ValueError(f"cart state must have 4 components, got {state.shape}")
        self.state = state.copy()
        self.params = params

    @staticmethod
    def transition(state, u: float, params: CartParams) -> np.ndarray:
        """Pure one-step dynamics; every right-hand side reads the old state."""
        x1, x2, x3, x4 = np.asarray(state, dtype=float).reshape(4)
        T = params.timestep
        b = params.friction
        Mc = params.cart_mass
        L = params.arm_length
        g = params.gravity
        mp = params.pendulum_mass
        # overflow on a divergent trajectory is reported via PlantDiverged,
        # not as a numpy warning
        with np.errstate(over="ignore", invalid="ignore"):
            s, c = np.sin(x3), np.cos(x3)
            denom = Mc + mp * s * s
            new1 = x1 + T * x2
            new2 = x2 + (T / denom) * (
                u + mp * L * x4 * x4 * s - b * x2 - mp * g * c * s
            )
            new3 = x3 + T * x4
            new4 = x4 + (T / (L * denom)) * (
                -u * c + (Mc + mp) * g * s + b * x2 * c - mp * L * x4 * x4 * c * s
            )
            return np.array([new1, new2, new3, new4])

    def step(self, u: float) -> np.ndarray:
        new = self.transition(self.state, float(u), self.params)
        self.state = _require_finite(new, "cart state")
        return self.state.copy()

    def simulate(self, state, u: float) -> np.ndarray:
        """One transition from an arbitrary state; the plant is untouched."""
        return self.transition(state, float(u), self.params)

    def output_of(self, state) -> np.ndarray:
        return np.asarray(state, dtype=float).reshape(-1)[:2].copy()

    def output(self) -> np.ndarray:
        """Noise-free observable [position, velocity], shape (2,)."""
        return self.state[:2].copy()

    def plan_output(self, state) -> float:
        """Position one kinematic step ahead: pos + T * vel.

        The control input needs a step to reach the position channel, so
        planners rank actions by where the position is already committed
        to go rather than by the u-independent instantaneous position.
        """
        s = np.asarray(state, dtype=float).reshape(-1)
        return float(s[0] + self.params.timestep * s[1])


class ObservationChannel:
    """Seeded additive-Gaussian measurement channel.

    noise_variance is the variance of the per-component noise; zero means
    the exact plant output is returned without consuming randomness.
    """

    def __init__(self, noise_variance: float = 0.0, seed=None):
        if not (noise_variance >= 0):
            raise ValueError(f"noise_variance must be >= 0, got {noise_variance}")
        self.noise_variance = float(noise_variance)
        self._rng = np.random.default_rng(seed)

    def observe(self, plant) -> np.ndarray:
        y = plant.output()
        if self.noise_variance == 0.0:
            return y
        return y + self._rng.normal(
            0.0, np.sqrt(self.noise_variance), size=y.shape
        )
