"""Classic cart-pole balancing with explicit Euler integration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from rewardshift.core import Observation, RngStream, StateError, check_action, fmt_num

LEFT, RIGHT = 0, 1


@dataclass(frozen=True)
class CartPoleState:
    x: float
    x_dot: float
    theta: float
    theta_dot: float


@dataclass(frozen=True)
class CartPoleParams:
    gravity: float = 9.8
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    half_length: float = 0.5
    force: float = 10.0
    dt: float = 0.02
    x_limit: float = 2.4
    theta_limit_deg: float = 12.0
    max_steps: int = 500
    reset_spread: float = 0.05

    @property
    def total_mass(self) -> float:
        return self.cart_mass + self.pole_mass

    @property
    def theta_limit(self) -> float:
        return self.theta_limit_deg * math.pi / 180.0


def is_terminal(state: CartPoleState, params: CartPoleParams = CartPoleParams()) -> bool:
    return abs(state.x) > params.x_limit or abs(state.theta) > params.theta_limit


def cartpole_step(
    state: CartPoleState, action: int, params: CartPoleParams = CartPoleParams()
) -> tuple[CartPoleState, float, bool]:
    """One Euler step of the standard cart-pole equations of motion.

    Returns the next state, the per-step reward (1.0) and whether the pole or
    cart left the allowed band. The step cap is enforced by :class:`CartPole`.
    """
    check_action(action, 2)
    if is_terminal(state, params):
        raise StateError("cart-pole state is already terminal")
    f = params.force if action == RIGHT else -params.force
    cos_t = math.cos(state.theta)
    sin_t = math.sin(state.theta)
    pole_ml = params.pole_mass * params.half_length
    temp = (f + pole_ml * state.theta_dot**2 * sin_t) / params.total_mass
    theta_acc = (params.gravity * sin_t - cos_t * temp) / (
        params.half_length * (4.0 / 3.0 - params.pole_mass * cos_t**2 / params.total_mass)
    )
    x_acc = temp - pole_ml * theta_acc * cos_t / params.total_mass
    nxt = CartPoleState(
        x=state.x + params.dt * state.x_dot,
        x_dot=state.x_dot + params.dt * x_acc,
        theta=state.theta + params.dt * state.theta_dot,
        theta_dot=state.theta_dot + params.dt * theta_acc,
    )
    return nxt, 1.0, is_terminal(nxt, params)


class CartPole:
    env_id = "cartpole"
    n_actions = 2
    obs_dim = 4
    action_names = ("push left", "push right")

    def __init__(self, params: CartPoleParams | None = None) -> None:
        self.params = params or CartPoleParams()
        self.state: CartPoleState | None = None
        self.steps = 0
        self.done = True

    def render(self, box: Sequence[float]) -> str:
        x, x_dot, theta, theta_dot = box
        return (
            f"Cart position {fmt_num(x)} m, cart velocity {fmt_num(x_dot)} m/s, "
            f"pole angle {fmt_num(math.degrees(theta), 2)} deg, "
            f"pole angular velocity {fmt_num(math.degrees(theta_dot), 2)} deg/s."
        )

    def _obs(self) -> Observation:
        s = self.state
        box = (s.x, s.x_dot, s.theta, s.theta_dot)
        return Observation(box, self.render(box), self.env_id)

    def reset(self, stream: RngStream) -> Observation:
        k = self.params.reset_spread
        vals = [-k + 2 * k * stream.uniform() for _ in range(4)]
        return self.reset_to(CartPoleState(*vals))

    def reset_to(self, state: CartPoleState) -> Observation:
        self.state = state
        self.steps = 0
        self.done = is_terminal(state, self.params)
        return self._obs()

    def step(self, action: int) -> tuple[Observation, float, bool]:
        if self.done or self.state is None:
            raise StateError("step called on a finished cart-pole episode; call reset first")
        self.state, reward, done = cartpole_step(self.state, action, self.params)
        self.steps += 1
        self.done = done or self.steps >= self.params.max_steps
        return self._obs(), reward, self.done
