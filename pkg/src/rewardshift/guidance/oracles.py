"""Scripted prior-knowledge oracles, one per environment.

Each oracle is a pure function of (observation, action) returning a shift in
{-1, 0, +1} plus the name of the rule that fired. Every oracle has an explicit
indifference band inside which it returns 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from rewardshift.core import Observation
from rewardshift.envs.blackjack import Blackjack
from rewardshift.envs.watch import DEFAULT_BRANDS, PHASE_DECIDE, REPAIR, WatchTask
from rewardshift.guidance.blackjack_dp import BasicStrategyTable, build_blackjack_oracle

Rule = tuple[int, str]


@dataclass(frozen=True)
class BlackjackOracle:
    """Approves the DP-optimal action, disapproves the other one."""

    table: BasicStrategyTable = field(default_factory=build_blackjack_oracle, repr=False)
    tie_band: float = 0.01

    def __call__(self, obs: Observation, action: int) -> Rule:
        s = Blackjack.state_of(obs)
        key = (s.player_sum, s.dealer_up, s.usable_ace)
        if key not in self.table:
            return 0, "blackjack:outside-table"
        cell = self.table.cell(*key)
        if cell.gap <= self.tie_band:
            return 0, "blackjack:indifferent"
        if action == cell.best:
            return 1, "blackjack:optimal"
        return -1, "blackjack:suboptimal"


@dataclass(frozen=True)
class CartPoleOracle:
    """Push toward the side the pole is falling to: sign(theta + 0.5 * theta_dot)."""

    lookahead: float = 0.5
    dead_zone: float = 0.01

    def __call__(self, obs: Observation, action: int) -> Rule:
        _, _, theta, theta_dot = obs.box
        lean = theta + self.lookahead * theta_dot
        if abs(lean) < self.dead_zone:
            return 0, "cartpole:balanced"
        pushes_right = action == 1
        if pushes_right == (lean > 0):
            return 1, "cartpole:toward-fall"
        return -1, "cartpole:away-from-fall"


@dataclass(frozen=True)
class WatchOracle:
    """Compares the selling price with the expected remaining repair cost.

    At the decision the estimate covers the whole job; mid-repair it covers
    only the expected remaining steps, since costs already paid are sunk.
    Repair and continue earn +1 when the price beats the estimate by more
    than ``margin * price`` and -1 when it falls short by more than that;
    decline and abandon are mirrored. Inside the band the shift is 0.
    """

    brands: Sequence[WatchTask] = DEFAULT_BRANDS
    margin: float = 0.10

    def __call__(self, obs: Observation, action: int) -> Rule:
        brand_id, price, phase, steps = obs.box
        task = next((b for b in self.brands if b.brand_id == int(brand_id)), None)
        if task is None:
            return 0, "watch:unknown-brand"
        deciding = int(phase) == PHASE_DECIDE
        surplus = price - task.expected_cost(0 if deciding else int(steps))
        if abs(surplus) <= self.margin * price:
            return 0, "watch:within-margin"
        go_on = action == REPAIR  # REPAIR and CONTINUE share index 0
        if deciding:
            verb = "repair" if go_on else "decline"
        else:
            verb = "continue" if go_on else "abandon"
        if (surplus > 0) == go_on:
            return 1, f"watch:{verb}-profitable"
        return -1, f"watch:{verb}-unprofitable"


@dataclass(frozen=True)
class ChocKaleOracle:
    """Ask for kale when the user looks unsatisfied; scold an all-chocolate slate."""

    slates: Sequence[tuple[int, ...]]
    healthy_band: tuple[float, float] = (0.4, 0.7)
    low_kale: float = 0.2
    sat_threshold: float = 0.5

    def __call__(self, obs: Observation, action: int) -> Rule:
        return chockale_rule(obs, self.slates[action], self.healthy_band, self.low_kale, self.sat_threshold)


def chockale_rule(
    obs: Observation,
    slate: Sequence[int],
    healthy_band: tuple[float, float] = (0.4, 0.7),
    low_kale: float = 0.2,
    sat_threshold: float = 0.5,
) -> Rule:
    sat = obs.box[0]
    mean_k = sum(obs.box[1 + i] for i in slate) / len(slate)
    if sat >= sat_threshold:
        return 0, "chockale:satisfied"
    lo, hi = healthy_band
    if lo <= mean_k <= hi:
        return 1, "chockale:healthy-slate"
    if mean_k < low_kale:
        return -1, "chockale:chocolate-slate"
    return 0, "chockale:neutral"


def cartpole_oracle(obs: Observation, action: int) -> Rule:
    return CartPoleOracle()(obs, action)


def watch_oracle(obs: Observation, action: int, brands: Sequence[WatchTask] = DEFAULT_BRANDS) -> Rule:
    return WatchOracle(brands)(obs, action)


def chockale_oracle(obs: Observation, slate: Sequence[int]) -> Rule:
    return chockale_rule(obs, slate)
