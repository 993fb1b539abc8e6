"""Watch-repair: a repair-or-decline decision whose payoff arrives only at the end.

Each episode serves one watch of a randomly drawn brand. The agent knows the
brand and its selling price but not the repair cost. Repairing starts a job
that runs one step at a time; every step charges a cost drawn from the
brand's nonnegative cost distribution and the job finishes with the brand's
completion probability, or at ``max_repair_steps`` at the latest. Costs are
charged silently: intermediate rewards are zero and the whole profit
``sell_price - total_cost`` is paid on completion. Abandoning a job pays
``-total_cost``.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import NormalDist
from typing import Sequence

from rewardshift.core import Observation, RngStream, StateError, check_action, fmt_num

REPAIR, DECLINE = 0, 1
CONTINUE, ABANDON = 0, 1
PHASE_DECIDE, PHASE_REPAIRING = 0, 1

_STD_NORMAL = NormalDist()


@dataclass(frozen=True)
class WatchTask:
    brand_id: int
    sell_price: float
    cost_mean: float
    cost_std: float
    completion_prob: float = 0.3
    max_repair_steps: int = 10

    def __post_init__(self) -> None:
        if not self.sell_price > 0:
            raise ValueError("sell_price must be positive")
        if self.cost_std < 0:
            raise ValueError("cost_std must be nonnegative")
        if not 0 < self.completion_prob <= 1:
            raise ValueError("completion_prob must lie in (0, 1]")
        if self.max_repair_steps < 1:
            raise ValueError("max_repair_steps must be at least 1")

    @property
    def expected_step_cost(self) -> float:
        """Mean of the cost distribution truncated below at zero."""
        if self.cost_std == 0:
            return max(self.cost_mean, 0.0)
        a = -self.cost_mean / self.cost_std
        tail = 1.0 - _STD_NORMAL.cdf(a)
        if tail < 1e-300:
            return 0.0
        return self.cost_mean + self.cost_std * _STD_NORMAL.pdf(a) / tail

    def expected_remaining_steps(self, steps_done: int = 0) -> float:
        """Expected further repair steps for a job that has run ``steps_done`` steps."""
        left = self.max_repair_steps - steps_done
        if left <= 0:
            return 0.0
        q = 1.0 - self.completion_prob
        return (1.0 - q**left) / self.completion_prob

    def expected_cost(self, steps_done: int = 0) -> float:
        return self.expected_remaining_steps(steps_done) * self.expected_step_cost

    @property
    def expected_profit(self) -> float:
        return self.sell_price - self.expected_cost(0)

    @property
    def profitable(self) -> bool:
        return self.expected_profit > 0

    def sample_cost(self, stream: RngStream) -> float:
        """Truncated-normal cost by inverse CDF; consumes exactly one uniform."""
        u = stream.uniform()
        if self.cost_std == 0:
            return max(self.cost_mean, 0.0)
        lo = _STD_NORMAL.cdf(-self.cost_mean / self.cost_std)
        p = lo + u * (1.0 - lo)
        p = min(max(p, 1e-16), 1.0 - 1e-16)
        return max(self.cost_mean + self.cost_std * _STD_NORMAL.inv_cdf(p), 0.0)


# Profitable brands sit just outside a 10% margin of breakeven; unprofitable
# ones lose money on average but pay off when a repair finishes in one step.
DEFAULT_BRANDS: tuple[WatchTask, ...] = (
    WatchTask(0, 25.0, 6.73, 2.0),
    WatchTask(1, 22.0, 18.5, 3.0),
    WatchTask(2, 18.0, 4.84, 1.5),
    WatchTask(3, 15.0, 11.5, 3.0),
    WatchTask(4, 12.0, 3.2, 1.2),
    WatchTask(5, 8.0, 4.5, 1.5),
    WatchTask(6, 9.0, 2.38, 1.0),
    WatchTask(7, 6.0, 2.6, 1.0),
)


class WatchRepair:
    env_id = "watch_repair"
    n_actions = 2
    obs_dim = 4
    action_names = ("repair", "decline")

    def __init__(self, brands: Sequence[WatchTask] = DEFAULT_BRANDS) -> None:
        if not brands:
            raise ValueError("at least one brand is required")
        ids = [b.brand_id for b in brands]
        if len(set(ids)) != len(ids):
            raise ValueError("brand ids must be unique")
        self.brands = tuple(brands)
        self._by_id = {b.brand_id: b for b in self.brands}
        self.task: WatchTask | None = None
        self.stream: RngStream | None = None
        self.phase = PHASE_DECIDE
        self.repair_steps = 0
        self.total_cost = 0.0
        self.done = True

    def brand(self, brand_id: int) -> WatchTask:
        return self._by_id[int(brand_id)]

    def render(self, box: Sequence[float]) -> str:
        brand_id, price, phase, steps = box
        head = f"Watch of brand {int(brand_id)} with a known selling price of {fmt_num(price, 2)}."
        if int(phase) == PHASE_DECIDE:
            return head + " Decide whether to repair it or decline the job."
        return head + f" Repair in progress after {int(steps)} step(s); continue or abandon."

    def _obs(self) -> Observation:
        box = (self.task.brand_id, self.task.sell_price, self.phase, self.repair_steps)
        return Observation(box, self.render(box), self.env_id)

    def reset(self, stream: RngStream) -> Observation:
        self.stream = stream
        self.task = self.brands[stream.integer(len(self.brands))]
        self.phase = PHASE_DECIDE
        self.repair_steps = 0
        self.total_cost = 0.0
        self.done = False
        return self._obs()

    def _work(self) -> tuple[Observation, float, bool]:
        self.total_cost += self.task.sample_cost(self.stream)
        self.repair_steps += 1
        finished = (
            self.repair_steps >= self.task.max_repair_steps
            or self.stream.uniform() < self.task.completion_prob
        )
        self.phase = PHASE_REPAIRING
        if finished:
            self.done = True
            return self._obs(), self.task.sell_price - self.total_cost, True
        return self._obs(), 0.0, False

    def step(self, action: int) -> tuple[Observation, float, bool]:
        if self.done or self.task is None:
            raise StateError("step called on a finished watch-repair episode; call reset first")
        action = check_action(action, 2)
        if self.phase == PHASE_DECIDE:
            if action == DECLINE:
                self.done = True
                return self._obs(), 0.0, True
            return self._work()
        if action == ABANDON:
            self.done = True
            return self._obs(), -self.total_cost, True
        return self._work()

    def correct_decision(self, obs: Observation, action: int) -> bool:
        """Whether ``action`` at a decision-phase observation is the profit-maximising choice."""
        task = self.brand(obs.box[0])
        return (action == REPAIR) == task.profitable


def watch_step(env: WatchRepair, action: int) -> tuple[Observation, float, bool]:
    return env.step(action)


def expected_profit_table(brands: Sequence[WatchTask] = DEFAULT_BRANDS) -> dict[int, float]:
    return {b.brand_id: b.expected_profit for b in brands}

