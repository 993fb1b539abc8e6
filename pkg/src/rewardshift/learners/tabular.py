"""Tabular action-value learners: one-step Q-learning and first-visit Monte Carlo."""

from __future__ import annotations

import copy
from typing import Callable, Hashable, Iterable, Sequence

from rewardshift.core import Observation, RngStream, StateError, Transition
from rewardshift.learners.base import LearnerConfig, argmax, epsilon_greedy

StateKey = Hashable


def box_key(obs: Observation) -> StateKey:
    return obs.box


class QTable:
    """Sparse table of action values with per-cell update counts.

    Cells that were never written read as ``q_init``.
    """

    def __init__(self, n_actions: int, q_init: float = 0.0) -> None:
        self.n_actions = n_actions
        self.q_init = float(q_init)
        self.values: dict[StateKey, list[float]] = {}
        self.counts: dict[StateKey, list[int]] = {}

    def __len__(self) -> int:
        return len(self.values)

    def row(self, key: StateKey) -> Sequence[float]:
        row = self.values.get(key)
        if row is None:
            return (self.q_init,) * self.n_actions
        return row

    def _cell(self, key: StateKey) -> tuple[list[float], list[int]]:
        row = self.values.get(key)
        if row is None:
            row = self.values[key] = [self.q_init] * self.n_actions
            self.counts[key] = [0] * self.n_actions
        return row, self.counts[key]

    def get(self, key: StateKey, action: int) -> float:
        return self.row(key)[action]

    def max(self, key: StateKey) -> float:
        return max(self.row(key))

    def greedy(self, key: StateKey) -> int:
        return argmax(self.row(key))

    def count(self, key: StateKey, action: int) -> int:
        counts = self.counts.get(key)
        return 0 if counts is None else counts[action]

    def move_toward(self, key: StateKey, action: int, target: float, cfg: LearnerConfig) -> None:
        row, counts = self._cell(key)
        counts[action] += 1
        row[action] += cfg.step_size(counts[action]) * (target - row[action])

    def copy(self) -> "QTable":
        return copy.deepcopy(self)


def select_action(q: QTable, key: StateKey, epsilon: float, stream: RngStream) -> int:
    return epsilon_greedy(q.row(key), epsilon, stream)


def td_update(
    q: QTable,
    batch: Iterable[Transition],
    cfg: LearnerConfig,
    key_fn: Callable[[Observation], StateKey] = box_key,
) -> QTable:
    """One-step Q-learning over ``batch`` in order, using the shaped reward."""
    batch = list(batch)
    if not batch:
        raise ValueError("batch must not be empty")
    for t in batch:
        target = t.reward
        if not t.done:
            target += cfg.gamma * q.max(key_fn(t.next_state))
        q.move_toward(key_fn(t.state), t.action, target, cfg)
    return q


def mc_update(
    q: QTable,
    episode: Sequence[Transition],
    cfg: LearnerConfig,
    key_fn: Callable[[Observation], StateKey] = box_key,
) -> QTable:
    """First-visit Monte Carlo: average each first-visit return into its cell."""
    if not episode or not episode[-1].done:
        raise StateError("Monte Carlo update needs a terminated episode")
    returns = [0.0] * len(episode)
    g = 0.0
    for i in range(len(episode) - 1, -1, -1):
        g = episode[i].reward + cfg.gamma * g
        returns[i] = g
    seen: set = set()
    for t, g in zip(episode, returns):
        cell = (key_fn(t.state), t.action)
        if cell in seen:
            continue
        seen.add(cell)
        row, counts = q._cell(cell[0])
        counts[t.action] += 1
        row[t.action] += (g - row[t.action]) / counts[t.action]
    return q


class TabularQLearner:
    kind = "tabular_q"
    uses_replay = True

    def __init__(
        self,
        n_actions: int,
        cfg: LearnerConfig,
        key_fn: Callable[[Observation], StateKey] = box_key,
    ) -> None:
        self.cfg = cfg
        self.key_fn = key_fn
        self.q = QTable(n_actions, cfg.q_init)

    @property
    def n_actions(self) -> int:
        return self.q.n_actions

    def values(self, obs: Observation) -> Sequence[float]:
        return self.q.row(self.key_fn(obs))

    def act(self, obs: Observation, stream: RngStream, epsilon: float) -> int:
        return select_action(self.q, self.key_fn(obs), epsilon, stream)

    def greedy(self, obs: Observation) -> int:
        return self.q.greedy(self.key_fn(obs))

    def learn(self, batch: Sequence[Transition]) -> None:
        td_update(self.q, batch, self.cfg, self.key_fn)

    def end_episode(self, episode: Sequence[Transition]) -> None:
        pass

    def frozen(self) -> "TabularQLearner":
        twin = copy.copy(self)
        twin.q = self.q.copy()
        return twin


class TabularMCLearner(TabularQLearner):
    kind = "tabular_mc"
    uses_replay = False

    def learn(self, batch: Sequence[Transition]) -> None:
        pass

    def end_episode(self, episode: Sequence[Transition]) -> None:
        if episode and episode[-1].done:
            mc_update(self.q, episode, self.cfg, self.key_fn)
