"""Itemwise slate Q-learning for the Choc-vs-Kale recommender.

The slate value is decomposed over items: ``Q(s, slate) = sum_i P(i | s, slate) Q(s, i)``
with ``P`` the user's choice model. Only the consumed item's value is updated.
States are binned observed satisfaction; items are binned kaleness.
"""

from __future__ import annotations

import copy
import math
from typing import Sequence

import numpy as np

from rewardshift.core import Observation, RngStream, StateError, Transition
from rewardshift.learners.base import LearnerConfig


def _bin(x: float, n: int) -> int:
    return min(max(int(x * n), 0), n - 1)


class ItemwiseSlateQ:
    kind = "slate_q"
    uses_replay = True

    def __init__(self, slates: Sequence[tuple[int, ...]], cfg: LearnerConfig) -> None:
        self.cfg = cfg
        self.slates = tuple(slates)
        self._slate_index = {s: i for i, s in enumerate(self.slates)}
        self.slate_size = len(self.slates[0])
        self.q = np.full((cfg.sat_bins, cfg.kaleness_bins), float(cfg.q_init))
        self.counts = np.zeros((cfg.sat_bins, cfg.kaleness_bins), dtype=np.int64)

    @property
    def n_actions(self) -> int:
        return len(self.slates)

    def state_bin(self, obs: Observation) -> int:
        return _bin(obs.box[0], self.cfg.sat_bins)

    def item_bin(self, kaleness: float) -> int:
        return _bin(kaleness, self.cfg.kaleness_bins)

    def item_scores(self, obs: Observation) -> list[float]:
        """``exp(1 - k) * Q(s, k)`` for every candidate, the greedy packing key."""
        row = self.q[self.state_bin(obs)]
        kb = self.cfg.kaleness_bins
        return [math.exp(1.0 - k) * row[_bin(k, kb)] for k in obs.box[1:]]

    def greedy_slate(self, obs: Observation) -> tuple[int, ...]:
        scores = self.item_scores(obs)
        order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
        return tuple(sorted(order[: self.slate_size]))

    def slate_value(self, obs: Observation, slate: Sequence[int]) -> float:
        row = self.q[self.state_bin(obs)]
        ks = [obs.box[1 + i] for i in slate]
        w = [math.exp(1.0 - k) for k in ks]
        total = math.fsum(w)
        return math.fsum(wi / total * row[self.item_bin(k)] for wi, k in zip(w, ks))

    def values(self, obs: Observation) -> list[float]:
        return [self.slate_value(obs, s) for s in self.slates]

    def greedy(self, obs: Observation) -> int:
        return self._slate_index[self.greedy_slate(obs)]

    def act(self, obs: Observation, stream: RngStream, epsilon: float) -> int:
        if stream.uniform() < epsilon:
            return stream.integer(len(self.slates))
        return self.greedy(obs)

    def learn(self, batch: Sequence[Transition]) -> None:
        slateq_itemwise_update(self, batch)

    def end_episode(self, episode: Sequence[Transition]) -> None:
        pass

    def frozen(self) -> "ItemwiseSlateQ":
        twin = copy.copy(self)
        twin.q = self.q.copy()
        twin.counts = self.counts.copy()
        return twin


def slateq_itemwise_update(learner: ItemwiseSlateQ, batch: Sequence[Transition]) -> ItemwiseSlateQ:
    """TD update of the consumed item's value.

    Target: ``r + gamma * sum_j P(j | s', slate*) Q(s', j)`` where ``slate*`` is
    the greedy slate at the next observation.
    """
    cfg = learner.cfg
    for t in batch:
        if t.choice is None:
            raise StateError("slate transition does not record the consumed item")
        target = t.reward
        if not t.done:
            nxt = t.next_state
            target += cfg.gamma * learner.slate_value(nxt, learner.greedy_slate(nxt))
        s = learner.state_bin(t.state)
        i = learner.item_bin(t.state.box[1 + t.choice])
        learner.counts[s, i] += 1
        step = cfg.step_size(int(learner.counts[s, i]))
        learner.q[s, i] += step * (target - learner.q[s, i])
    return learner
