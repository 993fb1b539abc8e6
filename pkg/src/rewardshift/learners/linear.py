"""Linear action values over sparse feature maps, trained by semi-gradient TD(0)."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from rewardshift.core import Observation, RngStream, Transition
from rewardshift.learners.base import LearnerConfig, argmax, epsilon_greedy

# (indices, values) into a weight row
SparseFeatures = tuple[np.ndarray, np.ndarray]
FeatureMap = Callable[[Observation], SparseFeatures]

CARTPOLE_BOUNDS = ((-2.4, 2.4), (-3.0, 3.0), (-0.2095, 0.2095), (-3.5, 3.5))


class TileCoder:
    """Grid tile coding with asymmetrically offset tilings.

    Each tiling lays a grid of ``tiles_per_dim`` tiles over the clipped
    bounds, plus one spare tile per dimension to absorb the offset. Tiling
    ``t`` is displaced by ``t * (1, 3, 5, 7, ...) / num_tilings`` of a tile
    width. Exactly ``num_tilings`` features are active for any input.
    """

    def __init__(
        self,
        bounds: Sequence[tuple[float, float]] = CARTPOLE_BOUNDS,
        num_tilings: int = 8,
        tiles_per_dim: int = 8,
    ) -> None:
        self.lows = np.array([b[0] for b in bounds], dtype=float)
        highs = np.array([b[1] for b in bounds], dtype=float)
        self.dims = len(bounds)
        self.num_tilings = num_tilings
        self.tiles_per_dim = tiles_per_dim
        self.widths = (highs - self.lows) / tiles_per_dim
        self.highs = highs
        side = tiles_per_dim + 1
        self.tiles_per_tiling = side**self.dims
        self.n_features = num_tilings * self.tiles_per_tiling
        odd = np.arange(1, 2 * self.dims, 2, dtype=float)
        self.offsets = np.array([(t * odd / num_tilings) % 1.0 for t in range(num_tilings)])
        self._strides = side ** np.arange(self.dims)
        self._base = np.arange(num_tilings) * self.tiles_per_tiling
        self._ones = np.ones(num_tilings)
        self._cache: dict[tuple[float, ...], np.ndarray] = {}

    def indices(self, x: Sequence[float]) -> np.ndarray:
        z = (np.clip(np.asarray(x, dtype=float), self.lows, self.highs) - self.lows) / self.widths
        cells = np.floor(z[None, :] + self.offsets).astype(np.int64)
        np.clip(cells, 0, self.tiles_per_dim, out=cells)
        return self._base + cells @ self._strides

    def __call__(self, obs: Observation) -> SparseFeatures:
        idx = self._cache.get(obs.box)
        if idx is None:
            if len(self._cache) >= 200_000:
                self._cache.clear()
            idx = self._cache[obs.box] = self.indices(obs.box)
        return idx, self._ones


def dense_features(vector: Sequence[float]) -> SparseFeatures:
    v = np.asarray(vector, dtype=float)
    return np.arange(v.size), v


class LinearQ:
    kind = "linear_q"
    uses_replay = True

    def __init__(
        self,
        n_actions: int,
        n_features: int,
        features: FeatureMap,
        cfg: LearnerConfig,
        alpha: float | None = None,
    ) -> None:
        self.cfg = cfg
        self.features = features
        self.n_features = n_features
        self.weights = np.full((n_actions, n_features), 0.0)
        if cfg.q_init:
            # spread the initial value so every action-value reads q_init
            per = cfg.q_init / getattr(features, "num_tilings", 1)
            self.weights[:] = per
        self.alpha = cfg.linear_alpha() if alpha is None else alpha

    @property
    def n_actions(self) -> int:
        return self.weights.shape[0]

    def _values(self, phi: SparseFeatures) -> list[float]:
        idx, vals = phi
        return (self.weights[:, idx] @ vals).tolist()

    def values(self, obs: Observation) -> list[float]:
        return self._values(self.features(obs))

    def act(self, obs: Observation, stream: RngStream, epsilon: float) -> int:
        return epsilon_greedy(self.values(obs), epsilon, stream)

    def greedy(self, obs: Observation) -> int:
        return argmax(self.values(obs))

    def learn(self, batch: Sequence[Transition]) -> None:
        linear_q_update(self, batch)

    def end_episode(self, episode: Sequence[Transition]) -> None:
        pass

    def frozen(self) -> "LinearQ":
        twin = object.__new__(LinearQ)
        twin.__dict__.update(self.__dict__)
        twin.weights = self.weights.copy()
        return twin


def _check_dims(q: LinearQ, phi: SparseFeatures) -> None:
    idx, vals = phi
    if idx.shape != vals.shape or (idx.size and (idx.min() < 0 or idx.max() >= q.n_features)):
        raise ValueError(
            f"feature vector does not fit a weight row of {q.n_features} entries"
        )


def td_error(q: LinearQ, t: Transition) -> tuple[float, SparseFeatures]:
    """TD error with a fixed (semi-gradient) target, and the features of ``t.state``."""
    phi = q.features(t.state)
    _check_dims(q, phi)
    target = t.reward
    if not t.done:
        nxt = q.features(t.next_state)
        _check_dims(q, nxt)
        target += q.cfg.gamma * max(q._values(nxt))
    idx, vals = phi
    return target - float(q.weights[t.action, idx] @ vals), phi


def td_gradient(q: LinearQ, batch: Sequence[Transition]) -> np.ndarray:
    """Gradient of ``sum 0.5 * delta**2`` over ``batch`` with targets held fixed."""
    grad = np.zeros_like(q.weights)
    for t in batch:
        delta, (idx, vals) = td_error(q, t)
        np.add.at(grad[t.action], idx, -delta * vals)
    return grad


def linear_q_update(q: LinearQ, batch: Sequence[Transition]) -> LinearQ:
    """Semi-gradient TD(0), one transition at a time: ``w[a] += alpha * delta * phi(s)``.

    Feature indices must be unique within one feature vector.
    """
    for t in batch:
        delta, (idx, vals) = td_error(q, t)
        q.weights[t.action, idx] += q.alpha * delta * vals
    return q
