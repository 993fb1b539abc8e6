"""Off-policy value learners, exploration and experience replay."""

from __future__ import annotations

from rewardshift.core import ConfigError
from rewardshift.learners.base import (
    EpsilonSchedule,
    LearnerConfig,
    ReplayBuffer,
    argmax,
    epsilon_greedy,
)
from rewardshift.learners.linear import LinearQ, TileCoder, linear_q_update, td_gradient
from rewardshift.learners.slate import ItemwiseSlateQ, slateq_itemwise_update
from rewardshift.learners.tabular import (
    QTable,
    TabularMCLearner,
    TabularQLearner,
    mc_update,
    select_action,
    td_update,
)


def make_learner(cfg: LearnerConfig, env):
    """Build the learner named by ``cfg.kind`` for ``env``."""
    cfg.check()
    if cfg.kind == "tabular_q":
        return TabularQLearner(env.n_actions, cfg)
    if cfg.kind == "tabular_mc":
        return TabularMCLearner(env.n_actions, cfg)
    if cfg.kind == "linear_q":
        if env.obs_dim != 4:
            raise ConfigError("linear_q ships a tile coder for 4-dimensional observations only")
        coder = TileCoder(num_tilings=cfg.num_tilings, tiles_per_dim=cfg.tiles_per_dim)
        return LinearQ(env.n_actions, coder.n_features, coder, cfg)
    if cfg.kind == "slate_q":
        if not hasattr(env, "slates"):
            raise ConfigError("slate_q needs a slate environment")
        return ItemwiseSlateQ(env.slates, cfg)
    raise ConfigError(f"unknown learner kind {cfg.kind!r}")


__all__ = [
    "EpsilonSchedule",
    "ItemwiseSlateQ",
    "LearnerConfig",
    "LinearQ",
    "QTable",
    "ReplayBuffer",
    "TabularMCLearner",
    "TabularQLearner",
    "TileCoder",
    "argmax",
    "epsilon_greedy",
    "linear_q_update",
    "make_learner",
    "mc_update",
    "select_action",
    "slateq_itemwise_update",
    "td_gradient",
    "td_update",
]
