"""Discrete-action environments: cart-pole, blackjack, watch repair, Choc-vs-Kale."""

from __future__ import annotations

from typing import Any, Mapping

from rewardshift.core import ConfigError
from rewardshift.envs.blackjack import Blackjack, BlackjackState, blackjack_step
from rewardshift.envs.cartpole import CartPole, CartPoleParams, CartPoleState, cartpole_step
from rewardshift.envs.chockale import (
    ChocKale,
    ChocKaleParams,
    Document,
    UserState,
    chockale_step,
    user_choose,
    user_update,
)
from rewardshift.envs.watch import WatchRepair, WatchTask, watch_step

ENV_IDS = ("cartpole", "blackjack", "watch_repair", "chockale")


def make_env(env_id: str, params: Mapping[str, Any] | None = None):
    """Construct an environment from its id and optional parameter overrides."""
    params = dict(params or {})
    try:
        if env_id == "cartpole":
            return CartPole(CartPoleParams(**params))
        if env_id == "blackjack":
            if params:
                raise TypeError(f"unexpected parameters {sorted(params)}")
            return Blackjack()
        if env_id == "watch_repair":
            brands = params.pop("brands", None)
            if params:
                raise TypeError(f"unexpected parameters {sorted(params)}")
            if brands is None:
                return WatchRepair()
            return WatchRepair([WatchTask(**b) for b in brands])
        if env_id == "chockale":
            return ChocKale(ChocKaleParams(**params))
    except TypeError as exc:
        raise ConfigError(f"{env_id}: {exc}") from exc
    raise ConfigError(f"unknown environment {env_id!r}; expected one of {ENV_IDS}")


__all__ = [
    "ENV_IDS",
    "Blackjack",
    "BlackjackState",
    "CartPole",
    "CartPoleParams",
    "CartPoleState",
    "ChocKale",
    "ChocKaleParams",
    "Document",
    "UserState",
    "WatchRepair",
    "WatchTask",
    "blackjack_step",
    "cartpole_step",
    "chockale_step",
    "make_env",
    "user_choose",
    "user_update",
    "watch_step",
]
