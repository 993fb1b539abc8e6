"""Evaluators that turn (state, action) pairs into bounded reward shifts."""

from __future__ import annotations

from rewardshift.guidance.blackjack_dp import (
    BasicStrategyTable,
    build_blackjack_oracle,
    dealer_final_distribution,
)
from rewardshift.guidance.cache import CACHE_HIT, VerdictCache, cache_key, cached_evaluate
from rewardshift.guidance.evaluators import (
    EVALUATOR_KINDS,
    CachedEvaluator,
    EvaluatorSpec,
    LLMEvaluator,
    NullEvaluator,
    ScriptedEvaluator,
    evaluate,
    make_evaluator,
    scripted_rule,
)
from rewardshift.guidance.oracles import (
    BlackjackOracle,
    CartPoleOracle,
    ChocKaleOracle,
    WatchOracle,
    cartpole_oracle,
    chockale_oracle,
    watch_oracle,
)

__all__ = [
    "CACHE_HIT",
    "EVALUATOR_KINDS",
    "BasicStrategyTable",
    "BlackjackOracle",
    "CachedEvaluator",
    "CartPoleOracle",
    "ChocKaleOracle",
    "EvaluatorSpec",
    "LLMEvaluator",
    "NullEvaluator",
    "ScriptedEvaluator",
    "VerdictCache",
    "WatchOracle",
    "build_blackjack_oracle",
    "cache_key",
    "cached_evaluate",
    "cartpole_oracle",
    "chockale_oracle",
    "dealer_final_distribution",
    "evaluate",
    "make_evaluator",
    "scripted_rule",
    "watch_oracle",
]
