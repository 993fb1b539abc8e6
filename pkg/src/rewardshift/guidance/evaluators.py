"""Evaluators: null, scripted oracle, and LLM-backed, plus the caching wrapper."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Callable

from rewardshift.core import ConfigError, Counter, Observation, ShiftVerdict
from rewardshift.guidance.cache import VerdictCache, cached_evaluate
from rewardshift.guidance.oracles import BlackjackOracle, CartPoleOracle, ChocKaleOracle, WatchOracle
from rewardshift.llm.client import LLMTransportError
from rewardshift.llm.parsing import PARSE_FAILURE, parse_score
from rewardshift.llm.prompts import STRATEGIES, PromptSpec, build_prompt, default_prompt_spec

EVALUATOR_KINDS = ("null", "scripted", "llm")

_ORACLE_OPTIONS = {
    "blackjack": {"tie_band"},
    "cartpole": {"lookahead", "dead_zone"},
    "watch_repair": {"margin"},
    "chockale": {"healthy_band", "low_kale", "sat_threshold"},
}


@dataclass(frozen=True)
class EvaluatorSpec:
    kind: str = "null"
    scale: float = 1.0
    cache_enabled: bool = False
    env_binding: str | None = None
    cache_path: str | None = None
    # per-step multiplicative decay of the scale; 1.0 keeps it constant
    scale_decay: float = 1.0
    oracle: dict[str, Any] = field(default_factory=dict)
    strategies: tuple[str, ...] = ("zero_shot",)
    prior_knowledge: bool = True
    persona: str | None = None
    endpoint: dict[str, Any] = field(default_factory=dict)
    record_path: str | None = None
    replay_path: str | None = None

    def validate(self) -> list[str]:
        errors = []
        if self.kind not in EVALUATOR_KINDS:
            errors.append(f"kind must be one of {EVALUATOR_KINDS}, got {self.kind!r}")
        if not self.scale >= 0:
            errors.append(f"scale must be nonnegative, got {self.scale!r}")
        if not 0 < self.scale_decay <= 1:
            errors.append(f"scale_decay must lie in (0, 1], got {self.scale_decay!r}")
        bad = sorted(set(self.strategies) - set(STRATEGIES))
        if bad:
            errors.append(f"unknown prompt strategies {bad}")
        if self.env_binding is not None and self.oracle:
            allowed = _ORACLE_OPTIONS.get(self.env_binding, set())
            for key in sorted(set(self.oracle) - allowed):
                errors.append(f"oracle option {key!r} does not apply to {self.env_binding}")
        if self.record_path and self.replay_path:
            errors.append("record_path and replay_path are mutually exclusive")
        return errors

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["strategies"] = list(self.strategies)
        return d

    def scale_at(self, step: int) -> float:
        if self.scale_decay == 1.0:
            return self.scale
        return self.scale * self.scale_decay**step


class NullEvaluator:
    kind = "null"

    def __init__(self, scale: float = 1.0) -> None:
        self.scale = scale
        self.counter = Counter()

    def evaluate(self, obs: Observation, action: int) -> ShiftVerdict:
        return ShiftVerdict(0, self.scale, "null")


class ScriptedEvaluator:
    """Wraps a pure rule ``(obs, action) -> (shift, rule_name)``."""

    kind = "scripted"

    def __init__(self, rule: Callable[[Observation, int], tuple[int, str]], scale: float = 1.0) -> None:
        self.rule = rule
        self.scale = scale
        self.counter = Counter()

    def evaluate(self, obs: Observation, action: int) -> ShiftVerdict:
        self.counter.queries += 1
        shift, name = self.rule(obs, action)
        return ShiftVerdict(shift, self.scale, name)


class LLMEvaluator:
    kind = "llm"

    def __init__(self, spec: PromptSpec, client, scale: float = 1.0) -> None:
        self.spec = spec
        self.client = client
        self.scale = scale
        self.counter = Counter()

    def evaluate(self, obs: Observation, action: int) -> ShiftVerdict:
        self.counter.queries += 1
        messages = build_prompt(self.spec, obs, action)
        try:
            text = self.client.complete(messages)
        except LLMTransportError as exc:
            self.counter.failures += 1
            return ShiftVerdict(0, self.scale, PARSE_FAILURE, f"transport error: {exc}")
        verdict = parse_score(text, self.scale)
        if verdict.provenance == PARSE_FAILURE:
            self.counter.failures += 1
        return verdict


class CachedEvaluator:
    def __init__(self, inner, cache: VerdictCache) -> None:
        self.inner = inner
        self.cache = cache

    @property
    def kind(self) -> str:
        return self.inner.kind

    @property
    def scale(self) -> float:
        return self.inner.scale

    @scale.setter
    def scale(self, value: float) -> None:
        self.inner.scale = value

    @property
    def counter(self) -> Counter:
        return self.inner.counter

    def evaluate(self, obs: Observation, action: int) -> ShiftVerdict:
        return cached_evaluate(self.cache, self.inner, obs, action)


def evaluate(evaluator, obs: Observation, action: int) -> ShiftVerdict:
    return evaluator.evaluate(obs, action)


def scripted_rule(env, options: dict[str, Any] | None = None):
    opts = dict(options or {})
    if "healthy_band" in opts:
        opts["healthy_band"] = tuple(opts["healthy_band"])
    env_id = env.env_id
    if env_id == "blackjack":
        return BlackjackOracle(**opts)
    if env_id == "cartpole":
        return CartPoleOracle(**opts)
    if env_id == "watch_repair":
        return WatchOracle(brands=env.brands, **opts)
    if env_id == "chockale":
        return ChocKaleOracle(slates=env.slates, **opts)
    raise ConfigError(f"no scripted oracle for {env_id!r}")


def make_evaluator(spec: EvaluatorSpec, env, client=None):
    """Build the evaluator described by ``spec`` for ``env``.

    For ``llm`` evaluators ``client`` overrides the client built from the
    spec's endpoint, replay and record settings.
    """
    errors = spec.validate()
    if spec.env_binding is not None and spec.env_binding != env.env_id:
        errors.append(f"evaluator is bound to {spec.env_binding}, not {env.env_id}")
    if errors:
        raise ConfigError("; ".join(errors))
    if spec.kind == "null":
        return NullEvaluator(spec.scale)
    if spec.kind == "scripted":
        inner = ScriptedEvaluator(scripted_rule(env, spec.oracle), spec.scale)
    else:
        if client is None:
            client = make_client(spec)
        prompt = default_prompt_spec(env.env_id, spec.strategies, spec.prior_knowledge, spec.persona)
        inner = LLMEvaluator(prompt, client, spec.scale)
    if spec.cache_enabled:
        return CachedEvaluator(inner, VerdictCache(spec.cache_path))
    return inner


def make_client(spec: EvaluatorSpec):
    from rewardshift.llm.client import ChatClient, EndpointConfig, ReplayClient, SessionRecorder

    endpoint = EndpointConfig.from_dict(spec.endpoint)
    if spec.replay_path:
        return ReplayClient(endpoint, spec.replay_path)
    recorder = SessionRecorder(spec.record_path) if spec.record_path else None
    return ChatClient(endpoint, recorder=recorder)
