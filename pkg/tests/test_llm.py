from __future__ import annotations

import hashlib
import json
from pathlib import Path

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rewardshift.core import ConfigError
from rewardshift.envs import Blackjack, BlackjackState
from rewardshift.guidance import EvaluatorSpec, LLMEvaluator
from rewardshift.harness import RunConfig, train
from rewardshift.learners import LearnerConfig
from rewardshift.llm import (
    LLM,
    PARSE_FAILURE,
    ChatClient,
    EndpointConfig,
    LLMTransportError,
    PromptSpec,
    ReplayClient,
    SessionRecorder,
    action_label,
    build_prompt,
    default_prompt_spec,
    parse_score,
    render_messages,
    request_hash,
    strategy_combinations,
)
from rewardshift.llm.prompts import RESPONSE_CONTRACT, combination_label

GOLDEN = Path(__file__).parent / "golden" / "prompts"
OBS = Blackjack().observe(BlackjackState(14, 10, False))


def rendered(strategies, pk: bool) -> str:
    return render_messages(build_prompt(default_prompt_spec("blackjack", strategies, pk), OBS, 1))


# -- prompts

@pytest.mark.parametrize("pk", [True, False], ids=["pk", "nopk"])
@pytest.mark.parametrize("combo", strategy_combinations(), ids=combination_label)
def test_prompt_matches_golden(combo, pk):
    path = GOLDEN / f"{combination_label(combo)}__{'pk' if pk else 'nopk'}.txt"
    assert rendered(combo, pk) == path.read_text(encoding="utf-8")


def test_golden_set_is_complete():
    assert len(strategy_combinations()) == 16
    assert len(list(GOLDEN.glob("*.txt"))) == 32


@given(st.permutations(["cot", "few_shot", "name", "zero_shot"]), st.integers(0, 4))
def test_strategy_order_does_not_matter(perm, k):
    chosen = perm[:k]
    assert rendered(chosen, True) == rendered(sorted(chosen), True)


def test_empty_strategy_set_is_minimal():
    msgs = build_prompt(default_prompt_spec("blackjack", (), False), OBS, 1)
    assert [m["role"] for m in msgs] == ["system", "user"]
    spec = default_prompt_spec("blackjack", (), False)
    assert msgs[0]["content"] == spec.env_card
    assert msgs[1]["content"] == f"State: {OBS.human}\nProposed action: hit.\n\n{RESPONSE_CONTRACT}"


def test_prompt_is_deterministic():
    a = build_prompt(default_prompt_spec("blackjack", ("cot", "few_shot"), True), OBS, 0)
    b = build_prompt(default_prompt_spec("blackjack", ("few_shot", "cot"), True), OBS, 0)
    assert a == b


def test_prompt_spec_errors():
    with pytest.raises(ConfigError):
        PromptSpec("card", strategies={"telepathy"})
    with pytest.raises(ConfigError):
        PromptSpec("card", strategies={"few_shot"})
    with pytest.raises(ConfigError):
        default_prompt_spec("pong")


@pytest.mark.parametrize("env_id", ["blackjack", "cartpole", "watch_repair", "chockale"])
def test_every_environment_has_prompt_material(env_id):
    from rewardshift.core import RngStream
    from rewardshift.envs import make_env

    env = make_env(env_id)
    obs = env.reset(RngStream(1, "env"))
    msgs = build_prompt(default_prompt_spec(env_id, ("cot", "few_shot", "name", "zero_shot"), True), obs, 1)
    assert msgs[-1]["content"].endswith(RESPONSE_CONTRACT)
    assert action_label(obs, 1) in msgs[-1]["content"]


# -- parsing

@pytest.mark.parametrize(
    "text,shift,prov",
    [
        ("thinking...\nSCORE: -1", -1, LLM),
        ("SCORE: 1", 1, LLM),
        ("score: +1.", 1, LLM),
        ("**SCORE:** 0", 0, LLM),
        ("SCORE: −1", -1, LLM),
        ("SCORE: 1\nactually\nSCORE: -1", -1, LLM),
        ("The move is fine.", 0, PARSE_FAILURE),
        ("SCORE: 2", 0, PARSE_FAILURE),
        ("SCORE: 1.5", 0, PARSE_FAILURE),
        ("SCORE: one", 0, PARSE_FAILURE),
        ("SCORE: 00000000000000000001", 0, PARSE_FAILURE),
        ("", 0, PARSE_FAILURE),
        (None, 0, PARSE_FAILURE),
    ],
)
def test_parse_score_examples(text, shift, prov):
    v = parse_score(text)
    assert (v.shift, v.provenance) == (shift, prov)


@given(st.text())
def test_parse_score_is_total(text):
    v = parse_score(text)
    assert v.shift in (-1, 0, 1)
    assert v.provenance in (LLM, PARSE_FAILURE)


@given(st.text(), st.sampled_from(["-1", "0", "1", "+1"]))
def test_parse_score_last_line_wins(prefix, value):
    v = parse_score(prefix + "\nSCORE: " + value)
    assert v.shift == int(value) and v.provenance == LLM


# -- transport

def completion(text: str) -> dict:
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


def mock_client(handler, recorder=None, **endpoint):
    sleeps: list[float] = []
    client = ChatClient(
        EndpointConfig(base_url="http://llm.test/v1", auth_env=None, **endpoint),
        transport=httpx.MockTransport(handler),
        recorder=recorder,
        sleep=sleeps.append,
    )
    return client, sleeps


def test_client_retries_then_succeeds():
    calls = []

    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(json.loads(request.content))
        if len(calls) < 3:
            return httpx.Response(503)
        return httpx.Response(200, json=completion("SCORE: 1"))

    client, sleeps = mock_client(handler, max_retries=3, backoff=0.5)
    assert client.complete([{"role": "user", "content": "hi"}]) == "SCORE: 1"
    assert len(calls) == 3
    assert sleeps == [0.5, 1.0]
    assert calls[0]["model"] == "local-model" and calls[0]["messages"][0]["content"] == "hi"
    assert request_hash(calls[0]) == request_hash(calls[2])


def test_client_gives_up_after_retries():
    client, sleeps = mock_client(lambda r: httpx.Response(429), max_retries=2)
    with pytest.raises(LLMTransportError):
        client.complete([{"role": "user", "content": "hi"}])
    assert len(sleeps) == 2


def test_client_does_not_retry_client_errors():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(400, text="bad request")

    client, _ = mock_client(handler)
    with pytest.raises(LLMTransportError):
        client.complete([{"role": "user", "content": "hi"}])
    assert len(calls) == 1


def test_client_retries_connection_errors():
    calls = []

    def handler(request):
        calls.append(1)
        if len(calls) == 1:
            raise httpx.ConnectError("refused")
        return httpx.Response(200, json=completion("ok"))

    client, _ = mock_client(handler)
    assert client.complete([{"role": "user", "content": "x"}]) == "ok"


def test_malformed_body_is_transport_error():
    client, _ = mock_client(lambda r: httpx.Response(200, json={"nope": 1}))
    with pytest.raises(LLMTransportError):
        client.complete([{"role": "user", "content": "x"}])


def test_complete_many_keeps_order():
    def handler(request):
        text = json.loads(request.content)["messages"][0]["content"]
        if text == "fail":
            return httpx.Response(400)
        return httpx.Response(200, json=completion(text.upper()))

    client, _ = mock_client(handler)
    out = client.complete_many([[{"role": "user", "content": t}] for t in ("a", "fail", "c")], max_workers=2)
    assert out[0] == "A" and out[2] == "C"
    assert isinstance(out[1], LLMTransportError)


def test_transport_failure_becomes_neutral_verdict():
    client, _ = mock_client(lambda r: httpx.Response(500), max_retries=0)
    ev = LLMEvaluator(default_prompt_spec("blackjack", ("zero_shot",), True), client)
    v = ev.evaluate(OBS, 1)
    assert (v.shift, v.provenance) == (0, PARSE_FAILURE)
    assert ev.counter.failures == 1 and ev.counter.queries == 1


def test_endpoint_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        EndpointConfig.from_dict({"base_url": "x", "modle": "y"})


# -- record and replay

def scoring_server(request: httpx.Request) -> httpx.Response:
    """Deterministic stand-in model: the verdict is a hash of the prompt."""
    body = json.loads(request.content)
    digest = hashlib.sha256(json.dumps(body["messages"]).encode()).digest()
    verdict = digest[0] % 4 - 1  # -1, 0, 1, or 2 (an out-of-contract reply)
    return httpx.Response(200, json=completion(f"Considering it.\nSCORE: {verdict}"))


def llm_run_config(**spec) -> RunConfig:
    return RunConfig(
        name="llm",
        env_id="blackjack",
        learner=LearnerConfig(gamma=1.0, alpha=0.1, batch_size=8),
        evaluator=EvaluatorSpec(kind="llm", strategies=("zero_shot",), **spec),
        checkpoints=(60, 300),
        eval_episodes=30,
        seeds=(42,),
    )


def recorded_session(tmp_path, cache_enabled=False):
    rec_path = tmp_path / "session.jsonl"
    cfg = llm_run_config(cache_enabled=cache_enabled)
    client, _ = mock_client(scoring_server, recorder=SessionRecorder(rec_path))
    shifts = []
    record = train(cfg, 42, client=client, on_transition=lambda t: shifts.append(t.shift))
    return cfg, rec_path, record, shifts


@pytest.mark.parametrize("cache_enabled", [False, True])
def test_replay_reproduces_recorded_session(tmp_path, cache_enabled):
    cfg, rec_path, original, shifts = recorded_session(tmp_path, cache_enabled)
    assert any(s != 0 for s in shifts)
    replay = ReplayClient(EndpointConfig(base_url="http://llm.test/v1", auth_env=None), rec_path)
    replayed_shifts = []
    again = train(cfg, 42, client=replay, on_transition=lambda t: replayed_shifts.append(t.shift))
    assert replayed_shifts == shifts
    assert again.comparable() == original.comparable()
    assert replay.remaining() == 0


def test_replay_from_spec_path(tmp_path):
    cfg, rec_path, original, _ = recorded_session(tmp_path)
    spec = EvaluatorSpec(
        kind="llm", strategies=("zero_shot",), replay_path=str(rec_path),
        endpoint={"base_url": "http://llm.test/v1", "auth_env": None},
    )
    again = train(cfg.with_evaluator(spec), 42)
    assert again.comparable() == original.comparable()


def test_replay_unknown_request_fails_softly(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    replay = ReplayClient(EndpointConfig(auth_env=None), path)
    with pytest.raises(LLMTransportError):
        replay.complete([{"role": "user", "content": "x"}])
    ev = LLMEvaluator(default_prompt_spec("blackjack", (), True), replay)
    assert ev.evaluate(OBS, 1).provenance == PARSE_FAILURE
