from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import basic_strategy_hit, mc_game_return
from rewardshift.core import ConfigError, Observation
from rewardshift.envs import Blackjack, BlackjackState, CartPole, ChocKale, WatchRepair
from rewardshift.envs.blackjack import CARD_PROBS, HIT, STICK, add_card
from rewardshift.envs.watch import DECLINE, DEFAULT_BRANDS, REPAIR
from rewardshift.guidance import (
    CACHE_HIT,
    CachedEvaluator,
    EvaluatorSpec,
    LLMEvaluator,
    NullEvaluator,
    VerdictCache,
    WatchOracle,
    build_blackjack_oracle,
    cache_key,
    dealer_final_distribution,
    make_evaluator,
    scripted_rule,
)
from rewardshift.llm import PARSE_FAILURE, default_prompt_spec

TABLE = build_blackjack_oracle()
BJ = Blackjack()

# Value of DP-optimal hit/stick play from the deal, frozen after agreeing with
# a whole-hand basic-strategy simulation (2e6 hands: -0.04678 +- 0.00067).
FROZEN_BLACKJACK_VALUE = -0.0465559770666975


def bj_obs(player, dealer, ace=False) -> Observation:
    return BJ.observe(BlackjackState(player, dealer, ace))


# -- blackjack DP table

def test_table_covers_every_decision_state():
    assert len(TABLE) == 18 * 10 + 10 * 10


def test_21_sticks_and_small_totals_hit():
    for up in range(1, 11):
        for ace in (False, True):
            assert TABLE.cell(21, up, ace).best == STICK
        for total in range(4, 12):
            assert TABLE.cell(total, up, False).best == HIT


def test_dealer_distribution_sums_to_one():
    for up in range(1, 11):
        dist = dealer_final_distribution(up)
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
        assert set(dist) <= {17, 18, 19, 20, 21, 22}


def test_table_is_self_consistent():
    for (total, up, ace), cell in TABLE:
        hit = 0.0
        for card, p in CARD_PROBS.items():
            t2, a2 = add_card(total, ace, card)
            hit += p * (-1.0 if t2 > 21 else TABLE.cell(t2, up, a2).value)
        assert cell.hit == pytest.approx(hit, abs=1e-12)
        assert -1.0 <= cell.stick <= 1.0


def test_table_matches_published_chart():
    agree = sum(
        (cell.best == HIT) == basic_strategy_hit(total, up, ace) for (total, up, ace), cell in TABLE
    )
    assert agree / len(TABLE) >= 0.95


def test_frozen_game_value():
    assert TABLE.expected_return() == pytest.approx(FROZEN_BLACKJACK_VALUE, abs=1e-12)


def test_game_value_agrees_with_simulation():
    mean, se = mc_game_return(400_000, 11)
    assert abs(mean - FROZEN_BLACKJACK_VALUE) < 4 * se + 0.002


def test_blackjack_oracle_examples():
    rule = scripted_rule(BJ)
    assert rule(bj_obs(20, 6), HIT) == (-1, "blackjack:suboptimal")
    assert rule(bj_obs(20, 6), STICK) == (1, "blackjack:optimal")
    assert rule(bj_obs(11, 6), HIT)[0] == 1
    assert rule(bj_obs(11, 6), STICK)[0] == -1


def test_blackjack_oracle_tie_band():
    rule = scripted_rule(BJ, {"tie_band": 10.0})
    assert rule(bj_obs(20, 6), HIT) == (0, "blackjack:indifferent")


# -- other oracles

def test_null_evaluator_is_zero():
    ev = NullEvaluator()
    v = ev.evaluate(bj_obs(12, 3), 1)
    assert (v.shift, v.value) == (0, 0.0)


def test_watch_oracle_decision_and_repair_phase():
    env = WatchRepair()
    rule = scripted_rule(env)
    good, bad = DEFAULT_BRANDS[0], DEFAULT_BRANDS[1]

    def decide(b):
        return Observation((b.brand_id, b.sell_price, 0, 0), "", "watch_repair")

    assert rule(decide(good), REPAIR)[0] == 1
    assert rule(decide(good), DECLINE)[0] == -1
    assert rule(decide(bad), REPAIR)[0] == -1
    assert rule(decide(bad), DECLINE)[0] == 1
    # after nine steps only one more is possible: finishing beats abandoning
    late = Observation((bad.brand_id, bad.sell_price, 1, 9), "", "watch_repair")
    assert rule(late, 0) == (1, "watch:continue-profitable")


def test_watch_oracle_margin():
    b = DEFAULT_BRANDS[0]
    obs = Observation((b.brand_id, b.sell_price, 0, 0), "", "watch_repair")
    assert WatchOracle(margin=0.5)(obs, REPAIR) == (0, "watch:within-margin")


def test_cartpole_oracle_pushes_toward_fall():
    rule = scripted_rule(CartPole())
    leaning_right = Observation((0.0, 0.0, 0.05, 0.1), "", "cartpole")
    assert rule(leaning_right, 1)[0] == 1
    assert rule(leaning_right, 0)[0] == -1
    assert rule(Observation((0.0, 0.0, 0.0, 0.0), "", "cartpole"), 1)[0] == 0


def test_chockale_oracle():
    env = ChocKale()
    rule = scripted_rule(env)
    ks = [0.05, 0.1, 0.5, 0.6, 0.9, 0.95, 0.3, 0.2, 0.15, 0.8]
    low = Observation((0.2, *ks), "", "chockale")
    assert rule(low, env.action_of([2, 3]))[0] == 1
    assert rule(low, env.action_of([0, 1]))[0] == -1
    assert rule(low, env.action_of([4, 5]))[0] == 0
    high = Observation((0.9, *ks), "", "chockale")
    assert rule(high, env.action_of([0, 1]))[0] == 0


env_obs = st.one_of(
    st.tuples(st.just("blackjack"), st.tuples(st.integers(4, 21), st.integers(1, 10), st.integers(0, 1)), st.integers(0, 1)),
    st.tuples(st.just("cartpole"), st.tuples(*[st.floats(-3, 3)] * 4), st.integers(0, 1)),
    st.tuples(st.just("watch_repair"), st.tuples(st.integers(0, 7), st.floats(1, 30), st.integers(0, 1), st.integers(0, 10)), st.integers(0, 1)),
    st.tuples(st.just("chockale"), st.tuples(st.floats(0, 1), *[st.floats(0, 1)] * 10), st.integers(0, 44)),
)
ENVS = {"blackjack": BJ, "cartpole": CartPole(), "watch_repair": WatchRepair(), "chockale": ChocKale()}
RULES = {k: scripted_rule(v) for k, v in ENVS.items()}


@given(env_obs)
@settings(max_examples=300)
def test_scripted_shifts_are_bounded_and_pure(case):
    env_id, box, action = case
    obs = Observation(box, "", env_id)
    first = RULES[env_id](obs, action)
    assert first[0] in (-1, 0, 1)
    assert RULES[env_id](obs, action) == first


# -- evaluator construction

def test_make_evaluator_checks_binding_and_options():
    with pytest.raises(ConfigError):
        make_evaluator(EvaluatorSpec(kind="scripted", env_binding="cartpole"), BJ)
    with pytest.raises(ConfigError):
        make_evaluator(EvaluatorSpec(kind="scripted", env_binding="blackjack", oracle={"margin": 1}), BJ)
    ev = make_evaluator(EvaluatorSpec(kind="scripted", scale=2.0), BJ)
    assert ev.evaluate(bj_obs(20, 6), HIT).value == -2.0
    assert ev.counter.queries == 1


# -- verdict cache

class CountingClient:
    def __init__(self, reply="Fine.\nSCORE: 1"):
        self.reply = reply
        self.calls = 0

    def complete(self, messages):
        self.calls += 1
        return self.reply


def llm_evaluator(client, cache=None):
    inner = LLMEvaluator(default_prompt_spec("blackjack", ("zero_shot",), True), client)
    return CachedEvaluator(inner, cache) if cache is not None else inner


def test_cache_serves_repeat_queries():
    client = CountingClient()
    ev = llm_evaluator(client, VerdictCache())
    first = ev.evaluate(bj_obs(14, 10), HIT)
    second = ev.evaluate(bj_obs(14, 10), HIT)
    assert client.calls == 1
    assert (first.shift, second.shift) == (1, 1)
    assert second.provenance == CACHE_HIT
    assert ev.counter.cache_hits == 1
    ev.evaluate(bj_obs(14, 10), STICK)
    assert client.calls == 2


def test_disabled_cache_passes_through():
    client = CountingClient()
    ev = llm_evaluator(client)
    for _ in range(5):
        ev.evaluate(bj_obs(14, 10), HIT)
    assert client.calls == 5 == ev.counter.queries


def test_cache_does_not_store_failures():
    client = CountingClient("no contract line")
    ev = llm_evaluator(client, VerdictCache())
    for _ in range(3):
        assert ev.evaluate(bj_obs(14, 10), HIT).provenance == PARSE_FAILURE
    assert client.calls == 3
    assert ev.counter.failures == 3


def test_cache_persistence_round_trip(tmp_path):
    path = tmp_path / "cache.jsonl"
    client = CountingClient("SCORE: -1")
    ev = llm_evaluator(client, VerdictCache(path))
    states = [bj_obs(p, d) for p in (12, 15, 19) for d in (2, 7, 10)]
    original = [ev.evaluate(o, a).shift for o in states for a in (0, 1)]
    saved = path.read_bytes()
    reloaded = VerdictCache(path)
    assert len(reloaded) == len(states) * 2
    client2 = CountingClient("SCORE: 1")
    ev2 = llm_evaluator(client2, reloaded)
    replayed = [ev2.evaluate(o, a).shift for o in states for a in (0, 1)]
    assert replayed == original
    assert client2.calls == 0
    assert path.read_bytes() == saved


def test_cache_skips_corrupt_lines(tmp_path):
    path = tmp_path / "cache.jsonl"
    good = {"key": cache_key("blackjack", "x", 1), "shift": 1, "provenance": "llm"}
    lines = [
        json.dumps(good),
        "{not json",
        json.dumps({**good, "shift": 5}),
        json.dumps({**good, "shift": True}),
        json.dumps({"key": "short", "shift": 0, "provenance": "llm"}),
        "",
    ]
    path.write_text("\n".join(lines), encoding="utf-8")
    cache = VerdictCache(path)
    assert len(cache) == 1
    assert cache.corrupt_records == 4
    assert cache.warnings == 1
    assert cache.get(good["key"]) == (1, "llm")


def test_cache_unreadable_file_starts_empty(tmp_path):
    path = tmp_path / "cache.jsonl"
    path.write_bytes(b"\xff\xfe\x00garbage")
    cache = VerdictCache(path)
    assert len(cache) == 0 and cache.warnings == 1


def test_cache_key_separates_fields():
    assert cache_key("blackjack", "a", 1) != cache_key("blackjack", "a", 0)
    assert cache_key("a", "b", 1) != cache_key("ab", "", 1)
