from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rewardshift.core import (
    Observation,
    RngStream,
    ShiftVerdict,
    check_action,
    clamp_shift,
    fmt_num,
    rng_next_gaussian,
    rng_next_uniform,
)

GOLDEN = json.loads((Path(__file__).parent / "golden" / "rng.json").read_text())


def test_golden_first_draws():
    s = RngStream(42, "env")
    assert [repr(s.uniform()) for _ in range(3)] == GOLDEN["uniforms"]
    assert repr(RngStream(42, "env").gaussian(0.0, 1.0)) == GOLDEN["gaussian"]


def test_reinitialised_stream_repeats():
    a, b = RngStream(7, "policy"), RngStream(7, "policy")
    assert [a.uniform() for _ in range(5000)] == [b.uniform() for _ in range(5000)]


def test_labels_give_different_sequences():
    env, pol = RngStream(42, "env"), RngStream(42, "policy")
    xs = [env.uniform() for _ in range(100)]
    ys = [pol.uniform() for _ in range(100)]
    assert all(x != y for x, y in zip(xs, ys))


def test_bulk_draws_match_single_draws():
    a, b = RngStream(3, "x"), RngStream(3, "x")
    bulk = a.uniforms(10_000)
    single = [b.uniform() for _ in range(10_000)]
    assert bulk.tolist() == single
    assert a.draws == b.draws == 10_000
    g1 = RngStream(3, "g").gaussians(1000, 1.0, 2.0)
    g2 = RngStream(3, "g")
    assert g1.tolist() == pytest.approx([g2.gaussian(1.0, 2.0) for _ in range(1000)], abs=1e-12)


def test_gaussian_degenerate_still_consumes_two_draws():
    s = RngStream(1, "g")
    assert s.gaussian(0.0, 0.0) == 0.0
    assert s.draws == 2
    assert rng_next_gaussian(s, 3.5, 0.0) == 3.5


def test_gaussian_moments():
    z = RngStream(11, "moments").gaussians(1_000_000)
    assert abs(z.mean()) < 0.005
    assert abs(z.var() - 1.0) < 0.01


def test_negative_stddev_rejected():
    with pytest.raises(ValueError):
        RngStream(1, "g").gaussian(0.0, -1.0)


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5, "3"])
def test_seed_must_be_uint64(seed):
    with pytest.raises(ValueError):
        RngStream(seed, "env")


def test_uint64_extremes_accepted():
    for seed in (0, 2**64 - 1):
        assert 0.0 <= rng_next_uniform(RngStream(seed, "env")) < 1.0


@given(st.integers(0, 2**64 - 1), st.text(max_size=20))
def test_uniform_range(seed, label):
    s = RngStream(seed, label)
    for _ in range(20):
        u = s.uniform()
        assert 0.0 <= u < 1.0


@given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=8).filter(lambda w: sum(w) > 0))
def test_categorical_never_picks_zero_weight(weights):
    s = RngStream(5, "cat")
    for _ in range(50):
        i = s.categorical(weights)
        assert weights[i] > 0


def test_integer_is_uniform():
    s = RngStream(9, "int")
    counts = np.bincount([s.integer(13) for _ in range(130_000)], minlength=13)
    expected = 10_000
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < 36.4  # 99.95% quantile, 12 degrees of freedom


def test_shift_verdict_support():
    assert ShiftVerdict(-1, 2.0).value == -2.0
    with pytest.raises(ValueError):
        ShiftVerdict(2)
    with pytest.raises(ValueError):
        ShiftVerdict(1, -0.5)


@pytest.mark.parametrize("raw,expected", [(1, 1), (-1, -1), (1.0, 1), (5, 0), (-3, 0), (True, 0), (0, 0), (0.4, 0), ("x", 0), (None, 0), (math.nan, 0)])
def test_clamp_shift(raw, expected):
    assert clamp_shift(raw) == expected


def test_check_action():
    assert check_action(1, 2) == 1
    for bad in (-1, 2, 1.5):
        with pytest.raises(ValueError):
            check_action(bad, 2)


def test_fmt_num_folds_negative_zero():
    assert fmt_num(-0.0) == fmt_num(0.0)
    assert fmt_num(-1e-9) == fmt_num(0.0)


def test_observation_coerces_box_to_floats():
    obs = Observation((1, 2, True), "x", "blackjack")
    assert obs.box == (1.0, 2.0, 1.0)
    assert all(type(v) is float for v in obs.box)
