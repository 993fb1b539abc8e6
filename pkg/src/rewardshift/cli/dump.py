"""Decision tables of the scripted oracles, for inspection and cross-checking."""

from __future__ import annotations

import csv
import io

from rewardshift.core import Observation
from rewardshift.envs import make_env
from rewardshift.envs.watch import PHASE_DECIDE, PHASE_REPAIRING
from rewardshift.guidance.oracles import BlackjackOracle, CartPoleOracle, ChocKaleOracle, WatchOracle


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def blackjack_table() -> str:
    return BlackjackOracle().table.to_csv()


def watch_table(env_params: dict | None = None) -> str:
    env = make_env("watch_repair", env_params)
    oracle = WatchOracle(env.brands)
    rows = []
    for task in env.brands:
        phases = [(PHASE_DECIDE, 0)] + [(PHASE_REPAIRING, k) for k in range(1, task.max_repair_steps)]
        for phase, steps in phases:
            obs = Observation((task.brand_id, task.sell_price, phase, steps), "", "watch_repair")
            shift, rule = oracle(obs, 0)
            remaining = task.expected_cost(0 if phase == PHASE_DECIDE else steps)
            rows.append([
                task.brand_id, "decide" if phase == PHASE_DECIDE else "repairing", steps,
                task.sell_price, f"{remaining:.6f}", f"{task.sell_price - remaining:.6f}", shift, rule,
            ])
    header = ["brand_id", "phase", "steps_done", "sell_price", "expected_remaining_cost",
              "expected_surplus", "shift_repair_or_continue", "rule"]
    return _csv(header, rows)


def cartpole_table() -> str:
    oracle = CartPoleOracle()
    rows = []
    for i in range(-10, 11):
        theta = i * 0.02
        for j in range(-10, 11):
            theta_dot = j * 0.2
            shift, rule = oracle(Observation((0.0, 0.0, theta, theta_dot), "", "cartpole"), 1)
            rows.append([f"{theta:.2f}", f"{theta_dot:.1f}", shift, rule])
    return _csv(["theta", "theta_dot", "shift_push_right", "rule"], rows)


def chockale_table() -> str:
    oracle = ChocKaleOracle(slates=((0, 1),))
    rows = []
    for i in range(10):
        sat = i / 10
        for j in range(21):
            k = j / 20
            shift, rule = oracle(Observation((sat, k, k), "", "chockale"), 0)
            rows.append([f"{sat:.1f}", f"{k:.2f}", shift, rule])
    return _csv(["observed_sat", "mean_slate_kaleness", "shift", "rule"], rows)


DUMPERS = {
    "blackjack": blackjack_table,
    "watch_repair": watch_table,
    "cartpole": cartpole_table,
    "chockale": chockale_table,
}


def oracle_table(env_id: str) -> str:
    try:
        return DUMPERS[env_id]()
    except KeyError:
        raise KeyError(f"no scripted oracle for {env_id!r}; expected one of {', '.join(DUMPERS)}") from None
