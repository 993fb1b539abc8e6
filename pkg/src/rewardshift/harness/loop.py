"""The guided off-policy training loop and greedy checkpoint evaluation.

Per step: pick an epsilon-greedy action, step the environment, ask the
evaluator for a shift, store ``reward = intrinsic + shift * scale`` in the
replay buffer, and update from a sampled batch once the buffer holds
``batch_size`` transitions. Checkpoints freeze a copy of the learner and run
greedy rollouts on a separate environment instance with a dedicated "eval"
stream, so evaluation never touches the training streams.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

from rewardshift.core import RngStream, Transition
from rewardshift.envs import make_env
from rewardshift.guidance.evaluators import make_evaluator
from rewardshift.harness.config import RunConfig
from rewardshift.harness.records import CheckpointMetrics, RunRecord, episodes_to_threshold
from rewardshift.learners import make_learner
from rewardshift.learners.base import EpsilonSchedule, ReplayBuffer


def evaluate_policy(learner, env, episodes: int, stream: RngStream, max_steps: int | None = None):
    """Greedy (epsilon = 0) rollouts of a frozen learner; returns (mean, std, returns).

    Nothing is written to the learner.
    """
    returns = []
    for _ in range(episodes):
        obs = env.reset(stream)
        total = 0.0
        steps = 0
        while True:
            obs, r, done = env.step(learner.greedy(obs))
            total += r
            steps += 1
            if done or (max_steps is not None and steps >= max_steps):
                break
        returns.append(total)
    mean = math.fsum(returns) / len(returns)
    var = math.fsum((x - mean) ** 2 for x in returns) / len(returns)
    return mean, math.sqrt(var), returns


def _digest_line(t: Transition) -> bytes:
    return (
        f"{t.state.box!r}|{t.action}|{t.reward!r}|{t.intrinsic_reward!r}|{t.shift}|"
        f"{t.next_state.box!r}|{t.done}|{t.choice}\n"
    ).encode()


def train(
    cfg: RunConfig,
    seed: int,
    client=None,
    evaluator=None,
    on_transition: Callable[[Transition], None] | None = None,
) -> RunRecord:
    """Run one seeded training run of ``cfg``.

    ``evaluator`` overrides the one built from ``cfg.evaluator``; ``client``
    is passed to LLM evaluators. ``on_transition`` sees every stored
    transition (used by audits and tests).
    """
    cfg.check()
    env = make_env(cfg.env_id, cfg.env_params)
    eval_env = make_env(cfg.env_id, cfg.env_params)
    learner = make_learner(cfg.learner, env)
    spec = cfg.evaluator
    if evaluator is None and spec is not None:
        evaluator = make_evaluator(spec, env, client)
    env_stream = RngStream(seed, "env")
    policy_stream = RngStream(seed, "policy")
    lc = cfg.learner
    schedule = EpsilonSchedule(lc.epsilon_start, lc.epsilon_end, cfg.epsilon_decay())
    buffer = ReplayBuffer(lc.buffer_capacity) if learner.uses_replay else None
    by_steps = cfg.checkpoint_unit == "steps"
    pending = list(cfg.checkpoints)
    horizon = cfg.checkpoints[-1]
    track_decisions = cfg.threshold is not None and cfg.threshold.metric == "profitable_decision_rate"
    slate_env = hasattr(env, "slates")

    record = RunRecord(
        run_name=cfg.name,
        seed=seed,
        env_id=cfg.env_id,
        evaluator_kind="none" if spec is None else spec.kind,
        checkpoint_unit=cfg.checkpoint_unit,
        threshold=None if cfg.threshold is None else vars(cfg.threshold).copy(),
    )
    digest = hashlib.sha256()
    started = time.perf_counter()
    step = 0
    episode = 0

    def checkpoint() -> None:
        if cfg.eval_enabled:
            mean, std, _ = evaluate_policy(
                learner.frozen(), eval_env, cfg.eval_episodes, RngStream(seed, "eval"), cfg.max_steps
            )
        else:
            mean, std = float("nan"), float("nan")
        counts = evaluator.counter.snapshot() if evaluator is not None else {}
        record.checkpoints.append(
            CheckpointMetrics(
                step=step,
                episode=episode,
                mean_return=mean,
                std_return=std,
                wall_clock=time.perf_counter() - started,
                queries=counts.get("queries", 0),
                failures=counts.get("failures", 0),
                cache_hits=counts.get("cache_hits", 0),
            )
        )
        pending.pop(0)

    def finished() -> bool:
        if not pending:
            return True
        return cfg.episodes is not None and episode >= cfg.episodes

    while not finished():
        obs = env.reset(env_stream)
        if track_decisions:
            record.episode_decisions.append(bool(env.correct_decision(obs, learner.greedy(obs))))
        ep: list[Transition] = []
        ep_return = 0.0
        ep_steps = 0
        cut = False
        while True:
            eps = schedule(step if by_steps else episode)
            action = learner.act(obs, policy_stream, eps)
            nxt, r, done = env.step(action)
            shift = 0
            reward = r
            if evaluator is not None:
                verdict = evaluator.evaluate(obs, action)
                shift = verdict.shift
                if shift:
                    scale = spec.scale_at(step) if spec is not None else verdict.scale
                    reward = r + shift * scale
            t = Transition(obs, action, reward, r, shift, nxt, done, env.last_choice if slate_env else None)
            digest.update(_digest_line(t))
            if on_transition is not None:
                on_transition(t)
            ep.append(t)
            if buffer is not None:
                buffer.add(t)
                if len(buffer) >= lc.batch_size:
                    learner.learn(buffer.sample(lc.batch_size, policy_stream))
            step += 1
            ep_steps += 1
            ep_return += r
            obs = nxt
            if by_steps and pending and step == pending[0]:
                checkpoint()
                if not pending:
                    cut = not done
                    break
            if done or (cfg.max_steps is not None and ep_steps >= cfg.max_steps):
                break
        if cut:
            break
        if ep[-1].done:
            learner.end_episode(ep)
        episode += 1
        record.episode_returns.append(ep_return)
        if not by_steps and pending and episode == pending[0]:
            checkpoint()

    record.total_steps = step
    record.total_episodes = episode
    record.transition_digest = digest.hexdigest()
    if cfg.threshold is not None:
        record.episodes_to_threshold = episodes_to_threshold(record, cfg.threshold)
    return record


def _train_job(args) -> RunRecord:
    cfg, seed = args
    return train(cfg, seed)


def run_seeds(cfg: RunConfig, seeds=None, jobs: int = 1) -> list[RunRecord]:
    """Train ``cfg`` once per seed; results come back in seed-list order."""
    seeds = list(cfg.seeds if seeds is None else seeds)
    if jobs <= 1 or len(seeds) == 1:
        return [train(cfg, s) for s in seeds]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_train_job, [(cfg, s) for s in seeds]))


def audit_run(record: RunRecord, transitions: list[Transition]) -> list[str]:
    """Check that the record's episode returns are sums of intrinsic rewards only."""
    problems = []
    sums: list[float] = []
    acc = 0.0
    for t in transitions:
        acc += t.intrinsic_reward
        if t.done:
            sums.append(acc)
            acc = 0.0
    n = len(sums)
    for i, (a, b) in enumerate(zip(record.episode_returns[:n], sums)):
        if a != b:
            problems.append(f"episode {i}: recorded {a!r} but intrinsic sum is {b!r}")
    return problems
