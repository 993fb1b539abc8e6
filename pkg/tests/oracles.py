"""Independent reference computations used by the tests.

Nothing here imports the code under test's solvers: the Monte Carlo
simulators use numpy's own generator and their own card/cost logic, and the
value iteration works on explicit transition tables.
"""

from __future__ import annotations

import math

import numpy as np

CARD_P = np.array([1 / 13] * 9 + [4 / 13])  # card values 1..10


# -- published hit/stand basic strategy (infinite deck, dealer stands on soft 17)

def basic_strategy_hit(player: int, dealer: int, soft: bool) -> bool:
    """Textbook hit/stand chart without doubling or splitting."""
    if soft:
        if player >= 19:
            return False
        if player == 18:
            return dealer in (9, 10, 1)
        return True
    if player <= 11:
        return True
    if player >= 17:
        return False
    if player == 12:
        return dealer not in (4, 5, 6)
    return not 2 <= dealer <= 6


# -- vectorised blackjack Monte Carlo

def _draw(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.choice(np.arange(1, 11), size=n, p=CARD_P)


def _add(total: np.ndarray, soft: np.ndarray, card: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Add a card to (best total, usable-ace flag) hands."""
    total = total + card
    new_ace = (card == 1) & (total + 10 <= 21)
    total = np.where(new_ace, total + 10, total)
    soft = soft | new_ace
    bust_soft = soft & (total > 21)
    total = np.where(bust_soft, total - 10, total)
    soft = soft & ~bust_soft
    return total, soft


def _dealer(rng: np.random.Generator, up: int, n: int) -> np.ndarray:
    total = np.full(n, 11 if up == 1 else up)
    soft = np.full(n, up == 1)
    while True:
        active = total < 17
        if not active.any():
            return total
        t, s = _add(total[active], soft[active], _draw(rng, int(active.sum())))
        total[active] = t
        soft[active] = s


def _settle(rng, player: np.ndarray, up: int) -> np.ndarray:
    out = np.full(player.shape, -1.0)
    alive = player <= 21
    if alive.any():
        d = _dealer(rng, up, int(alive.sum()))
        p = player[alive]
        out[alive] = np.where((d > 21) | (p > d), 1.0, np.where(p == d, 0.0, -1.0))
    return out


def mc_action_value(player: int, dealer: int, soft: bool, hit: bool, episodes: int, seed: int) -> tuple[float, float]:
    """Mean and standard error of the return of ``hit``/stick, then basic strategy."""
    rng = np.random.default_rng(seed)
    total = np.full(episodes, player)
    aces = np.full(episodes, soft)
    if hit:
        total, aces = _add(total, aces, _draw(rng, episodes))
        chart = _hit_chart(dealer)
        while True:
            going = (total <= 21) & chart[np.minimum(total, 21), aces.astype(int)]
            if not going.any():
                break
            t, a = _add(total[going], aces[going], _draw(rng, int(going.sum())))
            total[going] = t
            aces[going] = a
    r = _settle(rng, total, dealer)
    return float(r.mean()), float(r.std(ddof=1) / math.sqrt(episodes))


def _hit_chart(dealer: int) -> np.ndarray:
    chart = np.zeros((22, 2), dtype=bool)
    for t in range(2, 22):
        for soft in (0, 1):
            chart[t, soft] = basic_strategy_hit(t, dealer, bool(soft))
    return chart


# -- tabular value iteration

def value_iteration(P: dict, R: dict, gamma: float, tol: float = 1e-14) -> dict:
    """Q* for a finite MDP: ``P[s][a]`` is a list of (prob, next_state or None)."""
    Q = {s: [0.0] * len(P[s]) for s in P}
    while True:
        delta = 0.0
        for s in P:
            for a, outcomes in enumerate(P[s]):
                v = R[s][a] + gamma * sum(p * (0.0 if s2 is None else max(Q[s2])) for p, s2 in outcomes)
                delta = max(delta, abs(v - Q[s][a]))
                Q[s][a] = v
        if delta < tol:
            return Q


# -- cart-pole single Euler step, written out by hand

def cartpole_euler(x, x_dot, theta, theta_dot, force, g=9.8, mc=1.0, mp=0.1, half=0.5, dt=0.02):
    total = mc + mp
    pml = mp * half
    c, s = math.cos(theta), math.sin(theta)
    temp = (force + pml * theta_dot**2 * s) / total
    theta_acc = (g * s - c * temp) / (half * (4.0 / 3.0 - mp * c * c / total))
    x_acc = temp - pml * theta_acc * c / total
    return (
        x + dt * x_dot,
        x_dot + dt * x_acc,
        theta + dt * theta_dot,
        theta_dot + dt * theta_acc,
    )


# -- watch repair Monte Carlo

def mc_repair_profit(price, mean, std, p_done, max_steps, episodes, seed) -> tuple[float, float]:
    """Always-repair profit by simulation; costs truncated at zero by rejection."""
    rng = np.random.default_rng(seed)
    total = np.zeros(episodes)
    running = np.ones(episodes, dtype=bool)
    for _ in range(max_steps):
        n = int(running.sum())
        if n == 0:
            break
        cost = rng.normal(mean, std, n) if std > 0 else np.full(n, max(mean, 0.0))
        bad = cost < 0
        while bad.any():
            cost[bad] = rng.normal(mean, std, int(bad.sum()))
            bad = cost < 0
        total[running] += cost
        done = rng.random(n) < p_done
        idx = np.flatnonzero(running)
        running[idx[done]] = False
    profit = price - total
    return float(profit.mean()), float(profit.std(ddof=1) / math.sqrt(episodes))


def mc_game_return(episodes: int, seed: int) -> tuple[float, float]:
    """Whole hands from the deal under the basic-strategy chart."""
    rng = np.random.default_rng(seed)
    zeros = np.zeros(episodes, dtype=int)
    total, aces = _add(zeros, zeros.astype(bool), _draw(rng, episodes))
    total, aces = _add(total, aces, _draw(rng, episodes))
    ups = _draw(rng, episodes)
    out = np.empty(episodes)
    for up in range(1, 11):
        sel = ups == up
        t, a = total[sel], aces[sel]
        chart = _hit_chart(up)
        while True:
            going = (t <= 21) & chart[np.minimum(t, 21), a.astype(int)]
            if not going.any():
                break
            t2, a2 = _add(t[going], a[going], _draw(rng, int(going.sum())))
            t[going] = t2
            a[going] = a2
        out[sel] = _settle(rng, t, up)
    return float(out.mean()), float(out.std(ddof=1) / math.sqrt(episodes))


# -- 3-state chain MDP for the tabular learners

def chain_mdp(step_cost: float = -0.1, exit_reward: float = 1.0):
    """Action 1 moves right, action 0 stays put; moving right from state 2 ends the episode.

    Returns (P, R, step) where ``step[s][a]`` is (next state, done).
    """
    P, R, step = {}, {}, {}
    for s in range(3):
        P[s] = [[(1.0, s)], [(1.0, s + 1 if s < 2 else None)]]
        R[s] = [step_cost, exit_reward if s == 2 else step_cost]
        step[s] = [(s, False), (s + 1, s == 2)]
    return P, R, step


# -- finite-difference gradient of the semi-gradient TD loss

def fd_td_gradient(weights: np.ndarray, features: list, actions: list, targets: list, h: float = 1e-6) -> np.ndarray:
    """Central differences of sum 0.5 * (y - w[a] . phi)^2 with the targets held fixed.

    ``features`` are dense feature vectors of the transitions' states.
    """
    def loss(w):
        return sum(0.5 * (y - float(w[a] @ phi)) ** 2 for phi, a, y in zip(features, actions, targets))

    grad = np.zeros_like(weights)
    for idx in np.ndindex(weights.shape):
        wp, wm = weights.copy(), weights.copy()
        wp[idx] += h
        wm[idx] -= h
        grad[idx] = (loss(wp) - loss(wm)) / (2 * h)
    return grad
