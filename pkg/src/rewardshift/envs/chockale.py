"""Choc-vs-Kale slate recommender with a single simulated user per episode.

Documents carry a kaleness in [0, 1] (0 = pure chocolate, 1 = pure kale) and
are served to the agent ``n_candidates`` at a time in ID order. The agent
recommends a slate of ``slate_size`` distinct candidates; the user picks one
item with probability proportional to ``exp(1 - kaleness)``, consumes it and
the user's latent state moves:

    nke'  = beta * nke + 2 * (k - 1/2) + N(0, eta)
    sat'  = logistic(tau * nke')
    s     ~ LogNormal(k * mu_k + (1 - k) * mu_c, k * sigma_k + (1 - k) * sigma_c)

The engagement ``s`` is the step reward. Each consumed item uses up
``item_cost * (1 - bonus * sat' * s / (1 + s))`` units of session time, so a
satisfied user stays longer; the episode ends when the time budget is gone.
The agent sees satisfaction only through additive Gaussian noise clamped to
[0, 1].
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Sequence

from rewardshift.core import Observation, RngStream, StateError, check_action, fmt_num


@dataclass(frozen=True)
class Document:
    doc_id: int
    kaleness: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.kaleness <= 1.0:
            raise ValueError(f"kaleness must lie in [0, 1], got {self.kaleness!r}")


@dataclass(frozen=True)
class UserState:
    nke: float
    sat: float
    tau: float = 1.0
    beta: float = 0.9
    eta: float = 0.05
    mu_k: float = 0.5
    sigma_k: float = 0.3
    mu_c: float = 1.0
    sigma_c: float = 0.3
    budget: float = 200.0


@dataclass(frozen=True)
class ChocKaleParams:
    n_candidates: int = 10
    slate_size: int = 2
    tau: float = 1.0
    beta: float = 0.9
    eta: float = 0.05
    mu_k: float = 0.5
    sigma_k: float = 0.3
    mu_c: float = 1.0
    sigma_c: float = 0.3
    initial_budget: float = 200.0
    item_cost: float = 4.0
    sat_bonus: float = 0.9
    obs_noise: float = 0.1
    initial_nke_std: float = 1.0


def logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def choice_weights(slate: Sequence[Document]) -> list[float]:
    return [math.exp(1.0 - d.kaleness) for d in slate]


def choice_probabilities(slate: Sequence[Document]) -> list[float]:
    w = choice_weights(slate)
    total = math.fsum(w)
    return [x / total for x in w]


def user_choose(user: UserState, slate: Sequence[Document], stream: RngStream) -> int:
    if not slate:
        raise ValueError("slate must not be empty")
    return stream.categorical(choice_weights(slate))


def engagement_params(user: UserState, kaleness: float) -> tuple[float, float]:
    k = kaleness
    return k * user.mu_k + (1 - k) * user.mu_c, k * user.sigma_k + (1 - k) * user.sigma_c


def sample_engagement(user: UserState, kaleness: float, stream: RngStream) -> float:
    mu, sigma = engagement_params(user, kaleness)
    return math.exp(stream.gaussian(mu, sigma))


def time_used(sat: float, engagement: float, item_cost: float = 4.0, sat_bonus: float = 0.9) -> float:
    """Session time consumed by one item: the fixed cost minus a satisfaction bonus."""
    fraction = engagement / (1.0 + engagement)
    return item_cost * (1.0 - sat_bonus * sat * fraction)


def user_update(
    user: UserState,
    chosen: Document,
    stream: RngStream,
    item_cost: float = 4.0,
    sat_bonus: float = 0.9,
) -> tuple[UserState, float]:
    """Advance the user after consuming ``chosen``; returns the new state and engagement.

    Draw order is fixed: the exposure noise first, then the engagement.
    Satisfaction is recomputed from the exposure, never integrated.
    """
    k = chosen.kaleness
    if not 0.0 <= k <= 1.0:
        raise ValueError("kaleness must lie in [0, 1]")
    nke = user.beta * user.nke + 2.0 * (k - 0.5) + stream.gaussian(0.0, user.eta)
    sat = logistic(user.tau * nke)
    engagement = sample_engagement(user, k, stream)
    budget = max(0.0, user.budget - time_used(sat, engagement, item_cost, sat_bonus))
    return replace(user, nke=nke, sat=sat, budget=budget), engagement


class ChocKale:
    env_id = "chockale"

    def __init__(self, params: ChocKaleParams | None = None) -> None:
        self.params = params or ChocKaleParams()
        p = self.params
        if not 1 <= p.slate_size <= p.n_candidates:
            raise ValueError("slate_size must be between 1 and n_candidates")
        self.slates: tuple[tuple[int, ...], ...] = tuple(
            itertools.combinations(range(p.n_candidates), p.slate_size)
        )
        self._slate_index = {s: i for i, s in enumerate(self.slates)}
        self.n_actions = len(self.slates)
        self.obs_dim = 1 + p.n_candidates
        self.user: UserState | None = None
        self.candidates: tuple[Document, ...] = ()
        self.stream: RngStream | None = None
        self.next_doc_id = 0
        self.done = True

    def slate_of(self, action: int) -> tuple[int, ...]:
        return self.slates[check_action(action, self.n_actions)]

    def action_of(self, slate: Sequence[int]) -> int:
        key = tuple(sorted(int(i) for i in slate))
        return self._slate_index[key]

    def render(self, box: Sequence[float]) -> str:
        sat, *ks = box
        docs = ", ".join(f"#{i} kaleness {fmt_num(k, 2)}" for i, k in enumerate(ks))
        return f"Observed user satisfaction {fmt_num(sat, 2)}. Candidate documents: {docs}."

    def _serve_candidates(self) -> None:
        n = self.params.n_candidates
        self.candidates = tuple(
            Document(self.next_doc_id + i, self.stream.uniform()) for i in range(n)
        )
        self.next_doc_id += n

    def _obs(self) -> Observation:
        noisy = self.user.sat + self.stream.gaussian(0.0, self.params.obs_noise)
        noisy = min(max(noisy, 0.0), 1.0)
        box = (noisy, *(d.kaleness for d in self.candidates))
        return Observation(box, self.render(box), self.env_id)

    def reset(self, stream: RngStream) -> Observation:
        p = self.params
        self.stream = stream
        nke = stream.gaussian(0.0, p.initial_nke_std)
        self.user = UserState(
            nke=nke,
            sat=logistic(p.tau * nke),
            tau=p.tau,
            beta=p.beta,
            eta=p.eta,
            mu_k=p.mu_k,
            sigma_k=p.sigma_k,
            mu_c=p.mu_c,
            sigma_c=p.sigma_c,
            budget=p.initial_budget,
        )
        self.next_doc_id = 0
        self._serve_candidates()
        self.done = False
        return self._obs()

    def step_slate(self, slate: Sequence[int]) -> tuple[Observation, float, bool]:
        if self.done or self.user is None:
            raise StateError("step called on a finished recommender episode; call reset first")
        idx = [int(i) for i in slate]
        if len(idx) != self.params.slate_size:
            raise ValueError(f"slate must have exactly {self.params.slate_size} items")
        if len(set(idx)) != len(idx):
            raise ValueError("slate contains duplicate document indices")
        if any(not 0 <= i < len(self.candidates) for i in idx):
            raise ValueError("slate index out of range")
        docs = [self.candidates[i] for i in idx]
        pick = user_choose(self.user, docs, self.stream)
        self.user, engagement = user_update(
            self.user, docs[pick], self.stream, self.params.item_cost, self.params.sat_bonus
        )
        self.last_choice = idx[pick]
        self.done = self.user.budget <= 0.0
        self._serve_candidates()
        return self._obs(), engagement, self.done

    def step(self, action: int) -> tuple[Observation, float, bool]:
        return self.step_slate(self.slate_of(action))


def chockale_step(env: ChocKale, slate_action: Sequence[int]) -> tuple[Observation, float, bool]:
    return env.step_slate(slate_action)
