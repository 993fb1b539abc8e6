"""Hit/stick Blackjack against a dealer, drawing from an infinite deck.

Rules: cards are drawn with replacement, ranks 1..13 equally likely with
J/Q/K counting 10, so a 10 shows up with probability 4/13. Naturals pay +1
like any other win; there is no doubling, splitting or surrender. The dealer
draws until reaching 17 or more, standing on soft 17. The dealer's hole card
is independent of everything the player sees, so it is drawn when the player
sticks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from rewardshift.core import Observation, RngStream, StateError, check_action

STICK, HIT = 0, 1

CARD_PROBS = {c: (4 / 13 if c == 10 else 1 / 13) for c in range(1, 11)}


@dataclass(frozen=True)
class BlackjackState:
    player_sum: int
    dealer_up: int
    usable_ace: bool

    @property
    def hard_sum(self) -> int:
        return self.player_sum - 10 if self.usable_ace else self.player_sum


def draw_card(stream: RngStream) -> int:
    return min(stream.integer(13) + 1, 10)


def add_card(total: int, usable: bool, card: int) -> tuple[int, bool]:
    """Add ``card`` to a hand summarised as (best total, usable ace)."""
    hard = (total - 10 if usable else total) + card
    has_soft = usable or card == 1
    if has_soft and hard + 10 <= 21:
        return hard + 10, True
    return hard, False


def dealer_play(up: int, stream: RngStream) -> int:
    """Final dealer total (22 stands for any bust)."""
    total, usable = add_card(0, False, up)
    total, usable = add_card(total, usable, draw_card(stream))
    while total < 17:
        total, usable = add_card(total, usable, draw_card(stream))
    return total if total <= 21 else 22


def blackjack_step(
    state: BlackjackState, action: int, stream: RngStream
) -> tuple[BlackjackState, float, bool]:
    action = check_action(action, 2)
    if state.player_sum > 21:
        raise StateError("player already bust")
    if action == HIT:
        total, usable = add_card(state.player_sum, state.usable_ace, draw_card(stream))
        nxt = BlackjackState(total, state.dealer_up, usable)
        if total > 21:
            return nxt, -1.0, True
        return nxt, 0.0, False
    dealer = dealer_play(state.dealer_up, stream)
    if dealer > 21 or state.player_sum > dealer:
        reward = 1.0
    elif state.player_sum == dealer:
        reward = 0.0
    else:
        reward = -1.0
    return state, reward, True


def deal(stream: RngStream) -> BlackjackState:
    total, usable = add_card(0, False, draw_card(stream))
    total, usable = add_card(total, usable, draw_card(stream))
    return BlackjackState(total, draw_card(stream), usable)


class Blackjack:
    env_id = "blackjack"
    n_actions = 2
    obs_dim = 3
    action_names = ("stick", "hit")

    def __init__(self) -> None:
        self.state: BlackjackState | None = None
        self.stream: RngStream | None = None
        self.done = True

    def render(self, box: Sequence[float]) -> str:
        player, dealer, ace = (int(v) for v in box)
        dealer_card = "an ace" if dealer == 1 else f"a {dealer}"
        ace_text = "holds a usable ace" if ace else "holds no usable ace"
        return f"Player hand totals {player} and {ace_text}; the dealer shows {dealer_card}."

    def observe(self, state: BlackjackState) -> Observation:
        box = (state.player_sum, state.dealer_up, int(state.usable_ace))
        return Observation(box, self.render(box), self.env_id)

    def reset(self, stream: RngStream) -> Observation:
        self.stream = stream
        self.state = deal(stream)
        self.done = False
        return self.observe(self.state)

    def step(self, action: int) -> tuple[Observation, float, bool]:
        if self.done or self.state is None:
            raise StateError("step called on a finished blackjack hand; call reset first")
        self.state, reward, self.done = blackjack_step(self.state, action, self.stream)
        return self.observe(self.state), reward, self.done

    @staticmethod
    def state_of(obs: Observation) -> BlackjackState:
        p, d, a = obs.box
        return BlackjackState(int(p), int(d), bool(a))
