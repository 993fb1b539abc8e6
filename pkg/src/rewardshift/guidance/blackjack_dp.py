"""Exact hit/stick values for infinite-deck Blackjack by backward induction.

The dealer's final-total distribution is computed per up-card by recursion
over (total, usable ace) with the infinite-deck card probabilities. Player
values follow from ``V(s) = max(Q(s, stick), Q(s, hit))`` with
``Q(s, hit) = sum_c P(c) * (-1 if bust else V(s + c))``. The recursion
terminates because the hard total grows with every card.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from rewardshift.envs.blackjack import CARD_PROBS, HIT, STICK, BlackjackState, add_card

DEALER_BUST = 22


@lru_cache(maxsize=None)
def _dealer_from(total: int, usable: bool) -> tuple[tuple[int, float], ...]:
    if total > 21:
        return ((DEALER_BUST, 1.0),)
    if total >= 17:
        return ((total, 1.0),)
    acc: dict[int, float] = {}
    for card, p in CARD_PROBS.items():
        for final, q in _dealer_from(*add_card(total, usable, card)):
            acc[final] = acc.get(final, 0.0) + p * q
    return tuple(sorted(acc.items()))


def dealer_final_distribution(up: int) -> dict[int, float]:
    """P(final dealer total) for an up-card; key 22 collects all busts."""
    return dict(_dealer_from(*add_card(0, False, up)))


def stick_value(player_sum: int, up: int) -> float:
    dist = dealer_final_distribution(up)
    value = 0.0
    for final, p in dist.items():
        if final == DEALER_BUST or final < player_sum:
            value += p
        elif final > player_sum:
            value -= p
    return value


@dataclass(frozen=True)
class Cell:
    stick: float
    hit: float

    @property
    def best(self) -> int:
        return HIT if self.hit > self.stick else STICK

    @property
    def value(self) -> float:
        return max(self.stick, self.hit)

    @property
    def gap(self) -> float:
        return abs(self.hit - self.stick)

    def q(self, action: int) -> float:
        return self.hit if action == HIT else self.stick


class BasicStrategyTable:
    """Optimal action and both action values for every decision state."""

    def __init__(self, cells: dict[tuple[int, int, bool], Cell]) -> None:
        self.cells = cells

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, key: object) -> bool:
        return key in self.cells

    def cell(self, player_sum: int, dealer_up: int, usable_ace: bool) -> Cell:
        return self.cells[(player_sum, dealer_up, bool(usable_ace))]

    def best_action(self, state: BlackjackState) -> int:
        return self.cell(state.player_sum, state.dealer_up, state.usable_ace).best

    def __iter__(self) -> Iterator[tuple[tuple[int, int, bool], Cell]]:
        return iter(sorted(self.cells.items()))

    def expected_return(self) -> float:
        """Value of optimal play averaged over the initial deal."""
        total = 0.0
        for c1, p1 in CARD_PROBS.items():
            for c2, p2 in CARD_PROBS.items():
                s, u = add_card(*add_card(0, False, c1), c2)
                for up, pu in CARD_PROBS.items():
                    total += p1 * p2 * pu * self.cell(s, up, u).value
        return total

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["player_sum", "dealer_up", "usable_ace", "best_action", "q_stick", "q_hit", "gap"])
        for (p, d, a), cell in self:
            w.writerow([p, d, int(a), "hit" if cell.best == HIT else "stick",
                        f"{cell.stick:.6f}", f"{cell.hit:.6f}", f"{cell.gap:.6f}"])
        return buf.getvalue()


def build_blackjack_oracle() -> BasicStrategyTable:
    memo: dict[tuple[int, bool, int], float] = {}
    cells: dict[tuple[int, int, bool], Cell] = {}

    def cell(total: int, usable: bool, up: int) -> Cell:
        key = (total, up, usable)
        if key in cells:
            return cells[key]
        hit = 0.0
        for card, p in CARD_PROBS.items():
            t2, u2 = add_card(total, usable, card)
            hit += p * (-1.0 if t2 > 21 else value(t2, u2, up))
        c = cells[key] = Cell(stick=stick_value(total, up), hit=hit)
        return c

    def value(total: int, usable: bool, up: int) -> float:
        k = (total, usable, up)
        if k not in memo:
            memo[k] = cell(total, usable, up).value
        return memo[k]

    for up in range(1, 11):
        for total in range(4, 22):
            cell(total, False, up)
        for total in range(12, 22):
            cell(total, True, up)
    return BasicStrategyTable(cells)
