"""Evaluator prompt construction.

A prompt is a list of ``{"role", "content"}`` chat messages built in a fixed
order so that the strategy set is a set, not a sequence:

1. system message: persona line (``name``), task card, prior-knowledge block,
   scoring rubric (``zero_shot``), step-by-step instruction (``cot``);
2. one user/assistant pair per worked example (``few_shot``);
3. final user message: state and proposed action, then the response contract.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from rewardshift.core import ConfigError, Observation

STRATEGIES = ("cot", "few_shot", "name", "zero_shot")

RESPONSE_CONTRACT = (
    "Finish your reply with a final line of exactly the form `SCORE: <-1|0|1>`: "
    "1 approves the action, -1 disapproves of it, 0 is neutral."
)
COT_INSTRUCTION = "Reason step by step about the state before the final line."
ZERO_SHOT_RUBRIC = (
    "Scoring guide: give 1 when the action is what a knowledgeable player would do here, "
    "-1 when it is a clear mistake, and 0 when the choice is close or your knowledge "
    "says nothing about it."
)
DEFAULT_PERSONA = "Morgan"


@dataclass(frozen=True)
class Example:
    state: str
    action: str
    response: str


@dataclass(frozen=True)
class PromptSpec:
    env_card: str
    strategies: frozenset[str] = frozenset()
    prior_knowledge: str | None = None
    examples: tuple[Example, ...] = ()
    persona: str | None = None
    response_contract: str = RESPONSE_CONTRACT

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategies", frozenset(self.strategies))
        unknown = self.strategies - set(STRATEGIES)
        if unknown:
            raise ConfigError(f"unknown prompt strategies {sorted(unknown)}; expected a subset of {STRATEGIES}")
        if "few_shot" in self.strategies and not self.examples:
            raise ConfigError("few_shot needs at least one worked example")
        if "name" in self.strategies and not self.persona:
            raise ConfigError("name needs a persona string")


def _user_turn(state: str, action: str) -> str:
    return f"State: {state}\nProposed action: {action}."


def build_prompt(
    spec: PromptSpec, obs: Observation, action: int, action_text: str | None = None
) -> list[dict[str, str]]:
    """Chat messages asking for a score of ``action`` in ``obs``.

    ``action_text`` overrides the default wording from :func:`action_label`.
    """
    if action_text is None:
        action_text = action_label(obs, action)
    if not obs.human:
        raise ConfigError("observation has no human rendering")
    s = spec.strategies
    system: list[str] = []
    if "name" in s:
        system.append(f"Your name is {spec.persona}.")
    system.append(spec.env_card)
    if spec.prior_knowledge:
        system.append("Background knowledge:\n" + spec.prior_knowledge)
    if "zero_shot" in s:
        system.append(ZERO_SHOT_RUBRIC)
    if "cot" in s:
        system.append(COT_INSTRUCTION)
    messages = [{"role": "system", "content": "\n\n".join(system)}]
    if "few_shot" in s:
        for ex in spec.examples:
            messages.append({"role": "user", "content": _user_turn(ex.state, ex.action)})
            messages.append({"role": "assistant", "content": ex.response})
    final = _user_turn(obs.human, action_text) + "\n\n" + spec.response_contract
    messages.append({"role": "user", "content": final})
    return messages


def render_messages(messages: Sequence[dict[str, str]]) -> str:
    """Flat text form used for golden files and logs."""
    return "\n".join(f"[{m['role']}]\n{m['content']}\n" for m in messages)


ENV_CARDS = {
    "blackjack": (
        "You review moves made by an agent learning to play Blackjack against a dealer. "
        "Each turn the agent either hits (takes another card) or sticks (ends its turn)."
    ),
    "cartpole": (
        "You review moves made by an agent balancing a pole hinged on a cart. "
        "Each step the agent pushes the cart left or right; the episode ends when the pole "
        "tilts past 12 degrees or the cart leaves the track."
    ),
    "watch_repair": (
        "You review decisions made by an agent running a watch repair shop. For each watch "
        "it sees the brand and the selling price of the repaired watch, then decides whether "
        "to take on the repair. Repair costs are uncertain and the profit is only known when "
        "the repair finishes."
    ),
    "chockale": (
        "You review recommendations made by an agent that shows a user two documents at a time. "
        "Documents range from chocolate (kaleness 0: engaging but unhealthy) to kale "
        "(kaleness 1: less engaging but good for long-term satisfaction)."
    ),
}

PRIOR_KNOWLEDGE = {
    "blackjack": (
        "Cards 2 to 9 count their face value, tens and picture cards count 10, and an ace "
        "counts 11 unless that would take the hand over 21, in which case it counts 1. "
        "Going over 21 loses immediately. After the player sticks the dealer draws until "
        "reaching 17 or more. Basic strategy: always hit on 11 or less; stick on hard 17 "
        "or more; with hard 12 to 16 stick when the dealer shows 2 to 6 (hit 12 against "
        "2 or 3) and hit when the dealer shows 7 or higher or an ace; hit soft 17 or less "
        "and stick on soft 19 or more."
    ),
    "cartpole": (
        "To keep the pole upright, push the cart toward the side the pole is leaning or "
        "falling to; a pole that leans right is caught by moving the cart right."
    ),
    "watch_repair": (
        "A repair is worth taking when the selling price comfortably exceeds the expected "
        "total repair cost for that brand. Costs already paid on a running repair are sunk; "
        "only the expected remaining cost matters when deciding whether to continue."
    ),
    "chockale": (
        "Users who only see chocolate grow unsatisfied and leave sooner. When satisfaction "
        "is low, a moderately healthy slate (average kaleness around 0.4 to 0.7) restores it; "
        "a slate of pure chocolate makes it worse."
    ),
}

EXAMPLES = {
    "blackjack": (
        Example(
            "Player hand totals 20 and holds no usable ace; the dealer shows a 6.",
            "hit",
            "A hard 20 is almost certain to beat a dealer showing 6, and any card other "
            "than an ace busts the hand.\nSCORE: -1",
        ),
        Example(
            "Player hand totals 11 and holds no usable ace; the dealer shows a 6.",
            "hit",
            "No card can bust a hand of 11 and a ten makes 21, so taking a card is right.\nSCORE: 1",
        ),
    ),
    "cartpole": (
        Example(
            "Cart position 0 m, cart velocity 0 m/s, pole angle 5 deg, pole angular velocity 20 deg/s.",
            "push right",
            "The pole leans and falls to the right, so pushing right moves the cart under it.\nSCORE: 1",
        ),
    ),
    "watch_repair": (
        Example(
            "Watch of brand 9 with a known selling price of 3. Decide whether to repair it or decline the job.",
            "repair the watch",
            "Three units will not cover several steps of repair work.\nSCORE: -1",
        ),
    ),
    "chockale": (
        Example(
            "Observed user satisfaction 0.2. Candidate documents: #0 kaleness 0.05, #1 kaleness 0.6.",
            "recommend documents #0 and #1",
            "The user is unsatisfied, and the average kaleness of 0.33 is a little low.\nSCORE: 0",
        ),
    ),
}


def default_prompt_spec(
    env_id: str,
    strategies: Iterable[str] = (),
    prior_knowledge: bool = True,
    persona: str | None = None,
) -> PromptSpec:
    if env_id not in ENV_CARDS:
        raise ConfigError(f"no prompt material for environment {env_id!r}")
    strategies = frozenset(strategies)
    return PromptSpec(
        env_card=ENV_CARDS[env_id],
        strategies=strategies,
        prior_knowledge=PRIOR_KNOWLEDGE[env_id] if prior_knowledge else None,
        examples=EXAMPLES[env_id],
        persona=persona or (DEFAULT_PERSONA if "name" in strategies else None),
    )


_ACTION_NAMES = {
    "blackjack": ("stick", "hit"),
    "cartpole": ("push left", "push right"),
}


def action_label(obs: Observation, action: int, slate_size: int = 2) -> str:
    """Plain-language text for ``action`` in ``obs``."""
    action = int(action)
    if obs.env_id == "chockale":
        slates = list(itertools.combinations(range(len(obs.box) - 1), slate_size))
        return "recommend documents " + " and ".join(f"#{i}" for i in slates[action])
    if obs.env_id == "watch_repair":
        if int(obs.box[2]) == 0:
            return ("repair the watch", "decline the job")[action]
        return ("continue the repair", "abandon the repair")[action]
    return _ACTION_NAMES[obs.env_id][action]


def strategy_combinations() -> list[frozenset[str]]:
    """All 16 subsets of the strategy catalog in a fixed order."""
    out = []
    for mask in range(1 << len(STRATEGIES)):
        out.append(frozenset(s for i, s in enumerate(STRATEGIES) if mask >> i & 1))
    return out


def combination_label(strategies: Iterable[str]) -> str:
    return "+".join(sorted(strategies)) or "none"


__all__ = [
    "COT_INSTRUCTION",
    "ENV_CARDS",
    "EXAMPLES",
    "Example",
    "PRIOR_KNOWLEDGE",
    "PromptSpec",
    "RESPONSE_CONTRACT",
    "STRATEGIES",
    "build_prompt",
    "combination_label",
    "action_label",
    "default_prompt_spec",
    "render_messages",
    "strategy_combinations",
]
