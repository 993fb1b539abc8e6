"""Total parser for the ``SCORE: x`` response contract."""

from __future__ import annotations

import re

from rewardshift.core import ShiftVerdict

PARSE_FAILURE = "parse_failure"
LLM = "llm"

_SCORE_LINE = re.compile(r"^\s*\**\s*score\s*\**\s*:", re.IGNORECASE)
_VALUE = re.compile(r"^\s*\**\s*score\s*\**\s*:\s*\**\s*([+\-−]?[0-9]+)\s*\**\s*\.?\s*$", re.IGNORECASE)


def parse_score(response_text: object, scale: float = 1.0) -> ShiftVerdict:
    """Shift from the last ``SCORE:`` line; anything else maps to a neutral failure verdict.

    Only the last line that starts with ``SCORE:`` counts. Its value must be
    one of -1, 0, 1 (a leading ``+`` or a Unicode minus is accepted); any
    other value, or no such line at all, yields shift 0 with the
    parse-failure provenance.
    """
    try:
        if not isinstance(response_text, str):
            return ShiftVerdict(0, scale, PARSE_FAILURE, None)
        candidates = [ln for ln in response_text.splitlines() if _SCORE_LINE.match(ln)]
        if not candidates:
            return ShiftVerdict(0, scale, PARSE_FAILURE, response_text)
        m = _VALUE.match(candidates[-1])
        if m is None:
            return ShiftVerdict(0, scale, PARSE_FAILURE, response_text)
        token = m.group(1).replace("−", "-")
        value = int(token) if len(token) <= 3 else None
        if value not in (-1, 0, 1):
            return ShiftVerdict(0, scale, PARSE_FAILURE, response_text)
        return ShiftVerdict(value, scale, LLM, response_text)
    except Exception:  # the contract is totality
        return ShiftVerdict(0, scale, PARSE_FAILURE, None)
