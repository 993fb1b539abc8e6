"""Prompt construction, response parsing and the chat-completion transport."""

from __future__ import annotations

from rewardshift.llm.client import (
    ChatClient,
    EndpointConfig,
    LLMTransportError,
    ReplayClient,
    SessionRecorder,
    request_hash,
    request_verdict,
)
from rewardshift.llm.parsing import LLM, PARSE_FAILURE, parse_score
from rewardshift.llm.prompts import (
    STRATEGIES,
    PromptSpec,
    action_label,
    build_prompt,
    default_prompt_spec,
    render_messages,
    strategy_combinations,
)

__all__ = [
    "LLM",
    "PARSE_FAILURE",
    "STRATEGIES",
    "ChatClient",
    "EndpointConfig",
    "LLMTransportError",
    "PromptSpec",
    "ReplayClient",
    "SessionRecorder",
    "action_label",
    "build_prompt",
    "default_prompt_spec",
    "parse_score",
    "render_messages",
    "request_hash",
    "request_verdict",
    "strategy_combinations",
]
