"""Model-graded faithfulness scoring over a chat-completion provider.

The grader prompt asks for one line of JSON, ``{"score": S}`` with S an
integer 0..100, normalized here to [0, 1]. Integers survive model
formatting quirks better than decimals, and 100 steps comfortably exceed
the tag resolution downstream. Reply parsing is lenient about where the
JSON sits in the reply but strict about its content.

Grading failures never abort corpus work: after the retry budget is spent,
``self_eval_score`` returns None and the fusion layer renormalizes its
weights around the missing component.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Protocol

import httpx

from . import metrics, prompts
from .providers import (
    InFlightLimiter,
    ProviderUnavailable,
    RetryPolicy,
    auth_headers,
)

JUDGE_PROMPT_PREFIX = "You are grading how faithful a response is to a reference passage.\n"
_PASSAGE_MARKER = "Reference passage:\n"
_RESPONSE_MARKER = "\n\nResponse:\n"
_INSTRUCTIONS = (
    '\n\nOutput only a single line of JSON: {"score": S} where S is an integer '
    "from 0 to 100. 100 means every claim in the response is supported by the "
    "passage; 0 means the response ignores or contradicts the passage."
)


class JudgeReplyError(Exception):
    """The judge replied, but not in the required shape."""


class NoJsonFound(JudgeReplyError):
    pass


class MissingField(JudgeReplyError):
    pass


class NotAnInteger(JudgeReplyError):
    pass


class OutOfRange(JudgeReplyError):
    pass


@dataclass(frozen=True)
class JudgeVerdict:
    score: float
    raw_reply: str
    attempts: int


@dataclass(frozen=True)
class LlmProviderConfig:
    endpoint: str = ""
    model: str = "gpt-4"
    api_key: str = ""
    temperature: float = 0.0
    timeout: float = 30.0
    max_in_flight: int = 8
    retry: RetryPolicy = field(default_factory=RetryPolicy)

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout}")


class ChatClient(Protocol):
    def complete(self, prompt: str, *, temperature: float = 0.0) -> str: ...


def build_judge_prompt(knowledge: str, response: str) -> str:
    """Grading prompt with the passage and response substituted verbatim."""
    if not knowledge.strip():
        raise ValueError("judge prompt requires non-empty knowledge")
    if not response.strip():
        raise ValueError("judge prompt requires non-empty response")
    return (
        JUDGE_PROMPT_PREFIX
        + _PASSAGE_MARKER
        + knowledge
        + _RESPONSE_MARKER
        + response
        + _INSTRUCTIONS
    )


def parse_judge_reply(raw: str) -> float:
    """Extract the integer "score" field from the first JSON object in `raw`.

    Scans past any preamble, stops at the first well-formed object, and
    validates strictly from there. Returns score / 100.
    """
    decoder = json.JSONDecoder()
    index = raw.find("{")
    while index != -1:
        try:
            obj, _ = decoder.raw_decode(raw, index)
        except (ValueError, RecursionError):
            index = raw.find("{", index + 1)
            continue
        if "score" not in obj:
            raise MissingField("reply JSON has no 'score' field")
        score = obj["score"]
        if isinstance(score, bool) or not isinstance(score, int):
            raise NotAnInteger(f"'score' must be an integer, got {score!r}")
        if not 0 <= score <= 100:
            raise OutOfRange(f"'score' must be in [0, 100], got {score}")
        return score / 100
    raise NoJsonFound("no JSON object in judge reply")


def self_eval_score(
    knowledge: str,
    response: str,
    client: ChatClient,
    *,
    retry: RetryPolicy = RetryPolicy(),
    temperature: float = 0.0,
) -> JudgeVerdict | None:
    """Grade `response` against `knowledge`; None once retries are exhausted.

    Transport failures and malformed replies both consume an attempt; at
    most `retry.max_attempts` provider calls are made.
    """
    prompt = build_judge_prompt(knowledge, response)
    for attempt in range(1, retry.max_attempts + 1):
        try:
            reply = client.complete(prompt, temperature=temperature)
            score = parse_judge_reply(reply)
        except (ProviderUnavailable, JudgeReplyError):
            if attempt < retry.max_attempts:
                time.sleep(retry.backoff_for(attempt))
            continue
        return JudgeVerdict(score=score, raw_reply=reply, attempts=attempt)
    return None


class RemoteChatClient:
    """HTTP chat-completion client; also serves tag-conditioned generation."""

    def __init__(self, config: LlmProviderConfig, transport: httpx.BaseTransport | None = None):
        if not config.endpoint:
            raise ValueError("remote chat provider requires an endpoint")
        self.config = config
        self._limiter = InFlightLimiter(config.max_in_flight)
        self._http = httpx.Client(
            timeout=config.timeout,
            transport=transport,
            headers=auth_headers(config.api_key),
        )

    def close(self) -> None:
        self._http.close()

    def complete(self, prompt: str, *, temperature: float = 0.0, max_tokens: int | None = None) -> str:
        payload: dict = {
            "model": self.config.model,
            "temperature": temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        if max_tokens is not None:
            payload["max_tokens"] = max_tokens
        try:
            with self._limiter:
                response = self._http.post(self.config.endpoint, json=payload)
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"chat request failed: {exc}") from exc
        if response.status_code != 200:
            raise ProviderUnavailable(f"chat provider returned HTTP {response.status_code}")
        try:
            content = response.json()["content"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderUnavailable(f"malformed chat response: {exc}") from exc
        if not isinstance(content, str):
            raise ProviderUnavailable("chat response 'content' is not a string")
        return content


class MockChatClient:
    """Offline stand-in for the chat provider, deterministic by construction.

    Grading prompts are answered with a score derived from unigram overlap
    between the two embedded slots; tagged generation prompts are answered
    by echoing the knowledge passage. Anything else is echoed back.
    """

    def complete(self, prompt: str, *, temperature: float = 0.0, max_tokens: int | None = None) -> str:
        if prompt.startswith(JUDGE_PROMPT_PREFIX):
            return self._grade(prompt)
        if prompt.startswith(prompts.KNOWLEDGE_OPEN) and prompt.endswith(prompts.RESPONSE_OPEN):
            knowledge = prompt[len(prompts.KNOWLEDGE_OPEN):].split(prompts.KNOWLEDGE_CLOSE, 1)[0]
            return knowledge
        return prompt

    def _grade(self, prompt: str) -> str:
        body = prompt[len(JUDGE_PROMPT_PREFIX) + len(_PASSAGE_MARKER):]
        if body.endswith(_INSTRUCTIONS):
            body = body[: -len(_INSTRUCTIONS)]
        knowledge, _, response = body.partition(_RESPONSE_MARKER)
        overlap = metrics.rouge_n(metrics.tokenize(response), metrics.tokenize(knowledge), 1)
        score = int(overlap.f1 * 100 + 0.5)
        return json.dumps({"score": score})


def make_chat_client(
    config: LlmProviderConfig,
    *,
    mock: bool = False,
    transport: httpx.BaseTransport | None = None,
) -> ChatClient:
    if mock:
        return MockChatClient()
    return RemoteChatClient(config, transport=transport)
