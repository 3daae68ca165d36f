"""Inference-time tag control: prompt building, generation, round-trip checks.

The inference prompt is built by the same function as the training prompt,
so parity is structural rather than tested-for-and-hoped. Round-trip
verification re-scores the generated response with the same annotation
stack used for corpus work and reports how far the measured tag landed
from the requested one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fusion import FaithfulnessBreakdown, TagToken, render_tag
from .judge import ChatClient
from .pipeline import Annotator, RawExample
from .prompts import tagged_prompt
from .providers import RetryPolicy, call_with_retries


@dataclass(frozen=True)
class GenerationRequest:
    context: str
    knowledge: str
    tag: TagToken
    temperature: float = 0.0
    max_tokens: int | None = None

    def __post_init__(self) -> None:
        if not self.knowledge.strip():
            raise ValueError("generation requires non-empty knowledge")


@dataclass(frozen=True)
class RoundTripReport:
    response: str
    breakdown: FaithfulnessBreakdown
    measured_tag: TagToken
    deviation: int

    def as_dict(self) -> dict:
        return {
            "response": self.response,
            "breakdown": self.breakdown.as_dict(),
            "measured_tag": self.measured_tag.level,
            "deviation": self.deviation,
        }


def build_inference_prompt(request: GenerationRequest) -> str:
    """Exactly the training prompt for these fields and tag."""
    return tagged_prompt(request.knowledge, request.context, render_tag(request.tag))


def controlled_generate(
    request: GenerationRequest,
    client: ChatClient,
    retry: RetryPolicy = RetryPolicy(),
) -> str:
    """One generation at the requested tag; trailing whitespace trimmed."""
    prompt = build_inference_prompt(request)
    kwargs: dict = {"temperature": request.temperature}
    if request.max_tokens is not None:
        kwargs["max_tokens"] = request.max_tokens
    return call_with_retries(lambda: client.complete(prompt, **kwargs), retry).rstrip()


def verify_roundtrip(
    request: GenerationRequest,
    client: ChatClient,
    annotator: Annotator,
    retry: RetryPolicy = RetryPolicy(),
) -> RoundTripReport:
    """Generate at the requested tag, re-score the output, report the gap."""
    response = controlled_generate(request, client, retry)
    annotated = annotator.annotate(
        RawExample(
            id="roundtrip",
            context=request.context,
            knowledge=request.knowledge,
            response=response,
        )
    )
    return RoundTripReport(
        response=response,
        breakdown=annotated.breakdown,
        measured_tag=annotated.tag,
        deviation=abs(request.tag.level - annotated.tag.level),
    )
