from __future__ import annotations

import random

import pytest

from faithctl.control import (
    GenerationRequest,
    build_inference_prompt,
    controlled_generate,
    verify_roundtrip,
)
from faithctl.fusion import FusionWeights, TagToken, quantize_tag
from faithctl.judge import MockChatClient
from faithctl.pipeline import Annotator, RawExample, emit_finetune
from faithctl.providers import ProviderUnavailable, RetryPolicy
from faithctl.semantic import MockEmbeddingClient

from .oracles import (
    brute_cosine,
    brute_lcs_length,
    brute_ngram_overlap,
    brute_prf,
    mock_embedding,
)
from .stubs import FixedJudgeClient

FAST_RETRY = RetryPolicy(max_attempts=2, base_backoff=0.0)


class RecordingClient:
    def __init__(self, reply="fixed reply\n"):
        self.reply = reply
        self.prompts = []

    def complete(self, prompt: str, *, temperature: float = 0.0) -> str:
        self.prompts.append(prompt)
        return self.reply


class DownClient:
    def complete(self, prompt: str, *, temperature: float = 0.0) -> str:
        raise ProviderUnavailable("no route")


def annotator(judge_score=100):
    return Annotator(
        weights=FusionWeights.equal(),
        embedder=MockEmbeddingClient(),
        judge_client=FixedJudgeClient(judge_score),
        judge_retry=FAST_RETRY,
    )


class TestPrompt:
    def test_contains_requested_tag(self):
        for level in (0, 10):
            request = GenerationRequest(context="c", knowledge="k text", tag=TagToken(level))
            assert f"<|faithfulness={level}|>" in build_inference_prompt(request)

    def test_matches_training_prompt_for_same_fields(self):
        ann = annotator()
        example = ann.annotate(RawExample("1", "the ctx", "shared knowledge text", "shared knowledge text"))
        [record] = list(emit_finetune([example]))
        request = GenerationRequest(
            context="the ctx", knowledge="shared knowledge text", tag=example.tag
        )
        assert build_inference_prompt(request) == record["prompt"]

    def test_parity_over_random_fields(self):
        rng = random.Random(7)
        words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
        for _ in range(50):
            knowledge = " ".join(rng.choices(words, k=rng.randint(1, 8)))
            context = " ".join(rng.choices(words, k=rng.randint(0, 6)))
            tag = TagToken(rng.randint(0, 10))
            from faithctl.fusion import render_tag
            from faithctl.prompts import tagged_prompt

            request = GenerationRequest(context=context, knowledge=knowledge, tag=tag)
            assert build_inference_prompt(request) == tagged_prompt(
                knowledge, context, render_tag(tag)
            )

    def test_rejects_empty_knowledge(self):
        with pytest.raises(ValueError):
            GenerationRequest(context="c", knowledge="  ", tag=TagToken(5))


class TestGenerate:
    def request(self, level=10):
        return GenerationRequest(context="ctx here", knowledge="the knowledge text", tag=TagToken(level))

    def test_echo_stub_returns_knowledge(self):
        got = controlled_generate(self.request(), MockChatClient(), FAST_RETRY)
        assert got == "the knowledge text"

    def test_prompt_passed_through_verbatim(self):
        client = RecordingClient()
        controlled_generate(self.request(), client, FAST_RETRY)
        assert client.prompts == [build_inference_prompt(self.request())]

    def test_trailing_whitespace_trimmed(self):
        client = RecordingClient(reply="an answer   \n\n")
        assert controlled_generate(self.request(), client, FAST_RETRY) == "an answer"

    def test_provider_down(self):
        with pytest.raises(ProviderUnavailable):
            controlled_generate(self.request(), DownClient(), FAST_RETRY)


class TestRoundTrip:
    def test_echo_at_ten_has_zero_deviation(self):
        request = GenerationRequest(
            context="c", knowledge="facts stay facts here", tag=TagToken(10)
        )
        report = verify_roundtrip(request, MockChatClient(), annotator(), FAST_RETRY)
        assert report.measured_tag.level == 10
        assert report.deviation == 0

    def test_echo_at_zero_has_full_deviation(self):
        request = GenerationRequest(
            context="c", knowledge="facts stay facts here", tag=TagToken(0)
        )
        report = verify_roundtrip(request, MockChatClient(), annotator(), FAST_RETRY)
        assert report.deviation == 10

    def test_unrelated_reply_matches_recomputed_tag(self):
        knowledge = "the museum opens at nine in the morning"
        reply = "completely different words about sailing boats"
        request = GenerationRequest(context="c", knowledge=knowledge, tag=TagToken(10))
        report = verify_roundtrip(request, RecordingClient(reply + "\n"), annotator(judge_score=20), FAST_RETRY)

        cand = tuple(reply.split())
        ref = tuple(knowledge.split())
        f1s = []
        for n in (1, 2):
            overlap, ct, rt = brute_ngram_overlap(cand, ref, n)
            f1s.append(brute_prf(overlap, ct, rt)[2])
        length = brute_lcs_length(cand, ref)
        f1s.append(brute_prf(length, len(cand), len(ref))[2])
        lexical = sum(f1s) / 3
        semantic = max(0.0, brute_cosine(mock_embedding(reply), mock_embedding(knowledge)))
        final = (lexical + semantic + 0.20) / 3
        want_level = quantize_tag(final, 10).level

        assert report.measured_tag.level == want_level
        assert report.deviation == 10 - want_level

    def test_breakdown_matches_annotate(self):
        knowledge = "shared knowledge for both paths"
        request = GenerationRequest(context="same ctx", knowledge=knowledge, tag=TagToken(4))
        ann = annotator(judge_score=3)
        report = verify_roundtrip(request, MockChatClient(), ann, FAST_RETRY)
        direct = ann.annotate(
            RawExample("x", "same ctx", knowledge, report.response)
        )
        assert report.breakdown == direct.breakdown
        assert report.measured_tag.level == direct.tag.level

    def test_deviation_bounded(self):
        for level in range(0, 11):
            request = GenerationRequest(
                context="c", knowledge="facts stay facts here", tag=TagToken(level)
            )
            report = verify_roundtrip(request, MockChatClient(), annotator(), FAST_RETRY)
            assert 0 <= report.deviation <= 10
