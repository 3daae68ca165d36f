"""Corpus annotation: JSONL in, scored + tagged JSONL out.

Input records are one JSON object per line with string fields id, context,
knowledge, and response. Malformed lines become per-record errors and never
abort the stream; only a broken underlying stream is fatal.

Annotation fans out over a thread pool but output order always equals
input order (bounded in-flight window, results drained in submission
order), so runs are byte-identical regardless of worker count when the
providers are deterministic.
"""

from __future__ import annotations

import json
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import BinaryIO, Callable, Iterable, Iterator, TypeVar, Union

from .fusion import (
    DEFAULT_LEVELS,
    FaithfulnessBreakdown,
    FusionWeights,
    TagToken,
    fuse,
    quantize_tag,
    render_tag,
)
from .judge import ChatClient, self_eval_score
from .metrics import lexical_overlap_score, tokenize
from .prompts import completion_text, tagged_prompt
from .providers import ProviderUnavailable, RetryPolicy
from .semantic import EmbeddingClient, semantic_similarity_score

FLAG_EMPTY_RESPONSE = "empty_response"
FLAG_JUDGE_UNAVAILABLE = "judge_unavailable"
FLAG_SHORT_TEXT = "short_text"
FLAG_SEMANTIC_UNAVAILABLE = "semantic_unavailable"

SHORT_TEXT_TOKENS = 3  # fewer tokens than this on either side is flagged

T = TypeVar("T")
U = TypeVar("U")


class CorpusReadError(Exception):
    """The input stream itself failed (not a single bad record)."""

    def __init__(self, byte_offset: int, reason: str):
        super().__init__(f"corpus stream failed at byte {byte_offset}: {reason}")
        self.byte_offset = byte_offset


@dataclass(frozen=True)
class RawExample:
    id: str
    context: str
    knowledge: str
    response: str

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("example id must be non-empty")
        if not self.knowledge.strip():
            raise ValueError("example knowledge must be non-empty")


@dataclass(frozen=True)
class RecordError:
    line: int
    reason: str
    id: str | None = None

    def as_dict(self) -> dict:
        return {"line": self.line, "reason": self.reason, "id": self.id}


@dataclass(frozen=True)
class AnnotatedExample:
    raw: RawExample
    breakdown: FaithfulnessBreakdown
    tag: TagToken
    flags: frozenset[str] = frozenset()

    def as_dict(self) -> dict:
        return {
            "id": self.raw.id,
            "context": self.raw.context,
            "knowledge": self.raw.knowledge,
            "response": self.raw.response,
            "breakdown": self.breakdown.as_dict(),
            "tag": self.tag.level,
            "flags": sorted(self.flags),
        }


@dataclass(frozen=True)
class CorpusStats:
    count: int
    tag_histogram: dict[int, int]
    mean_lexical: float | None
    mean_semantic: float | None
    mean_self_eval: float | None
    judge_availability: float

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "tag_histogram": {str(k): v for k, v in sorted(self.tag_histogram.items())},
            "component_means": {
                "lexical": self.mean_lexical,
                "semantic": self.mean_semantic,
                "self_eval": self.mean_self_eval,
            },
            "judge_availability": self.judge_availability,
        }


class StatsAccumulator:
    """Single-writer accumulator; feed annotated examples, then finish()."""

    def __init__(self) -> None:
        self.count = 0
        self.histogram: dict[int, int] = {}
        self._lexical_sum = 0.0
        self._semantic_sum = 0.0
        self._semantic_n = 0
        self._self_eval_sum = 0.0
        self._self_eval_n = 0

    def add(self, example: AnnotatedExample) -> None:
        self.count += 1
        self.histogram[example.tag.level] = self.histogram.get(example.tag.level, 0) + 1
        b = example.breakdown
        self._lexical_sum += b.lexical
        if b.semantic is not None:
            self._semantic_sum += b.semantic
            self._semantic_n += 1
        if b.self_eval is not None:
            self._self_eval_sum += b.self_eval
            self._self_eval_n += 1

    def finish(self) -> CorpusStats:
        return CorpusStats(
            count=self.count,
            tag_histogram=dict(self.histogram),
            mean_lexical=self._lexical_sum / self.count if self.count else None,
            mean_semantic=self._semantic_sum / self._semantic_n if self._semantic_n else None,
            mean_self_eval=self._self_eval_sum / self._self_eval_n if self._self_eval_n else None,
            judge_availability=self._self_eval_n / self.count if self.count else 0.0,
        )


def corpus_stats(annotated: Iterable[AnnotatedExample]) -> CorpusStats:
    acc = StatsAccumulator()
    for example in annotated:
        acc.add(example)
    return acc.finish()


REQUIRED_FIELDS = ("id", "context", "knowledge", "response")


def _parse_record(raw: bytes, line_no: int, seen_ids: set[str]) -> Union[RawExample, RecordError]:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        return RecordError(line_no, f"invalid UTF-8: {exc}")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        return RecordError(line_no, f"invalid JSON: {exc.msg}")
    if not isinstance(obj, dict):
        return RecordError(line_no, "record is not a JSON object")
    missing = [name for name in REQUIRED_FIELDS if name not in obj]
    if missing:
        return RecordError(line_no, f"missing fields: {', '.join(missing)}")
    bad_types = [name for name in REQUIRED_FIELDS if not isinstance(obj[name], str)]
    if bad_types:
        return RecordError(line_no, f"non-string fields: {', '.join(bad_types)}")
    record_id = obj["id"]
    if record_id in seen_ids:
        return RecordError(line_no, f"duplicate id: {record_id}", id=record_id)
    try:
        example = RawExample(
            id=record_id,
            context=obj["context"],
            knowledge=obj["knowledge"],
            response=obj["response"],
        )
    except ValueError as exc:
        return RecordError(line_no, str(exc), id=record_id or None)
    seen_ids.add(record_id)
    return example


def ingest_jsonl(source: BinaryIO) -> Iterator[tuple[int, Union[RawExample, RecordError]]]:
    """Yield (line number, parsed record or error); blank lines are skipped."""
    seen_ids: set[str] = set()
    offset = 0
    line_no = 0
    while True:
        try:
            raw = source.readline()
        except OSError as exc:
            raise CorpusReadError(offset, str(exc)) from exc
        if not raw:
            return
        line_no += 1
        offset += len(raw)
        if not raw.strip():
            continue
        yield line_no, _parse_record(raw, line_no, seen_ids)


def ordered_parallel_map(
    fn: Callable[[T], U], items: Iterable[T], workers: int, window: int | None = None
) -> Iterator[U]:
    """Map with a thread pool, yielding results strictly in input order.

    The in-flight window bounds both memory and reordering; one slow item
    stalls the output but never lets later items overtake it.
    """
    if workers <= 1:
        for item in items:
            yield fn(item)
        return
    window = window if window is not None else max(workers * 4, 16)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending: deque = deque()
        for item in items:
            pending.append(pool.submit(fn, item))
            if len(pending) >= window:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


@dataclass
class CorpusResult:
    annotated: list[AnnotatedExample] = field(default_factory=list)
    errors: list[RecordError] = field(default_factory=list)
    stats: CorpusStats | None = None


class Annotator:
    """Applies the full scoring stack to examples and corpora."""

    def __init__(
        self,
        weights: FusionWeights,
        embedder: EmbeddingClient,
        judge_client: ChatClient | None,
        *,
        levels: int = DEFAULT_LEVELS,
        judge_retry: RetryPolicy = RetryPolicy(),
        judge_temperature: float = 0.0,
        allow_missing_semantic: bool = False,
    ):
        self.weights = weights
        self.embedder = embedder
        self.judge_client = judge_client
        self.levels = levels
        self.judge_retry = judge_retry
        self.judge_temperature = judge_temperature
        self.allow_missing_semantic = allow_missing_semantic

    def annotate(self, example: RawExample) -> AnnotatedExample:
        """Score one example; raises ProviderUnavailable only for embeddings.

        Judge outages degrade to a missing component; embedding outages are
        fatal for the example unless allow_missing_semantic is set, since
        they usually mean misconfiguration that should surface loudly.
        """
        flags: set[str] = set()
        if not example.response.strip():
            flags.add(FLAG_EMPTY_RESPONSE)
            breakdown = fuse(0.0, 0.0, 0.0, self.weights)
            return self._finish(example, breakdown, flags)

        response_tokens = tokenize(example.response)
        knowledge_tokens = tokenize(example.knowledge)
        if min(len(response_tokens), len(knowledge_tokens)) < SHORT_TEXT_TOKENS:
            flags.add(FLAG_SHORT_TEXT)
        lexical = lexical_overlap_score(response_tokens, knowledge_tokens)

        semantic: float | None
        try:
            semantic = semantic_similarity_score(
                example.response, example.knowledge, self.embedder
            )
        except ProviderUnavailable:
            if not self.allow_missing_semantic:
                raise
            semantic = None
            flags.add(FLAG_SEMANTIC_UNAVAILABLE)

        self_eval: float | None = None
        if self.judge_client is not None:
            verdict = self_eval_score(
                example.knowledge,
                example.response,
                self.judge_client,
                retry=self.judge_retry,
                temperature=self.judge_temperature,
            )
            self_eval = verdict.score if verdict is not None else None
        if self_eval is None:
            flags.add(FLAG_JUDGE_UNAVAILABLE)

        breakdown = fuse(lexical, semantic, self_eval, self.weights)
        return self._finish(example, breakdown, flags)

    def _finish(
        self, example: RawExample, breakdown: FaithfulnessBreakdown, flags: set[str]
    ) -> AnnotatedExample:
        tag = quantize_tag(breakdown.final, self.levels)
        return AnnotatedExample(
            raw=example, breakdown=breakdown, tag=tag, flags=frozenset(flags)
        )

    def iter_corpus(
        self, source: BinaryIO, workers: int = 1
    ) -> Iterator[Union[AnnotatedExample, RecordError]]:
        """Annotate a JSONL stream, yielding results in input order."""
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")

        def work(item: tuple[int, Union[RawExample, RecordError]]):
            line_no, payload = item
            if isinstance(payload, RecordError):
                return payload
            try:
                return self.annotate(payload)
            except ProviderUnavailable as exc:
                return RecordError(
                    line_no, f"embedding provider unavailable: {exc}", id=payload.id
                )

        yield from ordered_parallel_map(work, ingest_jsonl(source), workers)

    def annotate_corpus(self, source: BinaryIO, workers: int = 1) -> CorpusResult:
        """Eager variant of iter_corpus that also computes corpus stats."""
        result = CorpusResult()
        acc = StatsAccumulator()
        for item in self.iter_corpus(source, workers):
            if isinstance(item, RecordError):
                result.errors.append(item)
            else:
                result.annotated.append(item)
                acc.add(item)
        result.stats = acc.finish()
        return result


def emit_finetune(annotated: Iterable[AnnotatedExample]) -> Iterator[dict]:
    """Training records for the annotated examples, skipping empty responses."""
    for example in annotated:
        if FLAG_EMPTY_RESPONSE in example.flags:
            continue
        yield {
            "prompt": tagged_prompt(
                example.raw.knowledge, example.raw.context, render_tag(example.tag)
            ),
            "completion": completion_text(example.raw.response),
        }


def to_json_line(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def annotated_from_dict(obj: dict, levels: int = DEFAULT_LEVELS) -> AnnotatedExample:
    """Rebuild an annotated example from its JSONL form."""
    breakdown_obj = obj["breakdown"]
    weights_obj = breakdown_obj["weights"]
    raw = RawExample(
        id=obj["id"],
        context=obj["context"],
        knowledge=obj["knowledge"],
        response=obj["response"],
    )
    weight_values = (
        weights_obj["lexical"],
        weights_obj["semantic"],
        weights_obj["self_eval"],
    )
    if sum(weight_values) > 0:
        weights = FusionWeights(*weight_values)
    else:
        weights = FusionWeights.equal()
    breakdown = FaithfulnessBreakdown(
        lexical=breakdown_obj["lexical"],
        semantic=breakdown_obj["semantic"],
        self_eval=breakdown_obj["self_eval"],
        weights=weights,
        final=breakdown_obj["final"],
    )
    level = obj["tag"]
    tag = TagToken(level=level, levels=max(levels, level))
    return AnnotatedExample(
        raw=raw, breakdown=breakdown, tag=tag, flags=frozenset(obj.get("flags", []))
    )
