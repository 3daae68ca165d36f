"""Controllable faithfulness scoring and tagging for knowledge-grounded generation."""

from .fusion import (
    FaithfulnessBreakdown,
    FusionWeights,
    TagToken,
    fuse,
    parse_tag,
    quantize_tag,
    render_tag,
)
from .metrics import (
    PRF,
    bleu,
    lexical_overlap_score,
    meteor_lite,
    rouge_l,
    rouge_n,
    tokenize,
)
from .pipeline import (
    AnnotatedExample,
    Annotator,
    CorpusStats,
    RawExample,
    RecordError,
    corpus_stats,
    emit_finetune,
    ingest_jsonl,
)
from .semantic import cosine_similarity, embed_batch, semantic_similarity_score

__version__ = "0.1.0"

__all__ = [
    "AnnotatedExample",
    "Annotator",
    "CorpusStats",
    "FaithfulnessBreakdown",
    "FusionWeights",
    "PRF",
    "RawExample",
    "RecordError",
    "TagToken",
    "bleu",
    "corpus_stats",
    "cosine_similarity",
    "embed_batch",
    "emit_finetune",
    "fuse",
    "ingest_jsonl",
    "lexical_overlap_score",
    "meteor_lite",
    "parse_tag",
    "quantize_tag",
    "render_tag",
    "rouge_l",
    "rouge_n",
    "semantic_similarity_score",
    "tokenize",
]
