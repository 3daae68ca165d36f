"""Lexical overlap metrics over token sequences.

Everything here is pure and deterministic: the same inputs always produce
the same scores, so corpus annotations are reproducible across runs and
worker counts. Degenerate inputs (empty sequences, n-gram order longer
than the sequence) score 0 instead of raising, because dirty corpus lines
must not abort a pipeline run.

Tokenization is deliberately simple: lowercase, split on Unicode
whitespace, strip leading/trailing punctuation from each token. No
stemming, no stopword removal.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

TokenSeq = tuple[str, ...]

FMEAN_RECALL_WEIGHT = 9  # F_mean = 10PR / (R + 9P)
CHUNK_PENALTY_WEIGHT = 0.5
CHUNK_PENALTY_POWER = 3


@dataclass(frozen=True)
class PRF:
    """Precision / recall / F1 triple, each in [0, 1]."""

    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "PRF":
        if precision + recall > 0:
            f1 = 2 * precision * recall / (precision + recall)
        else:
            f1 = 0.0
        return cls(precision, recall, f1)


ZERO_PRF = PRF(0.0, 0.0, 0.0)


def _strip_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> TokenSeq:
    """Split text into normalized word tokens.

    Lowercases, splits on Unicode whitespace, strips punctuation from both
    ends of each token, and drops tokens that end up empty.
    """
    out = []
    for raw in text.lower().split():
        tok = _strip_punct(raw)
        if tok:
            out.append(tok)
    return tuple(out)


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    """Multiset of n-grams in `tokens`; empty when the sequence is too short."""
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    if len(tokens) < n:
        return Counter()
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> PRF:
    """Clipped n-gram overlap between candidate and reference.

    Recall is overlap over reference n-gram count, precision over candidate
    n-gram count. Either side with zero n-grams makes its ratio 0.
    """
    cand_counts = ngrams(candidate, n)
    ref_counts = ngrams(reference, n)
    overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    cand_total = sum(cand_counts.values())
    ref_total = sum(ref_counts.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    return PRF.from_pr(precision, recall)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, O(len(a) * len(b)) with one DP row."""
    if not a or not b:
        return 0
    row = [0] * (len(b) + 1)
    for x in a:
        prev = 0
        for j, y in enumerate(b, start=1):
            cur = row[j]
            row[j] = prev + 1 if x == y else max(row[j], row[j - 1])
            prev = cur
    return row[len(b)]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> PRF:
    """LCS-based overlap: precision = LCS/|candidate|, recall = LCS/|reference|."""
    length = lcs_length(candidate, reference)
    precision = length / len(candidate) if candidate else 0.0
    recall = length / len(reference) if reference else 0.0
    return PRF.from_pr(precision, recall)


def bleu(
    candidate: Sequence[str],
    references: Sequence[Sequence[str]],
    max_n: int = 4,
) -> float:
    """Geometric mean of clipped n-gram precisions with a brevity penalty.

    Zero-count precisions for n >= 2 get add-one smoothing so short
    sentences do not collapse the whole product to 0. A zero unigram
    precision still yields 0. The brevity penalty uses the reference
    whose length is closest to the candidate (ties to the shorter one).
    """
    if not references:
        raise ValueError("bleu requires at least one reference")
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    cand_len = len(candidate)
    if cand_len == 0:
        return 0.0

    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = ngrams(candidate, n)
        clipped: Counter = Counter()
        for ref in references:
            ref_counts = ngrams(ref, n)
            for gram in cand_counts:
                clipped[gram] = max(clipped[gram], ref_counts[gram])
        matches = sum(min(count, clipped[gram]) for gram, count in cand_counts.items())
        total = sum(cand_counts.values())
        if matches == 0:
            if n == 1:
                return 0.0
            precision = (matches + 1) / (total + 1)
        else:
            precision = matches / total
        log_sum += math.log(precision)
    geo_mean = math.exp(log_sum / max_n)

    ref_len = min(
        (len(ref) for ref in references),
        key=lambda length: (abs(length - cand_len), length),
    )
    penalty = math.exp(1 - ref_len / cand_len) if cand_len < ref_len else 1.0
    return geo_mean * penalty


def _align_unigrams(
    candidate: Sequence[str], reference: Sequence[str]
) -> list[tuple[int, int]]:
    # Greedy left-to-right exact matching; each reference token used once.
    taken = [False] * len(reference)
    pairs = []
    for i, tok in enumerate(candidate):
        for j, ref_tok in enumerate(reference):
            if not taken[j] and ref_tok == tok:
                taken[j] = True
                pairs.append((i, j))
                break
    return pairs


def meteor_lite(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Exact-match unigram alignment score with a fragmentation penalty.

    F_mean = 10PR / (R + 9P) over the aligned unigram counts, discounted by
    0.5 * (chunks / matches)^3 where a chunk is a maximal run of matches
    contiguous in both sequences. This is the exact-match-only variant;
    there is no stemming or synonym matching.
    """
    pairs = _align_unigrams(candidate, reference)
    matches = len(pairs)
    if matches == 0:
        return 0.0
    precision = matches / len(candidate)
    recall = matches / len(reference)
    f_mean = (
        (FMEAN_RECALL_WEIGHT + 1)
        * precision
        * recall
        / (recall + FMEAN_RECALL_WEIGHT * precision)
    )
    chunks = 1
    for (prev_c, prev_r), (cur_c, cur_r) in zip(pairs, pairs[1:]):
        if cur_c != prev_c + 1 or cur_r != prev_r + 1:
            chunks += 1
    penalty = CHUNK_PENALTY_WEIGHT * (chunks / matches) ** CHUNK_PENALTY_POWER
    return f_mean * (1 - penalty)


def lexical_overlap_score(candidate: Sequence[str], knowledge: Sequence[str]) -> float:
    """Mean of ROUGE-1, ROUGE-2, and ROUGE-L F1 between candidate and knowledge."""
    components = (
        rouge_n(candidate, knowledge, 1).f1,
        rouge_n(candidate, knowledge, 2).f1,
        rouge_l(candidate, knowledge).f1,
    )
    return sum(components) / len(components)
