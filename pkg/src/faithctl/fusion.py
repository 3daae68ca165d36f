"""Weighted fusion of the component scores and the discrete control tag.

The three components (lexical overlap, semantic similarity, model
self-grade) are combined by a weighted average. When a component is
unavailable its weight is redistributed proportionally over the rest,
never substituted with 0: an example that merely hit a judge outage must
not be annotated as unfaithful.

The fused score quantizes to an integer level 0..levels (default 10) and
renders as the control token ``<|faithfulness=K|>``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

DEFAULT_LEVELS = 10

_TAG_PATTERN = re.compile(r"^<\|faithfulness=(0|[1-9][0-9]*)\|>$")
_TAG_SCAN = re.compile(r"<\|faithfulness=(0|[1-9][0-9]*)\|>")


class ComponentOutOfRange(ValueError):
    """A component score fell outside [0, 1]."""


class TagError(ValueError):
    pass


class Malformed(TagError):
    """Text is not a control token."""


class LevelOutOfRange(TagError):
    """Control token carries a level beyond the configured range."""


@dataclass(frozen=True)
class FusionWeights:
    """Non-negative component weights, normalized to sum to 1 on construction."""

    lexical: float
    semantic: float
    self_eval: float

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if value < 0 or not math.isfinite(value):
                raise ValueError(f"weight {name} must be finite and >= 0, got {value}")
        total = self.lexical + self.semantic + self.self_eval
        if total <= 0:
            raise ValueError("weights must sum to a positive value")
        object.__setattr__(self, "lexical", self.lexical / total)
        object.__setattr__(self, "semantic", self.semantic / total)
        object.__setattr__(self, "self_eval", self.self_eval / total)

    @classmethod
    def equal(cls) -> "FusionWeights":
        return cls(1.0, 1.0, 1.0)

    def as_dict(self) -> dict[str, float]:
        return {
            "lexical": self.lexical,
            "semantic": self.semantic,
            "self_eval": self.self_eval,
        }


@dataclass(frozen=True)
class FaithfulnessBreakdown:
    """Component scores plus the effective (post-renormalization) weights.

    `semantic` and `self_eval` are None when that component was unavailable
    for the example; `weights` always reflects what was actually averaged.
    """

    lexical: float
    semantic: float | None
    self_eval: float | None
    weights: FusionWeights
    final: float

    def as_dict(self) -> dict:
        return {
            "lexical": self.lexical,
            "semantic": self.semantic,
            "self_eval": self.self_eval,
            "weights": self.weights.as_dict(),
            "final": self.final,
        }


@dataclass(frozen=True)
class TagToken:
    level: int
    levels: int = DEFAULT_LEVELS

    def __post_init__(self) -> None:
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if not 0 <= self.level <= self.levels:
            raise ValueError(f"level {self.level} outside [0, {self.levels}]")

    def render(self) -> str:
        return render_tag(self)


def _check_component(name: str, value: float | None) -> None:
    if value is None:
        return
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ComponentOutOfRange(f"{name} score must be in [0, 1], got {value}")


def fuse(
    lexical: float,
    semantic: float | None,
    self_eval: float | None,
    weights: FusionWeights,
) -> FaithfulnessBreakdown:
    """Weighted average of the present components.

    Missing components (None) have their weight spread proportionally over
    the rest; if the remaining weights are all zero, the present components
    are averaged equally.
    """
    _check_component("lexical", lexical)
    _check_component("semantic", semantic)
    _check_component("self_eval", self_eval)

    raw = weights.as_dict()
    present = {"lexical": lexical}
    if semantic is not None:
        present["semantic"] = semantic
    if self_eval is not None:
        present["self_eval"] = self_eval

    remaining = sum(raw[name] for name in present)
    if remaining > 0:
        effective = {
            name: (raw[name] / remaining if name in present else 0.0) for name in raw
        }
    else:
        # Every informative weight sat on missing components; fall back to
        # an equal split over what we actually have.
        share = 1.0 / len(present)
        effective = {name: (share if name in present else 0.0) for name in raw}

    final = sum(effective[name] * score for name, score in present.items())
    final = min(1.0, max(0.0, final))
    return FaithfulnessBreakdown(
        lexical=lexical,
        semantic=semantic,
        self_eval=self_eval,
        weights=FusionWeights(**effective),
        final=final,
    )


def quantize_tag(final: float, levels: int = DEFAULT_LEVELS) -> TagToken:
    """Half-up rounding of final * levels, clamped into [0, levels]."""
    if not math.isfinite(final) or not 0.0 <= final <= 1.0:
        raise ComponentOutOfRange(f"final score must be in [0, 1], got {final}")
    level = math.floor(final * levels + 0.5)
    return TagToken(level=min(levels, max(0, level)), levels=levels)


def render_tag(tag: TagToken) -> str:
    return f"<|faithfulness={tag.level}|>"


def parse_tag(text: str, levels: int = DEFAULT_LEVELS) -> TagToken:
    """Inverse of render_tag; the whole string must be exactly one token."""
    match = _TAG_PATTERN.match(text)
    if not match:
        raise Malformed(f"not a control token: {text!r}")
    level = int(match.group(1))
    if level > levels:
        raise LevelOutOfRange(f"level {level} outside [0, {levels}]")
    return TagToken(level=level, levels=levels)


def find_tag_tokens(text: str, levels: int = DEFAULT_LEVELS) -> list[TagToken]:
    """All control tokens embedded in `text`, in order of appearance."""
    return [parse_tag(m.group(0), levels) for m in _TAG_SCAN.finditer(text)]
