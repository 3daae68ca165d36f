"""The prompt layouts shared by training emission and inference.

Both sides must build the exact same string for the same fields; any drift
between the fine-tune prompt and the inference prompt silently breaks tag
conditioning. Keep the construction in this one place.
"""

from __future__ import annotations

KNOWLEDGE_OPEN = "[KNOWLEDGE]\n"
KNOWLEDGE_CLOSE = "\n[/KNOWLEDGE]\n"
CONTEXT_OPEN = "[CONTEXT]\n"
CONTEXT_CLOSE = "\n[/CONTEXT]\n"
RESPONSE_OPEN = "[RESPONSE]\n"


def tagged_prompt(knowledge: str, context: str, tag_token: str) -> str:
    """Prompt that pairs a knowledge passage and context with a control tag."""
    return (
        KNOWLEDGE_OPEN
        + knowledge
        + KNOWLEDGE_CLOSE
        + CONTEXT_OPEN
        + context
        + CONTEXT_CLOSE
        + tag_token
        + "\n"
        + RESPONSE_OPEN
    )


def completion_text(response: str) -> str:
    """Training completion: the response followed by a single newline."""
    return response + "\n"
