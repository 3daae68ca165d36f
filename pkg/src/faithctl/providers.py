"""Shared plumbing for the remote embedding and chat providers."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Callable, TypeVar

T = TypeVar("T")


class ProviderUnavailable(Exception):
    """A provider call failed (transport error, timeout, or bad payload)."""


@dataclass(frozen=True)
class RetryPolicy:
    """Exponential backoff: sleep base_backoff * 2^(attempt-1) between tries."""

    max_attempts: int = 3
    base_backoff: float = 0.5

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError(f"max_attempts must be >= 1, got {self.max_attempts}")
        if self.base_backoff < 0:
            raise ValueError(f"base_backoff must be >= 0, got {self.base_backoff}")

    def backoff_for(self, attempt: int) -> float:
        return self.base_backoff * (2 ** (attempt - 1))


def call_with_retries(fn: Callable[[], T], policy: RetryPolicy) -> T:
    """Run `fn` until it succeeds or the policy's attempts are exhausted.

    Only ProviderUnavailable triggers a retry; anything else propagates.
    """
    for attempt in range(1, policy.max_attempts + 1):
        try:
            return fn()
        except ProviderUnavailable:
            if attempt == policy.max_attempts:
                raise
            time.sleep(policy.backoff_for(attempt))
    raise AssertionError("unreachable")


class InFlightLimiter:
    """Caps concurrent provider calls; shared by all workers using one client."""

    def __init__(self, max_in_flight: int):
        if max_in_flight < 1:
            raise ValueError(f"max_in_flight must be >= 1, got {max_in_flight}")
        self._semaphore = threading.Semaphore(max_in_flight)

    def __enter__(self) -> "InFlightLimiter":
        self._semaphore.acquire()
        return self

    def __exit__(self, *exc_info) -> None:
        self._semaphore.release()


def auth_headers(api_key: str) -> dict[str, str]:
    return {"Authorization": f"Bearer {api_key}"} if api_key else {}
