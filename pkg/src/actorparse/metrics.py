"""Shared instrumentation counters.

Both parsing engines increment the same counters through the same code
paths, so per-sentence and per-run comparisons are apples to apples.
Increments are lock-guarded because the threaded scheduler may run
attachment checks from worker threads.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass


@dataclass(frozen=True)
class MetricsSnapshot:
    syntax_check_calls: int = 0
    concept_check_calls: int = 0
    messages_sent: int = 0
    readings_found: int = 0
    readings_correct: int = 0

    def diff(self, earlier: "MetricsSnapshot") -> "MetricsSnapshot":
        """Per-interval counts: self minus an earlier snapshot."""
        return MetricsSnapshot(
            syntax_check_calls=self.syntax_check_calls - earlier.syntax_check_calls,
            concept_check_calls=self.concept_check_calls - earlier.concept_check_calls,
            messages_sent=self.messages_sent - earlier.messages_sent,
            readings_found=self.readings_found - earlier.readings_found,
            readings_correct=self.readings_correct - earlier.readings_correct,
        )

    def plus(self, other: "MetricsSnapshot") -> "MetricsSnapshot":
        return MetricsSnapshot(
            syntax_check_calls=self.syntax_check_calls + other.syntax_check_calls,
            concept_check_calls=self.concept_check_calls + other.concept_check_calls,
            messages_sent=self.messages_sent + other.messages_sent,
            readings_found=self.readings_found + other.readings_found,
            readings_correct=self.readings_correct + other.readings_correct,
        )


class Metrics:
    """Monotone counters for one parsing session or one comparison run."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.syntax_check_calls = 0
        self.concept_check_calls = 0
        self.messages_sent = 0
        self.readings_found = 0
        self.readings_correct = 0

    def count_syntax_check(self) -> None:
        with self._lock:
            self.syntax_check_calls += 1

    def count_concept_check(self) -> None:
        with self._lock:
            self.concept_check_calls += 1

    def count_message(self) -> None:
        with self._lock:
            self.messages_sent += 1

    def count_readings(self, found: int, correct: int = 0) -> None:
        with self._lock:
            self.readings_found += found
            self.readings_correct += correct

    def snapshot(self) -> MetricsSnapshot:
        with self._lock:
            return MetricsSnapshot(
                syntax_check_calls=self.syntax_check_calls,
                concept_check_calls=self.concept_check_calls,
                messages_sent=self.messages_sent,
                readings_found=self.readings_found,
                readings_correct=self.readings_correct,
            )
