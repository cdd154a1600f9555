"""Per-pattern tilted-time frequency table.

Each pattern node keeps the sequence of its batch frequencies, newest
first. By default the sequence is compressed on a logarithmic schedule:
at most two entries of span 1, at most two of span 2, at most two of
span 4, and so on; when a span level overflows, its two oldest entries
merge into one entry of double span. Merging sums frequencies, so the
total count over the table's lifetime is always exact; per-batch
granularity is exact only at the finest (unmerged) levels.

A ``flat`` table skips compression and keeps one span-1 entry per batch,
which gives exact per-batch traces for debugging and golden tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple


class Entry(NamedTuple):
    span: int
    frequency: int


class WindowCount(NamedTuple):
    """Result of a windowed query; ``approximate`` is set when the window
    boundary falls inside a merged span or past the table's history."""

    count: int
    approximate: bool


@dataclass
class TiltedTimeTable:
    flat: bool = False
    entries: list[Entry] = field(default_factory=list)
    buffered_batches: int = 0

    def push(self, frequency: int) -> None:
        """Prepend this batch's frequency (0 for batches without the pattern)."""
        if frequency < 0:
            raise ValueError("frequency must be >= 0")
        self.entries.insert(0, Entry(1, frequency))
        self.buffered_batches += 1
        if not self.flat:
            self._compress()

    def _compress(self) -> None:
        # Entries are newest-first with non-decreasing spans, so each span
        # level is a contiguous run; only the level that just received an
        # entry can hold three, and merging its two oldest pushes one entry
        # up to the next level.
        entries = self.entries
        i = 0
        while i < len(entries):
            span = entries[i].span
            j = i
            while j < len(entries) and entries[j].span == span:
                j += 1
            if j - i <= 2:
                i = j
                continue
            merged = Entry(span * 2, entries[j - 2].frequency + entries[j - 1].frequency)
            entries[j - 2 : j] = [merged]
            i = j - 2

    def total(self) -> int:
        """Sum of all stored frequencies; exact for the table's whole lifetime."""
        return sum(entry.frequency for entry in self.entries)

    def query(self, last_k_batches: int) -> WindowCount:
        """Count over the most recent ``last_k_batches`` batches.

        Exact when the window boundary aligns with entry boundaries;
        otherwise the entry straddling the boundary is included whole
        (a conservative over-count) and the result is flagged. A window
        longer than the buffered history clamps to the full table.
        """
        if last_k_batches < 1:
            raise ValueError("window must cover at least one batch")
        covered = 0
        count = 0
        for entry in self.entries:
            if covered >= last_k_batches:
                break
            count += entry.frequency
            covered += entry.span
        return WindowCount(count, covered != last_k_batches)

    def serialize(self) -> str:
        """``span:frequency`` pairs, newest first, comma separated."""
        return ",".join(f"{entry.span}:{entry.frequency}" for entry in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Entry]:
        return iter(self.entries)
