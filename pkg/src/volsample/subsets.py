"""Ordered column-index subsets.

Indices are 0-based internally; the CLI converts to 1-based for display.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DimensionMismatchError, IndexOutOfRangeError


@dataclass(frozen=True)
class IndexSubset:
    """A strictly increasing tuple of distinct column indices in range(n)."""

    indices: tuple[int, ...]
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ambient size must be >= 1, got {self.n}")
        prev = -1
        for i in self.indices:
            if not 0 <= i < self.n:
                raise IndexOutOfRangeError(
                    f"index {i} outside [0, {self.n - 1}]"
                )
            if i <= prev:
                raise ValueError("indices must be strictly increasing")
            prev = i

    @classmethod
    def of(cls, indices: Iterable[int], n: int) -> "IndexSubset":
        """Build a subset from any iterable of distinct indices (sorted here)."""
        return cls(tuple(sorted(int(i) for i in indices)), n)

    @classmethod
    def full(cls, n: int) -> "IndexSubset":
        return cls(tuple(range(n)), n)

    @classmethod
    def coerce(cls, s: "IndexSubset | Iterable[int]", n: int) -> "IndexSubset":
        """Accept an IndexSubset or a plain iterable of indices."""
        if isinstance(s, IndexSubset):
            if s.n != n:
                raise DimensionMismatchError(
                    f"subset ambient size {s.n} != matrix column count {n}"
                )
            return s
        return cls.of(s, n)

    def without(self, i: int) -> "IndexSubset":
        """The subset with element ``i`` removed."""
        if i not in self.indices:
            raise IndexOutOfRangeError(f"index {i} not in subset")
        return IndexSubset(tuple(j for j in self.indices if j != i), self.n)

    def one_based(self) -> tuple[int, ...]:
        """1-based view for human-facing output."""
        return tuple(i + 1 for i in self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, i: int) -> bool:
        return i in self.indices
