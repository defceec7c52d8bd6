"""Farey tessellation rows and the 0/1 multiplicity matrices built on them.

Level ``n`` holds ``2**(n-1) + 1`` fractions ``r(n, k) = p(n, k)/q(n, k)``;
level ``n+1`` keeps them at even indices and inserts mediants at odd ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .cf import DomainError

MAX_LEVEL = 25


@dataclass(frozen=True)
class MultiplicityMatrix:
    """Non-negative integer matrix; rows index level n+1, columns level n."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.entries)
        if not rows or not rows[0]:
            raise ValueError("multiplicity matrix must be non-empty")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged multiplicity matrix")
        if any(x < 0 for r in rows for x in r):
            raise ValueError("multiplicities must be non-negative")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def of(cls, rows: Iterable[Iterable[int]]) -> "MultiplicityMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        return self.entries[i][j]

    def __matmul__(self, other: "MultiplicityMatrix") -> "MultiplicityMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = list(zip(*other.entries))
        return MultiplicityMatrix(
            tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in self.entries)
        )

    def apply(self, vector: Sequence[int]) -> tuple[int, ...]:
        if len(vector) != self.cols:
            raise ValueError(f"vector of length {len(vector)} for matrix with {self.cols} columns")
        return tuple(sum(a * v for a, v in zip(row, vector)) for row in self.entries)

    def transpose(self) -> "MultiplicityMatrix":
        return MultiplicityMatrix(tuple(zip(*self.entries)))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "MultiplicityMatrix":
        return MultiplicityMatrix(tuple(tuple(self.entries[i][j] for j in cols) for i in rows))

    def zero_columns(self) -> list[int]:
        return [j for j in range(self.cols) if all(row[j] == 0 for row in self.entries)]

    def zero_rows(self) -> list[int]:
        return [i for i, row in enumerate(self.entries) if not any(row)]

    def nonzero_count(self) -> int:
        return sum(1 for row in self.entries for x in row if x)

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


@dataclass(frozen=True)
class FareyLevel:
    n: int
    q: tuple[int, ...]
    p: tuple[int, ...]

    @property
    def r(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(p, q) for p, q in zip(self.p, self.q))

    def __len__(self) -> int:
        return len(self.q)


def _check_level(n: int) -> None:
    if n < 1:
        raise DomainError("Farey levels start at n = 1 (level 0 is the scalars)")
    if n > MAX_LEVEL:
        raise DomainError(f"level {n} exceeds the size guard {MAX_LEVEL} ({2 ** (n - 1) + 1} entries)")


@lru_cache(maxsize=64)
def farey_level(n: int) -> FareyLevel:
    _check_level(n)
    q, p = [1, 1], [0, 1]
    for _ in range(n - 1):
        nq, np_ = [q[0]], [p[0]]
        for k in range(len(q) - 1):
            nq += [q[k] + q[k + 1], q[k + 1]]
            np_ += [p[k] + p[k + 1], p[k + 1]]
        q, p = nq, np_
    return FareyLevel(n, tuple(q), tuple(p))


@lru_cache(maxsize=64)
def farey_multiplicity_matrix(n: int) -> MultiplicityMatrix:
    """F_n: entry (l, k) is 1 exactly when |2k - l| <= 1 (0-based)."""
    _check_level(n)
    rows, cols = 2**n + 1, 2 ** (n - 1) + 1
    return MultiplicityMatrix(tuple(tuple(int(abs(2 * k - l) <= 1) for k in range(cols)) for l in range(rows)))


def check_unital_embedding(n: int) -> bool:
    """F_n maps the level-n label vector onto the level-(n+1) one."""
    return farey_multiplicity_matrix(n).apply(farey_level(n).q) == farey_level(n + 1).q
