"""Ideals of AF algebras as truncated ideal diagrams.

An ideal is stored level by level as the set of vertex indices it contains.
Levels may be given explicitly (``frozenset``) or, for the very wide levels
of deep Farey diagrams, as a ``Cofinite`` set described by what it omits.
Anything exposing ``depth``, ``base_name`` and ``level(n)`` can be fed to
``ideal_metric`` and ``detect_fusing``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Protocol, Sequence

from .bratteli import BratteliDiagram
from .cf import DepthError, DyadicDistance

MAX_ENUMERATION_VERTICES = 20


class IdealError(ValueError):
    pass


@dataclass(frozen=True)
class Cofinite:
    """The subset of ``range(size)`` omitting ``excluded``."""

    size: int
    excluded: frozenset[int]

    def __contains__(self, k: object) -> bool:
        return isinstance(k, int) and 0 <= k < self.size and k not in self.excluded

    def __len__(self) -> int:
        return self.size - len(self.excluded)

    def __iter__(self):
        return (k for k in range(self.size) if k not in self.excluded)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Cofinite):
            return self.size == other.size and self.excluded == other.excluded
        if isinstance(other, (set, frozenset)):
            return len(other) == len(self) and all(k in self for k in other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.size, self.excluded))

    def materialize(self) -> frozenset[int]:
        return frozenset(self)


class IdealLike(Protocol):
    depth: int

    @property
    def base_name(self) -> str | None: ...

    def level(self, n: int): ...


@dataclass(frozen=True)
class IdealReport:
    valid: bool
    axiom: str | None = None
    vertex: tuple[int, int] | None = None
    improper: bool = False
    zero: bool = False
    message: str = "ok"

    def __bool__(self) -> bool:
        return self.valid


def validate_ideal(base: BratteliDiagram, levels: Sequence[Iterable[int]]) -> IdealReport:
    """Check the directed and hereditary axioms on a truncation.

    The top level of a truncation has no successors inside it, so both
    axioms are checked for levels 0..len(levels)-2 only.  The edge axiom
    holds by construction: an ideal's edges are all base edges between its
    vertices.
    """
    sets = [frozenset(lv) for lv in levels]
    if len(sets) - 1 > base.depth:
        raise IdealError(f"{len(sets)} levels given for a diagram of depth {base.depth}")
    for n, s in enumerate(sets):
        bad = [k for k in s if not 0 <= k < base.level_size(n)]
        if bad:
            raise IdealError(f"vertex ({n},{bad[0]}) is out of range")
    for n in range(len(sets) - 1):
        for k in range(base.level_size(n)):
            succ = base.successors(n, k)
            if k in sets[n]:
                missing = [q for q in succ if q not in sets[n + 1]]
                if missing:
                    return IdealReport(
                        False, "directed", (n, k), message=f"({n},{k}) is in the ideal but ({n + 1},{missing[0]}) is not"
                    )
            elif all(q in sets[n + 1] for q in succ):
                return IdealReport(
                    False, "hereditary", (n, k), message=f"every successor of ({n},{k}) is in the ideal but ({n},{k}) is not"
                )
    improper = all(len(s) == base.level_size(n) for n, s in enumerate(sets))
    zero = all(not s for s in sets)
    msg = "improper ideal (the whole algebra)" if improper else "ok"
    return IdealReport(True, improper=improper, zero=zero, message=msg)


@dataclass(frozen=True)
class IdealDiagram:
    """An ideal of ``base`` truncated at level ``len(levels) - 1``."""

    base: BratteliDiagram
    levels: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(frozenset(lv) for lv in self.levels))
        report = validate_ideal(self.base, self.levels)
        if not report:
            raise IdealError(report.message)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def base_name(self) -> str | None:
        return self.base.name

    def level(self, n: int) -> frozenset[int]:
        if n > self.depth:
            raise DepthError(f"ideal known to level {self.depth}, asked for {n}")
        return self.levels[n]

    @property
    def improper(self) -> bool:
        return all(len(s) == self.base.level_size(n) for n, s in enumerate(self.levels))

    def to_dict(self) -> dict:
        return {"levels": [sorted(s) for s in self.levels]}


def restrict_level(base: BratteliDiagram, n: int, upper: Iterable[int]) -> frozenset[int]:
    """Level-n vertices all of whose successors lie in ``upper`` (a level-(n+1) set)."""
    up = frozenset(upper)
    return frozenset(k for k in range(base.level_size(n)) if all(q in up for q in base.successors(n, k)))


def coherent_from_top(base: BratteliDiagram, top: Iterable[int], n_top: int) -> IdealDiagram:
    levels = [frozenset(top)]
    for n in range(n_top - 1, -1, -1):
        levels.append(restrict_level(base, n, levels[-1]))
    return IdealDiagram(base, tuple(reversed(levels)))


def enumerate_coherent_ideals(base: BratteliDiagram, depth: int) -> list[IdealDiagram]:
    """Every truncation at ``depth``: one per subset of the top level.

    Ordered by the bitmask of the top-level subset.
    """
    width = base.level_size(depth)
    if width > MAX_ENUMERATION_VERTICES:
        raise IdealError(f"level {depth} has {width} vertices; enumeration is limited to {MAX_ENUMERATION_VERTICES}")
    out, seen = [], set()
    for mask in range(1 << width):
        top = frozenset(k for k in range(width) if mask >> k & 1)
        ideal = coherent_from_top(base, top, depth)
        if ideal.levels not in seen:
            seen.add(ideal.levels)
            out.append(ideal)
    return out


def brute_force_ideals(base: BratteliDiagram, depth: int) -> set[tuple[frozenset[int], ...]]:
    """All level-set tuples through ``depth`` passing the axioms, by exhaustive search."""
    per_level = []
    for n in range(depth + 1):
        w = base.level_size(n)
        per_level.append([frozenset(k for k in range(w) if m >> k & 1) for m in range(1 << w)])
    return {combo for combo in product(*per_level) if validate_ideal(base, combo).valid}


def _check_bases(i: IdealLike, j: IdealLike) -> None:
    a, b = i.base_name, j.base_name
    if a is not None and b is not None:
        if a != b:
            raise IdealError(f"ideals live on different diagrams ({a} vs {b})")
        return
    bi, bj = getattr(i, "base", None), getattr(j, "base", None)
    if bi is None or bj is None:
        raise IdealError("cannot confirm the two ideals share a base diagram")
    d = min(bi.depth, bj.depth)
    if bi.truncate(d) != bj.truncate(d):
        raise IdealError("ideals live on different diagrams")


def ideal_metric(i: IdealLike, j: IdealLike, depth: int | None = None) -> DyadicDistance:
    """2^-m for the first level m where the two ideals differ.

    Only levels 0..depth are inspected (default: as deep as both are known);
    finding no difference gives an agree-to-depth result, never 0.
    """
    _check_bases(i, j)
    top = min(i.depth, j.depth) if depth is None else depth
    if top > min(i.depth, j.depth):
        raise DepthError(f"ideals are known to level {min(i.depth, j.depth)}, asked for {top}")
    for m in range(top + 1):
        if i.level(m) != j.level(m):
            return DyadicDistance(m, m)
    return DyadicDistance(None, top)


def quotient_norm_at_level(block_norms: Sequence, ideal: IdealLike, n: int):
    """Largest block norm outside the ideal at level n (0 if none remain)."""
    members = ideal.level(n)
    outside = [x for k, x in enumerate(block_norms) if k not in members]
    return max(outside) if outside else Fraction(0)


@dataclass(frozen=True)
class FusingReport:
    sequence: tuple[int, ...]
    failed_level: int | None = None

    @property
    def ok(self) -> bool:
        return self.failed_level is None


def detect_fusing(ideals: Sequence[IdealLike], limit: IdealLike, depth: int) -> FusingReport:
    """Minimal fusing sequence c_0..c_depth of a finite family against its limit.

    c_N is the least k0 such that every member with index >= k0 agrees with
    ``limit`` on levels 0..N.  A level where even the last member disagrees
    has no such k0 and is reported as the failure.
    """
    if not ideals:
        raise IdealError("empty sequence of ideals")
    for i in ideals:
        _check_bases(i, limit)
    # first level where member k departs from the limit (None: never, within depth)
    first_diff = []
    for i in ideals:
        diff = None
        for m in range(depth + 1):
            if i.level(m) != limit.level(m):
                diff = m
                break
        first_diff.append(diff)
    seq = []
    for big_n in range(depth + 1):
        k0 = len(ideals)
        while k0 > 0 and (first_diff[k0 - 1] is None or first_diff[k0 - 1] > big_n):
            k0 -= 1
        if k0 == len(ideals):
            return FusingReport(tuple(seq), big_n)
        seq.append(k0)
    return FusingReport(tuple(seq))
