"""Bratteli diagrams stored as label vectors plus multiplicity matrices."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .cf import ContinuedFraction, DepthError, convergents
from .farey import MultiplicityMatrix, farey_level, farey_multiplicity_matrix


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class BratteliDiagram:
    """Levels 0..depth with labels[n][k] = [n, k] and matrices[n]: level n -> n+1.

    With ``unital`` set, labels must satisfy labels[n+1] = matrices[n] @ labels[n].
    """

    labels: tuple[tuple[int, ...], ...]
    matrices: tuple[MultiplicityMatrix, ...]
    unital: bool = True
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(tuple(int(x) for x in lv) for lv in self.labels))
        object.__setattr__(self, "matrices", tuple(self.matrices))
        self.validate()

    @property
    def depth(self) -> int:
        return len(self.labels) - 1

    def level_size(self, n: int) -> int:
        return len(self.labels[n])

    def validate(self) -> None:
        if not self.labels:
            raise DiagramError("diagram needs at least level 0")
        if len(self.matrices) != len(self.labels) - 1:
            raise DiagramError(f"{len(self.labels)} levels need {len(self.labels) - 1} matrices, got {len(self.matrices)}")
        for n, lv in enumerate(self.labels):
            if not lv:
                raise DiagramError(f"level {n} has no vertices")
            for k, x in enumerate(lv):
                if x < 1:
                    raise DiagramError(f"vertex ({n},{k}) has non-positive label {x}")
        for n, m in enumerate(self.matrices):
            if m.shape != (len(self.labels[n + 1]), len(self.labels[n])):
                raise DiagramError(
                    f"matrix {n} has shape {m.shape}, expected {(len(self.labels[n + 1]), len(self.labels[n]))}"
                )
            zc = m.zero_columns()
            if zc:
                raise DiagramError(f"vertex ({n},{zc[0]}) has no outgoing edge")
            zr = m.zero_rows()
            if zr:
                raise DiagramError(f"vertex ({n + 1},{zr[0]}) has no incoming edge")
            if self.unital and m.apply(self.labels[n]) != self.labels[n + 1]:
                raise DiagramError(f"labels at level {n + 1} are not matrix {n} applied to level {n}")

    def successors(self, n: int, k: int) -> list[int]:
        m = self.matrices[n]
        return [q for q in range(m.rows) if m[q, k]]

    def truncate(self, depth: int) -> "BratteliDiagram":
        if depth > self.depth:
            raise DepthError(f"diagram has depth {self.depth}, asked for {depth}")
        return BratteliDiagram(self.labels[: depth + 1], self.matrices[:depth], self.unital, self.name)

    def to_dict(self) -> dict:
        return {
            "levels": [{"labels": [str(x) for x in lv]} for lv in self.labels],
            "matrices": [m.to_list() for m in self.matrices],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dot(self) -> str:
        lines = ["digraph bratteli {", "  rankdir=LR;"]
        for n, lv in enumerate(self.labels):
            for k, x in enumerate(lv):
                lines.append(f'  "{n}_{k}" [label="{x}"];')
        for n, m in enumerate(self.matrices):
            for q in range(m.rows):
                for k in range(m.cols):
                    if m[q, k]:
                        lines.append(f'  "{n}_{k}" -> "{n + 1}_{q}" [label="{m[q, k]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def diagram_from_matrices(
    label0: Sequence[int],
    matrices: Sequence[MultiplicityMatrix],
    labels: Sequence[Sequence[int]] | None = None,
    unital: bool = True,
    name: str | None = None,
) -> BratteliDiagram:
    """Build and validate a diagram.

    Labels are propagated by the matrices unless given explicitly.
    """
    if labels is None:
        lv = [tuple(label0)]
        for n, m in enumerate(matrices):
            if m.cols != len(lv[-1]):
                raise DiagramError(f"matrix {n} has {m.cols} columns for {len(lv[-1])} vertices")
            lv.append(m.apply(lv[-1]))
        labels = lv
    elif tuple(labels[0]) != tuple(label0):
        raise DiagramError("label0 disagrees with labels[0]")
    return BratteliDiagram(tuple(tuple(x) for x in labels), tuple(matrices), unital, name)


def farey_diagram(depth: int) -> BratteliDiagram:
    """Scalars at level 0 doubled into level 1, then F_1, F_2, ..."""
    if depth < 1:
        raise DiagramError("the Farey diagram needs depth >= 1")
    mats = [MultiplicityMatrix(((1,), (1,)))]
    mats += [farey_multiplicity_matrix(n) for n in range(1, depth)]
    labels = [(1,)] + [farey_level(n).q for n in range(1, depth + 1)]
    return BratteliDiagram(tuple(labels), tuple(mats), True, "farey")


def effros_shen_matrix(cf: ContinuedFraction, n: int) -> MultiplicityMatrix:
    if n == 0:
        return MultiplicityMatrix(((cf.term(1),), (1,)))
    return MultiplicityMatrix(((cf.term(n + 1), 1), (1, 0)))


def effros_shen_diagram(cf: ContinuedFraction, depth: int) -> BratteliDiagram:
    """Level n >= 1 carries (q_n, q_{n-1}); the step matrix is [[a_{n+1}, 1], [1, 0]]."""
    if depth < 1:
        raise DiagramError("depth must be >= 1")
    if not cf.has_term(depth):
        raise DepthError(f"Effros-Shen diagram of depth {depth} needs a_{depth}")
    qs = [pair.q for pair in convergents(cf, depth)]
    labels = [(1,)] + [(qs[n], qs[n - 1]) for n in range(1, depth + 1)]
    mats = [effros_shen_matrix(cf, n) for n in range(depth)]
    return BratteliDiagram(tuple(labels), tuple(mats), True, f"effros-shen[{cf}]")


def telescope(d: BratteliDiagram, indices: Sequence[int]) -> BratteliDiagram:
    """Keep only the listed levels; edges become ordered matrix products."""
    idx = list(indices)
    if not idx:
        raise DiagramError("telescoping needs at least one level")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise DiagramError(f"telescoping levels must be strictly increasing: {idx}")
    if idx[0] < 0 or idx[-1] > d.depth:
        raise DiagramError(f"telescoping levels {idx} outside 0..{d.depth}")
    mats = []
    for a, b in zip(idx, idx[1:]):
        prod = d.matrices[a]
        for n in range(a + 1, b):
            prod = d.matrices[n] @ prod
        mats.append(prod)
    return BratteliDiagram(tuple(d.labels[i] for i in idx), tuple(mats), d.unital, d.name)


def permute_blocks(d: BratteliDiagram, perms: Sequence[Sequence[int] | None]) -> BratteliDiagram:
    """Reorder vertices; ``perms[n][k]`` is the old index placed at new position k."""
    if len(perms) != d.depth + 1:
        raise DiagramError("one permutation (or None) per level is required")
    full = [list(p) if p is not None else list(range(d.level_size(n))) for n, p in enumerate(perms)]
    for n, p in enumerate(full):
        if sorted(p) != list(range(d.level_size(n))):
            raise DiagramError(f"{p} is not a permutation of level {n}")
    labels = tuple(tuple(d.labels[n][k] for k in p) for n, p in enumerate(full))
    mats = tuple(m.submatrix(full[n + 1], full[n]) for n, m in enumerate(d.matrices))
    return BratteliDiagram(labels, mats, d.unital, d.name)


def quotient_diagram(d: BratteliDiagram, ideal) -> BratteliDiagram:
    """Diagram on the vertices outside ``ideal`` with the induced edges.

    ``ideal`` is anything exposing ``level(n)`` (see ``ideals.IdealDiagram``).
    Validation of the result is the consistency check: a valid ideal leaves
    a complement that satisfies every diagram axiom.
    """
    depth = min(d.depth, ideal.depth)
    keep = []
    for n in range(depth + 1):
        members = ideal.level(n)
        rest = [k for k in range(d.level_size(n)) if k not in members]
        if not rest:
            raise DiagramError(f"empty quotient: every vertex of level {n} lies in the ideal")
        keep.append(rest)
    labels = tuple(tuple(d.labels[n][k] for k in keep[n]) for n in range(depth + 1))
    mats = tuple(d.matrices[n].submatrix(keep[n + 1], keep[n]) for n in range(depth))
    return BratteliDiagram(labels, mats, d.unital, None)


def dimension_at_level(d: BratteliDiagram, n: int) -> int:
    return sum(x * x for x in d.labels[n])
