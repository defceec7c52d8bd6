"""The ideals I_theta of the Farey AF algebra and the data attached to them.

For irrational theta only two vertices per level survive in the quotient:
j_n and j_n + 1, the Farey neighbours bracketing theta.  Everything here is
computed from the pair of bracketing fractions, tracked level by level with
the left/right descent read off the continued fraction terms, so depth
1000 costs nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .bratteli import (
    BratteliDiagram,
    DiagramError,
    effros_shen_diagram,
    farey_diagram,
    permute_blocks,
    telescope,
)
from .cf import (
    ContinuedFraction,
    DepthError,
    DomainError,
    IndeterminateError,
    Ordering,
    compare_to_rational,
    enclosures,
)
from .farey import MultiplicityMatrix, farey_level
from .ideals import Cofinite, IdealDiagram


class CertificationError(ArithmeticError):
    """A value the theory places in (0, 1) could not be certified there."""


@dataclass(frozen=True)
class ThetaIdeal:
    """I_theta through level ``depth``.

    Index n-1 of each tuple describes level n: ``j[n-1]`` is j_n(theta) and
    the bracketing fractions are p_left/q_left < theta < p_right/q_right.
    """

    cf: ContinuedFraction
    depth: int
    j: tuple[int, ...]
    p_left: tuple[int, ...]
    q_left: tuple[int, ...]
    p_right: tuple[int, ...]
    q_right: tuple[int, ...]

    base_name = "farey"

    def level(self, n: int):
        if n > self.depth:
            raise DepthError(f"I_theta computed to level {self.depth}, asked for {n}")
        if n <= 1:
            return frozenset()
        j = self.j[n - 1]
        return Cofinite(2 ** (n - 1) + 1, frozenset({j, j + 1}))

    def j_at(self, n: int) -> int:
        return self.j[n - 1]

    def bracket(self, n: int) -> tuple[Fraction, Fraction]:
        return Fraction(self.p_left[n - 1], self.q_left[n - 1]), Fraction(self.p_right[n - 1], self.q_right[n - 1])

    def labels(self, n: int) -> tuple[int, int]:
        """(q(n, j_n), q(n, j_n + 1))."""
        return self.q_left[n - 1], self.q_right[n - 1]


def _path_moves(cf: ContinuedFraction, count: int) -> list[int]:
    """First ``count`` left (0) / right (1) moves of the descent toward theta.

    The descent goes left a_1 - 1 times, then right a_2 times, left a_3
    times, and so on; each run ends with a turn, so a truncated prefix
    a_1..a_k fixes a_1 + ... + a_k moves.
    """
    moves: list[int] = []
    k = 1
    while len(moves) < count:
        if not cf.has_term(k):
            moves.append(0 if k % 2 else 1)  # the turn closing the last known run
            if len(moves) < count:
                raise IndeterminateError(f"theta = {cf} fixes only {len(moves)} moves; {count} are needed")
            break
        moves += [0 if k % 2 else 1] * (cf.term(k) - (1 if k == 1 else 0))
        k += 1
    return moves[:count]


@lru_cache(maxsize=256)
def theta_ideal(cf: ContinuedFraction, depth: int) -> ThetaIdeal:
    if cf.is_rational:
        raise DomainError("theta must be irrational (periodic or a truncated prefix)")
    if depth < 1:
        raise DomainError("depth must be >= 1")
    j, pl, ql, pr, qr = [0], [0], [1], [1], [1]
    for bit in _path_moves(cf, depth - 1):
        pm, qm = pl[-1] + pr[-1], ql[-1] + qr[-1]
        if bit == 0:
            j.append(2 * j[-1])
            pl.append(pl[-1]), ql.append(ql[-1]), pr.append(pm), qr.append(qm)
        else:
            j.append(2 * j[-1] + 1)
            pl.append(pm), ql.append(qm), pr.append(pr[-1]), qr.append(qr[-1])
    return ThetaIdeal(cf, depth, tuple(j), tuple(pl), tuple(ql), tuple(pr), tuple(qr))


def j_sequence(cf: ContinuedFraction, depth: int) -> tuple[int, ...]:
    """j_1(theta), ..., j_depth(theta)."""
    return theta_ideal(cf, depth).j


def j_sequence_scan(cf: ContinuedFraction, depth: int) -> tuple[int, ...]:
    """Same sequence by scanning each full Farey row (small depths only)."""
    out = []
    for n in range(1, depth + 1):
        lv = farey_level(n)
        hits = []
        for k in range(len(lv) - 1):
            lo = compare_to_rational(cf, lv.p[k], lv.q[k])
            hi = compare_to_rational(cf, lv.p[k + 1], lv.q[k + 1])
            if Ordering.INDETERMINATE in (lo, hi):
                raise IndeterminateError(f"level {n}: comparison unresolved")
            if lo is Ordering.GREATER and hi is Ordering.LESS:
                hits.append(k)
        if len(hits) != 1:
            raise DomainError(f"level {n}: theta bracketed {len(hits)} times")
        out.append(hits[0])
    return tuple(out)


def j_sequence_mediant(cf: ContinuedFraction, depth: int) -> tuple[int, ...]:
    """Same sequence by comparing theta with each new mediant exactly."""
    j, lo, hi = [0], (0, 1), (1, 1)
    for n in range(1, depth):
        m = (lo[0] + hi[0], lo[1] + hi[1])
        order = compare_to_rational(cf, *m)
        if order is Ordering.LESS:
            j.append(2 * j[-1])
            hi = m
        elif order is Ordering.GREATER:
            j.append(2 * j[-1] + 1)
            lo = m
        else:
            raise IndeterminateError(f"cannot place theta = {cf} against the mediant {m[0]}/{m[1]}")
    return tuple(j)


def ideal_blocks(cf: ContinuedFraction, n: int) -> frozenset[int]:
    """Vertex indices of I_theta at level n (explicit set)."""
    if n <= 1:
        return frozenset()
    ti = theta_ideal(cf, n)
    return ti.level(n).materialize()


def theta_ideal_diagram(cf: ContinuedFraction, depth: int) -> IdealDiagram:
    """I_theta as an explicit ideal of farey_diagram(depth)."""
    ti = theta_ideal(cf, depth)
    base = farey_diagram(depth)
    levels = [frozenset(), frozenset()] + [ti.level(n).materialize() for n in range(2, depth + 1)]
    return IdealDiagram(base, tuple(levels[: depth + 1]))


def quotient_dimension(cf: ContinuedFraction, n: int) -> int:
    if n == 0:
        return 1
    ql, qr = theta_ideal(cf, n).labels(n)
    return ql * ql + qr * qr


def beta(cf: ContinuedFraction, n: int) -> Fraction:
    return Fraction(1, quotient_dimension(cf, n))


def beta_sequence(cf: ContinuedFraction, depth: int) -> tuple[Fraction, ...]:
    ti = theta_ideal(cf, depth) if depth >= 1 else None
    out = [Fraction(1)]
    for n in range(1, depth + 1):
        ql, qr = ti.labels(n)
        out.append(Fraction(1, ql * ql + qr * qr))
    return tuple(out)


@dataclass(frozen=True)
class AffineCoefficient:
    """a*theta + b with exact rational a, b."""

    a: Fraction
    b: Fraction

    def __call__(self, theta: Fraction) -> Fraction:
        return self.a * theta + self.b

    def __str__(self) -> str:
        sign = "-" if self.b < 0 else "+"
        return f"{self.a}·θ {sign} {abs(self.b)}"


def _affine_coefficients(ti: ThetaIdeal, n: int) -> list[AffineCoefficient]:
    a, b = Fraction(-1), Fraction(1)
    out = [AffineCoefficient(a, b)]
    for m in range(1, n):
        ql, qr = ti.labels(m)
        if ti.j_at(m + 1) == 2 * ti.j_at(m):
            a, b = (ql + qr) * a / qr, ((ql + qr) * b - ql) / qr
        else:
            factor = 1 + Fraction(qr, ql)
            a, b = factor * a, factor * b
        out.append(AffineCoefficient(a, b))
    return out


def certify_unit_interval(cf: ContinuedFraction, coeff: AffineCoefficient, max_terms: int = 10_000) -> tuple[Fraction, Fraction]:
    """Enclosure endpoints at which ``coeff`` is shown to lie in (0, 1).

    theta sits strictly inside an open enclosure; an affine function with
    values in [0, 1] at both endpoints is then strictly inside (0, 1) at
    theta, unless it is constant.
    """
    for k, (lo, hi) in enumerate(enclosures(cf)):
        v1, v2 = coeff(lo), coeff(hi)
        if coeff.a == 0:
            if 0 < coeff.b < 1:
                return lo, hi
        elif 0 <= min(v1, v2) and max(v1, v2) <= 1:
            return lo, hi
        if k >= max_terms:
            break
    raise CertificationError(f"{coeff} not certified in (0, 1) for theta = {cf}")


def trace_coefficient(cf: ContinuedFraction, n: int, certify: bool = True) -> AffineCoefficient:
    """c(n, theta), the trace weight of block j_n, as an exact affine form."""
    if n < 1:
        raise DomainError("trace coefficients start at n = 1")
    coeff = _affine_coefficients(theta_ideal(cf, n), n)[-1]
    if certify:
        certify_unit_interval(cf, coeff)
    return coeff


def trace_coefficients(cf: ContinuedFraction, depth: int) -> tuple[AffineCoefficient, ...]:
    return tuple(_affine_coefficients(theta_ideal(cf, depth), depth))


def trace_value(cf: ContinuedFraction, n: int, block_traces: Sequence) -> AffineCoefficient:
    """c*t_left + (1 - c)*t_right for normalized traces of blocks j_n and j_n + 1."""
    if len(block_traces) != 2 or any(t is None for t in block_traces):
        raise DomainError("normalized traces of blocks j_n and j_n + 1 are both required")
    t1, t2 = (Fraction(t) for t in block_traces)
    c = trace_coefficient(cf, n)
    return AffineCoefficient(c.a * (t1 - t2), c.b * t1 + (1 - c.b) * t2)


def r_approach(cf: ContinuedFraction, depth: int) -> list[tuple[Fraction, Fraction]]:
    """(r(n, j_n), r(n, j_n + 1) - r(n, j_n)) for n = 1..depth."""
    ti = theta_ideal(cf, depth)
    out = []
    for n in range(1, depth + 1):
        lo, hi = ti.bracket(n)
        out.append((lo, hi - lo))
    return out


def theta_quotient_diagram(cf: ContinuedFraction, depth: int) -> BratteliDiagram:
    """Farey diagram modulo I_theta, built locally from the two surviving blocks.

    Equals quotient_diagram(farey_diagram(depth), theta_ideal_diagram(cf, depth))
    but never materializes the 2^(n-1)+1 wide Farey levels.
    """
    ti = theta_ideal(cf, depth)
    labels: list[tuple[int, ...]] = [(1,)]
    mats = [MultiplicityMatrix(((1,), (1,)))]
    for n in range(1, depth + 1):
        labels.append(ti.labels(n))
        if n < depth:
            src = (ti.j_at(n), ti.j_at(n) + 1)
            dst = (ti.j_at(n + 1), ti.j_at(n + 1) + 1)
            mats.append(MultiplicityMatrix(tuple(tuple(int(abs(2 * k - l) <= 1) for k in src) for l in dst)))
    return BratteliDiagram(tuple(labels), tuple(mats[:depth]), True, None)


def telescope_levels(cf: ContinuedFraction, count: int) -> list[int]:
    """x_1, ..., x_count with x_j = a_1 + ... + a_j."""
    xs, total = [], 0
    for k in range(1, count + 1):
        total += cf.term(k)
        xs.append(total)
    return xs


@dataclass(frozen=True)
class IdentificationReport:
    match: bool
    levels: tuple[int, ...]
    mismatches: tuple[str, ...]
    orientation: str

    def __bool__(self) -> bool:
        return self.match


def _orientation_perm(j: int, orientation: str) -> tuple[int, int]:
    if orientation == "parity":
        # p_j/q_j sits right of theta for odd j, left for even j
        return (1, 0) if j % 2 else (0, 1)
    if orientation == "swap":
        return (1, 0)
    if orientation == "identity":
        return (0, 1)
    raise ValueError(f"unknown orientation {orientation!r}")


def effros_shen_identification(cf: ContinuedFraction, count: int, orientation: str = "parity") -> IdentificationReport:
    """Compare the telescoped quotient F / I_theta with the Effros-Shen diagram.

    The quotient is telescoped at levels 0, x_1, ..., x_count.  At level x_j
    the two surviving blocks are the convergent denominators q_j, q_{j-1};
    ``orientation`` fixes how they are reordered before comparing with the
    Effros-Shen order (q_j, q_{j-1}).  "parity" reverses them at odd j,
    "swap" at every j, "identity" never.
    """
    if count < 1:
        raise DomainError("need at least one telescoping level")
    xs = telescope_levels(cf, count)
    quotient = telescope(theta_quotient_diagram(cf, xs[-1]), [0] + xs)
    perms = [None] + [_orientation_perm(j, orientation) for j in range(1, count + 1)]
    try:
        oriented = permute_blocks(quotient, perms)
    except DiagramError as exc:
        return IdentificationReport(False, tuple(xs), (str(exc),), orientation)
    target = effros_shen_diagram(cf, count)
    mismatches = []
    for n in range(count + 1):
        if oriented.labels[n] != target.labels[n]:
            mismatches.append(f"level {n}: labels {oriented.labels[n]} vs {target.labels[n]}")
    for n in range(count):
        if oriented.matrices[n] != target.matrices[n]:
            mismatches.append(f"step {n}: matrix {oriented.matrices[n].to_list()} vs {target.matrices[n].to_list()}")
    return IdentificationReport(not mismatches, tuple(xs), tuple(mismatches), orientation)
