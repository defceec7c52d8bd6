"""Exact continued fractions for numbers in [0, 1).

Three flavours share one type:

* exact rationals (finite term list, value known exactly),
* truncated prefixes of an irrational (finite term list, tail unknown),
* eventually periodic expansions (quadratic irrationals), written
  ``0;a1,a2,(p1,p2)`` with the parenthesised block repeating forever.

No floating point value of theta ever enters this module; all comparisons
are made against exact convergent enclosures.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class DepthError(ValueError):
    """More terms were requested than a finite expansion holds."""


class IndeterminateError(ArithmeticError):
    """An exact comparison could not be resolved at the available depth."""


class Ordering(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal-at-depth"
    INDETERMINATE = "indeterminate"


class ConvergentPair(NamedTuple):
    n: int
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class ContinuedFraction:
    """Term stream ``[0; a1, a2, ...]``.

    ``prefix`` always starts with the zeroth term 0.  If ``period`` is
    non-empty the expansion is ``prefix`` followed by ``period`` repeated.
    A finite expansion is an exact rational unless ``truncated`` is set, in
    which case it is the known head of an irrational whose tail is unknown.
    """

    prefix: tuple[int, ...]
    period: tuple[int, ...] = ()
    truncated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(a) for a in self.prefix))
        object.__setattr__(self, "period", tuple(int(a) for a in self.period))
        if not self.prefix or self.prefix[0] != 0:
            raise DomainError("terms[0] must be 0 for values in [0, 1)")
        if any(a < 1 for a in self.prefix[1:]) or any(a < 1 for a in self.period):
            raise DomainError("terms after the zeroth must be >= 1")
        if self.period and self.truncated:
            raise DomainError("a periodic expansion is never truncated")

    # -- structure -------------------------------------------------------

    @property
    def is_periodic(self) -> bool:
        return bool(self.period)

    @property
    def is_rational(self) -> bool:
        return not self.period and not self.truncated

    @property
    def is_irrational(self) -> bool:
        return not self.is_rational

    @property
    def known_terms(self) -> int | None:
        """Number of terms available, or None when unbounded."""
        return None if self.period else len(self.prefix)

    def term(self, j: int) -> int:
        if j < len(self.prefix):
            return self.prefix[j]
        if not self.period:
            raise DepthError(f"term {j} requested but only {len(self.prefix)} terms are known")
        return self.period[(j - len(self.prefix)) % len(self.period)]

    def terms(self, n: int) -> tuple[int, ...]:
        """The first ``n`` terms a_0..a_{n-1}."""
        return tuple(self.term(j) for j in range(n))

    def has_term(self, j: int) -> bool:
        return bool(self.period) or j < len(self.prefix)

    def value(self) -> Fraction:
        if not self.is_rational:
            raise DomainError("only an exact rational expansion has an exact value")
        return convergents(self, len(self.prefix) - 1)[-1].value

    def __str__(self) -> str:
        return format_cf(self)


_CF_RE = re.compile(r"^\s*(\d+)\s*(?:;\s*(.*?))?\s*$")


def parse_cf(text: str, truncated: bool = True) -> ContinuedFraction:
    """Parse ``"0;a1,a2,(p1,p2)"`` or ``"p/q"``.

    A finite term list without a period is read as an irrational prefix
    unless ``truncated`` is False.
    """
    text = text.strip()
    if "/" in text and ";" not in text:
        num, den = text.split("/")
        return cf_from_rational(int(num), int(den))
    m = _CF_RE.match(text)
    if not m:
        raise DomainError(f"cannot parse continued fraction {text!r}")
    head = [int(m.group(1))]
    rest = (m.group(2) or "").strip()
    period: list[int] = []
    if "(" in rest:
        if not rest.endswith(")") or rest.count("(") != 1:
            raise DomainError(f"malformed period in {text!r}")
        before, inside = rest[:-1].split("(")
        period = [int(t) for t in inside.split(",") if t.strip()]
        if not period:
            raise DomainError("period must be non-empty")
        rest = before.rstrip().rstrip(",")
    head += [int(t) for t in rest.split(",") if t.strip()]
    return ContinuedFraction(tuple(head), tuple(period), truncated=truncated and not period)


def format_cf(cf: ContinuedFraction) -> str:
    head = [str(a) for a in cf.prefix[1:]]
    if cf.period:
        head.append("(" + ",".join(str(a) for a in cf.period) + ")")
    body = ",".join(head)
    text = "0;" + body if body else "0"
    return text + ",..." if cf.truncated else text


def cf_from_rational(num: int, den: int) -> ContinuedFraction:
    """Euclidean algorithm; canonical form ends with a term >= 2."""
    if den == 0:
        raise DomainError("denominator must be non-zero")
    if den < 0:
        num, den = -num, -den
    if not 0 <= num < den:
        raise DomainError(f"{num}/{den} is not in [0, 1)")
    g = math.gcd(num, den)
    num, den = num // g, den // g
    terms = [0]
    a, b = den, num
    while b:
        terms.append(a // b)
        a, b = b, a % b
    return ContinuedFraction(tuple(terms))


def cf_from_float(x: float, depth: int = 30) -> ContinuedFraction:
    """Inexact convenience helper: truncated expansion of a float.

    Floating error corrupts late terms; never use the result where exact
    answers are needed.
    """
    if not 0 < x < 1:
        raise DomainError("x must lie in (0, 1)")
    terms = [0]
    frac = Fraction(x)
    for _ in range(depth):
        if frac == 0:
            break
        frac = 1 / frac
        a = math.floor(frac)
        terms.append(a)
        frac -= a
    return ContinuedFraction(tuple(terms), truncated=True)


def iter_convergents(cf: ContinuedFraction) -> Iterator[ConvergentPair]:
    """Yield (n, p_n, q_n) for as long as terms are available."""
    # (p_{-1}, q_{-1}) = (1, 0) reproduces the seed (a0 a1 + 1, a1; a0, 1).
    p_prev, q_prev = 1, 0
    p, q = cf.term(0), 1
    yield ConvergentPair(0, p, q)
    n = 1
    while cf.has_term(n):
        a = cf.term(n)
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        yield ConvergentPair(n, p, q)
        n += 1


def convergents(cf: ContinuedFraction, n: int) -> list[ConvergentPair]:
    if n < 0:
        raise DomainError("depth must be non-negative")
    if not cf.has_term(n):
        raise DepthError(f"convergent {n} needs term a_{n}; only {cf.known_terms} terms known")
    out = []
    for pair in iter_convergents(cf):
        out.append(pair)
        if pair.n == n:
            break
    return out


def enclosures(cf: ContinuedFraction) -> Iterator[tuple[Fraction, Fraction]]:
    """Shrinking open intervals certified to contain an irrational value.

    Knowing a_0..a_k, the value is (p_k x + p_{k-1}) / (q_k x + q_{k-1}) with
    tail x in (1, inf), so it lies strictly between p_k/q_k and the mediant
    (p_k + p_{k-1}) / (q_k + q_{k-1}).
    """
    p_prev, q_prev = 1, 0
    for _, p, q in iter_convergents(cf):
        a, b = Fraction(p, q), Fraction(p + p_prev, q + q_prev)
        yield (a, b) if a < b else (b, a)
        p_prev, q_prev = p, q


def compare_to_rational(cf: ContinuedFraction, num: int, den: int, depth: int = 10_000) -> Ordering:
    """Exact ordering of the value of ``cf`` against ``num/den``.

    ``depth`` caps the number of terms consulted for periodic expansions.
    A truncated prefix that cannot separate the two values yields
    ``Ordering.INDETERMINATE``; nothing is guessed.
    """
    if den == 0:
        raise DomainError("denominator must be non-zero")
    r = Fraction(num, den)
    if cf.is_rational:
        v = cf.value()
        if v == r:
            return Ordering.EQUAL
        return Ordering.LESS if v < r else Ordering.GREATER
    for k, (lo, hi) in enumerate(enclosures(cf)):
        if r <= lo:
            return Ordering.GREATER
        if r >= hi:
            return Ordering.LESS
        if k >= depth:
            break
    return Ordering.INDETERMINATE


def enclosure_at(cf: ContinuedFraction, max_width: Fraction, depth: int = 10_000) -> tuple[Fraction, Fraction]:
    """First enclosure narrower than ``max_width`` (or the last one available)."""
    if cf.is_rational:
        v = cf.value()
        return v, v
    last = (Fraction(0), Fraction(1))
    for k, box in enumerate(enclosures(cf)):
        last = box
        if box[1] - box[0] < max_width or k >= depth:
            break
    return last


@dataclass(frozen=True)
class DyadicDistance:
    """A first-disagreement distance ``2^-exponent``.

    ``exponent`` is None when no disagreement was found: then ``certain``
    says whether the objects are provably equal (distance exactly 0) or
    merely agree through index ``depth``.
    """

    exponent: int | None
    depth: int
    certain: bool = False

    @property
    def agrees(self) -> bool:
        return self.exponent is None

    @property
    def value(self) -> Fraction | None:
        if self.exponent is not None:
            return Fraction(1, 1 << self.exponent)
        return Fraction(0) if self.certain else None

    def upper_bound(self) -> Fraction:
        """Certified upper bound on the true distance."""
        if self.exponent is not None:
            return Fraction(1, 1 << self.exponent)
        if self.certain:
            return Fraction(0)
        return Fraction(1, 1 << (self.depth + 1))

    def __str__(self) -> str:
        if self.exponent is not None:
            return f"2^-{self.exponent} = {_decimal(self.exponent)}"
        if self.certain:
            return "0"
        return f"agree-to-depth {self.depth} (< 2^-{self.depth})"


def _decimal(exponent: int, digits: int = 6) -> str:
    if exponent <= 60:
        return repr(2.0 ** -exponent)
    # 2^-k = m * 10^e with m in [1, 10)
    e = math.floor(-exponent * math.log10(2))
    mant = 10 ** (-exponent * math.log10(2) - e)
    return f"{mant:.{digits}f}e{e}"


def _resolution_length(cf: ContinuedFraction) -> int | None:
    if cf.is_rational:
        return len(cf.prefix)
    if cf.period:
        return len(cf.prefix)
    return None


def baire_distance(x: ContinuedFraction, y: ContinuedFraction, depth: int | None = None) -> DyadicDistance:
    """First-disagreement ultrametric on term sequences, index 0 included.

    Two fully known expansions (rational or periodic) are compared far
    enough to decide equality.  Otherwise the scan stops at ``depth`` (or at
    the end of the shorter known prefix) and reports agreement to that
    depth.
    """
    lx, ly = _resolution_length(x), _resolution_length(y)
    if lx is not None and ly is not None:
        if x.is_rational != y.is_rational:
            # a finite expansion runs out where the infinite one continues
            span = max(lx, ly) + 1
        else:
            lcm = math.lcm(len(x.period) or 1, len(y.period) or 1)
            span = max(lx, ly) + lcm
        limit = span if depth is None else min(span, depth + 1)
        for n in range(limit):
            if _term_or_none(x, n) != _term_or_none(y, n):
                return DyadicDistance(n, n)
        return DyadicDistance(None, limit - 1, certain=limit == span)
    avail = [k for k in (x.known_terms, y.known_terms) if k is not None]
    limit = min(avail) if avail else None
    if depth is not None:
        limit = depth + 1 if limit is None else min(limit, depth + 1)
    if limit is None:
        raise DepthError("depth is required when both expansions are unbounded")
    for n in range(limit):
        if x.term(n) != y.term(n):
            return DyadicDistance(n, n)
    return DyadicDistance(None, limit - 1)


def _term_or_none(cf: ContinuedFraction, n: int) -> int | None:
    return cf.term(n) if cf.has_term(n) else None


def cf_with_terms(terms: Sequence[int], period: Sequence[int] = ()) -> ContinuedFraction:
    """Convenience constructor: ``cf_with_terms([0, 2], [1])`` is 0;2,(1)."""
    return ContinuedFraction(tuple(terms), tuple(period), truncated=False if period else True)
