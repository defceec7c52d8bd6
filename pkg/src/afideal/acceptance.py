"""End-to-end acceptance checks, one function per criterion.

Each check returns a ``CriterionResult``; ``run_all`` is what ``verify`` prints.
Sampling is seeded so every run is identical.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .bratteli import diagram_from_matrices, effros_shen_diagram, farey_diagram
from .cf import ContinuedFraction, Ordering, baire_distance, compare_to_rational, enclosure_at, parse_cf
from .farey import MultiplicityMatrix, check_unital_embedding, farey_level
from .ideals import brute_force_ideals, detect_fusing, enumerate_coherent_ideals, ideal_metric
from .qmetric import (
    ChainSpace,
    SolverConfig,
    State,
    chain_from_diagram,
    commutative_pair_chain,
    leibniz_sides,
    mk_distance,
    pullback,
    random_self_adjoint,
)
from .theta import (
    beta,
    effros_shen_identification,
    r_approach,
    theta_ideal,
    theta_quotient_diagram,
    trace_coefficient,
)

SEED = 20240601


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:>2}  {self.name:<32} {self.seconds:7.2f}s  {self.detail}"


def sample_thetas(count: int, length: int = 40, max_term: int = 10, seed: int = SEED) -> list[ContinuedFraction]:
    """Random truncated prefixes 0;a1,...,a_length with 1 <= a_i <= max_term."""
    rng = random.Random(seed)
    return [
        ContinuedFraction((0,) + tuple(rng.randint(1, max_term) for _ in range(length)), truncated=True)
        for _ in range(count)
    ]


def theta_float(cf: ContinuedFraction) -> float:
    lo, hi = enclosure_at(cf, Fraction(1, 10**18))
    return float((lo + hi) / 2)


def theta_chain(cf: ContinuedFraction, depth: int) -> ChainSpace:
    """Quotient F / I_theta through ``depth`` with the trace induced by theta."""
    d = theta_quotient_diagram(cf, depth)
    c = float(trace_coefficient(cf, depth)(Fraction(theta_float(cf))))
    betas = [Fraction(1)] + [beta(cf, n) for n in range(1, depth + 1)]
    return ChainSpace(d, (c, 1 - c), tuple(betas))


def acceptance_chains() -> list[tuple[str, ChainSpace]]:
    golden = parse_cf("0;(1)")
    return [
        ("C < C^2", commutative_pair_chain()),
        ("Effros-Shen golden N=2", chain_from_diagram(effros_shen_diagram(golden, 2))),
        ("Effros-Shen golden N=3", chain_from_diagram(effros_shen_diagram(golden, 3))),
        ("Farey N=2", chain_from_diagram(farey_diagram(2))),
        ("F/I_theta 0;2,(1) N=3", theta_chain(parse_cf("0;2,(1)"), 3)),
    ]


def criterion_1() -> tuple[bool, str]:
    t0 = time.perf_counter()
    theta, mu, mu2 = parse_cf("0;1000,(1)"), parse_cf("0;1,(1)"), parse_cf("0;999,(1)")
    depth = 1001
    it, im, im2 = theta_ideal(theta, depth), theta_ideal(mu, depth), theta_ideal(mu2, depth)
    b1, b2 = baire_distance(theta, mu).value, baire_distance(theta, mu2).value
    m1, m2 = ideal_metric(it, im).value, ideal_metric(it, im2).value
    elapsed = time.perf_counter() - t0
    ok = b1 == b2 == Fraction(1, 2) and m1 == Fraction(1, 4) and m2 == Fraction(1, 2**1000) and elapsed < 10
    return ok, f"baire {b1}, {b2}; ideal {m1}, 2^-{m2.denominator.bit_length() - 1}; {elapsed:.3f}s"


def criterion_2() -> tuple[bool, str]:
    bad = []
    for n in range(1, 13):
        if not check_unital_embedding(n):
            bad.append(f"F_{n} q(n) != q(n+1)")
        lv = farey_level(n)
        for k in range(len(lv) - 1):
            if lv.p[k + 1] * lv.q[k] - lv.p[k] * lv.q[k + 1] != 1:
                bad.append(f"det at ({n},{k})")
    return not bad, "n <= 12 exact" if not bad else "; ".join(bad[:3])


def criterion_3() -> tuple[bool, str]:
    bad = []
    for cf in sample_thetas(50):
        ti = theta_ideal(cf, 41)
        for n in range(1, 41):
            j, j2 = ti.j_at(n), ti.j_at(n + 1)
            ql, qr = ti.labels(n)
            if j2 not in (2 * j, 2 * j + 1):
                bad.append(f"{cf}: doubling at {n}")
            if not (ql >= n or qr >= n):
                bad.append(f"{cf}: growth at {n}")
            if beta(cf, n) > Fraction(1, n * n):
                bad.append(f"{cf}: beta at {n}")
    return not bad, "50 theta, n <= 40" if not bad else "; ".join(bad[:3])


def criterion_4() -> tuple[bool, str]:
    bad, checked = [], 0
    for cf in sample_thetas(50):
        c1 = trace_coefficient(cf, 1)
        if (c1.a, c1.b) != (-1, 1):
            bad.append(f"{cf}: seed {c1}")
        a1 = cf.term(1)
        if a1 >= 2:
            checked += 1
            for m in range(1, a1 + 1):
                c = trace_coefficient(cf, m)
                # m(1 - theta) - (m - 1) = -m theta + 1
                if (c.a, c.b) != (-m, 1):
                    bad.append(f"{cf}: c({m}) = {c}")
    return not bad, f"seed on 50 theta, chain on {checked} with a_1 >= 2" if not bad else "; ".join(bad[:3])


def fusing_family(cf: ContinuedFraction, count: int) -> list[ContinuedFraction]:
    """theta_k agrees with theta on a_0..a_k and then departs."""
    out = []
    for k in range(1, count + 1):
        head = cf.terms(k + 1) + (cf.term(k + 1) + 1,)
        out.append(ContinuedFraction(head, (1,)))
    return out


def criterion_5(depth: int = 12) -> tuple[bool, str]:
    bad = []
    for cf in sample_thetas(10, seed=SEED + 5):
        fam = fusing_family(cf, depth + 2)
        ideals = [theta_ideal(x, depth) for x in fam]
        limit = theta_ideal(cf, depth)
        rep = detect_fusing(ideals, limit, depth)
        if not rep.ok:
            bad.append(f"{cf}: no c_N at N = {rep.failed_level}")
            continue
        for big_n, c in enumerate(rep.sequence):
            bound = Fraction(1, 2 ** (big_n + 1))
            for k in range(c, len(ideals)):
                if ideal_metric(ideals[k], limit).upper_bound() > bound:
                    bad.append(f"{cf}: k = {k} >= c_{big_n} but metric above 2^-{big_n + 1}")
            # minimality: the member just before c_N is farther than the bound
            if c > 0 and ideal_metric(ideals[c - 1], limit).upper_bound() <= bound:
                bad.append(f"{cf}: c_{big_n} = {c} not minimal")
    return not bad, f"10 families, N <= {depth}" if not bad else "; ".join(bad[:3])


def criterion_6() -> tuple[bool, str]:
    bad = []
    for cf in sample_thetas(10, length=8, seed=SEED + 6):
        rep = effros_shen_identification(cf, 4)
        if not rep:
            bad.append(f"{cf}: {rep.mismatches[0]}")
    return not bad, "10 theta, J = 4, block swap at odd telescope index" if not bad else "; ".join(bad[:2])


def criterion_7() -> tuple[bool, str]:
    bad, worst = [], Fraction(0)
    for cf in sample_thetas(50, seed=SEED + 7):
        approach = r_approach(cf, 30)
        prev = None
        for n, (lo, gap) in enumerate(approach, start=1):
            hi = lo + gap
            if compare_to_rational(cf, lo.numerator, lo.denominator) is not Ordering.GREATER:
                bad.append(f"{cf}: r(n,j_n) < theta not certified at {n}")
            if compare_to_rational(cf, hi.numerator, hi.denominator) is not Ordering.LESS:
                bad.append(f"{cf}: theta < r(n,j_n+1) not certified at {n}")
            if prev is not None and gap > prev:
                bad.append(f"{cf}: gap grows at {n}")
            prev = gap
        worst = max(worst, approach[-1][1])
        if approach[-1][1] >= Fraction(1, 10**4):
            bad.append(f"{cf}: gap(30) = {float(approach[-1][1]):.3g}")
    return not bad, f"50 theta, max gap(30) = {float(worst):.3g}" if not bad else "; ".join(bad[:3])


def toy_diagram():
    return diagram_from_matrices((1,), [MultiplicityMatrix(((1,), (1,)))], name="toy")


def criterion_8() -> tuple[bool, str]:
    toy = toy_diagram()
    got = {i.levels for i in enumerate_coherent_ideals(toy, 1)}
    f = frozenset
    hand = {(f(), f()), (f(), f({0})), (f(), f({1})), (f({0}), f({0, 1}))}
    farey = farey_diagram(2)
    ours = {i.levels for i in enumerate_coherent_ideals(farey, 2)}
    brute = brute_force_ideals(farey, 2)
    ok = got == hand and ours == brute
    return ok, f"toy {len(got)} ideals, Farey depth 2: {len(ours)} vs brute force {len(brute)}"


def _random_state(chain: ChainSpace, rng: np.random.Generator) -> State:
    w = rng.random(len(chain.blocks))
    dens = []
    for d in chain.blocks:
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        r = z @ z.conj().T
        dens.append(r / np.trace(r).real)
    return State.from_weights(chain, w / w.sum(), dens)


def criterion_9(pairs: int = 100) -> tuple[bool, str]:
    bad = []
    ch = commutative_pair_chain()
    d = mk_distance(State.from_weights(ch, [1, 0]), State.from_weights(ch, [0, 1]), ch).value
    if abs(d - 2) > 1e-6:
        bad.append(f"closed form: {d} != 2")
    rng = np.random.default_rng(SEED)
    cfg = SolverConfig(iters=600, restarts=2, window=150)
    worst_slack = np.inf
    for name, chain in acceptance_chains():
        if chain.dimension > 13:
            bad.append(f"{name}: dimension {chain.dimension} > 13")
        fails = 0
        for _ in range(pairs):
            a, b = random_self_adjoint(chain, rng), random_self_adjoint(chain, rng)
            if not leibniz_sides(a, b, chain):
                fails += 1
        if fails:
            bad.append(f"{name}: {fails} quasi-Leibniz failures")
        for n in range(chain.depth):
            phi = _random_state(chain, rng)
            psi = pullback(phi, chain, n)
            val = mk_distance(phi, psi, chain, cfg).value
            bound = 2 * float(chain.beta[n])
            worst_slack = min(worst_slack, bound - val)
            if val > bound + 1e-6:
                bad.append(f"{name}: level {n} distance {val} > {bound}")
    return not bad, f"closed form {d:.9f}; 5 chains x {pairs} pairs; min slack {worst_slack:.3g}" if not bad else "; ".join(bad[:3])


CRITERIA: list[tuple[int, str, Callable[[], tuple[bool, str]]]] = [
    (1, "explicit distances", criterion_1),
    (2, "unital Farey embeddings", criterion_2),
    (3, "doubling law and growth", criterion_3),
    (4, "trace seed and chain", criterion_4),
    (5, "fusing vs metric", criterion_5),
    (6, "Effros-Shen identification", criterion_6),
    (7, "r-approach", criterion_7),
    (8, "coherent-ideal oracle", criterion_8),
    (9, "quantum metric numerics", criterion_9),
]


def run_criterion(number: int) -> CriterionResult:
    for num, name, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failure, reported not raised
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            return CriterionResult(num, name, ok, detail, time.perf_counter() - t0)
    raise KeyError(f"no criterion {number}")


def run_all() -> list[CriterionResult]:
    return [run_criterion(num) for num, _, _ in CRITERIA]
