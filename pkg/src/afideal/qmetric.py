"""Finite-dimensional quantum compact metric spaces built on a truncated chain.

This module is floating point by design; nothing in it feeds back into the
exact modules.  Elements of a multi-matrix algebra are lists of complex
numpy blocks, one per vertex of a level.

Block ordering of the embeddings: inside target block l of level n+1 the
source blocks k = 0, 1, ... of level n are placed down the diagonal in
ascending k, block k repeated ``m[l, k]`` times consecutively.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .bratteli import BratteliDiagram, diagram_from_matrices
from .cf import DomainError
from .farey import MultiplicityMatrix

Element = list  # list[np.ndarray], one square block per vertex

HERMITIAN_TOL = 1e-12
FEASIBILITY_TOL = 1e-9


class ChainError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ChainSpace:
    """A tower A_0 = C -> A_1 -> ... -> A_N with a trace on A_N and weights beta(0..N).

    ``trace[i]`` is the weight of the normalized trace on top block i.
    """

    diagram: BratteliDiagram
    trace: tuple[float, ...]
    beta: tuple[Fraction, ...]
    _ids: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        d = self.diagram
        if d.labels[0] != (1,):
            raise ChainError("level 0 must be the scalars")
        if not d.unital:
            raise ChainError("embeddings must be unital")
        t = np.asarray(self.trace, dtype=float)
        if t.shape != (d.level_size(d.depth),):
            raise ChainError(f"trace needs {d.level_size(d.depth)} weights, got {len(t)}")
        if np.any(t <= 0):
            raise ChainError("trace must be faithful (every weight > 0)")
        if abs(t.sum() - 1) > 1e-12:
            raise ChainError(f"trace weights sum to {t.sum()}, not 1")
        object.__setattr__(self, "trace", tuple(float(x) for x in t))
        beta = tuple(Fraction(b) for b in self.beta)
        if len(beta) != d.depth + 1:
            raise ChainError(f"beta needs {d.depth + 1} values (levels 0..{d.depth}), got {len(beta)}")
        if any(b <= 0 for b in beta):
            raise ChainError("beta must be positive")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "_ids", [self._unit_ids(n) for n in range(d.depth + 1)])

    # -- structure -------------------------------------------------------

    @property
    def depth(self) -> int:
        return self.diagram.depth

    @property
    def blocks(self) -> tuple[int, ...]:
        return self.diagram.labels[self.depth]

    @property
    def dimension(self) -> int:
        return sum(x * x for x in self.blocks)

    @property
    def weights(self) -> np.ndarray:
        """Per-entry weights t_i / d_i of the trace inner product."""
        return np.array([t / d for t, d in zip(self.trace, self.blocks)])

    def _unit_ids(self, n: int) -> list[np.ndarray]:
        """For each top block, the id of the level-n matrix unit at each position (-1: none)."""
        labels = self.diagram.labels
        offsets = np.cumsum([0] + [d * d for d in labels[n]])
        cur = [(offsets[k] + np.arange(d * d).reshape(d, d)) for k, d in enumerate(labels[n])]
        for m in range(n, self.depth):
            cur = _embed_blocks(cur, self.diagram.matrices[m], labels[m + 1], fill=-1)
        return cur

    # -- algebra ---------------------------------------------------------

    def zero(self) -> Element:
        return [np.zeros((d, d), dtype=complex) for d in self.blocks]

    def identity(self) -> Element:
        return [np.eye(d, dtype=complex) for d in self.blocks]

    def check_element(self, a: Element, level: int | None = None) -> None:
        sizes = self.diagram.labels[self.depth if level is None else level]
        if len(a) != len(sizes) or any(np.shape(x) != (d, d) for x, d in zip(a, sizes)):
            raise ChainError(f"element shapes {[np.shape(x) for x in a]} do not match blocks {sizes}")

    def trace_of(self, a: Element) -> float:
        return float(sum(t * np.trace(x).real / x.shape[0] for t, x in zip(self.trace, a)))


def _embed_blocks(blocks: Sequence[np.ndarray], m: MultiplicityMatrix, sizes: Sequence[int], fill=0) -> list:
    out = []
    for l, size in enumerate(sizes):
        dtype = blocks[0].dtype
        big = np.full((size, size), fill, dtype=dtype)
        pos = 0
        for k, x in enumerate(blocks):
            for _ in range(m[l, k]):
                d = x.shape[0]
                big[pos : pos + d, pos : pos + d] = x
                pos += d
        out.append(big)
    return out


def chain_from_diagram(
    diagram: BratteliDiagram, trace: Sequence[float] | None = None, beta: Sequence | None = None
) -> ChainSpace:
    """Defaults: the trace proportional to d_i^2 on top blocks, beta(n) = 1/dim A_n."""
    top = diagram.labels[diagram.depth]
    if trace is None:
        total = sum(d * d for d in top)
        trace = [d * d / total for d in top]
    if beta is None:
        beta = [Fraction(1, sum(d * d for d in lv)) for lv in diagram.labels]
    return ChainSpace(diagram, tuple(trace), tuple(beta))


def chain_from_json(text_or_obj) -> ChainSpace:
    """``{blocks: [[d...]...], matrices: [...], trace: [t...], beta: ["p/q"...]}``."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    try:
        blocks = [tuple(int(x) for x in lv) for lv in obj["blocks"]]
        mats = [MultiplicityMatrix.of(m) for m in obj["matrices"]]
        trace = [float(Fraction(str(t))) for t in obj["trace"]]
        beta = [Fraction(str(b)) for b in obj["beta"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ChainError(f"malformed chain JSON: {exc}") from exc
    return ChainSpace(diagram_from_matrices(blocks[0], mats, labels=blocks), tuple(trace), tuple(beta))


def embed(x: Element, chain: ChainSpace, n: int, m: int | None = None) -> Element:
    """Image of a level-n element at level m (default: the top)."""
    m = chain.depth if m is None else m
    if not 0 <= n <= m <= chain.depth:
        raise ChainError(f"cannot embed level {n} into level {m}")
    chain.check_element(x, n)
    cur = [np.asarray(b, dtype=complex) for b in x]
    for k in range(n, m):
        cur = _embed_blocks(cur, chain.diagram.matrices[k], chain.diagram.labels[k + 1])
    return cur


def conditional_expectation(a: Element, chain: ChainSpace, n: int) -> Element:
    """Trace-orthogonal projection of a top element onto the image of level n.

    The embedded matrix units have disjoint supports, so the projection
    averages a over the positions of each unit with weights t_i / d_i.
    """
    chain.check_element(a)
    ids = chain._ids[n]
    size = sum(d * d for d in chain.diagram.labels[n])
    num = np.zeros(size, dtype=complex)
    den = np.zeros(size)
    for w, x, idx in zip(chain.weights, a, ids):
        mask = idx >= 0
        num += np.bincount(idx[mask], weights=(w * x[mask]).real, minlength=size)
        num += 1j * np.bincount(idx[mask], weights=(w * x[mask]).imag, minlength=size)
        den += np.bincount(idx[mask], weights=np.full(mask.sum(), w), minlength=size)
    coef = num / den
    return [np.where(idx >= 0, coef[np.maximum(idx, 0)], 0) for idx in ids]


def restrict_to_level(a: Element, chain: ChainSpace, n: int) -> Element:
    """The level-n element whose embedding is E_n(a)."""
    ids = chain._ids[n]
    e = conditional_expectation(a, chain, n)
    size = sum(d * d for d in chain.diagram.labels[n])
    flat = np.zeros(size, dtype=complex)
    for idx, x in zip(ids, e):
        mask = idx >= 0
        flat[idx[mask]] = x[mask]
    out, pos = [], 0
    for d in chain.diagram.labels[n]:
        out.append(flat[pos : pos + d * d].reshape(d, d))
        pos += d * d
    return out


def op_norm(a: Element) -> float:
    """C*-norm: the largest block spectral norm."""
    return max(float(np.linalg.norm(x, 2)) for x in a)


def _sub(a: Element, b: Element) -> Element:
    return [x - y for x, y in zip(a, b)]


def lip_norm(a: Element, chain: ChainSpace) -> float:
    """max over n of ||a - E_n(a)|| / beta(n)."""
    return max(op_norm(_sub(a, conditional_expectation(a, chain, n))) / float(chain.beta[n]) for n in range(chain.depth + 1))


def is_self_adjoint(a: Element, tol: float = HERMITIAN_TOL) -> bool:
    return all(np.max(np.abs(x - x.conj().T), initial=0.0) <= tol for x in a)


def random_self_adjoint(chain: ChainSpace, rng: np.random.Generator, level: int | None = None) -> Element:
    sizes = chain.diagram.labels[chain.depth if level is None else level]
    out = []
    for d in sizes:
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        out.append((z + z.conj().T) / 2)
    return out


def jordan(a: Element, b: Element) -> Element:
    return [(x @ y + y @ x) / 2 for x, y in zip(a, b)]


def lie(a: Element, b: Element) -> Element:
    return [(x @ y - y @ x) / 2j for x, y in zip(a, b)]


@dataclass(frozen=True)
class LeibnizCheck:
    lhs: float
    rhs: float
    ok: bool

    def __bool__(self) -> bool:
        return self.ok


def leibniz_sides(
    a: Element, b: Element, chain: ChainSpace, lip: Callable[[Element], float] | None = None, tol: float = FEASIBILITY_TOL
) -> LeibnizCheck:
    """Both sides of the (2, 0) quasi-Leibniz inequality."""
    if not (is_self_adjoint(a) and is_self_adjoint(b)):
        raise DomainError("quasi-Leibniz check needs self-adjoint arguments")
    lip = lip or (lambda x: lip_norm(x, chain))
    la, lb = lip(a), lip(b)
    lhs = max(lip(jordan(a, b)), lip(lie(a, b)))
    rhs = 2 * (op_norm(a) * lb + op_norm(b) * la)
    return LeibnizCheck(lhs, rhs, lhs <= rhs + tol)


def quasi_leibniz_check(a: Element, b: Element, chain: ChainSpace, lip=None, tol: float = FEASIBILITY_TOL) -> bool:
    return leibniz_sides(a, b, chain, lip, tol).ok


# -- states and the Monge-Kantorovich distance ------------------------------


@dataclass(frozen=True, eq=False)
class State:
    """phi(a) = sum_i Re tr(D_i a_i) with D_i positive and sum_i tr D_i = 1."""

    densities: tuple

    def __call__(self, a: Element) -> float:
        return float(sum(np.trace(d @ x).real for d, x in zip(self.densities, a)))

    @classmethod
    def from_weights(cls, chain: ChainSpace, weights: Sequence[float], densities: Sequence | None = None, tol: float = 1e-9) -> "State":
        """Convex combination of unit-trace densities, one per top block."""
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(chain.blocks),):
            raise DomainError(f"need {len(chain.blocks)} state weights, got {len(w)}")
        if np.any(w < -tol) or abs(w.sum() - 1) > tol:
            raise DomainError("state weights must be non-negative and sum to 1")
        if densities is None:
            densities = [np.eye(d) / d for d in chain.blocks]
        out = []
        for i, (wi, rho, d) in enumerate(zip(w, densities, chain.blocks)):
            rho = np.asarray(rho, dtype=complex)
            if rho.shape != (d, d):
                raise DomainError(f"density {i} has shape {rho.shape}, block is {d}x{d}")
            if np.max(np.abs(rho - rho.conj().T)) > tol or np.linalg.eigvalsh(rho).min() < -tol:
                raise DomainError(f"density {i} is not positive semidefinite")
            if abs(np.trace(rho).real - 1) > tol:
                raise DomainError(f"density {i} does not have trace 1")
            out.append(wi * rho)
        return cls(tuple(out))

    @classmethod
    def tracial(cls, chain: ChainSpace) -> "State":
        return cls.from_weights(chain, chain.trace)

    @classmethod
    def vector(cls, chain: ChainSpace, block: int, v: Sequence[complex]) -> "State":
        v = np.asarray(v, dtype=complex)
        v = v / np.linalg.norm(v)
        dens = [np.eye(d) / d for d in chain.blocks]
        dens[block] = np.outer(v, v.conj())
        w = np.zeros(len(chain.blocks))
        w[block] = 1
        return cls.from_weights(chain, w, dens)


def state_from_json(chain: ChainSpace, text_or_obj) -> State:
    """``{weights: [...], densities: [[[re, ...]...] | null, ...], imag: optional like densities}``."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    if isinstance(obj, list):
        obj = {"weights": obj}
    dens = obj.get("densities")
    if dens is not None:
        imag = obj.get("imag") or [None] * len(dens)
        dens = [
            (np.eye(d) / d if r is None else np.asarray(r, dtype=float) + 1j * (0 if im is None else np.asarray(im, dtype=float)))
            for r, im, d in zip(dens, imag, chain.blocks)
        ]
    return State.from_weights(chain, obj["weights"], dens)


def pullback(phi: State, chain: ChainSpace, n: int) -> State:
    """phi o E_n, a state agreeing with phi on the image of level n."""
    w = chain.weights
    scaled = [d / wi for d, wi in zip(phi.densities, w)]
    e = conditional_expectation(scaled, chain, n)
    return State(tuple(wi * x for wi, x in zip(w, e)))


@dataclass(frozen=True)
class SolverConfig:
    iters: int = 2000
    restarts: int = 4
    seed: int = 0
    step: float = 0.5
    window: int = 300
    tol: float = 1e-9


@dataclass(frozen=True)
class MKResult:
    """``value`` is phi(w) - psi(w) for the feasible witness w, a certified lower bound."""

    value: float
    witness: Element = field(repr=False)
    witness_lip: float
    iterations: int
    stalled: bool

    def __float__(self) -> float:
        return self.value


def _frob(a: Element, b: Element) -> float:
    return float(sum(np.vdot(x, y).real for x, y in zip(a, b)))


def _lip_subgradient(a: Element, chain: ChainSpace) -> tuple[float, Element]:
    """L(a) and one supergradient of it (Frobenius pairing)."""
    best, arg = -1.0, None
    for n in range(chain.depth + 1):
        r = _sub(a, conditional_expectation(a, chain, n))
        for i, x in enumerate(r):
            vals, vecs = np.linalg.eigh(x)
            k = int(np.argmax(np.abs(vals)))
            v = abs(vals[k]) / float(chain.beta[n])
            if v > best:
                best, arg = v, (n, i, np.sign(vals[k]) * np.outer(vecs[:, k], vecs[:, k].conj()))
    n, i, s = arg
    blocks = [np.zeros_like(x) for x in a]
    blocks[i] = s
    # adjoint of I - E_n in the Frobenius pairing is I - W E_n W^{-1}
    w = chain.weights
    e = conditional_expectation([x / wi for x, wi in zip(blocks, w)], chain, n)
    grad = [(x - wi * y) / float(chain.beta[n]) for x, y, wi in zip(blocks, e, w)]
    return best, grad


def _centre(a: Element, chain: ChainSpace) -> Element:
    tr = chain.trace_of(a)
    return [x - tr * np.eye(x.shape[0]) for x in a]


def mk_distance(phi: State, psi: State, chain: ChainSpace, cfg: SolverConfig | None = None) -> MKResult:
    """sup { phi(a) - psi(a) : a self-adjoint, mu(a) = 0, L(a) <= 1 }.

    Seeded supergradient ascent on the ratio (phi - psi)(a) / L(a), which
    is scale invariant, so every iterate rescaled to L = 1 is feasible.
    The first start is the gradient direction itself, the rest random.
    ``stalled`` is set when the last start stopped because ``window``
    iterations passed without improvement rather than on the budget.
    """
    cfg = cfg or SolverConfig()
    g = [(x + x.conj().T) / 2 for x in _sub(list(phi.densities), list(psi.densities))]
    if max(np.max(np.abs(x)) for x in g) < cfg.tol:
        return MKResult(0.0, chain.zero(), 0.0, 0, False)
    rng = np.random.default_rng(cfg.seed)
    best_val, best_a, total, stalled = -np.inf, None, 0, False
    for r in range(max(1, cfg.restarts)):
        a = _centre(g if r == 0 else random_self_adjoint(chain, rng), chain)
        lip, _ = _lip_subgradient(a, chain)
        if lip < cfg.tol:
            continue
        a = [x / lip for x in a]
        run_best, since = -np.inf, 0
        stalled = False
        for k in range(cfg.iters):
            total += 1
            lip, dl = _lip_subgradient(a, chain)
            a = [x / lip for x in a]
            dl = [x * lip for x in dl]
            f = _frob(g, a)
            if f > best_val:
                best_val, best_a = f, [x.copy() for x in a]
            if f > run_best + cfg.tol * max(1.0, abs(run_best) if np.isfinite(run_best) else 1.0):
                run_best, since = f, 0
            else:
                since += 1
                if since >= cfg.window:
                    stalled = True
                    break
            grad = [x - f * y for x, y in zip(g, dl)]
            gn = np.sqrt(_frob(grad, grad))
            if gn < 1e-15:
                break
            an = np.sqrt(_frob(a, a))
            eta = cfg.step / np.sqrt(k + 1)
            a = _centre([x + eta * an / gn * y for x, y in zip(a, grad)], chain)
    if best_a is None:
        return MKResult(0.0, chain.zero(), 0.0, total, stalled)
    lip = lip_norm(best_a, chain)
    if lip > 1:
        best_a = [x / lip for x in best_a]
    value = phi(best_a) - psi(best_a)
    return MKResult(float(value), best_a, lip_norm(best_a, chain), total, stalled)


def commutative_pair_chain(t: float = 0.5, beta0: Fraction = Fraction(1)) -> ChainSpace:
    """C inside C^2 with trace (t, 1 - t)."""
    d = diagram_from_matrices((1,), [MultiplicityMatrix(((1,), (1,)))])
    return ChainSpace(d, (t, 1 - t), (Fraction(beta0), Fraction(1)))
