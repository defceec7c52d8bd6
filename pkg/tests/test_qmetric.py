from fractions import Fraction

import numpy as np
import pytest

from afideal.acceptance import acceptance_chains, theta_chain
from afideal.bratteli import effros_shen_diagram, farey_diagram
from afideal.cf import ContinuedFraction, DomainError, parse_cf
from afideal.qmetric import (
    ChainError,
    SolverConfig,
    State,
    chain_from_diagram,
    chain_from_json,
    commutative_pair_chain,
    conditional_expectation,
    embed,
    is_self_adjoint,
    jordan,
    leibniz_sides,
    lip_norm,
    mk_distance,
    op_norm,
    pullback,
    quasi_leibniz_check,
    random_self_adjoint,
    restrict_to_level,
    state_from_json,
)
from sdp_oracle import mk_sdp

GOLDEN = ContinuedFraction((0,), (1,))
CHAINS = [c for _, c in acceptance_chains()]
IDS = [n for n, _ in acceptance_chains()]


def close(a, b, tol=1e-10):
    return all(np.max(np.abs(x - y), initial=0.0) <= tol for x, y in zip(a, b))


def random_state(chain, rng):
    w = rng.random(len(chain.blocks))
    dens = []
    for d in chain.blocks:
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        r = z @ z.conj().T
        dens.append(r / np.trace(r).real)
    return State.from_weights(chain, w / w.sum(), dens)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


# -- embeddings ---------------------------------------------------------------


def test_scalars_embed_as_identity():
    ch = chain_from_diagram(farey_diagram(3))
    e = embed([np.array([[2.5]])], ch, 0)
    assert close(e, [2.5 * np.eye(d) for d in ch.blocks])


def test_effros_shen_embedding_shape():
    ch = chain_from_diagram(effros_shen_diagram(GOLDEN, 2))
    x, y = 3.0, -1.0
    e = embed([np.array([[x]]), np.array([[y]])], ch, 1)
    assert close(e, [np.diag([x, y]), np.array([[x]])])


@pytest.mark.parametrize("chain", CHAINS, ids=IDS)
def test_embedding_is_isometric_star_homomorphism(chain, rng):
    for _ in range(20):
        n = int(rng.integers(0, chain.depth + 1))
        x, y = random_self_adjoint(chain, rng, n), random_self_adjoint(chain, rng, n)
        ex, ey = embed(x, chain, n), embed(y, chain, n)
        assert abs(op_norm(ex) - op_norm(x)) < 1e-10
        assert close(embed([a @ b for a, b in zip(x, y)], chain, n), [a @ b for a, b in zip(ex, ey)])


# -- conditional expectations -------------------------------------------------


def test_commutative_expectation_closed_form():
    t = 0.3
    ch = commutative_pair_chain(t)
    a = [np.array([[2.0]]), np.array([[5.0]])]
    e = conditional_expectation(a, ch, 0)
    v = t * 2 + (1 - t) * 5
    assert close(e, [np.array([[v]]), np.array([[v]])])


@pytest.mark.parametrize("chain", CHAINS, ids=IDS)
def test_expectation_properties(chain, rng):
    for _ in range(20):
        a = random_self_adjoint(chain, rng)
        for n in range(chain.depth + 1):
            e = conditional_expectation(a, chain, n)
            assert close(conditional_expectation(e, chain, n), e)
            assert abs(chain.trace_of(e) - chain.trace_of(a)) < 1e-10
            assert is_self_adjoint(e, 1e-12)
            # orthogonality against the image of level n in the trace inner product
            b = embed(random_self_adjoint(chain, rng, n), chain, n)
            resid = [x - y for x, y in zip(a, e)]
            ip = sum(t * np.trace(bb.conj().T @ r) / d for t, bb, r, d in zip(chain.trace, b, resid, chain.blocks))
            assert abs(ip) < 1e-10
            assert close(embed(restrict_to_level(a, chain, n), chain, n), e)
            for m in range(chain.depth + 1):
                em = conditional_expectation(e, chain, m)
                assert close(em, conditional_expectation(a, chain, min(n, m)))


@pytest.mark.parametrize("chain", CHAINS, ids=IDS)
def test_expectation_is_positive_and_unital(chain, rng):
    assert close(conditional_expectation(chain.identity(), chain, 0), chain.identity())
    for _ in range(10):
        a = random_self_adjoint(chain, rng)
        p = [x @ x for x in a]
        for n in range(chain.depth + 1):
            assert min(np.linalg.eigvalsh(x).min() for x in conditional_expectation(p, chain, n)) > -1e-10


# -- Lip-norm -----------------------------------------------------------------


def test_lip_commutative_value():
    ch = commutative_pair_chain()
    assert lip_norm([np.array([[1.0]]), np.array([[-1.0]])], ch) == pytest.approx(1.0)
    assert lip_norm(ch.identity(), ch) == 0


@pytest.mark.parametrize("chain", CHAINS, ids=IDS)
def test_lip_homogeneity_zero_set_and_consistency(chain, rng):
    for _ in range(20):
        a = random_self_adjoint(chain, rng)
        lam = float(rng.normal())
        assert lip_norm([lam * x for x in a], chain) == pytest.approx(abs(lam) * lip_norm(a, chain), rel=1e-10)
        la = lip_norm(a, chain)
        for n in range(chain.depth + 1):
            resid = [x - y for x, y in zip(a, conditional_expectation(a, chain, n))]
            assert op_norm(resid) <= float(chain.beta[n]) * la * (1 + 1e-12)
        shifted = [x + 3.0 * np.eye(x.shape[0]) for x in a]
        assert lip_norm(shifted, chain) == pytest.approx(la, rel=1e-10)
        assert lip_norm(embed([np.array([[lam]])], chain, 0), chain) < 1e-9


def test_small_lip_means_scalar(rng):
    ch = CHAINS[2]
    a = random_self_adjoint(ch, rng)
    tiny = [1e-11 * x + 4.0 * np.eye(x.shape[0]) for x in a]
    assert lip_norm(tiny, ch) < 1e-9
    mean = ch.trace_of(tiny)
    assert close(tiny, [mean * np.eye(x.shape[0]) for x in tiny], 1e-8)


# -- quasi-Leibniz ------------------------------------------------------------


@pytest.mark.parametrize("chain", CHAINS, ids=IDS)
def test_quasi_leibniz_random_pairs(chain, rng):
    for _ in range(100):
        a, b = random_self_adjoint(chain, rng), random_self_adjoint(chain, rng)
        assert quasi_leibniz_check(a, b, chain)


def test_quasi_leibniz_identity():
    ch = CHAINS[1]
    r = leibniz_sides(ch.identity(), ch.identity(), ch)
    assert r.ok and r.lhs == 0 and r.rhs == 0


def test_quasi_leibniz_holds_for_increasing_beta(rng):
    ch = chain_from_diagram(effros_shen_diagram(GOLDEN, 3), beta=[1, 2, 4, 8])
    for _ in range(50):
        assert quasi_leibniz_check(random_self_adjoint(ch, rng), random_self_adjoint(ch, rng), ch)


def test_quasi_leibniz_negative_control():
    """A seminorm vanishing on span{1, p} with p^2 outside that span breaks the bound."""
    ch = chain_from_diagram(effros_shen_diagram(GOLDEN, 2))
    p = [np.diag([0.0, 1.0]).astype(complex), np.array([[2.0 + 0j]])]
    one = ch.identity()
    basis = [np.concatenate([x.ravel() for x in v]) for v in (one, p)]
    q, _ = np.linalg.qr(np.stack(basis, axis=1))

    def fake_lip(a):
        v = np.concatenate([x.ravel() for x in a])
        return float(np.linalg.norm(v - q @ (q.conj().T @ v)))

    assert fake_lip(p) < 1e-12 and fake_lip(jordan(p, p)) > 0.1
    r = leibniz_sides(p, p, ch, lip=fake_lip)
    assert not r.ok and r.rhs < 1e-12


def test_quasi_leibniz_rejects_non_self_adjoint():
    ch = CHAINS[1]
    bad = [np.array([[0, 1], [0, 0]], dtype=complex), np.zeros((1, 1), dtype=complex)]
    with pytest.raises(DomainError):
        quasi_leibniz_check(bad, bad, ch)


# -- states and Monge-Kantorovich ---------------------------------------------


def test_state_validation():
    ch = CHAINS[1]
    with pytest.raises(DomainError):
        State.from_weights(ch, [0.5, 0.6])
    with pytest.raises(DomainError):
        State.from_weights(ch, [1, 0], [np.diag([2.0, -1.0]), np.eye(1)])
    with pytest.raises(DomainError):
        State.from_weights(ch, [1, 0], [np.eye(2), np.eye(1)])
    phi = State.tracial(ch)
    assert phi(ch.identity()) == pytest.approx(1.0)


def test_commutative_closed_form():
    ch = commutative_pair_chain()
    res = mk_distance(State.from_weights(ch, [1, 0]), State.from_weights(ch, [0, 1]), ch)
    assert abs(res.value - 2) < 1e-6
    assert res.witness_lip <= 1 + 1e-9


@pytest.mark.parametrize("b0", [Fraction(1, 3), Fraction(2), Fraction(5, 7)])
def test_commutative_closed_form_scales_with_beta(b0):
    ch = commutative_pair_chain(0.25, b0)
    phi, psi = State.from_weights(ch, [0.9, 0.1]), State.from_weights(ch, [0.2, 0.8])
    # |phi(a) - psi(a)| = 0.7 |x - y| and L(a) = |x - y| max(t, 1 - t) / beta(0)
    expected = 0.7 * float(b0) / 0.75
    assert mk_distance(phi, psi, ch).value == pytest.approx(expected, abs=1e-6)


def test_identical_states_are_at_distance_zero(rng):
    ch = CHAINS[2]
    phi = random_state(ch, rng)
    assert mk_distance(phi, phi, ch).value == 0


@pytest.mark.parametrize("chain", CHAINS[1:], ids=IDS[1:])
def test_solver_against_sdp(chain, rng):
    cfg = SolverConfig()
    for _ in range(2):
        phi, psi = random_state(chain, rng), random_state(chain, rng)
        res = mk_distance(phi, psi, chain, cfg)
        exact = mk_sdp(phi, psi, chain)
        assert res.witness_lip <= 1 + 1e-9
        assert res.value <= exact + 1e-6
        assert res.value >= 0.97 * exact


@pytest.mark.parametrize("chain", CHAINS, ids=IDS)
def test_states_agreeing_on_a_level(chain, rng):
    cfg = SolverConfig(iters=400, restarts=2, window=100)
    for n in range(chain.depth):
        phi = random_state(chain, rng)
        psi = pullback(phi, chain, n)
        b = embed(random_self_adjoint(chain, rng, n), chain, n)
        assert phi(b) == pytest.approx(psi(b), abs=1e-10)
        assert mk_distance(phi, psi, chain, cfg).value <= 2 * float(chain.beta[n]) + 1e-6


def test_pseudometric_on_state_triples(rng):
    ch = CHAINS[1]
    cfg = SolverConfig()
    for _ in range(3):
        s = [random_state(ch, rng) for _ in range(3)]
        exact = {(i, j): mk_sdp(s[i], s[j], ch) for i in range(3) for j in range(3) if i != j}
        d = {k: mk_distance(s[k[0]], s[k[1]], ch, cfg).value for k in exact}
        tol = max(abs(d[k] - exact[k]) for k in exact) + 1e-6
        assert abs(d[0, 1] - d[1, 0]) <= tol
        assert d[0, 2] <= d[0, 1] + d[1, 2] + 2 * tol


def test_solver_is_deterministic(rng):
    ch = CHAINS[3]
    phi, psi = random_state(ch, rng), random_state(ch, rng)
    cfg = SolverConfig(iters=200, restarts=2)
    assert mk_distance(phi, psi, ch, cfg).value == mk_distance(phi, psi, ch, cfg).value


# -- construction errors and JSON ---------------------------------------------


def test_chain_validation():
    d = farey_diagram(2)
    with pytest.raises(ChainError, match="faithful"):
        chain_from_diagram(d, trace=[0.5, 0.5, 0.0])
    with pytest.raises(ChainError, match="sum"):
        chain_from_diagram(d, trace=[0.5, 0.5, 0.5])
    with pytest.raises(ChainError, match="beta"):
        chain_from_diagram(d, beta=[1, 1])
    with pytest.raises(ChainError):
        embed([np.eye(2)], chain_from_diagram(d), 0)


def test_chain_and_states_from_json():
    ch = chain_from_json('{"blocks": [[1], [1, 1]], "matrices": [[[1], [1]]], "trace": ["1/2", "1/2"], "beta": ["1", "1"]}')
    assert ch.blocks == (1, 1) and ch.beta == (1, 1)
    phi = state_from_json(ch, {"weights": [1, 0]})
    psi = state_from_json(ch, '{"weights": [0, 1], "densities": [[[1]], null]}')
    assert mk_distance(phi, psi, ch).value == pytest.approx(2, abs=1e-6)
    with pytest.raises(ChainError):
        chain_from_json({"blocks": [[1]]})


def test_theta_chain_uses_trace_coefficient():
    ch = theta_chain(parse_cf("0;2,(1)"), 3)
    assert ch.blocks == (3, 2) and ch.dimension == 13
    assert ch.beta == (1, Fraction(1, 2), Fraction(1, 5), Fraction(1, 13))
    assert 0 < ch.trace[0] < 1
