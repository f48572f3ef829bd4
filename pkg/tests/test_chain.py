import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from meanfield_spectra.chain import (
    ReversibleChain,
    _log_green_gap,
    chain_eigenvalues,
    chain_log_gap,
    log_rayleigh_monotone,
)


def dense_problem(chain):
    """Stiffness and mass matrices of the chain, built entry by entry."""
    n = chain.size
    pi = np.exp(chain.log_mass)
    c = np.exp(chain.log_cond)
    A = np.zeros((n, n))
    for e in range(n - 1):
        A[e, e] += c[e]
        A[e + 1, e + 1] += c[e]
        A[e, e + 1] -= c[e]
        A[e + 1, e] -= c[e]
    if chain.killing is not None:
        A += np.diag(pi * chain.killing)
    return A, np.diag(pi)


def random_chain(seed, n, spread=2.0):
    rng = np.random.default_rng(seed)
    return ReversibleChain(spread * rng.normal(size=n), spread * rng.normal(size=n - 1))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(2, 40))
def test_tridiagonal_matches_dense_generalized(seed, n):
    ch = random_chain(seed, n)
    A, M = dense_problem(ch)
    ref = linalg.eigh(A, M, eigvals_only=True)
    k = min(4, n)
    got = chain_eigenvalues(ch, k)
    np.testing.assert_allclose(got, ref[:k], rtol=1e-8, atol=1e-10 * ref[-1])


def test_zero_mode_without_killing():
    ch = random_chain(3, 25)
    lam = chain_eigenvalues(ch, 1)
    assert abs(lam[0]) < 1e-10 * np.max(chain_eigenvalues(ch, 25))


def test_killing_lifts_zero_mode():
    ch = random_chain(4, 10)
    killed = ReversibleChain(ch.log_mass, ch.log_cond, killing=np.full(10, 0.5))
    A, M = dense_problem(killed)
    ref = linalg.eigh(A, M, eigvals_only=True)
    np.testing.assert_allclose(chain_eigenvalues(killed, 3), ref[:3], rtol=1e-10)
    assert ref[0] >= 0.5 - 1e-12
    with pytest.raises(ValueError):
        chain_log_gap(killed)


def test_validation():
    with pytest.raises(ValueError):
        ReversibleChain(np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        ReversibleChain(np.array([0.0, np.inf]), np.zeros(1))
    with pytest.raises(ValueError):
        chain_log_gap(ReversibleChain(np.zeros(1), np.zeros(0)))


def test_two_state_gap():
    # E(g) = c (g1-g0)^2, Var = p0 p1 (g1-g0)^2 with unit mass -> gap = c / (p0 p1)
    p0, p1, c = 0.3, 0.7, 0.05
    ch = ReversibleChain(np.log([p0, p1]), np.log([c]))
    lg, how = chain_log_gap(ch)
    assert how == "tridiagonal"
    assert np.exp(lg) == pytest.approx(c / (p0 * p1), rel=1e-12)


def double_well_chain(depth, n=401):
    x = np.linspace(-1.5, 1.5, n)
    V = depth * (x * x - 1) ** 2
    lm = -V
    lc = -0.5 * (V[:-1] + V[1:])
    return ReversibleChain(lm, lc)


@pytest.mark.parametrize("depth", [1.0, 4.0, 8.0])
def test_green_iteration_matches_eigensolver(depth):
    ch = double_well_chain(depth)
    A, M = dense_problem(ch)
    ref = linalg.eigh(A, M, eigvals_only=True)[1]
    lg, ok = _log_green_gap(ch)
    assert ok
    assert lg == pytest.approx(np.log(ref), abs=1e-8)


def test_green_path_for_tiny_gaps():
    # the barrier is large enough that the tridiagonal solver cannot resolve the gap
    ch = double_well_chain(60.0)
    lg, how = chain_log_gap(ch)
    assert how == "green"
    # exp(-depth) Arrhenius scaling: compare two depths
    lg2, _ = chain_log_gap(double_well_chain(70.0))
    assert (lg - lg2) == pytest.approx(10.0, rel=0.05)


def test_green_is_invariant_to_mass_normalization():
    ch = double_well_chain(30.0)
    shifted = ReversibleChain(ch.log_mass + 500.0, ch.log_cond + 500.0)
    assert _log_green_gap(ch)[0] == pytest.approx(_log_green_gap(shifted)[0], abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(3, 30))
def test_monotone_rayleigh_matches_direct(seed, n):
    ch = random_chain(seed, n, spread=1.0)
    rng = np.random.default_rng(seed + 1)
    inc = rng.exponential(size=n - 1)
    inc[rng.random(n - 1) < 0.3] = 0.0
    if not np.any(inc > 0):
        inc[0] = 1.0
    g = np.concatenate([[0.0], np.cumsum(inc)])
    p = np.exp(ch.log_mass)
    p /= p.sum()
    c = np.exp(ch.log_cond) / np.exp(ch.log_mass).sum()
    direct = np.sum(c * np.diff(g) ** 2) / (np.sum(p * g * g) - np.sum(p * g) ** 2)
    with np.errstate(divide="ignore"):
        lr = log_rayleigh_monotone(ch, np.log(inc))
    assert np.exp(lr) == pytest.approx(direct, rel=1e-9)
    # any trial function bounds the gap from above
    assert np.exp(lr) >= chain_eigenvalues(ch, 2)[1] * (1 - 1e-9)


def test_rayleigh_rejects_constants():
    ch = random_chain(0, 5)
    with pytest.raises(ValueError):
        log_rayleigh_monotone(ch, np.full(4, -np.inf))


def test_dirichlet_form_normalized():
    ch = random_chain(5, 6)
    g = np.arange(6.0)
    c = np.exp(ch.log_cond) / np.exp(ch.log_mass).sum()
    assert ch.dirichlet_form(g) == pytest.approx(np.sum(c), rel=1e-12)
