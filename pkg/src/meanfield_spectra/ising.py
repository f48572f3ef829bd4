"""Exact spectral gaps of the mean-field Ising generator.

The generator is specified by its Dirichlet form with respect to the Gibbs
measure ``rho`` on ``{-1, 1}^N``,

    E(f) = beta^{-1} sum_sigma rho(sigma) sum_x (f(sigma) - f(sigma^x))^2,

with ``sigma^x`` the configuration with spin ``x`` flipped.  Restricted to
functions of the mean spin it becomes a birth-death chain on the ``N + 1``
magnetization levels, which is what makes ``N ~ 10^5`` tractable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh
from scipy.special import gammaln, logsumexp

from .chain import ReversibleChain, chain_log_gap, log_rayleigh_monotone
from .potential import ModelParams, RegimeError, critical_field, ising_roots
from .specialfn import digamma

__all__ = [
    "MagnetizationChain",
    "GapEstimate",
    "full_gap",
    "chain_gap",
    "trial_rayleigh",
    "zeta_log_derivative",
    "eta_argmax",
    "FourierReport",
    "fourier_parts",
    "fourier_subspace_check",
    "GAP_CSV_COLUMNS",
    "gap_row",
]

FULL_MAX_N = 12
_LEVEL_TOL = 1e-12


@dataclass(frozen=True)
class GapEstimate:
    N: int
    beta: float
    h: float
    method: str  # full_exact, chain_exact, trial_upper, schrodinger, bound
    log_gap: float
    detail: str = ""

    @property
    def gap(self) -> float:
        return float(np.exp(self.log_gap))

    @property
    def log_gap_over_N(self) -> float:
        return self.log_gap / self.N


@dataclass(frozen=True)
class MagnetizationChain:
    """Birth-death chain on levels ``i = -1, -1 + 2/N, ..., 1``."""

    N: int
    beta: float
    h: float = 0.0
    up_counts: np.ndarray = field(init=False, repr=False)
    levels: np.ndarray = field(init=False, repr=False)
    log_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        N = int(self.N)
        k = np.arange(N + 1)
        # (2k - N)/N is exactly antisymmetric under k -> N - k
        i = (2 * k - N) / N
        logc = gammaln(N + 1.0) - (gammaln(k + 1.0) + gammaln(N - k + 1.0))
        logw = logc - 0.5 * N * self.beta * (1.0 - i * i) + N * self.h * i
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "up_counts", k)
        object.__setattr__(self, "levels", i)
        object.__setattr__(self, "log_weights", logw)

    @property
    def log_pi(self) -> np.ndarray:
        """Normalized log stationary distribution on levels."""
        return self.log_weights - logsumexp(self.log_weights)

    def log_conductances(self) -> np.ndarray:
        """``log beta^{-1} (pi_i (N - k_i) + pi_{i+1} k_{i+1})`` per edge."""
        lp = self.log_pi
        k = self.up_counts
        with np.errstate(divide="ignore"):
            fwd = lp[:-1] + np.log(self.N - k[:-1])
            bwd = lp[1:] + np.log(k[1:])
        return np.logaddexp(fwd, bwd) - np.log(self.beta)

    def reversible_chain(self) -> ReversibleChain:
        return ReversibleChain(self.log_pi, self.log_conductances())

    def detailed_balance_residual(self) -> float:
        """Max of ``|log(pi_i q_{i,i+1}) - log(pi_{i+1} q_{i+1,i})|``."""
        ch = self.reversible_chain()
        up, down = ch.rates()
        lhs = self.log_pi[:-1] + np.log(up)
        rhs = self.log_pi[1:] + np.log(down)
        return float(np.max(np.abs(lhs - rhs)))


def chain_gap(N: int, beta: float, h: float = 0.0) -> GapEstimate:
    """Gap of the generator restricted to functions of the mean spin."""
    ch = MagnetizationChain(N, beta, h)
    lg, how = chain_log_gap(ch.reversible_chain())
    return GapEstimate(ch.N, beta, h, "chain_exact", lg, how)


def _configurations(N):
    return np.array(list(itertools.product((-1, 1), repeat=N)), dtype=np.int8)


def full_gap(N: int, beta: float, h: float = 0.0) -> GapEstimate:
    """Gap of the generator on all ``2^N`` configurations (``N <= 12``)."""
    if N > FULL_MAX_N:
        raise ValueError(f"full diagonalization is limited to N <= {FULL_MAX_N}")
    if N < 1:
        raise ValueError("N must be a positive integer")
    states = _configurations(N)
    m = states.sum(axis=1) / N
    logrho = 0.5 * N * beta * m * m + N * h * m
    rho = np.exp(logrho - logrho.max())
    idx = np.arange(2 ** N)
    rows, cols, vals = [], [], []
    for x in range(N):
        # spins are enumerated with site 0 as the most significant bit
        partner = idx ^ (1 << (N - 1 - x))
        c = (rho + rho[partner]) / beta
        rows.append(idx)
        cols.append(partner)
        vals.append(-c)
    off = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                            shape=(2 ** N, 2 ** N))
    diag = -np.asarray(off.sum(axis=1)).ravel()
    Q = off + sparse.diags(diag)
    s = 1.0 / np.sqrt(rho)
    S = sparse.diags(s) @ Q @ sparse.diags(s)
    if 2 ** N <= 256:
        ev = np.linalg.eigvalsh(S.toarray())
    else:
        v0 = np.random.default_rng(0).random(2 ** N)  # fixed start for reproducibility
        ev = np.sort(eigsh(S.tocsr(), k=4, which="SA", tol=0, v0=v0,
                           return_eigenvectors=False))
    if abs(ev[0]) > 1e-9 * max(1.0, abs(ev[-1])):
        raise RuntimeError(f"constants are not in the kernel (lowest eigenvalue {ev[0]:.3e})")
    return GapEstimate(N, beta, h, "full_exact", float(np.log(ev[1])), "2^N")


def _trial_increments(ch: MagnetizationChain, roots):
    """Log of ``|g(i_{j+1}) - g(i_j)|`` for the staircase trial function."""
    i = ch.levels
    inv = -ch.log_weights
    if ch.h == 0.0:
        gamma3 = roots[-1]
        # g(m) = sum_{0 <= i <= m, i <= gamma3} 1/eta(i): jump at level j+1
        inside = (i >= -_LEVEL_TOL) & (i <= gamma3 + _LEVEL_TOL)
    else:
        gamma1, gamma3 = roots[0], roots[-1]
        # g(m) = sum_{m < i < gamma3, i >= gamma1} 1/eta(i): jump at level j+1
        inside = (i >= gamma1 - _LEVEL_TOL) & (i < gamma3 - _LEVEL_TOL)
    step = np.where(inside[1:], inv[1:], -np.inf)
    return step


def trial_rayleigh(N: int, beta: float, h: float = 0.0) -> GapEstimate:
    """Rayleigh quotient of the staircase trial function (upper bound on the gap)."""
    if beta <= 1 or h < 0 or h >= critical_field(beta):
        raise RegimeError("trial staircase needs beta > 1 and 0 <= h < h_c(beta)")
    roots = ising_roots(beta, h)
    if len(roots) < 3:
        raise RegimeError("double well not resolved")
    ch = MagnetizationChain(N, beta, h)
    log_inc = _trial_increments(ch, roots)
    if not np.any(np.isfinite(log_inc)):
        raise RegimeError("trial function vanishes on every level")
    lr = log_rayleigh_monotone(ch.reversible_chain(), log_inc)
    return GapEstimate(ch.N, beta, h, "trial_upper", lr, "staircase")


def zeta_log_derivative(N: float, beta: float, h: float, s):
    """Exact ``d/ds log eta_{N,h}(s)`` with ``eta`` continued through Gamma functions."""
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) >= 1):
        raise ValueError("s must lie in (-1, 1)")
    out = N * (beta * s + h) - 0.5 * N * (digamma(1 + 0.5 * N * (1 + s))
                                           - digamma(1 + 0.5 * N * (1 - s)))
    return out[()] if out.ndim == 0 else out


def eta_argmax(N: int, beta: float, h: float = 0.0) -> float:
    """Level maximizing ``eta_{N,h}``; ties (``h = 0``) resolved to the positive side."""
    ch = MagnetizationChain(N, beta, h)
    lw = ch.log_weights
    j = lw.size - 1 - int(np.argmax(lw[::-1]))
    return float(ch.levels[j])


# -- Fourier subspaces ----------------------------------------------------------

@dataclass(frozen=True)
class FourierReport:
    N: int
    beta: float
    k: int
    trials: int
    max_ratio: float       # max of Var_nu(E_mu f) / ((N/(4k)) E(f))
    max_ratio_k2: float    # same against the N/(4k^2) constant
    passed: bool


def _walsh(states, S):
    if len(S) == 0:
        return np.ones(states.shape[0])
    return np.prod(states[:, list(S)].astype(float), axis=1)


def fourier_parts(N: int, beta: float, coeffs: dict):
    """Both sides of the fixed-degree inequality for ``f = sum coeffs[S] chi_S``.

    Returns ``(var_nu_mean, dirichlet)`` where ``var_nu_mean`` is
    ``Var_{nu_N}(E_{mu_phi} f)`` and ``dirichlet`` is
    ``sum_x E_rho |f - f o flip_x|^2``.
    """
    from .measures import RenormalizedMeasure

    states = _configurations(N)
    f = np.zeros(states.shape[0])
    for S, c in coeffs.items():
        f += c * _walsh(states, S)
    m = states.sum(axis=1) / N
    logrho = 0.5 * N * beta * m * m
    rho = np.exp(logrho - logsumexp(logrho))
    idx = np.arange(2 ** N)
    dirichlet = 0.0
    for x in range(N):
        partner = idx ^ (1 << (N - 1 - x))
        dirichlet += float(np.sum(rho * (f - f[partner]) ** 2))

    nu = RenormalizedMeasure(ModelParams(1, beta, 0.0), N)
    b = beta
    degrees = {}
    for S, c in coeffs.items():
        degrees[len(S)] = degrees.get(len(S), 0.0) + c

    def mean_f(t):
        th = np.tanh(b * t)
        return sum(c * th ** d for d, c in degrees.items())

    return nu.variance(mean_f), dirichlet


def fourier_subspace_check(N: int, beta: float, k: int, trials: int = 20,
                           seed: int = 0) -> FourierReport:
    """Random functions supported on ``|S| = k``: compare both sides of the bound."""
    if N > FULL_MAX_N:
        raise ValueError(f"N <= {FULL_MAX_N} required")
    if beta < 1:
        raise RegimeError("the fixed-degree bound is stated for beta >= 1")
    rng = np.random.default_rng(seed)
    subsets = list(itertools.combinations(range(N), k))
    worst, worst2 = 0.0, 0.0
    for _ in range(trials):
        c = rng.standard_normal(len(subsets))
        lhs, dirichlet = fourier_parts(N, beta, dict(zip(subsets, c)))
        if k == 0:
            continue
        worst = max(worst, lhs / (N / (4 * k) * dirichlet))
        worst2 = max(worst2, lhs / (N / (4 * k * k) * dirichlet))
    return FourierReport(N, beta, k, trials, worst, worst2, worst <= 1.0 + 1e-9)


GAP_CSV_COLUMNS = ("N", "beta", "h", "method", "gap", "log_gap_over_N")


def gap_row(est: GapEstimate) -> tuple:
    return (est.N, est.beta, est.h, est.method, est.gap, est.log_gap_over_N)
