"""Spectra of one-dimensional reversible (birth-death) chains in log domain.

A chain is given by log masses ``log pi_i`` on nodes and log conductances
``log c_e`` on the edges ``(i, i+1)``; its Dirichlet form and mass are

    E(g) = sum_e c_e (g_{e+1} - g_e)^2,     |g|^2 = sum_i pi_i g_i^2,

optionally plus a killing term ``sum_i pi_i k_i g_i^2``.  The same structure
covers the magnetization chain of the Ising model, finite-difference
discretizations of ``-(1/w)(w u')'`` on a line or half-line, and radial
sectors of Schroedinger operators.

Gaps that are exponentially small compared to the matrix norm cannot be
resolved by an eigensolver working on the symmetrized matrix.  For those the
largest eigenvalue of the inverse edge operator is computed instead:

    K^{-1}_{ee'} = F_{min(e,e')} (1 - F_{max(e,e')}) / sqrt(c_e c_e'),

with ``F`` the cumulative mass.  The kernel is entrywise positive and
semiseparable, so a log-domain power iteration costs O(n) per step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import logsumexp

__all__ = ["ReversibleChain", "chain_eigenvalues", "chain_log_gap", "log_rayleigh_monotone"]

# below this ratio gap/||A|| the tridiagonal eigenvalue is not trusted
_RESOLVE_RATIO = 1e-7


@dataclass(frozen=True)
class ReversibleChain:
    log_mass: np.ndarray
    log_cond: np.ndarray
    killing: np.ndarray | None = None

    def __post_init__(self):
        lm = np.asarray(self.log_mass, dtype=float)
        lc = np.asarray(self.log_cond, dtype=float)
        if lc.shape != (lm.size - 1,):
            raise ValueError("need one conductance per edge (len(log_mass) - 1)")
        if not np.all(np.isfinite(lm)):
            raise ValueError("log masses must be finite")
        object.__setattr__(self, "log_mass", lm)
        object.__setattr__(self, "log_cond", lc)
        if self.killing is not None:
            object.__setattr__(self, "killing", np.asarray(self.killing, dtype=float))

    @property
    def size(self) -> int:
        return self.log_mass.size

    def tridiagonal(self):
        """Diagonal and off-diagonal of ``Pi^{-1/2} (grad^T C grad + Pi K) Pi^{-1/2}``."""
        lm, lc = self.log_mass, self.log_cond
        up = np.exp(lc - lm[:-1])  # rate i -> i+1
        down = np.exp(lc - lm[1:])  # rate i+1 -> i
        diag = np.zeros(self.size)
        diag[:-1] += up
        diag[1:] += down
        if self.killing is not None:
            diag = diag + self.killing
        off = -np.exp(lc - 0.5 * (lm[:-1] + lm[1:]))
        return diag, off

    def rates(self):
        """Jump rates ``(i -> i+1, i+1 -> i)`` implied by the conductances."""
        return (np.exp(self.log_cond - self.log_mass[:-1]),
                np.exp(self.log_cond - self.log_mass[1:]))

    def dirichlet_form(self, g) -> float:
        g = np.asarray(g, dtype=float)
        c = np.exp(self.log_cond - logsumexp(self.log_mass))
        val = float(np.sum(c * np.diff(g) ** 2))
        if self.killing is not None:
            p = np.exp(self.log_mass - logsumexp(self.log_mass))
            val += float(np.sum(p * self.killing * g * g))
        return val


def chain_eigenvalues(chain: ReversibleChain, k: int) -> np.ndarray:
    """Lowest ``k`` eigenvalues of the generalized problem ``E(g) = lam |g|^2``."""
    k = min(k, chain.size)
    diag, off = chain.tridiagonal()
    if chain.size == 1:
        return diag.copy()
    return eigh_tridiagonal(diag, off, eigvals_only=True,
                            select="i", select_range=(0, k - 1))


def _log_cumsum(a):
    return np.logaddexp.accumulate(a)


def _log_tails(log_mass):
    """Normalized log masses and log ``F_e``, ``1 - F_e`` per edge."""
    log_z = logsumexp(log_mass)
    lm = log_mass - log_z
    logF = _log_cumsum(lm)[:-1]
    # tail mass computed directly from the upper sum, no 1 - F cancellation
    logG = _log_cumsum(lm[::-1])[::-1][1:]
    return log_z, logF, logG


def _log_kernel_apply(logF, logG, lw):
    """``log sum_e' F_min(e,e') G_max(e,e') w_e'`` for positive ``w = exp(lw)``."""
    left = _log_cumsum(logF + lw)
    right_incl = _log_cumsum((logG + lw)[::-1])[::-1]
    right = np.concatenate([right_incl[1:], [-np.inf]])
    return np.logaddexp(logG + left, logF + right)


def _log_green_gap(chain: ReversibleChain, tol=1e-13, max_iter=5000):
    """``log`` of the spectral gap via power iteration on the inverse edge operator."""
    log_z, logF, logG = _log_tails(chain.log_mass)
    # unit total mass multiplies every eigenvalue by Z; undone here
    lc = chain.log_cond - log_z
    log_a = -0.5 * lc

    lv = np.zeros(lc.size)
    prev = None
    for _ in range(max_iter):
        ly = log_a + _log_kernel_apply(logF, logG, log_a + lv)
        log_rq = logsumexp(lv + ly) - logsumexp(2 * lv)
        lv = ly - np.max(ly)
        if prev is not None and abs(log_rq - prev) < tol * max(1.0, abs(log_rq)):
            return -log_rq, True
        prev = log_rq
    return -prev, False


def log_rayleigh_monotone(chain: ReversibleChain, log_increments) -> float:
    """``log(E(g) / Var(g))`` for a monotone ``g`` given by its log increments.

    ``g_{e+1} - g_e = exp(log_increments[e]) >= 0`` (``-inf`` for flat edges).
    The variance is ``sum_{e,e'} D_e D_e' F_min G_max``, a sum of positive
    terms, so both numerator and denominator stay in log domain.
    """
    ld = np.asarray(log_increments, dtype=float)
    if ld.shape != chain.log_cond.shape:
        raise ValueError("one increment per edge required")
    log_z, logF, logG = _log_tails(chain.log_mass)
    log_e = logsumexp(chain.log_cond - log_z + 2 * ld)
    live = np.isfinite(ld)
    if not np.any(live):
        raise ValueError("constant function has zero variance")
    log_var = logsumexp(ld[live] + _log_kernel_apply(logF, logG, ld)[live])
    return float(log_e - log_var)


def chain_log_gap(chain: ReversibleChain):
    """Natural log of the smallest nonzero eigenvalue of a conservative chain.

    Returns ``(log_gap, method)`` where method is ``"tridiagonal"`` or
    ``"green"`` (log-domain inverse power iteration used when the gap is
    below the resolution of the direct eigensolver).
    """
    if chain.killing is not None:
        raise ValueError("gap of a chain with killing: use chain_eigenvalues")
    if chain.size < 2:
        raise ValueError("chain needs at least two states")
    diag, off = chain.tridiagonal()
    lam = chain_eigenvalues(chain, 2)
    scale = np.max(np.abs(diag)) + 2 * np.max(np.abs(off))
    if lam[1] > _RESOLVE_RATIO * scale:
        return float(np.log(lam[1])), "tridiagonal"
    log_gap, ok = _log_green_gap(chain)
    if not ok:
        raise RuntimeError("log-domain power iteration did not converge")
    return float(log_gap), "green"
