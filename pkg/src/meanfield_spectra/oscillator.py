"""Matrix elements in the harmonic-oscillator eigenbasis.

The basis diagonalizes ``-(hbar^2/2mu) d^2/dx^2 + (mu omega^2/2) x^2`` and
position acts as ``x = sqrt(hbar/(2 mu omega)) (a + a^dagger)``.  Truncated
operators built from these matrices give Rayleigh-Ritz upper bounds for
polynomial Schroedinger operators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["OscillatorBasis", "kinetic_matrix", "position_power_matrix", "boundary_mask"]

MAX_POWER = 8


@dataclass(frozen=True)
class OscillatorBasis:
    size: int
    mu: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ValueError("basis size must be a positive integer")
        if self.mu <= 0 or self.omega <= 0 or self.hbar <= 0:
            raise ValueError("mu, omega and hbar must be positive")

    @property
    def length(self) -> float:
        """``sqrt(hbar / (2 mu omega))``, the prefactor of ``a + a^dagger``."""
        return float(np.sqrt(self.hbar / (2.0 * self.mu * self.omega)))

    def resized(self, size: int) -> "OscillatorBasis":
        return OscillatorBasis(size, self.mu, self.omega, self.hbar)


def _symmetrize(a):
    # (a + a.T)/2 is bitwise symmetric since float addition commutes
    return 0.5 * (a + a.T)


def kinetic_matrix(basis: OscillatorBasis) -> np.ndarray:
    """``<psi_n, -hbar^2 psi_m''>``: diagonal plus the ``|n - m| = 2`` bands."""
    n = np.arange(basis.size, dtype=float)
    scale = 0.5 * basis.hbar * basis.mu * basis.omega
    K = np.diag(scale * (2 * n + 1))
    if basis.size > 2:
        off = -scale * np.sqrt((n[:-2] + 1) * (n[:-2] + 2))
        K += np.diag(off, 2) + np.diag(off, -2)
    return _symmetrize(K)


def _position(size, length):
    off = length * np.sqrt(np.arange(1, size, dtype=float))
    return np.diag(off, 1) + np.diag(off, -1)


def position_power_matrix(basis: OscillatorBasis, k: int, exact: bool = True) -> np.ndarray:
    """``<psi_n, x^k psi_m>`` for ``0 <= k <= 8``.

    With ``exact=True`` the ladder products are formed in a basis enlarged by
    ``k`` states and then cut back, so every returned entry is the exact
    matrix element.  ``exact=False`` multiplies truncated matrices; the last
    ``k`` rows and columns are then unreliable (see :func:`boundary_mask`).
    """
    if int(k) != k or k < 0 or k > MAX_POWER:
        raise ValueError(f"power must be an integer in [0, {MAX_POWER}]")
    size = basis.size
    if k == 0:
        return np.eye(size)
    big = size + k if exact else size
    X = _position(big, basis.length)
    P = X.copy()
    for _ in range(k - 1):
        P = P @ X
    return _symmetrize(P[:size, :size])


def boundary_mask(basis: OscillatorBasis, k: int) -> np.ndarray:
    """Boolean mask of entries touched by truncation in the naive product."""
    bad = np.zeros(basis.size, dtype=bool)
    bad[max(0, basis.size - k):] = True
    return bad[:, None] | bad[None, :]
