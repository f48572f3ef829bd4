"""Special functions used by the renormalized potentials.

Modified Bessel ratios are evaluated by a continued fraction so that no
quotient of two separately computed (and possibly overflowing) Bessel values
is ever formed.  Digamma and trigamma use upward recurrence followed by the
Stirling-type asymptotic series.
"""

from __future__ import annotations

import numpy as np
from scipy import special

__all__ = [
    "bessel_ratio",
    "log_bessel_i",
    "log_bessel_normalized",
    "digamma",
    "trigamma",
]

_CF_TOL = 1e-15
_TINY = 1e-300

# Bernoulli numbers B_2 .. B_12
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730)


def _check_order_arg(nu, x):
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(nu < -0.5):
        raise ValueError("Bessel order must satisfy nu >= -1/2")
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("Bessel argument must be >= 0")
    return nu, x


def bessel_ratio(nu, x, tol: float = _CF_TOL):
    """Ratio ``I_{nu+1}(x) / I_nu(x)`` by the backward continued fraction.

    Uses the modified Lentz algorithm on

        r = 1 / (2(nu+1)/x + 1 / (2(nu+2)/x + 1 / (2(nu+3)/x + ...)))

    which follows from the three-term recurrence of ``I_nu``.  Works
    elementwise on arrays; ``x = 0`` gives 0.

    Parameters
    ----------
    nu : float or array_like
        Order, ``nu >= -1/2``.
    x : float or array_like
        Argument, ``x >= 0``.

    Returns
    -------
    float or ndarray
        The ratio, in ``[0, 1)``.
    """
    nu, x = _check_order_arg(nu, x)
    nu_b, x_b = np.broadcast_arrays(nu, x)
    shape = x_b.shape
    nu_f = nu_b.ravel().astype(float)
    x_f = x_b.ravel().astype(float)
    out = np.zeros_like(x_f)

    live = x_f > 0
    if np.any(live):
        xs = x_f[live]
        ns = nu_f[live]
        f = np.full_like(xs, _TINY)
        c = f.copy()
        d = np.zeros_like(xs)
        active = np.ones(xs.shape, dtype=bool)
        # the fraction needs roughly x terms to converge once x >> nu
        max_iter = int(np.max(xs) * 2.0 + np.max(ns) + 5000)
        for j in range(1, max_iter):
            b = 2.0 * (ns[active] + j) / xs[active]
            dj = b + d[active]
            dj = np.where(dj == 0, _TINY, dj)
            dj = 1.0 / dj
            cj = b + 1.0 / c[active]
            cj = np.where(cj == 0, _TINY, cj)
            delta = cj * dj
            f[active] *= delta
            c[active] = cj
            d[active] = dj
            done = np.abs(delta - 1.0) < tol
            if np.all(done):
                active[active] = False
                break
            idx = np.flatnonzero(active)
            active[idx[done]] = False
        else:
            raise RuntimeError("Bessel ratio continued fraction did not converge")
        out[live] = f
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out


def log_bessel_i(nu, x):
    """``log I_nu(x)`` computed from the exponentially scaled Bessel function.

    No overflow occurs for large ``x``; ``log I_nu(0)`` is 0 for ``nu = 0``
    and ``-inf`` for ``nu > 0``.
    """
    nu, x = _check_order_arg(nu, x)
    with np.errstate(divide="ignore"):
        out = np.log(special.ive(nu, x)) + x
    return out[()] if np.ndim(out) == 0 else out


def log_bessel_normalized(nu, x):
    """``log(Gamma(nu+1) (2/x)^nu I_nu(x))``, the angular average on a sphere.

    This is the quantity entering the renormalized potential: with
    ``nu = n/2 - 1`` it equals ``log E[exp(<z, sigma>)]`` for ``sigma``
    uniform on ``S^{n-1}`` and ``|z| = x``.  It vanishes at ``x = 0`` and
    its derivative in ``x`` is ``bessel_ratio(nu, x)``.
    """
    nu, x = _check_order_arg(nu, x)
    nu_b, x_b = np.broadcast_arrays(nu, x)
    out = np.empty(x_b.shape, dtype=float)
    small = x_b < 1e-3
    if np.any(small):
        z2 = x_b[small] ** 2
        n1 = nu_b[small] + 1.0
        n2 = nu_b[small] + 2.0
        n3 = nu_b[small] + 3.0
        series = (z2 / (4 * n1) + z2 ** 2 / (32 * n1 * n2)
                  + z2 ** 3 / (384 * n1 * n2 * n3))
        out[small] = np.log1p(series)
    big = ~small
    if np.any(big):
        xb = x_b[big]
        nb = nu_b[big]
        out[big] = (np.log(special.ive(nb, xb)) + xb
                    + special.gammaln(nb + 1.0) - nb * np.log(xb / 2.0))
    return out[()] if out.ndim == 0 else out


def _shift_count(s):
    return np.maximum(0, np.ceil(10.0 - s)).astype(int)


def digamma(s):
    """Digamma ``psi(s) = d/ds log Gamma(s)`` for ``s > 0``."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("digamma is only implemented for s > 0 (pole at s <= 0)")
    k = _shift_count(s)
    acc = np.zeros_like(s)
    x = s.copy()
    for _ in range(int(np.max(k, initial=0))):
        m = k > 0
        acc = acc - np.where(m, 1.0 / x, 0.0)
        x = np.where(m, x + 1.0, x)
        k = k - m
    inv2 = 1.0 / (x * x)
    tail = np.zeros_like(x)
    pw = inv2.copy()
    for j, b in enumerate(_BERNOULLI, start=1):
        tail += b / (2 * j) * pw
        pw = pw * inv2
    out = acc + np.log(x) - 0.5 / x - tail
    return out[()] if out.ndim == 0 else out


def trigamma(s):
    """Trigamma ``psi_1(s) = d^2/ds^2 log Gamma(s)`` for ``s > 0``."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("trigamma is only implemented for s > 0 (pole at s <= 0)")
    k = _shift_count(s)
    acc = np.zeros_like(s)
    x = s.copy()
    for _ in range(int(np.max(k, initial=0))):
        m = k > 0
        acc = acc + np.where(m, 1.0 / (x * x), 0.0)
        x = np.where(m, x + 1.0, x)
        k = k - m
    inv = 1.0 / x
    inv2 = inv * inv
    tail = np.zeros_like(x)
    pw = inv2 * inv
    for b in _BERNOULLI:
        tail += b * pw
        pw = pw * inv2
    out = acc + inv + 0.5 * inv2 + tail
    return out[()] if out.ndim == 0 else out
