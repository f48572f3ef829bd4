"""Renormalized single-spin potential of the mean-field O(n) model.

    V_n(phi) = beta/2 (1 + |phi|^2) - log( Gamma(n/2) (2/z)^{n/2-1} I_{n/2-1}(z) ),
    z = |beta phi + h|.

Every quantity with rotational covariance is reduced to a one-dimensional
*profile* ``t -> V_n(t e)``: for ``n = 1`` ``t`` is the field value itself, for
``n >= 2, h != 0`` ``t`` is the coordinate along ``h/|h|`` (the critical points
lie on that line), and for ``h = 0`` ``t >= 0`` is the radius.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from .specialfn import bessel_ratio, log_bessel_normalized

__all__ = [
    "ModelParams",
    "CriticalPoint",
    "RegimeError",
    "eval_V",
    "grad_V",
    "hess_V",
    "profile_V",
    "profile_dV",
    "profile_d2V",
    "profile_d3V",
    "critical_points",
    "critical_field",
    "well_depth",
    "ising_roots",
    "global_minimum",
]


class RegimeError(ValueError):
    """Raised when a quantity is requested outside the regime where it exists."""


@dataclass(frozen=True)
class ModelParams:
    """One O(n) model instance.

    ``h`` may be given as a scalar for any ``n``; for ``n >= 2`` a scalar is
    read as ``|h|`` along the first axis.  For ``n = 1`` the sign is kept.
    """

    n: int
    beta: float
    h: float | Sequence[float] = 0.0
    h_vec: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be positive and finite, got {self.beta!r}")
        hv = np.atleast_1d(np.asarray(self.h, dtype=float))
        if hv.size == 1 and self.n > 1:
            hv = np.concatenate([hv, np.zeros(self.n - 1)])
        if hv.size != self.n:
            raise ValueError(f"h must have {self.n} components, got {hv.size}")
        if not np.all(np.isfinite(hv)):
            raise ValueError("h must be finite")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "h_vec", tuple(float(v) for v in hv))

    @property
    def h_norm(self) -> float:
        return float(np.linalg.norm(self.h_vec))

    @property
    def h_offset(self) -> float:
        """Field offset entering the 1D profile (signed for n = 1)."""
        return self.h_vec[0] if self.n == 1 else self.h_norm

    @property
    def nu(self) -> float:
        return self.n / 2.0 - 1.0

    @property
    def regime(self) -> str:
        if np.isclose(self.beta, self.n, rtol=0, atol=1e-12):
            return "critical"
        return "subcritical" if self.beta < self.n else "supercritical"


@dataclass
class CriticalPoint:
    location: np.ndarray | float
    kind: str
    value: float
    hess_eigs: np.ndarray
    degenerate: bool = False
    coordinate: float = 0.0  # position on the 1D profile


# -- profile ------------------------------------------------------------------

def _ratio_derivs(n, z):
    """R(z) = I_{n/2}/I_{n/2-1}, R'(z), R''(z) and R(z)/z, stable near z = 0."""
    z = np.asarray(z, dtype=float)
    nu = n / 2.0 - 1.0
    R = bessel_ratio(nu, z)
    small = z < 1e-5
    zs = np.where(small, 1.0, z)
    R_over_z = np.where(small, 1.0 / n - z ** 2 / (n * n * (n + 2)), R / zs)
    R1 = 1.0 - (n - 1) * R_over_z - R ** 2
    R2 = np.where(small, -6.0 * z / (n * n * (n + 2)),
                  -(n - 1) * (R1 - R_over_z) / zs - 2.0 * R * R1)
    return R, R1, R2, R_over_z


def profile_V(params: ModelParams, t):
    """``V_n`` restricted to the line (or radius) described in the module docstring."""
    t = np.asarray(t, dtype=float)
    z = np.abs(params.beta * t + params.h_offset)
    return 0.5 * params.beta * (1.0 + t * t) - log_bessel_normalized(params.nu, z)


def profile_dV(params: ModelParams, t):
    t = np.asarray(t, dtype=float)
    zeta = params.beta * t + params.h_offset
    R = bessel_ratio(params.nu, np.abs(zeta))
    return params.beta * (t - R * np.sign(zeta))


def profile_d2V(params: ModelParams, t):
    t = np.asarray(t, dtype=float)
    z = np.abs(params.beta * t + params.h_offset)
    _, R1, _, _ = _ratio_derivs(params.n, z)
    return params.beta - params.beta ** 2 * R1


def profile_d3V(params: ModelParams, t):
    t = np.asarray(t, dtype=float)
    zeta = params.beta * t + params.h_offset
    _, _, R2, _ = _ratio_derivs(params.n, np.abs(zeta))
    return -params.beta ** 3 * R2 * np.sign(zeta)


def _transverse_d2V(params: ModelParams, t):
    """Hessian eigenvalue orthogonal to the profile line (multiplicity n-1)."""
    z = np.abs(params.beta * np.asarray(t, dtype=float) + params.h_offset)
    _, _, _, R_over_z = _ratio_derivs(params.n, z)
    return params.beta - params.beta ** 2 * R_over_z


# -- full n-dimensional forms ---------------------------------------------------

def _as_points(params, phi):
    phi = np.asarray(phi, dtype=float)
    if params.n == 1 and (phi.ndim == 0 or phi.shape[-1] != 1):
        phi = phi[..., None]
    if phi.shape[-1] != params.n:
        raise ValueError(f"phi must have trailing dimension {params.n}")
    return phi


def eval_V(params: ModelParams, phi):
    """Renormalized potential at ``phi`` (shape ``(..., n)``; scalars allowed for n = 1)."""
    phi = _as_points(params, phi)
    zeta = params.beta * phi + np.asarray(params.h_vec)
    z = np.linalg.norm(zeta, axis=-1)
    r2 = np.sum(phi * phi, axis=-1)
    return 0.5 * params.beta * (1.0 + r2) - log_bessel_normalized(params.nu, z)


def grad_V(params: ModelParams, phi):
    """Gradient ``beta (phi - R(|zeta|) zeta/|zeta|)``, ``zeta = beta phi + h``."""
    phi = _as_points(params, phi)
    zeta = params.beta * phi + np.asarray(params.h_vec)
    z = np.linalg.norm(zeta, axis=-1, keepdims=True)
    _, _, _, R_over_z = _ratio_derivs(params.n, z)
    return params.beta * (phi - R_over_z * zeta)


def hess_V(params: ModelParams, phi):
    """Hessian ``beta I - beta^2 [R' u u^T + (R/z)(I - u u^T)]`` with ``u = zeta/|zeta|``.

    At ``zeta = 0`` the isotropic limit ``beta (1 - beta/n) I`` is returned.
    """
    phi = _as_points(params, phi)
    zeta = params.beta * phi + np.asarray(params.h_vec)
    z = np.linalg.norm(zeta, axis=-1)
    _, R1, _, R_over_z = _ratio_derivs(params.n, z)
    safe = np.where(z > 0, z, 1.0)[..., None]
    u = np.where(z[..., None] > 0, zeta / safe, 0.0)
    eye = np.eye(params.n)
    uu = u[..., :, None] * u[..., None, :]
    b = params.beta
    H = b * eye - b * b * (R1[..., None, None] * uu
                           + R_over_z[..., None, None] * (eye - uu))
    return H


# -- critical points ------------------------------------------------------------

def critical_field(beta: float) -> float:
    """Critical Ising field ``sqrt(beta(beta-1)) - arccosh(sqrt(beta))``."""
    if beta < 1:
        raise ValueError("critical field is defined for beta >= 1")
    return float(np.sqrt(beta * (beta - 1.0)) - np.arccosh(np.sqrt(beta)))


def _classify(params, t, eigs, radial_origin=False):
    eigs = np.atleast_1d(np.asarray(eigs, dtype=float))
    degenerate = bool(np.min(np.abs(eigs)) < 1e-8)
    if not degenerate:
        if np.all(eigs > 0):
            return "minimum", False
        if np.all(eigs < 0):
            return "maximum", False
        return "saddle", False
    # higher-order probe along the profile
    delta = 1e-3
    v0 = float(profile_V(params, t))
    if radial_origin:
        up = float(profile_V(params, delta)) - v0
        down = up
    else:
        up = float(profile_V(params, t + delta)) - v0
        down = float(profile_V(params, t - delta)) - v0
    others = eigs[np.abs(eigs) >= 1e-8]
    if up > 0 and down > 0 and np.all(others > 0):
        return "minimum", True
    if up < 0 and down < 0 and np.all(others < 0):
        return "maximum", True
    return "inflection", True


def _profile_roots(params, lo, hi, npts=10_000):
    """Roots of the profile derivative on [lo, hi], including tangential ones."""
    grid = np.linspace(lo, hi, npts)
    F = profile_dV(params, grid)
    roots = []

    def f(t):
        return float(profile_dV(params, t))

    sign_change = np.flatnonzero(np.sign(F[:-1]) * np.sign(F[1:]) < 0)
    for i in sign_change:
        roots.append(optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
    roots.extend(grid[F == 0.0].tolist())

    # double roots: zeros of V'' where V' (nearly) vanishes
    G = profile_d2V(params, grid)

    def g(t):
        return float(profile_d2V(params, t))

    for i in np.flatnonzero(np.sign(G[:-1]) * np.sign(G[1:]) < 0):
        tg = optimize.brentq(g, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
        if abs(f(tg)) < 1e-9:
            roots.append(tg)

    roots.sort()
    merged = []
    for r in roots:
        if not merged or abs(r - merged[-1]) > 1e-6:
            merged.append(r)
        else:
            # keep the representative with the smaller residual
            if abs(f(r)) < abs(f(merged[-1])):
                merged[-1] = r
    return merged


def critical_points(params: ModelParams) -> list[CriticalPoint]:
    """All critical points of ``V_n`` (up to rotations when ``h = 0``).

    * ``n = 1``: field values solving ``phi = tanh(beta phi + h)``.
    * ``n >= 2, h = 0``: critical radii (``0`` and, above ``beta = n``, ``r_min``);
      ``location`` is the radius and ``hess_eigs`` the radial second derivative.
    * ``n >= 2, h != 0``: points on ``span(h)``; full Hessian spectrum reported.
    """
    n, b = params.n, params.beta
    out = []
    if n >= 2 and params.h_norm == 0.0:
        d2_0 = float(profile_d2V(params, 0.0))
        kind, deg = _classify(params, 0.0, [d2_0], radial_origin=True)
        out.append(CriticalPoint(0.0, kind, float(profile_V(params, 0.0)),
                                 np.array([d2_0]), deg, 0.0))
        for r in _profile_roots(params, 1e-7, 2.0):
            if r <= 1e-6:
                continue
            d2 = float(profile_d2V(params, r))
            kind, deg = _classify(params, r, [d2])
            out.append(CriticalPoint(r, kind, float(profile_V(params, r)),
                                     np.array([d2]), deg, r))
        return out

    if n == 1:
        axis = np.array([1.0])
    else:
        axis = np.asarray(params.h_vec) / params.h_norm
    for t in _profile_roots(params, -2.0, 2.0):
        along = float(profile_d2V(params, t))
        eigs = [along] + [float(_transverse_d2V(params, t))] * (n - 1)
        kind, deg = _classify(params, t, eigs)
        loc = t if n == 1 else t * axis
        out.append(CriticalPoint(loc, kind, float(profile_V(params, t)),
                                 np.sort(np.array(eigs)), deg, t))
    return out


def ising_roots(beta: float, h: float = 0.0) -> list[float]:
    """Sorted solutions of ``x = tanh(beta x + h)``."""
    return [cp.coordinate for cp in critical_points(ModelParams(1, beta, h))]


def global_minimum(params: ModelParams) -> float:
    """Profile coordinate of the global minimum of ``V_n``."""
    cps = critical_points(params)
    best = min(cps, key=lambda cp: cp.value)
    return best.coordinate


def well_depth(params: ModelParams) -> float:
    """Depth ``int_{gamma_1}^{gamma_2} beta (phi - tanh(beta phi + h)) dphi`` of the smaller well.

    Requires the Ising double well: ``n = 1``, ``beta > 1``, ``0 <= h < h_c``.
    """
    if params.n != 1:
        raise RegimeError("well depth is defined for the Ising potential (n = 1)")
    b, h = params.beta, params.h_offset
    if b <= 1 or h < 0 or h >= critical_field(b):
        raise RegimeError("no double well: need beta > 1 and 0 <= h < h_c(beta)")
    roots = ising_roots(b, h)
    if len(roots) < 3:
        raise RegimeError("double well not resolved (field too close to h_c)")
    g1, g2 = roots[0], roots[1]
    val, _ = integrate.quad(lambda x: b * (x - np.tanh(b * x + h)), g1, g2,
                            epsabs=1e-14, epsrel=1e-13)
    return float(val)
