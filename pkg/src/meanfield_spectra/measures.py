"""The renormalized measure ``nu_N(dphi) ~ exp(-N V_n(phi)) dphi`` and friends.

Integrals are done with composite Gauss-Legendre panels whose width follows
the natural length scale of ``exp(-N V)`` around each critical point, in log
domain so that nothing underflows for large ``N``.  For ``n >= 2`` with zero
field the measure is handled in the radial variable with weight ``r^{n-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize
from scipy.special import gammaln, logsumexp

from .potential import (
    ModelParams,
    RegimeError,
    critical_points,
    profile_V,
    profile_d2V,
    profile_d3V,
)
from .specialfn import bessel_ratio

__all__ = [
    "QuadratureError",
    "RenormalizedMeasure",
    "LaplaceExpansion",
    "expect_nu",
    "laplace_expectation",
    "laplace_variance",
    "fluct_mean_spin",
    "magnetization_gap_bound",
    "variance_decomposition",
    "log_integrate",
]

GL_ORDER = 16
TAIL_EXPONENT = 50.0  # cut the domain where N (V - V_min) exceeds this
MAX_REFINE = 6

_gl_x, _gl_w = np.polynomial.legendre.leggauss(GL_ORDER)


class QuadratureError(RuntimeError):
    pass


def _panel_nodes(a, b, npanels):
    """Gauss-Legendre nodes and (positive) weights on ``npanels`` equal panels."""
    edges = np.linspace(a, b, npanels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * _gl_x[None, :]).ravel()
    w = (half[:, None] * _gl_w[None, :]).ravel()
    return x, w


def log_integrate(log_f: Callable, a: float, b: float, width: float) -> float:
    """``log int_a^b exp(log_f(x)) dx`` on panels no wider than ``width``."""
    if b <= a:
        return -np.inf
    npanels = max(1, int(np.ceil((b - a) / width)))
    x, w = _panel_nodes(a, b, npanels)
    return float(logsumexp(log_f(x) + np.log(w)))


def _local_scale(params, N, t, d2):
    if abs(d2) > 1e-6:
        return 1.0 / np.sqrt(N * abs(d2))
    # degenerate point: quartic (or cubic) behaviour sets an N^{-1/4} width
    return 0.5 * N ** -0.25


@dataclass
class RenormalizedMeasure:
    """``nu_N`` for one model; ``radial`` when ``n >= 2`` and ``h = 0``.

    Attributes after construction: ``nodes`` (quadrature points in the
    profile variable), ``log_w`` (log of normalized quadrature masses),
    ``log_normalizer`` (log of the unnormalized integral, including
    ``r^{n-1}`` in the radial case) and the domain ``(lo, hi)``.
    """

    params: ModelParams
    N: float
    tail: float = TAIL_EXPONENT
    rtol: float = 1e-12
    radial: bool = field(init=False)
    v_min: float = field(init=False)
    lo: float = field(init=False)
    hi: float = field(init=False)
    width: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)
    log_w: np.ndarray = field(init=False, repr=False)
    log_normalizer: float = field(init=False)

    def __post_init__(self):
        p = self.params
        if self.N <= 0:
            raise ValueError("N must be positive")
        if p.n >= 2 and p.h_norm != 0.0:
            raise RegimeError("nu_N for n >= 2 is only reduced to one variable at h = 0")
        self.radial = p.n >= 2
        cps = critical_points(p)
        ts = np.array([cp.coordinate for cp in cps])
        self.v_min = min(cp.value for cp in cps)
        scales = [_local_scale(p, self.N, cp.coordinate, cp.hess_eigs[0]) for cp in cps]
        self.width = min(0.05, 0.25 * min(scales))
        self.lo = 0.0 if self.radial else self._cutoff(ts.min(), -1.0)
        self.hi = self._cutoff(ts.max(), +1.0)
        self._integrate()

    def _excess(self, t):
        return self.N * (profile_V(self.params, t) - self.v_min) - self.tail

    def _cutoff(self, start, direction):
        step = max(0.1, 4.0 / np.sqrt(self.N * self.params.beta))
        inner = start
        outer = start + direction * step
        while self._excess(outer) < 0:
            inner = outer
            step *= 2.0
            outer = start + direction * step
        if self._excess(inner) >= 0:
            return float(inner)
        return float(optimize.brentq(self._excess, min(inner, outer), max(inner, outer),
                                     xtol=1e-12))

    def log_density(self, t):
        """Unnormalized log density (with radial Jacobian) in the profile variable."""
        t = np.asarray(t, dtype=float)
        out = -self.N * (profile_V(self.params, t) - self.v_min)
        if self.radial:
            with np.errstate(divide="ignore"):
                out = out + (self.params.n - 1) * np.log(t)
        return out

    def _build(self, npanels):
        x, w = _panel_nodes(self.lo, self.hi, npanels)
        lw = self.log_density(x) + np.log(w)
        return x, lw, float(logsumexp(lw))

    def _integrate(self):
        npanels = max(4, int(np.ceil((self.hi - self.lo) / self.width)))
        x, lw, lz = self._build(npanels)
        # N V carries an absolute rounding error of order N eps |V|
        tol = max(self.rtol, 1e-14 * self.N * max(1.0, abs(self.v_min)))
        for _ in range(MAX_REFINE):
            x2, lw2, lz2 = self._build(2 * npanels)
            if abs(lz2 - lz) < tol:
                break
            npanels *= 2
            x, lw, lz = x2, lw2, lz2
        else:
            raise QuadratureError("normalizer did not settle under panel refinement")
        self.nodes = x2
        self.log_w = lw2 - lz2
        self.log_normalizer = lz2 - self.N * self.v_min

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_w)

    def expect(self, g) -> float:
        return float(np.sum(self.weights * np.asarray(g(self.nodes), dtype=float)))

    def variance(self, g) -> float:
        vals = np.asarray(g(self.nodes), dtype=float)
        w = self.weights
        mean = np.sum(w * vals)
        return float(np.sum(w * (vals - mean) ** 2))

    def log_mass_below(self, x: float) -> float:
        """``log nu_N((-inf, x])`` (or ``[0, x]`` radially)."""
        if x <= self.lo:
            return -np.inf
        x = min(x, self.hi)
        return log_integrate(self.log_density, self.lo, x, self.width) - (
            self.log_normalizer + self.N * self.v_min)

    def median(self) -> float:
        def f(x):
            return np.exp(self.log_mass_below(x)) - 0.5
        return float(optimize.brentq(f, self.lo, self.hi, xtol=1e-13))


def expect_nu(measure: RenormalizedMeasure, g) -> float:
    """``E_{nu_N}(g)``; ``g`` is a vectorized function of the profile variable."""
    return measure.expect(g)


# -- Laplace asymptotics ------------------------------------------------------------

def _fd_derivs(g, x, step=1e-4):
    """First and second derivative by fourth-order central differences."""
    s = step
    gm2, gm1, g0, gp1, gp2 = (float(g(x + k * s)) for k in (-2, -1, 0, 1, 2))
    d1 = (-gp2 + 8 * gp1 - 8 * gm1 + gm2) / (12 * s)
    d2 = (-gp2 + 16 * gp1 - 30 * g0 + 16 * gm1 - gm2) / (12 * s * s)
    return g0, d1, d2


@dataclass(frozen=True)
class LaplaceExpansion:
    value: float
    leading: float
    curvature_term: float
    skew_term: float
    phi_min: float


def _unique_minimum(params: ModelParams):
    if params.n != 1:
        raise RegimeError("Laplace expansion is implemented for the Ising potential")
    mins = [cp for cp in critical_points(params) if cp.kind == "minimum"]
    best = min(mins, key=lambda cp: cp.value)
    if best.degenerate or profile_d2V(params, best.coordinate) <= 1e-8:
        raise RegimeError("global minimum is degenerate")
    for cp in mins:
        if cp is not best and abs(cp.value - best.value) < 1e-9:
            raise RegimeError("global minimum is not unique")
    return best.coordinate


def laplace_expectation(params: ModelParams, N: float, g) -> LaplaceExpansion:
    """Expansion of ``E_{nu_N}(g)`` to order ``1/N`` around the global minimum."""
    x0 = _unique_minimum(params)
    v2 = float(profile_d2V(params, x0))
    v3 = float(profile_d3V(params, x0))
    g0, g1, g2 = _fd_derivs(g, x0)
    curv = g2 / (2.0 * N * v2)
    skew = -v3 * g1 / (2.0 * N * v2 * v2)
    return LaplaceExpansion(g0 + curv + skew, g0, curv, skew, x0)


def laplace_variance(params: ModelParams, N: float, g) -> float:
    """Leading term ``g'(phi_min)^2 / (N V''(phi_min))`` of ``Var_{nu_N}(g)``."""
    x0 = _unique_minimum(params)
    _, g1, _ = _fd_derivs(g, x0)
    return g1 * g1 / (N * float(profile_d2V(params, x0)))


# -- fluctuation measure ---------------------------------------------------------------

def fluct_mean_spin(params: ModelParams, phi):
    """``E_{mu_phi}(sigma_x)``: ``tanh(beta phi + h)`` or ``R(|zeta|) zeta/|zeta|``."""
    if params.n == 1:
        phi = np.asarray(phi, dtype=float)
        if phi.ndim and phi.shape[-1] == 1:
            phi = phi[..., 0]
        return np.tanh(params.beta * phi + params.h_vec[0])
    phi = np.asarray(phi, dtype=float)
    zeta = params.beta * phi + np.asarray(params.h_vec)
    z = np.linalg.norm(zeta, axis=-1, keepdims=True)
    R = bessel_ratio(params.nu, z)
    safe = np.where(z > 0, z, 1.0)
    return np.where(z > 0, R * zeta / safe, 0.0)


def magnetization_gap_bound(params: ModelParams, N: float) -> float:
    """Upper bound on the gap from the magnetization trial function (``h = 0``).

    ``beta^{-1} D / (N E_nu[m^2])`` with ``D = 4``, ``m = tanh(beta phi)``
    for ``n = 1`` and ``D = 1``, ``m = R(beta r)`` radially for ``n >= 2``.
    """
    if params.h_norm != 0.0:
        raise RegimeError("magnetization bound is derived at zero field")
    nu = RenormalizedMeasure(params, N)
    b = params.beta
    if params.n == 1:
        m2 = nu.expect(lambda t: np.tanh(b * t) ** 2)
        dirichlet = 4.0
    else:
        m2 = nu.expect(lambda r: bessel_ratio(params.nu, b * r) ** 2)
        dirichlet = 1.0
    return dirichlet / (b * N * m2)


def variance_decomposition(params: ModelParams, N: int, f):
    """``(E_nu Var_mu f, Var_nu E_mu f)`` for ``f`` a function of ``S = sum_x sigma_x``.

    Under ``mu_phi`` the number of up spins is binomial with success
    probability ``(1 + tanh(beta phi + h)) / 2``, so both conditional moments
    are exact finite sums at every quadrature node.
    """
    if params.n != 1:
        raise RegimeError("variance decomposition is implemented for n = 1")
    N = int(N)
    nu = RenormalizedMeasure(params, N)
    k = np.arange(N + 1)
    fk = np.asarray(f(2 * k - N), dtype=float)
    t = np.tanh(params.beta * nu.nodes + params.h_vec[0])
    with np.errstate(divide="ignore"):
        lp, lq = np.log1p(t) - np.log(2), np.log1p(-t) - np.log(2)
    logc = gammaln(N + 1.0) - gammaln(k + 1.0) - gammaln(N - k + 1.0)
    lw = logc[None, :] + k[None, :] * lp[:, None] + (N - k)[None, :] * lq[:, None]
    w = np.exp(lw)
    m1 = w @ fk
    m2 = w @ (fk * fk)
    wn = nu.weights
    inner = float(np.sum(wn * (m2 - m1 * m1)))
    mean = float(np.sum(wn * m1))
    outer = float(np.sum(wn * (m1 - mean) ** 2))
    return inner, outer
