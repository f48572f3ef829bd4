"""Poincare and log-Sobolev constants of the one-dimensional measure ``nu_N``.

For a probability density ``p`` on the line split at ``m``:

    B_0 = sup_{x<m} mu(-inf, x] int_x^m 1/p,    B_1 = sup_{x>m} mu[x, inf) int_m^x 1/p,
    D_i = the same with the tail mass ``mu`` replaced by ``-mu log mu``.

The optimal Poincare constant ``c`` (inverse gap) obeys ``B/2 <= c <= 4B``
with ``B = max(B_0, B_1)``; the log-Sobolev constant is within the absolute
factors ``K_0 = 1/150``, ``K_1 = 468`` of ``D_0 + D_1``.  Both integrals span
many orders of magnitude, so everything is accumulated as logarithms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from .measures import RenormalizedMeasure, _panel_nodes, log_integrate
from .potential import ModelParams, RegimeError, global_minimum
from .schrodinger import solve_renormalized

__all__ = [
    "K0",
    "K1",
    "IneqConstants",
    "ineq_constants",
    "muckenhoupt",
    "bobkov_gotze",
    "SandwichReport",
    "sandwich_check",
    "Transferred",
    "transfer_constants",
    "INEQ_CSV_COLUMNS",
]

K0 = 1.0 / 150.0
K1 = 468.0
SCAN_POINTS = 2000


@dataclass(frozen=True)
class IneqConstants:
    N: float
    params: ModelParams
    split_point: float
    log_B0: float
    log_B1: float
    log_D0: float
    log_D1: float

    @property
    def B0(self) -> float:
        return float(np.exp(self.log_B0))

    @property
    def B1(self) -> float:
        return float(np.exp(self.log_B1))

    @property
    def D0(self) -> float:
        return float(np.exp(self.log_D0))

    @property
    def D1(self) -> float:
        return float(np.exp(self.log_D1))

    @property
    def log_B(self) -> float:
        return max(self.log_B0, self.log_B1)

    @property
    def B(self) -> float:
        return float(np.exp(self.log_B))

    @property
    def log_D(self) -> float:
        return float(np.logaddexp(self.log_D0, self.log_D1))


def _piece_logs(ld, grid, width):
    """``log int exp(ld)`` over each interval of an equispaced grid."""
    d = grid[1] - grid[0]
    k = max(1, int(np.ceil(d / width)))
    x, w = _panel_nodes(0.0, d, k)
    pts = grid[:-1, None] + x[None, :]
    return logsumexp(ld(pts) + np.log(w)[None, :], axis=1)


def _cumulative_log(ld, grid, width):
    """Log of ``int_{grid[0]}^{grid[j]} exp(ld)`` for every ``j``."""
    pieces = _piece_logs(ld, grid, width)
    out = np.empty(grid.size)
    out[0] = -np.inf
    out[1:] = np.logaddexp.accumulate(pieces)
    return out


def _log_neg_log(log_mu):
    """``log(-mu log mu)`` given ``log mu`` with ``mu < 1``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return log_mu + np.log(-log_mu)


class _Side:
    """Sup search on one side of the split point."""

    def __init__(self, nu: RenormalizedMeasure, a, b, tail_side, npts):
        self.nu = nu
        self.ld = nu.log_density
        self.width = nu.width
        self.log_z = log_integrate(self.ld, nu.lo, nu.hi, nu.width)
        self.a, self.b = a, b
        self.tail_side = tail_side  # "left": mass of (-inf, x], "right": [x, inf)
        self.grid = np.linspace(a, b, npts)
        neg = lambda t: -self.ld(t)  # noqa: E731
        if tail_side == "left":
            # mass from lo to x, inverse density from x to m = b
            lm_inner = _cumulative_log(self.ld, self.grid, self.width)
            base = log_integrate(self.ld, nu.lo, a, self.width)
            self.log_mass = np.logaddexp(base, lm_inner) - self.log_z
            self.log_inv = _reverse_cumulative(neg, self.grid, self.width)
        else:
            self.log_inv = _cumulative_log(neg, self.grid, self.width)
            tail = _reverse_cumulative(self.ld, self.grid, self.width)
            extra = log_integrate(self.ld, b, nu.hi, self.width)
            self.log_mass = np.logaddexp(tail, extra) - self.log_z
        self.log_mass = np.minimum(self.log_mass, 0.0)
        # 1/p = Z exp(N (V - V_min)) for the normalized density
        self.log_inv = self.log_inv + self.log_z

    def _point(self, x):
        neg = lambda t: -self.ld(t)  # noqa: E731
        if self.tail_side == "left":
            lm = log_integrate(self.ld, self.nu.lo, x, self.width) - self.log_z
            li = log_integrate(neg, x, self.b, self.width)
        else:
            lm = log_integrate(self.ld, x, self.nu.hi, self.width) - self.log_z
            li = log_integrate(neg, self.a, x, self.width)
        return min(lm, 0.0), li + self.log_z

    def sup(self, kind, refine=True):
        if kind == "B":
            vals = self.log_mass + self.log_inv
        else:
            vals = _log_neg_log(self.log_mass) + self.log_inv
        vals = np.where(np.isfinite(vals), vals, -np.inf)
        j = int(np.argmax(vals))
        best = float(vals[j])
        if not refine:
            return best
        lo = self.grid[max(j - 1, 0)]
        hi = self.grid[min(j + 1, self.grid.size - 1)]
        if hi <= lo:
            return best

        def f(x):
            lm, li = self._point(x)
            v = lm + li if kind == "B" else float(_log_neg_log(lm)) + li
            return -v if np.isfinite(v) else np.inf

        res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-10 * max(1.0, abs(hi))})
        return max(best, -float(res.fun))


def _reverse_cumulative(ld, grid, width):
    """Log of ``int_{grid[j]}^{grid[-1]} exp(ld)`` for every ``j``."""
    pieces = _piece_logs(ld, grid, width)
    out = np.empty(grid.size)
    out[-1] = -np.inf
    out[:-1] = np.logaddexp.accumulate(pieces[::-1])[::-1]
    return out


def _split(nu: RenormalizedMeasure, split):
    if split == "median":
        m = nu.median()
        # exp(-N V) can be flat at 1/2 across a whole barrier; take its top
        xs = np.linspace(nu.lo, nu.hi, 2001)
        cum = _cumulative_log(nu.log_density, xs, nu.width)
        lf = cum[1:-1] - cum[-1]
        flat = xs[1:-1][np.abs(np.expm1(lf - np.log(0.5))) < 1e-10]
        if flat.size:
            cand = np.append(flat, m)
            m = float(cand[np.argmin(nu.log_density(cand))])
        return m
    if split == "min":
        m = global_minimum(nu.params)
        mass = float(np.exp(nu.log_mass_below(m)))
        if not 0.4 < mass < 0.6:
            raise RegimeError(f"split at the minimum leaves mass {mass:.3f} on the left")
        return m
    return float(split)


def ineq_constants(N: float, params: ModelParams, split="median", npts: int = SCAN_POINTS,
                   refine: bool = True) -> IneqConstants:
    """All four constants ``B_0, B_1, D_0, D_1`` for ``nu_N`` (``n = 1``)."""
    if params.n != 1:
        raise RegimeError("the one-dimensional criteria apply to n = 1")
    nu = RenormalizedMeasure(params, N)
    m = _split(nu, split)
    left = _Side(nu, nu.lo, m, "left", npts)
    right = _Side(nu, m, nu.hi, "right", npts)
    return IneqConstants(N, params, m,
                         left.sup("B", refine), right.sup("B", refine),
                         left.sup("D", refine), right.sup("D", refine))


def muckenhoupt(N: float, params: ModelParams, **kw) -> IneqConstants:
    """Muckenhoupt numbers ``B_0, B_1`` (the ``D`` fields are filled as well)."""
    return ineq_constants(N, params, **kw)


def bobkov_gotze(N: float, params: ModelParams, **kw) -> IneqConstants:
    """Bobkov-Goetze constants ``D_0, D_1`` (the ``B`` fields are filled as well)."""
    return ineq_constants(N, params, **kw)


@dataclass(frozen=True)
class SandwichReport:
    N: float
    params: ModelParams
    B: float
    c: float          # inverse spectral gap of the renormalized generator
    lower: float
    upper: float
    passed: bool
    log_B: float
    log_c: float


def sandwich_check(N: float, params: ModelParams, tol: float = 0.05,
                   consts: IneqConstants | None = None) -> SandwichReport:
    """Check ``B/2 (1 - tol) <= 1/gap <= 4B (1 + tol)`` with the grid gap."""
    consts = consts or muckenhoupt(N, params)
    spec = solve_renormalized(params, N, k=2)
    log_c = -float(spec.log_gap if spec.log_gap is not None else np.log(spec.gap))
    log_lo = consts.log_B + np.log(0.5 * (1 - tol))
    log_hi = consts.log_B + np.log(4.0 * (1 + tol))
    ok = bool(log_lo <= log_c <= log_hi)
    return SandwichReport(N, params, consts.B, float(np.exp(log_c)), float(np.exp(log_lo)),
                          float(np.exp(log_hi)), ok, consts.log_B, log_c)


@dataclass(frozen=True)
class Transferred:
    sgi: float   # (1/gamma_n)(1 + 4 N beta^2 / lam)
    lsi: float   # (2/gamma_n)(1 + 8 N beta^2 / lam)


def transfer_constants(lam: float, N: float, params: ModelParams,
                       gamma_n: float | None = None) -> Transferred:
    """Full-measure SGI/LSI constants from a renormalized-measure constant ``lam``."""
    if gamma_n is None:
        if params.n != 1:
            raise ValueError("gamma_n must be supplied for n >= 2")
        gamma_n = 4.0
    if gamma_n <= 0 or lam <= 0:
        raise ValueError("gamma_n and lam must be positive")
    b2 = params.beta ** 2
    return Transferred((1.0 + 4.0 * N * b2 / lam) / gamma_n,
                       2.0 * (1.0 + 8.0 * N * b2 / lam) / gamma_n)


INEQ_CSV_COLUMNS = ("N", "beta", "h", "B0", "B1", "D0", "D1", "c_schrodinger", "sandwich_pass")
