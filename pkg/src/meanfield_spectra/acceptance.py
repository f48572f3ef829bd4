"""The acceptance suite: desk-scale checks of every scaling law and identity.

Each ``criterion_k`` returns a :class:`CriterionResult`; :func:`run_all`
executes them in order.  ``quick`` drops every sweep that reaches ``N > 800``.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .funcineq import sandwich_check
from .ising import MagnetizationChain, chain_gap, fourier_parts, full_gap
from .measures import (
    RenormalizedMeasure,
    expect_nu,
    laplace_expectation,
    magnetization_gap_bound,
    variance_decomposition,
)
from .oscillator import OscillatorBasis
from .potential import ModelParams, critical_field, eval_V, grad_V, hess_V, well_depth
from .scaling import GapSeries, fit_constant, fit_exponential_rate, fit_power_law
from .schrodinger import (
    OperatorSpec,
    limit_operator,
    null_vector_residual,
    solve_polynomial,
    solve_radial,
    solve_renormalized,
)
from .specialfn import bessel_ratio, log_bessel_i
from .funcineq import transfer_constants

QUICK_MAX_N = 800


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool | None  # None when skipped
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "SKIP" if self.passed is None else ("PASS" if self.passed else "FAIL")
        keys = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{tag}] {self.number:2d}. {self.title} ({self.seconds:.1f}s) {keys}"

    def as_dict(self) -> dict:
        return asdict(self)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _timed(number: int, title: str, body: Callable[[], tuple[bool, dict]]) -> CriterionResult:
    t0 = time.perf_counter()
    ok, details = body()
    return CriterionResult(number, title, bool(ok), details, time.perf_counter() - t0)


def _skipped(number, title):
    return CriterionResult(number, title, None, {"reason": f"quick mode skips N > {QUICK_MAX_N}"})


def _geometric(start, factor, count):
    return [int(round(start * factor ** i)) for i in range(count)]


# -- 1 ------------------------------------------------------------------------------

def criterion_1(quick: bool = False) -> CriterionResult:
    title = "supercritical Ising exponential rate"
    if quick:
        return _skipped(1, title)

    def body():
        p = ModelParams(1, 2.0, 0.0)
        Ns = _geometric(200, 2, 5)
        series = GapSeries.from_estimates(p, [chain_gap(N, 2.0, 0.0) for N in Ns])
        fit = fit_exponential_rate(series)
        target = well_depth(p)
        rel = abs(fit.exponent_or_rate - target) / target
        return rel <= 0.10, {"rate": fit.exponent_or_rate, "well_depth": target, "rel_err": rel}

    return _timed(1, title, body)


def criterion_2(quick: bool = False) -> CriterionResult:
    def body():
        worst = 0.0
        for N in range(2, 13):
            for beta in (0.5, 1.0, 2.0):
                for h in (0.0, 0.2):
                    a = chain_gap(N, beta, h).gap
                    b = full_gap(N, beta, h).gap
                    worst = max(worst, abs(a - b))
        return worst <= 1e-9, {"max_abs_diff": worst}

    return _timed(2, "chain gap equals full gap for N <= 12", body)


def criterion_3(quick: bool = False) -> CriterionResult:
    title = "critical Ising exponent"
    if quick:
        return _skipped(3, title)

    def body():
        Ns = [1000, 3000, 10000, 30000, 100000]
        p = ModelParams(1, 1.0, 0.0)
        fit = fit_power_law(GapSeries.from_estimates(p, [chain_gap(N, 1.0, 0.0) for N in Ns]))
        return abs(fit.exponent_or_rate + 0.5) <= 0.05, {"exponent": fit.exponent_or_rate}

    return _timed(3, title, body)


def criterion_4(quick: bool = False) -> CriterionResult:
    title = "critical multi-component bound exponent"
    if quick:
        return _skipped(4, title)

    def body():
        Ns = [int(round(100 * 10 ** (k / 2))) for k in range(7)]
        out, ok = {}, True
        for n in (2, 3):
            p = ModelParams(n, float(n), 0.0)
            gaps = [magnetization_gap_bound(p, N) for N in Ns]
            fit = fit_power_law(GapSeries(p, Ns, gaps))
            out[f"exponent_n{n}"] = fit.exponent_or_rate
            ok &= abs(fit.exponent_or_rate + 0.5) <= 0.05
        return ok, out

    return _timed(4, title, body)


def criterion_5(quick: bool = False) -> CriterionResult:
    title = "strong-field renormalized gap linear in N"
    if quick:
        return _skipped(5, title)

    def body():
        p = ModelParams(1, 2.0, 1.0)
        Ns = _geometric(100, 2, 5)
        lam = np.array([solve_renormalized(p, N).eigenvalues[1] for N in Ns])
        per_N = lam / np.array(Ns)
        spread = float(per_N.max() / per_N.min())
        sgi = [transfer_constants(l, N, p).sgi for l, N in zip(lam, Ns)]
        verdict = fit_constant(GapSeries(p, Ns, sgi))
        return spread <= 1.3 and bool(verdict.passed), {
            "eig_over_N_spread": spread, "sgi_first": sgi[0], "sgi_last": sgi[-1],
            "sgi_constant": verdict.passed}

    return _timed(5, title, body)


def criterion_6(quick: bool = False) -> CriterionResult:
    title = "critical-field growth exponent"
    if quick:
        return _skipped(6, title)

    def body():
        p = ModelParams(1, 2.0, critical_field(2.0))
        Ns = _geometric(100, 2, 6)
        lam = [solve_renormalized(p, N).eigenvalues[1] for N in Ns]
        fit = fit_power_law(GapSeries(p, Ns, lam))
        return fit.exponent_or_rate >= 2.0 / 3.0 - 0.05, {"exponent": fit.exponent_or_rate}

    return _timed(6, title, body)


def criterion_7(quick: bool = False) -> CriterionResult:
    title = "supercritical radial gap linear in N"
    if quick:
        return _skipped(7, title)

    def body():
        p = ModelParams(2, 10.0, 0.0)
        Ns = _geometric(50, 2, 6)
        lam = [solve_renormalized(p, N, ell=0).eigenvalues[1] for N in Ns]
        fit = fit_power_law(GapSeries(p, Ns, lam))
        return abs(fit.exponent_or_rate - 1.0) <= 0.07, {"exponent": fit.exponent_or_rate}

    return _timed(7, title, body)


def criterion_8(quick: bool = False) -> CriterionResult:
    def body():
        out = {}
        s1 = solve_polynomial(limit_operator(ModelParams(1, 1.0, 0.0), "critical_temperature_n"))
        out["S1_lowest"] = float(s1.eigenvalues[0])
        ok = abs(s1.eigenvalues[0]) <= 1e-5
        for n in (2, 3):
            spec = limit_operator(ModelParams(n, float(n), 0.0), "critical_temperature_n")
            e0 = float(solve_radial(n, 0, spec).eigenvalues[0])
            out[f"S{n}0_lowest"] = e0
            ok &= abs(e0) <= 1e-5
        lows = []
        for beta in (1.5, 2.0, 3.0, 4.0):
            spec = limit_operator(ModelParams(1, beta, 0.0), "critical_field_inflection")
            lows.append(float(solve_polynomial(spec).eigenvalues[0]))
        out["Sphi_min_lowest"] = min(lows)
        ok &= min(lows) > 0.01
        return ok, out

    return _timed(8, "zero modes and positive inflection spectrum", body)


def criterion_9(quick: bool = False) -> CriterionResult:
    def body():
        out, ok = {}, True
        for beta, h, N in ((0.5, 0.0, 100), (2.0, 1.0, 200), (2.0, 0.0, 100)):
            rep = sandwich_check(N, ModelParams(1, beta, h))
            out[f"c/B({beta:g},{h:g},{N})"] = rep.c / rep.B
            ok &= rep.passed
        return ok, out

    return _timed(9, "Muckenhoupt sandwich", body)


def criterion_10(quick: bool = False) -> CriterionResult:
    def body():
        p = ModelParams(1, 2.0, 0.8)
        g = lambda t: np.tanh(2.0 * t + 0.8)  # noqa: E731
        scaled = []
        for N in (100, 200, 400):
            exact = expect_nu(RenormalizedMeasure(p, N), g)
            scaled.append(abs(exact - laplace_expectation(p, N, g).value) * N * N)
        ratios = [scaled[i + 1] / scaled[i] for i in range(2)]
        ok = all(0.7 <= r <= 1.4 for r in ratios)
        return ok, {"ratio_1": ratios[0], "ratio_2": ratios[1], "scaled_residual": scaled[-1]}

    return _timed(10, "Laplace expansion residual is O(1/N^2)", body)


def _property_checks() -> dict[str, bool]:
    checks = {}
    r = np.logspace(-3, 3, 400)
    mono = True
    for n in range(2, 9):
        nu = n / 2.0 - 1.0
        script_i = r / bessel_ratio(nu, r)
        mono &= bool(np.all(np.diff(script_i) > 0))
    checks["bessel_ratio_monotone"] = mono
    z = np.logspace(-2, 2.5, 60)
    tur = True
    for n in range(2, 9):
        a = log_bessel_i(n / 2.0, z)
        tur &= bool(np.all(2 * a > log_bessel_i(n / 2.0 - 1, z) + log_bessel_i(n / 2.0 + 1, z)))
    checks["turan"] = tur

    rng = np.random.default_rng(7)
    fd_ok = True
    for n, beta, h in ((1, 2.0, 0.3), (2, 3.0, 0.0), (3, 5.0, 0.7)):
        p = ModelParams(n, beta, h)
        for _ in range(5):
            x = rng.uniform(-1.5, 1.5, n)
            eps = 1e-5
            g = grad_V(p, x)
            H = hess_V(p, x)
            for i in range(n):
                e = np.zeros(n)
                e[i] = eps
                fd = (eval_V(p, x + e) - eval_V(p, x - e)) / (2 * eps)
                fd_ok &= abs(float(fd) - float(np.ravel(g)[i])) < 1e-7
                fdh = (grad_V(p, x + e) - grad_V(p, x - e)) / (2 * eps)
                fd_ok &= bool(np.allclose(np.ravel(fdh), np.asarray(H)[:, i], atol=1e-6))
    checks["gradient_hessian_fd"] = fd_ok

    osc = solve_polynomial(OperatorSpec(coeffs=(0.0, 0.0, 1.0)), basis=OscillatorBasis(64), k=5)
    checks["oscillator_2n_plus_1"] = bool(np.allclose(osc.eigenvalues, [1, 3, 5, 7, 9],
                                                      atol=1e-10))

    nv = max(null_vector_residual(ModelParams(1, 2.0, 0.0), 200),
             null_vector_residual(ModelParams(2, 10.0, 0.0), 100))
    checks["null_vector"] = nv <= 1e-6

    dec = True
    for beta, h, N in ((0.5, 0.0, 6), (2.0, 0.3, 10), (1.0, 0.2, 8)):
        ch = MagnetizationChain(N, beta, h)
        pi = np.exp(ch.log_pi)
        S = 2 * ch.up_counts - N
        for f in (lambda s: s, lambda s: s ** 2 + 0.3 * s ** 3):
            fv = f(S)
            var = float(np.sum(pi * fv * fv) - np.sum(pi * fv) ** 2)
            a, b = variance_decomposition(ModelParams(1, beta, h), N, f)
            dec &= abs(var - (a + b)) <= 1e-8 * max(1.0, var)
    checks["variance_decomposition"] = dec

    sym = True
    for N in (7, 10, 501):
        lw = MagnetizationChain(N, 2.0, 0.0).log_weights
        sym &= bool(np.array_equal(lw, lw[::-1]))
    checks["eta_symmetry"] = sym

    N, beta = 10, 2.0
    lhs, dirichlet = fourier_parts(N, beta, {(x,): N ** -0.5 for x in range(N)})
    m2 = RenormalizedMeasure(ModelParams(1, beta, 0.0), N).expect(lambda t: np.tanh(beta * t) ** 2)
    checks["magnetization_variance"] = abs(lhs - N * m2) <= 1e-8
    checks["magnetization_dirichlet"] = abs(dirichlet - 4.0) <= 1e-12
    return checks


def criterion_11(quick: bool = False) -> CriterionResult:
    def body():
        checks = _property_checks()
        return all(checks.values()), checks

    return _timed(11, "property suites", body)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11)


def run_all(quick: bool = False, only: list[int] | None = None, echo=None) -> list[CriterionResult]:
    results = []
    for k, crit in enumerate(CRITERIA, start=1):
        if only and k not in only:
            continue
        res = crit(quick=quick)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
