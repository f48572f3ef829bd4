import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from meanfield_spectra.ising import MagnetizationChain
from meanfield_spectra.measures import (
    RenormalizedMeasure,
    expect_nu,
    fluct_mean_spin,
    laplace_expectation,
    laplace_variance,
    log_integrate,
    magnetization_gap_bound,
    variance_decomposition,
)
from meanfield_spectra.potential import (
    ModelParams,
    RegimeError,
    critical_points,
    eval_V,
    grad_V,
    profile_d2V,
)
from meanfield_spectra.specialfn import bessel_ratio


def quad_expect(params, N, g, radial=False, lo=-10.0, hi=10.0):
    """Plain adaptive quadrature oracle, shifted by the potential minimum."""
    vmin = min(cp.value for cp in critical_points(params))

    def dens(t):
        d = np.exp(-N * (float(eval_V(params, _embed(params, t))) - vmin))
        return d * t ** (params.n - 1) if radial else d

    pts = sorted({cp.coordinate for cp in critical_points(params)})
    kw = dict(points=[p for p in pts if lo < p < hi], limit=400, epsabs=0, epsrel=1e-12)
    z, _ = integrate.quad(dens, lo, hi, **kw)
    num, _ = integrate.quad(lambda t: dens(t) * g(t), lo, hi, **kw)
    return num / z


def _embed(params, t):
    if params.n == 1:
        return t
    x = np.zeros(params.n)
    x[0] = t
    return x


@pytest.mark.parametrize("beta,h,N", [(0.5, 0.0, 10), (2.0, 0.3, 50), (1.0, 0.0, 200),
                                      (2.0, 0.0, 100)])
def test_expectations_match_quad(beta, h, N):
    p = ModelParams(1, beta, h)
    nu = RenormalizedMeasure(p, N)
    assert nu.expect(lambda t: np.ones_like(t)) == pytest.approx(1.0, abs=1e-12)
    for g in (lambda t: t, lambda t: np.tanh(beta * t + h) ** 2, lambda t: np.cos(3 * t)):
        assert expect_nu(nu, g) == pytest.approx(quad_expect(p, N, g), rel=1e-8, abs=1e-12)


@pytest.mark.parametrize("n,beta,N", [(2, 1.0, 20), (3, 5.0, 40), (2, 2.0, 300)])
def test_radial_expectations_match_quad(n, beta, N):
    p = ModelParams(n, beta)
    nu = RenormalizedMeasure(p, N)
    assert nu.radial and nu.lo == 0.0
    g = lambda r: r ** 2
    ref = quad_expect(p, N, g, radial=True, lo=0.0, hi=10.0)
    assert nu.expect(g) == pytest.approx(ref, rel=1e-8)


def test_symmetric_measure_has_zero_mean():
    nu = RenormalizedMeasure(ModelParams(1, 2.0), 300)
    assert abs(nu.expect(lambda t: t)) < 1e-12
    assert abs(nu.expect(lambda t: t ** 3)) < 1e-12


def test_no_underflow_at_large_N():
    nu = RenormalizedMeasure(ModelParams(1, 2.0, 0.1), 50_000)
    assert np.isfinite(nu.log_normalizer)
    assert nu.expect(lambda t: np.ones_like(t)) == pytest.approx(1.0, abs=1e-12)


def test_tail_cutoff_insensitive():
    p = ModelParams(1, 1.5, 0.2)
    a = RenormalizedMeasure(p, 80)
    b = RenormalizedMeasure(p, 80, tail=75.0)
    assert b.hi > a.hi and b.lo < a.lo
    for g in (lambda t: t, lambda t: t * t):
        assert a.expect(g) == pytest.approx(b.expect(g), abs=1e-10)


def test_median_bracket():
    nu = RenormalizedMeasure(ModelParams(1, 2.0, 0.05), 60)
    m = nu.median()
    assert abs(np.exp(nu.log_mass_below(m)) - 0.5) < 1e-6
    assert nu.log_mass_below(nu.lo - 1) == -np.inf


def test_log_integrate_gaussian():
    val = log_integrate(lambda x: -0.5 * x * x, -12.0, 12.0, 0.2)
    assert val == pytest.approx(0.5 * np.log(2 * np.pi), abs=1e-12)


def test_field_rejected_for_vector_models():
    with pytest.raises(RegimeError):
        RenormalizedMeasure(ModelParams(2, 1.0, 0.3), 10)
    with pytest.raises(ValueError):
        RenormalizedMeasure(ModelParams(1, 1.0), 0)


def test_critical_tanh_squared_scaling():
    Ns = np.array([1e3, 1e4, 1e5, 1e6])
    vals = [RenormalizedMeasure(ModelParams(1, 1.0), N).expect(lambda t: np.tanh(t) ** 2)
            for N in Ns]
    slope = np.polyfit(np.log(Ns), np.log(vals), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.03)


# -- Laplace ---------------------------------------------------------------------------

def test_laplace_constant():
    p = ModelParams(1, 2.0, 0.8)
    e = laplace_expectation(p, 100, lambda t: 3.0 + 0 * t)
    assert e.value == pytest.approx(3.0, abs=1e-8)
    assert laplace_variance(p, 100, lambda t: 3.0 + 0 * t) == pytest.approx(0.0, abs=1e-12)


def test_laplace_residual_second_order():
    p = ModelParams(1, 2.0, 0.8)
    g = lambda t: np.tanh(2.0 * t + 0.8)
    Ns = np.array([100, 200, 400])
    res = [abs(RenormalizedMeasure(p, N).expect(g) - laplace_expectation(p, N, g).value)
           for N in Ns]
    slope = np.polyfit(np.log(Ns), np.log(res), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.15)


def test_laplace_variance_leading_term():
    p = ModelParams(1, 2.0, 0.8)
    x0 = [cp.coordinate for cp in critical_points(p) if cp.kind == "minimum"][0]
    N = 4000
    nvar = N * RenormalizedMeasure(p, N).variance(lambda t: t)
    assert nvar == pytest.approx(1.0 / float(profile_d2V(p, x0)), rel=2e-3)
    assert N * laplace_variance(p, N, lambda t: t) == pytest.approx(1.0 / float(profile_d2V(p, x0)),
                                                                     rel=1e-8)


def test_laplace_rejects_degenerate_or_tied_minimum():
    with pytest.raises(RegimeError):
        laplace_expectation(ModelParams(1, 1.0), 100, np.tanh)
    with pytest.raises(RegimeError):
        laplace_expectation(ModelParams(1, 2.0), 100, np.tanh)


# -- fluctuation measure -----------------------------------------------------------------

def test_mean_spin_values():
    assert fluct_mean_spin(ModelParams(1, 3.0), 0.0) == 0.0
    np.testing.assert_array_equal(fluct_mean_spin(ModelParams(3, 2.0), np.zeros(3)), np.zeros(3))
    p = ModelParams(2, 10.0)
    rmin = [cp.coordinate for cp in critical_points(p) if cp.kind == "minimum"][0]
    m = fluct_mean_spin(p, np.array([rmin, 0.0]))
    assert np.linalg.norm(m) < 1
    assert np.linalg.norm(m) == pytest.approx(bessel_ratio(0.0, 10.0 * rmin), rel=1e-14)
    assert np.linalg.norm(m) == pytest.approx(rmin, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 4), beta=st.floats(0.2, 8.0), seed=st.integers(0, 10 ** 6))
def test_gradient_identity(n, beta, seed):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=n) * 0.5
    p = ModelParams(n, beta, h)
    phi = rng.normal(size=n)
    lhs = beta * (phi - fluct_mean_spin(p, phi))
    np.testing.assert_allclose(lhs, grad_V(p, phi).reshape(lhs.shape), rtol=1e-9, atol=1e-12)


def test_mean_spin_bessel_ratio_via_quadrature():
    # E over the uniform sphere of sigma_1 exp(beta <phi, sigma>), n = 3
    beta, r = 2.0, 0.7
    z = beta * r
    num = integrate.quad(lambda c: c * np.exp(z * c), -1, 1)[0]
    den = integrate.quad(lambda c: np.exp(z * c), -1, 1)[0]
    m = fluct_mean_spin(ModelParams(3, beta), np.array([r, 0.0, 0.0]))
    assert m[0] == pytest.approx(num / den, rel=1e-12)


# -- magnetization bound -------------------------------------------------------------------

def test_bound_critical_slopes():
    Ns = np.logspace(2, 6, 9)
    for n in (1, 2):
        b = [magnetization_gap_bound(ModelParams(n, float(n)), N) for N in Ns]
        slope = np.polyfit(np.log(Ns), np.log(b), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.03)


def test_bound_supercritical_one_over_N():
    import scipy.optimize as so
    g3 = so.bisect(lambda x: x - np.tanh(2 * x), 0.1, 1, xtol=1e-15)
    N = 1000
    b = magnetization_gap_bound(ModelParams(1, 2.0), N)
    assert b == pytest.approx(0.5 * 4 / (N * np.tanh(2 * g3) ** 2), rel=0.05)


def test_bound_requires_zero_field():
    with pytest.raises(RegimeError):
        magnetization_gap_bound(ModelParams(1, 2.0, 0.1), 100)


@pytest.mark.parametrize("N", [2, 5, 10])
@pytest.mark.parametrize("beta,h", [(0.5, 0.0), (1.0, 0.0), (2.0, 0.2)])
def test_variance_decomposition_matches_chain(N, beta, h):
    f = lambda S: S ** 2 / N - 0.3 * S + 0.1 * S ** 3 / N
    inner, outer = variance_decomposition(ModelParams(1, beta, h), N, f)
    ch = MagnetizationChain(N, beta, h)
    pi = np.exp(ch.log_pi)
    fv = f(N * ch.levels)
    var_rho = np.sum(pi * fv ** 2) - np.sum(pi * fv) ** 2
    assert inner + outer == pytest.approx(var_rho, rel=1e-8)
    assert inner >= 0 and outer >= 0
