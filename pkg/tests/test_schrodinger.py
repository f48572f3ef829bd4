import numpy as np
import pytest

from meanfield_spectra.potential import (
    ModelParams,
    RegimeError,
    critical_field,
    critical_points,
    global_minimum,
    profile_d2V,
)
from meanfield_spectra.schrodinger import (
    SPECTRUM_CSV_COLUMNS,
    ConvergenceError,
    OperatorSpec,
    limit_operator,
    null_vector_residual,
    renormalized_chain,
    s1_figure,
    solve_line_fd,
    solve_polynomial,
    solve_radial,
    solve_renormalized,
    sop_figure,
    spectrum_rows,
)

HARMONIC = OperatorSpec(coeffs=(0.0, 0.0, 1.0))
S1 = OperatorSpec(coeffs=(0, 0, -1.0, 0, 0, 0, 1 / 9))


# -- polynomial operators ----------------------------------------------------------------

def test_harmonic_spectrum():
    res = solve_polynomial(HARMONIC, k=6)
    np.testing.assert_allclose(res.eigenvalues, 2 * np.arange(6) + 1, atol=1e-9)
    assert res.converged and res.drift < 1e-8


def test_s1_zero_mode():
    res = solve_polynomial(S1, k=3)
    assert abs(res.eigenvalues[0]) < 1e-6
    assert res.eigenvalues[1] > 0.5


def test_s1_ground_state_profile():
    # the FD ground state on a grid matches exp(-x^4/12)
    from scipy.linalg import eigh_tridiagonal
    L, m = 8.0, 4000
    x, h = np.linspace(-L, L, m + 2, retstep=True)
    x = x[1:-1]
    d = 2 / h ** 2 + S1.W(x)
    _, vec = eigh_tridiagonal(d, np.full(m - 1, -1 / h ** 2), select="i", select_range=(0, 0))
    v = np.abs(vec[:, 0])
    ref = np.exp(-x ** 4 / 12)
    ref /= np.linalg.norm(ref)
    assert np.max(np.abs(v - ref)) < 1e-5


@pytest.mark.parametrize("beta", [1.1, 2.0, 3.0, 5.0])
def test_inflection_operator_positive(beta):
    spec = limit_operator(ModelParams(1, beta), "critical_field_inflection")
    assert solve_polynomial(spec, k=2).eigenvalues[0] > 0


def test_inflection_coefficients():
    spec = limit_operator(ModelParams(1, 2.0), "critical_field_inflection")
    assert spec.coeffs[4] == pytest.approx(8.0)
    assert spec.coeffs[1] == pytest.approx(4 * np.sqrt(2))


def test_sextic_coefficients_n1():
    spec = limit_operator(ModelParams(1, 1.0), "critical_temperature_n")
    assert spec.domain == "full_line"
    assert spec.coeffs[6] == pytest.approx(1 / 9) and spec.coeffs[2] == pytest.approx(-1.0)


def test_rmin_operator_coefficients():
    p = ModelParams(2, 10.0)
    r = max(cp.coordinate for cp in critical_points(p))
    d2 = float(profile_d2V(p, r))
    spec = limit_operator(p, "supercritical_radial_rmin")
    assert spec.coeffs[2] == pytest.approx(d2 ** 2) and spec.coeffs[0] == pytest.approx(-d2)
    res = solve_polynomial(spec, k=3)
    np.testing.assert_allclose(res.eigenvalues, 2 * d2 * np.arange(3), atol=1e-8)


def test_limit_operator_errors():
    with pytest.raises(ValueError):
        limit_operator(ModelParams(1, 2.0), "nonsense")
    with pytest.raises(RegimeError):
        limit_operator(ModelParams(1, 0.5), "critical_field_inflection")
    with pytest.raises(RegimeError):
        limit_operator(ModelParams(2, 1.0), "supercritical_radial_0")
    with pytest.raises(RegimeError):
        limit_operator(ModelParams(2, 3.0), "critical_temperature_n")


def test_operator_spec_validation():
    with pytest.raises(ValueError):
        OperatorSpec(coeffs=(0, 0, -1.0))
    with pytest.raises(ValueError):
        OperatorSpec(coeffs=(0, 0, 0, 1.0))
    with pytest.raises(ValueError):
        OperatorSpec(coeffs=(1.0,), potential=np.abs)
    with pytest.raises(ValueError):
        OperatorSpec("half_line", coeffs=(0, 0, 1.0), n=1)
    with pytest.raises(ValueError):
        solve_polynomial(OperatorSpec("half_line", coeffs=(0, 0, 1.0), n=3))


def test_polynomial_nonconvergence_is_reported():
    with pytest.raises(ConvergenceError):
        solve_polynomial(S1, k=5, tol=1e-30, max_size=128)


@pytest.mark.parametrize("spec", [HARMONIC, S1, OperatorSpec(coeffs=(0, 0.7, 0, 0, 1.0)),
                                  OperatorSpec(coeffs=(1.0, 0, -2.0, 0, 0.5))])
def test_fd_and_basis_agree(spec):
    a = solve_polynomial(spec, k=5).eigenvalues
    b = solve_line_fd(spec, k=5, tol=1e-8).eigenvalues
    np.testing.assert_allclose(a, b, atol=1e-5)


# -- radial ---------------------------------------------------------------------------------

def test_isotropic_oscillator_3d():
    res = solve_radial(3, 0, (0.0, 0.0, 1.0), k=3)
    np.testing.assert_allclose(res.eigenvalues, [3, 7, 11], atol=1e-5)


def test_isotropic_oscillator_sectors():
    # n = 2: E = 2(2k + ell) + 2
    for ell in (0, 1, 2):
        res = solve_radial(2, ell, (0.0, 0.0, 1.0), k=2)
        np.testing.assert_allclose(res.eigenvalues, [2 * ell + 2, 2 * ell + 6], atol=1e-5)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sextic_radial_zero_mode_and_sectors(n):
    spec = limit_operator(ModelParams(n, float(n)), "critical_temperature_n")
    lows = [solve_radial(n, ell, spec.coeffs, k=1).eigenvalues[0] for ell in range(4)]
    assert abs(lows[0]) < 1e-5
    assert lows[1] > 0
    assert np.all(np.diff(lows) > 0)


def test_radial_validation():
    with pytest.raises(ValueError):
        solve_radial(1, 0, (0, 0, 1.0))
    with pytest.raises(ValueError):
        solve_radial(3, -1, (0, 0, 1.0))


# -- renormalized operator ---------------------------------------------------------------------

@pytest.mark.parametrize("params,N", [(ModelParams(1, 2.0, 0.0), 200), (ModelParams(1, 1.0), 500),
                                      (ModelParams(3, 6.0), 100), (ModelParams(1, 0.5, 0.4), 50)])
def test_null_vector_certificate(params, N):
    assert null_vector_residual(params, N) < 1e-6


def test_zero_mode_is_exact():
    res = solve_renormalized(ModelParams(1, 2.0, 1.0), 200)
    assert abs(res.eigenvalues[0]) < 1e-6 * 100
    assert res.eigenvalues[1] > 0


def test_renormalized_matches_direct_fd_when_gap_is_large():
    # strong field: compare against finite differences of -d^2 + W on the line
    from meanfield_spectra.schrodinger import renormalized_potential
    p, N = ModelParams(1, 2.0, 1.0), 100
    spec = OperatorSpec(potential=renormalized_potential(p, N))
    x0 = global_minimum(p)
    fd = solve_line_fd(spec, k=3, tol=1e-6, half_width=3.0 + abs(x0))
    ren = solve_renormalized(p, N, k=3)
    np.testing.assert_allclose(ren.eigenvalues[1:], fd.eigenvalues[1:], rtol=1e-5)


def test_strong_field_linear_growth():
    p = ModelParams(1, 2.0, 1.0)
    ratios = [solve_renormalized(p, N).gap / N for N in (50, 100, 200, 400, 800)]
    assert min(ratios) > 0
    assert max(ratios) / min(ratios) < 1.05


def test_critical_field_two_thirds():
    p = ModelParams(1, 2.0, critical_field(2.0))
    Ns = np.array([200, 400, 800, 1600, 3200])
    g = [solve_renormalized(p, N).gap for N in Ns]
    slope = np.polyfit(np.log(Ns), np.log(g), 1)[0]
    assert slope == pytest.approx(2 / 3, abs=0.05)


def test_radial_supercritical_linear_growth():
    p = ModelParams(2, 10.0)
    Ns = np.array([50, 100, 200, 400])
    g = [solve_renormalized(p, N, ell=0).gap for N in Ns]
    slope = np.polyfit(np.log(Ns), np.log(g), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.07)


def test_renormalized_field_rejected_for_vector_models():
    with pytest.raises(RegimeError):
        solve_renormalized(ModelParams(2, 3.0, 0.5), 100)
    with pytest.raises(RegimeError):
        renormalized_chain(ModelParams(3, 3.0, 0.5), 100, 200)


def _residuals(values, target):
    return np.abs(np.asarray(values) - target)


def test_semiclassical_harmonic():
    p = ModelParams(1, 2.0, 1.0)
    d2 = float(profile_d2V(p, global_minimum(p)))
    e = solve_polynomial(OperatorSpec(coeffs=(-d2, 0, d2 * d2)), k=3).eigenvalues
    vals = [solve_renormalized(p, N, k=3).eigenvalues[1:] / (N / 2) for N in (100, 200, 400, 800)]
    res = np.max(_residuals(vals, e[1:]), axis=1)
    assert np.all(np.diff(res) < 0)
    # first correction is O(1/lambda)
    np.testing.assert_allclose(res[1:] / res[:-1], 0.5, atol=0.05)


def test_semiclassical_critical_temperature():
    e = solve_polynomial(limit_operator(ModelParams(1, 1.0), "critical_temperature_n"), k=3).eigenvalues
    vals = [solve_renormalized(ModelParams(1, 1.0), N, k=3).eigenvalues[1:] / np.sqrt(N / 2)
            for N in (100, 400, 1600, 6400)]
    res = np.max(_residuals(vals, e[1:]), axis=1)
    assert np.all(np.diff(res) < 0)
    assert res[-1] < 0.05


def test_semiclassical_inflection():
    f = solve_polynomial(limit_operator(ModelParams(1, 2.0), "critical_field_inflection"),
                         k=2).eigenvalues
    p = ModelParams(1, 2.0, critical_field(2.0))
    vals = [solve_renormalized(p, N, k=3).eigenvalues[1:] / (N / 2) ** (2 / 3)
            for N in (100, 400, 1600, 6400)]
    res = np.max(_residuals(vals, f), axis=1)
    assert np.all(np.diff(res) < 0)
    assert res[-1] < 0.03


# -- figures and rows -------------------------------------------------------------------------

def test_figure_series():
    rows = sop_figure([1.1, 2.0, 5.0], k=5)
    assert len(rows) == 3 and all(len(r) == 6 for r in rows)
    assert all(r[1] > 0 for r in rows)
    s1 = s1_figure([1.0, 10.0, 100.0], k=5)
    assert all(abs(r[1]) < 1e-5 for r in s1)
    assert all(np.all(np.diff(r[1:]) > 0) for r in s1)
    with pytest.raises(ValueError):
        sop_figure([])


def test_spectrum_rows():
    res = solve_polynomial(HARMONIC, k=3)
    rows = spectrum_rows(1.0, res)
    assert [r[1] for r in rows] == [1, 2, 3]
    assert all(len(r) == len(SPECTRUM_CSV_COLUMNS) for r in rows)
