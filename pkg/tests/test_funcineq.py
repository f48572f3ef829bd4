import numpy as np
import pytest
from scipy import integrate

from meanfield_spectra.funcineq import (
    INEQ_CSV_COLUMNS,
    K1,
    bobkov_gotze,
    ineq_constants,
    muckenhoupt,
    sandwich_check,
    transfer_constants,
)
from meanfield_spectra.measures import RenormalizedMeasure
from meanfield_spectra.potential import ModelParams, RegimeError, eval_V, well_depth


def brute_force(N, params, lo=-4.0, hi=4.0, m=400_001):
    """Dense-grid oracle: trapezoid integrals accumulated away from the split point."""
    x = np.linspace(lo, hi, m)
    V = eval_V(params, x)
    p = np.exp(-N * (V - V.min()))
    p = p / np.trapezoid(p, x)
    F = integrate.cumulative_trapezoid(p, x, initial=0.0)
    j = int(np.argmin(np.abs(F - 0.5)))
    # every integral starts where it is small, so nothing cancels
    mass_left = F[:j]
    mass_right = integrate.cumulative_trapezoid(p[::-1], x[::-1], initial=0.0)[::-1][j + 1:]
    mass_right = -mass_right
    inv_left = -integrate.cumulative_trapezoid(1 / p[j::-1], x[j::-1], initial=0.0)[::-1][:-1]
    inv_right = integrate.cumulative_trapezoid(1 / p[j:], x[j:], initial=0.0)[1:]

    def ent(mu):
        return -mu * np.log(np.where(mu > 0, mu, 1.0))

    return (np.max(mass_left * inv_left), np.max(mass_right * inv_right),
            np.max(ent(mass_left) * inv_left), np.max(ent(mass_right) * inv_right))


@pytest.mark.parametrize("beta,h,N", [(0.5, 0.0, 20), (2.0, 0.1, 15), (1.0, 0.0, 30)])
def test_constants_match_dense_grid(beta, h, N):
    p = ModelParams(1, beta, h)
    c = ineq_constants(N, p)
    ref = brute_force(N, p)
    np.testing.assert_allclose([c.B0, c.B1, c.D0, c.D1], ref, rtol=2e-3)


def test_symmetric_sides_agree():
    c = ineq_constants(100, ModelParams(1, 2.0))
    assert c.B0 / c.B1 == pytest.approx(1.0, abs=0.01)
    assert c.log_D0 - c.log_D1 == pytest.approx(0.0, abs=0.01)


def test_median_bracket():
    p = ModelParams(1, 2.0, 0.05)
    c = ineq_constants(60, p)
    nu = RenormalizedMeasure(p, 60)
    assert abs(np.exp(nu.log_mass_below(c.split_point)) - 0.5) <= 1e-6


def test_split_at_minimum():
    p = ModelParams(1, 0.8, 0.02)
    c = ineq_constants(50, p, split="min")
    med = ineq_constants(50, p)
    assert c.B == pytest.approx(med.B, rel=0.5)
    with pytest.raises(RegimeError):
        ineq_constants(50, ModelParams(1, 1.5, 0.0), split="min")


def test_monotone_refinement():
    p = ModelParams(1, 2.0, 0.2)
    coarse = ineq_constants(80, p, npts=501, refine=False)
    fine = ineq_constants(80, p, npts=1001, refine=False)  # contains every coarse point
    refined = ineq_constants(80, p, npts=1001, refine=True)
    for name in ("log_B0", "log_B1", "log_D0", "log_D1"):
        a, b, r = getattr(coarse, name), getattr(fine, name), getattr(refined, name)
        assert a <= b + 1e-12 <= r + 2e-12


@pytest.mark.parametrize("beta,h,N", [(0.5, 0.0, 100), (2.0, 0.0, 100), (2.0, 1.0, 200),
                                      (3.0, 0.3, 150), (2.0, 0.1, 200)])
def test_sandwich(beta, h, N):
    rep = sandwich_check(N, ModelParams(1, beta, h))
    assert rep.passed, rep


def test_sandwich_scales():
    strong = sandwich_check(200, ModelParams(1, 2.0, 1.0))
    assert strong.c * 200 < 10  # c = Theta(1/N)
    double = sandwich_check(100, ModelParams(1, 2.0, 0.0))
    assert double.log_c > 20  # exponentially large


@pytest.mark.parametrize("beta,h,N", [(0.5, 0.0, 100), (2.0, 0.0, 100), (3.0, 0.3, 150)])
def test_lsi_implies_sgi(beta, h, N):
    c = ineq_constants(N, ModelParams(1, beta, h))
    lsi_gap = 1.0 / (K1 * (c.D0 + c.D1))
    assert lsi_gap <= 4 * c.B * 1.05


def test_exponential_rate_matches_depth():
    depth = well_depth(ModelParams(1, 2.0))
    Ns = np.array([50, 100, 200, 400])
    cs = [ineq_constants(N, ModelParams(1, 2.0)) for N in Ns]
    slope_B = np.polyfit(Ns, [c.log_B for c in cs], 1)[0]
    slope_D = np.polyfit(Ns, [c.log_D for c in cs], 1)[0]
    assert slope_B == pytest.approx(depth, rel=0.15)
    assert slope_D == pytest.approx(depth, rel=0.15)


def test_field_suppresses_right_side():
    gaps = [ineq_constants(N, ModelParams(1, 2.0, 0.3)) for N in (50, 100, 200)]
    diffs = [c.log_D0 - c.log_D1 for c in gaps]
    assert diffs[0] > 0 and np.all(np.diff(diffs) > 0)


def test_subcritical_B_scale():
    # the generator gap grows like N here, so N * B is the N-stable quantity
    vals = [N * muckenhoupt(N, ModelParams(1, 0.5)).B for N in (100, 200, 400)]
    assert max(vals) / min(vals) < 1.2


def test_critical_D_subexponential():
    ratios = [bobkov_gotze(N, ModelParams(1, 1.0)).log_D / N for N in (100, 400, 1600)]
    assert abs(ratios[-1]) < abs(ratios[0])
    assert abs(ratios[-1]) < 0.01


def test_vector_model_rejected():
    with pytest.raises(RegimeError):
        ineq_constants(50, ModelParams(2, 1.0))


def test_transfer_formulas():
    p = ModelParams(1, 2.0)
    big = transfer_constants(1e300, 100, p)
    assert big.sgi == pytest.approx(0.25) and big.lsi == pytest.approx(0.5)
    lam = 100 * 0.37
    t = transfer_constants(lam, 100, p)
    assert t.sgi == pytest.approx(0.25 * (1 + 4 * 100 * 4 / lam))
    assert t.lsi == pytest.approx(0.5 * (1 + 8 * 100 * 4 / lam))
    assert transfer_constants(lam, 100, ModelParams(2, 3.0), gamma_n=2.0).sgi == pytest.approx(
        0.5 * (1 + 4 * 100 * 9 / lam))
    with pytest.raises(ValueError):
        transfer_constants(lam, 100, ModelParams(2, 3.0))
    with pytest.raises(ValueError):
        transfer_constants(-1.0, 100, p)


def test_transfer_linear_lambda_gives_bounded_constant():
    sgi = [transfer_constants(3.0 * N, N, ModelParams(3, 6.0), gamma_n=1.0).sgi
           for N in (100, 1000, 10000)]
    np.testing.assert_allclose(sgi, sgi[0], rtol=1e-12)


def test_csv_columns():
    assert INEQ_CSV_COLUMNS[:3] == ("N", "beta", "h")
