import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from pvradar.circumradius import (CircumradiusDistribution, SeriesAccuracyError, arc_length_cdf,
                                  arc_length_cdf_integral, empirical_circumradius_sample)

LAM = 1e-6  # one point per km^2


@pytest.fixture(scope="module")
def d():
    return CircumradiusDistribution(LAM)


@pytest.fixture(scope="module")
def sample():
    return empirical_circumradius_sample(LAM, 10_000, seed=123)


def test_arc_length_law():
    t = np.linspace(0, 1, 101)
    f = arc_length_cdf(t)
    assert f[0] == 0 and f[-1] == 1 and np.all(np.diff(f) >= 0)
    for u in (0.1, 0.3, 0.5, 0.8):
        assert arc_length_cdf_integral(u) == pytest.approx(
            integrate.quad(arc_length_cdf, 0, u, points=[0.5])[0], rel=1e-10)


def test_pdf_nonnegative_on_grid(d):
    r = np.linspace(0, 5 / math.sqrt(LAM), 2001)[1:]
    assert np.all(d.pdf(r) >= 0)
    assert np.all(d.density(r) >= 0)


def test_normalization(d):
    total = integrate.quad(d.pdf, 0, 5 / math.sqrt(LAM), limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-2)
    assert d.normalization() == pytest.approx(1.0, abs=1e-6)


def test_small_radius_behaviour(d):
    # the one-arc term cancels the leading density, so pdf/(8 pi lam r) -> 0
    r = np.array([5.0, 20.0, 80.0])
    lead = 8 * math.pi * LAM * r
    ratio = d.pdf(r) / lead
    assert np.all(ratio < 1e-3)
    assert ratio[0] < ratio[1] < ratio[2]


def test_cdf_bounds_and_monotone(d):
    r = np.linspace(0, 6 / math.sqrt(LAM), 3001)
    c = d.cdf(r)
    assert d.cdf(0.0) == 0.0
    assert np.all(np.diff(c) >= 0) and c.min() >= 0 and c.max() <= 1
    assert d.cdf(5 / math.sqrt(LAM)) >= 0.999


def test_cdf_matches_integrated_pdf(d):
    for r in (300.0, 700.0, 1200.0):
        assert d.cdf(r) == pytest.approx(integrate.quad(d.pdf, 0, r, limit=200)[0], abs=1e-5)


def test_quantile_inverts_cdf(d):
    p = np.array([0.01, 0.25, 0.5, 0.9, 0.999])
    np.testing.assert_allclose(d.cdf(d.quantile(p)), p, atol=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-8, 1e-4), st.floats(0.2, 4.0))
def test_scale_invariance(lam2, rho):
    a, b = CircumradiusDistribution(LAM), CircumradiusDistribution(lam2)
    k = math.sqrt(LAM / lam2)
    r = rho / math.sqrt(LAM)
    assert a.pdf(r) == pytest.approx(k * b.pdf(r * k), rel=1e-6, abs=1e-300)


def test_series_accuracy_error():
    with pytest.raises(SeriesAccuracyError):
        CircumradiusDistribution(LAM, series_terms=1).pdf(500.0)


@pytest.mark.parametrize("kw", [dict(intensity=0), dict(intensity=LAM, series_terms=0),
                                dict(intensity=LAM, simplex_samples=0),
                                dict(intensity=LAM, diff_step=0)])
def test_invalid_parameters(kw):
    with pytest.raises(ValueError):
        CircumradiusDistribution(**kw)


def test_empirical_sample_positive(sample):
    assert len(sample) == 10_000 and np.all(sample > 0)


def test_empirical_agreement(d, sample):
    ks = stats.kstest(sample, d.cdf).statistic
    assert ks <= 0.02
    assert d.quantile(0.5) == pytest.approx(np.median(sample), rel=0.02)


def test_empirical_scaling(sample):
    lam2 = 4 * LAM
    other = empirical_circumradius_sample(lam2, 5_000, seed=9)
    rescaled = other * math.sqrt(lam2 / LAM)
    assert stats.ks_2samp(sample, rescaled).pvalue > 1e-3


def test_empirical_mean_stable_across_seeds():
    means = [empirical_circumradius_sample(LAM, 2_000, seed=s) for s in (1, 2)]
    se = math.hypot(*(m.std(ddof=1) / math.sqrt(len(m)) for m in means))
    assert abs(means[0].mean() - means[1].mean()) < 3 * se


def test_empirical_rejects_bad_count():
    with pytest.raises(ValueError):
        empirical_circumradius_sample(LAM, 0)


def test_expectation_helper(d):
    mean, err = d.expect(lambda r: r)
    assert err < 1e-3
    assert mean == pytest.approx(integrate.quad(lambda r: r * d.pdf(r), 0, 5e3, limit=200)[0],
                                 rel=1e-4)
