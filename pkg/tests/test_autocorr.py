"""Tests for the correlation models and their derived statistics."""

import numpy as np
import pytest

from lowsnrcap import (
    CorrStats,
    FiniteSupport,
    GaussMarkov,
    corr_stats,
    information_rate,
    is_ephemeral,
    validate_psd,
)


def ar1_information_rate(a, rho):
    """Closed form for the Gauss-Markov information rate, used as the
    quadrature oracle.  Validated against high-precision quadrature in
    test_ar1_oracle_identity before anything relies on it."""
    c = 1.0 + a * a + rho * (1.0 - a * a)
    return np.log((c + np.sqrt(c * c - 4.0 * a * a)) / 2.0)


# ---------------------------------------------------------------------------
# correlation evaluation
# ---------------------------------------------------------------------------

def test_autocorr_gauss_markov():
    gm = GaussMarkov(0.5, 1.0)
    assert gm.autocorr(2) == 0.25
    assert gm.autocorr(0) == 1.0
    assert gm.autocorr(-3) == gm.autocorr(3)


def test_autocorr_finite_support_hermitian():
    fs = FiniteSupport([1, 0.5])
    assert fs.autocorr(-1) == 0.5
    assert fs.autocorr(0) == 1.0
    assert fs.autocorr(2) == 0.0
    fsc = FiniteSupport([1.0, 0.3 + 0.2j])
    assert fsc.autocorr(-1) == np.conj(fsc.autocorr(1))
    lags = np.arange(-3, 4)
    seq = fsc.autocorr_seq(lags)
    np.testing.assert_allclose(seq, np.conj(seq[::-1]))


def test_construction_validation():
    with pytest.raises(ValueError):
        GaussMarkov(1.0)
    with pytest.raises(ValueError):
        GaussMarkov(-0.1)
    with pytest.raises(ValueError):
        GaussMarkov(0.5, 0.0)
    with pytest.raises(ValueError):
        FiniteSupport([1.0, 1.2])        # |R(1)| > R(0)
    with pytest.raises(ValueError):
        FiniteSupport([1.0 + 0.5j])      # R(0) not real
    with pytest.raises(ValueError):
        FiniteSupport([-1.0])


# ---------------------------------------------------------------------------
# phi / lambda
# ---------------------------------------------------------------------------

def test_corr_stats_gauss_markov_geometric():
    s = corr_stats(GaussMarkov(0.5, 1.0))
    assert s.phi == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert s.lam == pytest.approx(5.0 / 3.0, rel=1e-15)
    # cross-check the closed form by partial sums
    n = np.arange(1, 201)
    partial = np.sum((0.5 ** n) ** 2)
    assert s.phi == pytest.approx(partial, rel=1e-12)


def test_corr_stats_finite_support():
    s = corr_stats(FiniteSupport([1, 0.5]))
    assert s == CorrStats(r0=1.0, phi=0.25, lam=1.5)
    s = corr_stats(FiniteSupport([1]))
    assert s.phi == 0.0 and s.lam == 1.0


def test_corr_stats_invariants_random():
    rng = np.random.default_rng(1)
    for _ in range(20):
        if rng.random() < 0.5:
            m = GaussMarkov(float(rng.uniform(0, 0.99)), float(rng.uniform(0.1, 3)))
        else:
            r0 = float(rng.uniform(0.1, 3))
            m = FiniteSupport((r0, r0 * 0.4 * np.exp(1j * rng.uniform(0, 2 * np.pi))))
        s = corr_stats(m)
        assert s.phi >= 0.0
        assert s.lam >= s.r0 ** 2


# ---------------------------------------------------------------------------
# spectral density
# ---------------------------------------------------------------------------

def test_spectral_density_values():
    assert GaussMarkov(0.0).spectral_density(0.7) == pytest.approx(1.0)
    assert GaussMarkov(0.5).spectral_density(0.0) == pytest.approx(3.0)
    assert FiniteSupport([1, 0.5]).spectral_density(np.pi) == pytest.approx(0.0, abs=1e-15)


def test_spectral_mean_recovers_r0():
    w = -np.pi + 2 * np.pi * np.arange(1, 4097) / 4096
    for m in (GaussMarkov(0.9, 1.7), GaussMarkov(0.0, 0.4),
              FiniteSupport([2.0, 0.5 - 0.3j, 0.2j])):
        mean = np.mean(m.spectral_density(w))
        assert mean == pytest.approx(float(m.r0), rel=1e-9)


def test_validate_psd():
    assert validate_psd(GaussMarkov(0.9)).ok
    chk = validate_psd(FiniteSupport([1, 0.9]))
    assert not chk.ok
    assert chk.min_value == pytest.approx(-0.8, abs=1e-12)
    assert abs(chk.argmin_omega) == pytest.approx(np.pi, abs=1e-6)
    chk = validate_psd(FiniteSupport([1, 0.5]))
    assert chk.ok
    assert chk.min_value == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        validate_psd(GaussMarkov(0.5), grid_points=32)


# ---------------------------------------------------------------------------
# information rate
# ---------------------------------------------------------------------------

def test_ar1_oracle_identity():
    # validate the closed form against high-precision quadrature before
    # using it as the oracle anywhere else
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    for a, rho in ((0.3, 1.0), (0.9, 0.01), (0.5, 10.0)):
        f = lambda w: mp.log(1 + rho * (1 - a * a) / (1 - 2 * a * mp.cos(w) + a * a))
        quad = float(mp.quad(f, [-mp.pi, 0, mp.pi]) / (2 * mp.pi))
        assert ar1_information_rate(a, rho) == pytest.approx(quad, abs=1e-14)


def test_information_rate_values():
    gm = GaussMarkov(0.5)
    assert information_rate(gm, 0.0) == 0.0
    assert information_rate(GaussMarkov(0.0), 1.0) == pytest.approx(np.log(2), abs=1e-12)
    assert information_rate(gm, 1.0) == pytest.approx(0.6238107163648714, abs=1e-12)


@pytest.mark.parametrize("a", [0.0, 0.3, 0.9])
@pytest.mark.parametrize("rho", [0.01, 1.0, 10.0])
def test_information_rate_matches_closed_form(a, rho):
    got = information_rate(GaussMarkov(a), rho, 4096)
    assert got == pytest.approx(ar1_information_rate(a, rho), abs=1e-10)


def test_information_rate_shape_in_rho():
    rhos = np.linspace(0.0, 4.0, 30)
    for m in (GaussMarkov(0.8, 1.3), FiniteSupport([1.0, 0.4, 0.1])):
        vals = np.array([information_rate(m, r) for r in rhos])
        diffs = np.diff(vals)
        assert np.all(diffs >= -1e-14)                      # nondecreasing
        assert np.all(np.diff(diffs) <= 1e-12)              # concave
        assert np.all(vals <= rhos * float(m.r0) + 1e-12)   # Jensen
    with pytest.raises(ValueError):
        information_rate(GaussMarkov(0.5), -0.1)


# ---------------------------------------------------------------------------
# ephemeral classification
# ---------------------------------------------------------------------------

def test_classify_ephemeral():
    assert is_ephemeral(FiniteSupport([1]))
    assert not is_ephemeral(GaussMarkov(0.9))
    # boundary 2*phi = R(0)^2 counts as ephemeral
    assert is_ephemeral(GaussMarkov(np.sqrt(1.0 / 3.0)))


def test_ephemeral_boundary_flip():
    assert is_ephemeral(GaussMarkov(np.sqrt(1.0 / 3.0 - 1e-6)))
    assert not is_ephemeral(GaussMarkov(np.sqrt(1.0 / 3.0 + 1e-6)))


def test_lag_below():
    gm = GaussMarkov(0.9, 1.0)
    n = gm.lag_below(1e-12)
    assert 0.9 ** n < 1e-12 <= 0.9 ** (n - 1)
    assert GaussMarkov(0.0).lag_below(1e-12) == 1
    assert FiniteSupport([1, 0.5]).lag_below(1e-12) == 2
    assert FiniteSupport([1, 0.5]).lag_below(0.7) == 1
