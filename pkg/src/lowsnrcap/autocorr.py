"""Autocorrelation models for stationary Rayleigh fading processes.

Two model families are supported: first-order Gauss-Markov (AR(1)) fading
with geometric correlation decay, and correlation sequences with finite
support given explicitly up to a maximum lag.  Both expose the correlation
sequence R(n), the spectral density S(w), and the derived channel-memory
statistics (phi, lambda) that drive the low-SNR capacity formulas.

All objects are immutable after construction and safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

# Relative slack for spectral nonnegativity: valid spectra may touch zero
# and grid evaluation can land slightly negative through rounding.
PSD_TOLERANCE = 1e-9


class SpectralValidityError(ValueError):
    """Correlation sequence whose spectral density goes negative."""


@dataclass(frozen=True)
class CorrStats:
    """Memory statistics of one fading correlation.

    phi is the total squared correlation at positive lags, sum_{n>=1} |R(n)|^2,
    and lam = R(0)^2 + 2*phi.  Both are dimensionless; lam >= r0^2 always.
    """

    r0: float
    phi: float
    lam: float


@dataclass(frozen=True)
class GaussMarkov:
    """Gauss-Markov (AR(1)) fading correlation R(n) = r0 * a**|n|.

    Args:
        a: correlation coefficient, 0 <= a < 1.  a = 0 gives iid fading.
        r0: fading power R(0) > 0.
    """

    a: float
    r0: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.a < 1.0:
            raise ValueError(f"Gauss-Markov coefficient must satisfy 0 <= a < 1, got {self.a}")
        if not self.r0 > 0.0:
            raise ValueError(f"R(0) must be strictly positive, got {self.r0}")

    def autocorr(self, n: int):
        return self.r0 * self.a ** abs(n)

    def autocorr_seq(self, lags) -> np.ndarray:
        lags = np.abs(np.asarray(lags))
        return self.r0 * self.a ** lags

    def spectral_density(self, omega):
        a = self.a
        return self.r0 * (1.0 - a * a) / (1.0 - 2.0 * a * np.cos(np.asarray(omega, dtype=float)) + a * a)

    def phi(self) -> float:
        # geometric series: sum_{n>=1} (r0 a^n)^2 = a^2 r0^2 / (1 - a^2)
        return (self.a * self.r0) ** 2 / (1.0 - self.a * self.a)

    def scaled(self, c: float) -> "GaussMarkov":
        return GaussMarkov(self.a, c * self.r0)

    def lag_below(self, eps: float) -> int:
        """First lag n such that |R(m)| < eps for every m >= n."""
        if self.r0 < eps:
            return 0
        if self.a == 0.0:
            return 1
        # r0 a^n < eps  <=>  n > log(eps/r0)/log(a)   (log a < 0)
        return int(np.floor(np.log(eps / self.r0) / np.log(self.a))) + 1


@dataclass(frozen=True)
class FiniteSupport:
    """Correlation given by values R(0)..R(L); R(-n) = conj(R(n)) implied.

    R(0) must be real and strictly positive, and |R(n)| <= R(0).  Spectral
    nonnegativity is a separate check (validate_psd): sequences that violate
    it are constructible so they can be diagnosed.
    """

    values: tuple

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        if len(vals) == 0:
            raise ValueError("finite-support correlation needs at least R(0)")
        if vals[0].imag != 0.0 or vals[0].real <= 0.0:
            raise ValueError(f"R(0) must be real and strictly positive, got {vals[0]}")
        r0 = vals[0].real
        for n, v in enumerate(vals):
            if abs(v) > r0 * (1.0 + 1e-12):
                raise ValueError(f"|R({n})| = {abs(v)} exceeds R(0) = {r0}")
        object.__setattr__(self, "values", vals)

    @property
    def r0(self) -> float:
        return self.values[0].real

    @property
    def support(self) -> int:
        """Largest lag with an explicitly stored value."""
        return len(self.values) - 1

    def autocorr(self, n: int) -> complex:
        m = abs(n)
        if m > self.support:
            return 0j
        v = self.values[m]
        return v.conjugate() if n < 0 else v

    def autocorr_seq(self, lags) -> np.ndarray:
        lags = np.asarray(lags)
        vals = np.asarray(self.values)
        m = np.abs(lags)
        out = np.zeros(lags.shape, dtype=complex)
        inside = m <= self.support
        out[inside] = vals[m[inside]]
        np.conjugate(out, where=lags < 0, out=out)
        return out

    def spectral_density(self, omega):
        omega = np.asarray(omega, dtype=float)
        n = np.arange(1, self.support + 1)
        vals = np.asarray(self.values[1:])
        # S(w) = R(0) + 2 Re sum_{n>=1} R(n) e^{-iwn}
        return self.r0 + 2.0 * np.real(np.exp(-1j * np.outer(omega, n)) @ vals).reshape(omega.shape)

    def phi(self) -> float:
        return float(np.sum(np.abs(self.values[1:]) ** 2))

    def scaled(self, c: float) -> "FiniteSupport":
        return FiniteSupport(tuple(c * v for v in self.values))

    def lag_below(self, eps: float) -> int:
        keep = [n for n, v in enumerate(self.values) if abs(v) >= eps]
        return keep[-1] + 1 if keep else 0


def corr_stats(model) -> CorrStats:
    """phi and lambda of a correlation model (exact, no truncation)."""
    phi = float(model.phi())
    r0 = float(model.r0)
    return CorrStats(r0=r0, phi=phi, lam=r0 * r0 + 2.0 * phi)


def is_ephemeral(model) -> bool:
    """True when channel memory is too weak for full-duty signaling to pay off
    asymptotically: 2*phi <= R(0)^2, boundary inclusive."""
    s = corr_stats(model)
    return 2.0 * s.phi <= s.r0 * s.r0


def omega_grid(points: int) -> np.ndarray:
    """Uniform frequency grid covering one full period, on (-pi, pi]."""
    if points < 64:
        raise ValueError(f"need at least 64 grid points, got {points}")
    return -np.pi + TWO_PI * np.arange(1, points + 1) / points


@dataclass(frozen=True)
class PsdCheck:
    """Outcome of the spectral nonnegativity check."""

    ok: bool
    min_value: float
    argmin_omega: float
    tolerance: float

    def message(self) -> str:
        return (f"spectral density reaches {self.min_value:.6g} at "
                f"omega = {self.argmin_omega:.6g} (tolerance {self.tolerance:.3g})")


def validate_psd(model, grid_points: int = 1024) -> PsdCheck:
    """Evaluate S(w) on a uniform grid and flag values below -1e-9 * R(0)."""
    w = omega_grid(grid_points)
    s = np.asarray(model.spectral_density(w), dtype=float)
    i = int(np.argmin(s))
    tol = -PSD_TOLERANCE * float(model.r0)
    return PsdCheck(ok=bool(s[i] >= tol), min_value=float(s[i]),
                    argmin_omega=float(w[i]), tolerance=tol)


def information_rate(model, rho: float, quad_points: int = 4096) -> float:
    """Information rate of observing the fading process at SNR rho.

    Computes (1/2pi) * integral of log(1 + rho*S(w)) over one period with
    the uniform trapezoid rule, which converges spectrally fast here because
    the integrand is smooth and periodic.  Nondecreasing and concave in rho,
    zero at rho = 0.
    """
    if rho < 0.0:
        raise ValueError(f"SNR must be nonnegative, got {rho}")
    w = omega_grid(quad_points)
    s = np.asarray(model.spectral_density(w), dtype=float)
    return float(np.mean(np.log1p(rho * s)))
