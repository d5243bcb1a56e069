"""Channel descriptions: MIMO correlation grids, transmit-separable structure,
delay-spread taps, and the power-constraint settings.

Fading is independent across antenna pairs (and across delay taps); each pair
carries its own autocorrelation model.  Everything here is immutable and
validated at construction, so downstream code can assume spectral validity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autocorr import (
    GaussMarkov,
    SpectralValidityError,
    corr_stats,
    information_rate,
    is_ephemeral,
    validate_psd,
)

# Extra probe lags used by the separability test when a model has unbounded
# support; 64 covers Gauss-Markov a <= 0.9 down to |R| ~ 1e-3.  Configurable
# per call.
GM_PROBE_LAGS = 64


@dataclass(frozen=True)
class MimoChannelSpec:
    """Grid of fading correlations, one model per (transmit, receive) pair.

    models[k][l] is the correlation of the fading between transmit antenna k
    and receive antenna l.  Every entry must pass the spectral check.
    """

    models: tuple
    psd_grid_points: int = field(default=1024, compare=False)

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.models)
        if len(rows) == 0 or len(rows[0]) == 0:
            raise ValueError("channel grid must have at least one transmit and one receive antenna")
        nr = len(rows[0])
        for k, row in enumerate(rows):
            if len(row) != nr:
                raise ValueError(f"channel grid is ragged: row {k} has {len(row)} entries, expected {nr}")
            for l, model in enumerate(row):
                chk = validate_psd(model, self.psd_grid_points)
                if not chk.ok:
                    raise SpectralValidityError(f"channel model ({k},{l}): {chk.message()}")
        object.__setattr__(self, "models", rows)

    @property
    def nt(self) -> int:
        return len(self.models)

    @property
    def nr(self) -> int:
        return len(self.models[0])

    def model(self, k: int, l: int):
        return self.models[k][l]

    def r0_matrix(self) -> np.ndarray:
        return np.array([[float(m.r0) for m in row] for row in self.models])

    def phi_matrix(self) -> np.ndarray:
        return np.array([[corr_stats(m).phi for m in row] for row in self.models])

    def lam_matrix(self) -> np.ndarray:
        return np.array([[corr_stats(m).lam for m in row] for row in self.models])

    def info_matrix(self, rho: float, quad_points: int = 4096) -> np.ndarray:
        """Per-pair information rates I_{k,l}(rho)."""
        return np.array([[information_rate(m, rho, quad_points) for m in row]
                         for row in self.models])


@dataclass(frozen=True)
class SeparableStructure:
    """Transmit-separable factorization: pair (k,l) carries alphas[k] * R_l(n).

    The factorization is scale-ambiguous; detection canonicalizes to
    alphas[0] = 1 with R_l taken from the first transmit row.  All bound
    formulas depend only on products alpha_k * R_l, so any consistent scale
    gives the same values.
    """

    alphas: tuple
    receive_models: tuple

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        if len(alphas) == 0 or len(self.receive_models) == 0:
            raise ValueError("separable structure needs at least one antenna on each side")
        if any(a < 0 or not np.isfinite(a) for a in alphas):
            raise ValueError(f"per-antenna gains must be finite and nonnegative, got {alphas}")
        if max(alphas) <= 0.0:
            raise ValueError("at least one per-antenna gain must be positive")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "receive_models", tuple(self.receive_models))

    @property
    def nt(self) -> int:
        return len(self.alphas)

    @property
    def nr(self) -> int:
        return len(self.receive_models)

    @property
    def alpha_max(self) -> float:
        return max(self.alphas)

    @property
    def alpha_sum(self) -> float:
        return float(sum(self.alphas))

    def expand(self) -> MimoChannelSpec:
        """Materialize the full correlation grid alphas[k] * R_l."""
        if min(self.alphas) <= 0.0:
            raise ValueError("cannot expand a structure with a zero gain: "
                             "the scaled model would have R(0) = 0")
        return MimoChannelSpec(tuple(
            tuple(m.scaled(a) for m in self.receive_models) for a in self.alphas))


@dataclass(frozen=True)
class DelaySpreadSpec:
    """Frequency-selective scalar channel with independent fading taps."""

    taps: tuple

    def __post_init__(self):
        taps = tuple(self.taps)
        if len(taps) == 0:
            raise ValueError("delay-spread channel needs at least one tap")
        for k, tap in enumerate(taps):
            chk = validate_psd(tap)
            if not chk.ok:
                raise SpectralValidityError(f"delay tap {k}: {chk.message()}")
        object.__setattr__(self, "taps", taps)

    @property
    def ntaps(self) -> int:
        return len(self.taps)


@dataclass(frozen=True)
class PowerConstraints:
    """Peak/average power constraint settings.

    mode selects whether the constraints apply to the sum over transmit
    antennas or to each antenna individually.  beta >= 1 is the
    peak-to-average ratio; beta = 1 means the average constraint is inactive.
    """

    mode: str = "sum"
    beta: float = 1.0

    def __post_init__(self):
        if self.mode not in ("sum", "individual"):
            raise ValueError(f"constraint mode must be 'sum' or 'individual', got {self.mode!r}")
        if not self.beta >= 1.0:
            raise ValueError(f"peak-to-average ratio beta must be >= 1, got {self.beta}")


@dataclass(frozen=True)
class ChannelClassification:
    """Per-pair ephemeral flags plus the channel-level verdict."""

    ephemeral: tuple
    channel_nonephemeral: bool


def detect_transmit_separable(spec: MimoChannelSpec, tol: float = 1e-9,
                              gm_probe_lags: int = GM_PROBE_LAGS):
    """Detect a transmit-separable factorization of the correlation grid.

    Canonicalizes R_l to the first transmit row and the candidate gain
    alphas[k] to R_{k,0}(0) / R_{0,0}(0), then verifies
    |R_{k,l}(n) - alphas[k] R_l(n)| <= tol * R_{0,0}(0) on every probe lag.
    Probe lags cover the union of finite supports, extended by gm_probe_lags
    when any model decays geometrically.  Returns None when no exact
    factorization exists within tolerance.
    """
    max_lag = 0
    any_gm = False
    for row in spec.models:
        for m in row:
            if isinstance(m, GaussMarkov):
                any_gm = True
            else:
                max_lag = max(max_lag, m.support)
    if any_gm:
        max_lag = max(max_lag, gm_probe_lags)
    lags = np.arange(max_lag + 1)

    base_row = spec.models[0]
    scale = float(base_row[0].r0)
    ref = np.array([m.autocorr_seq(lags) for m in base_row])  # (nr, lags)
    alphas = []
    for k in range(spec.nt):
        alpha = float(spec.models[k][0].r0) / scale
        got = np.array([m.autocorr_seq(lags) for m in spec.models[k]])
        if np.max(np.abs(got - alpha * ref)) > tol * scale:
            return None
        alphas.append(alpha)
    return SeparableStructure(tuple(alphas), base_row)


def classify_channel(spec: MimoChannelSpec) -> ChannelClassification:
    """Classify each pair as ephemeral or not; the channel is nonephemeral
    only when every constituent fading process is nonephemeral."""
    flags = tuple(tuple(is_ephemeral(m) for m in row) for row in spec.models)
    noneph = not any(f for row in flags for f in row)
    return ChannelClassification(ephemeral=flags, channel_nonephemeral=noneph)


def ds_to_miso(ds: DelaySpreadSpec) -> MimoChannelSpec:
    """Map a delay-spread channel to the multi-antenna channel with one
    transmit antenna per tap and a single receive antenna.

    The scalar channel additionally ties the per-antenna inputs to shifted
    copies of one sequence; that tie is NOT encoded in the returned spec, so
    capacity upper bounds computed for it remain valid upper bounds for the
    delay-spread channel, but are not tight in general.  Tap models are
    shared, not copied, so their statistics carry over exactly.
    """
    return MimoChannelSpec(tuple((tap,) for tap in ds.taps))
