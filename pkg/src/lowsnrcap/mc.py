"""Monte Carlo mutual-information estimation for on-off tone signaling.

Synthesizes correlated proper-complex-normal fading, samples the on-off FSK
input family (one active antenna under sum constraints; the same gated tone
on all antennas under individual constraints; the scalar tone for delay
spread), and estimates mutual information per channel use from exact Gaussian
hypothesis likelihoods:

    s_i = log p(y|h_i) - log sum_h' P(h') p(y|h')

averaged over independent trials.  Each trial draws from its own
counter-based random stream keyed by (master_seed, trial index), and results
are reduced in trial order, so estimates are bit-identical for any worker
count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular, toeplitz
from scipy.special import logsumexp

from .channel import DelaySpreadSpec, MimoChannelSpec

TWO_PI = 2.0 * np.pi
LOG_PI = float(np.log(np.pi))

# Diagonal jitter escalation for covariance factorization; anything that
# still fails at the last level did not describe a valid process.
JITTER_LEVELS = (0.0, 1e-12, 1e-10)

# Trials per work item; fixed so the partition never depends on worker count.
CHUNK_TRIALS = 1024


class UnsupportedSchemeError(ValueError):
    """MI estimation requested for a phase option without a finite hypothesis set."""


class FactorizationError(RuntimeError):
    """Covariance factorization failed at the maximum jitter level."""


@dataclass(frozen=True)
class InputScheme:
    """On-off tone input description.

    duty is the allocation vector over transmit antennas under sum
    constraints (an element of {a >= 0, sum a <= 1/beta}) or a scalar on
    probability in [0, 1/beta] otherwise.  For the discrete-FSK option the
    tone alphabet size equals the block length.
    """

    constraint_mode: str            # "sum" | "individual" | "delay_spread"
    duty: tuple
    block_length: int
    phase_option: str = "fsk_discrete"   # | "fsk_continuous" | "psk_iid"
    psk_order: int = 4
    beta: float = 1.0

    def __post_init__(self):
        if self.constraint_mode not in ("sum", "individual", "delay_spread"):
            raise ValueError(f"unknown constraint mode {self.constraint_mode!r}")
        if self.phase_option not in ("fsk_discrete", "fsk_continuous", "psk_iid"):
            raise ValueError(f"unknown phase option {self.phase_option!r}")
        if self.block_length < 1:
            raise ValueError(f"block length must be >= 1, got {self.block_length}")
        if self.phase_option == "psk_iid" and self.psk_order < 2:
            raise ValueError(f"PSK order must be >= 2, got {self.psk_order}")
        if not self.beta >= 1.0:
            raise ValueError(f"beta must be >= 1, got {self.beta}")
        cap = 1.0 / self.beta
        slack = 1e-12
        if self.constraint_mode == "sum":
            duty = tuple(float(a) for a in np.atleast_1d(np.asarray(self.duty, dtype=float)))
            if any(a < 0 for a in duty) or sum(duty) > cap + slack:
                raise ValueError(f"duty {duty} outside the allocation region for beta = {self.beta}")
        else:
            duty = (float(np.squeeze(self.duty)),)
            if not 0.0 <= duty[0] <= cap + slack:
                raise ValueError(f"on probability {duty[0]} outside [0, {cap}]")
        object.__setattr__(self, "duty", duty)


@dataclass(frozen=True)
class Hypothesis:
    """Identity of one transmitted block: off, or a tone on an antenna group.

    antenna is the active transmit antenna under sum constraints and None
    when all antennas carry the tone jointly (individual / delay spread).
    theta = 2*pi*tone/N.
    """

    on: bool
    antenna: Optional[int] = None
    tone: Optional[int] = None


@dataclass(frozen=True)
class MiEstimate:
    """Monte Carlo mutual-information estimate, nats per channel use."""

    mi_per_use: float
    std_err: float
    ci95: tuple
    trials: int


def _chol_jitter(mat: np.ndarray) -> np.ndarray:
    for jit in JITTER_LEVELS:
        try:
            return np.linalg.cholesky(mat + jit * np.eye(mat.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise FactorizationError(
        "covariance factorization failed at maximum jitter; the correlation "
        "model is not positive semidefinite")


def sample_fading_block(model, n: int, rng: np.random.Generator, size=None):
    """Draw zero-mean proper complex normal fading with the model's Toeplitz
    covariance; real and imaginary parts each carry variance R(0)/2.

    Returns shape (n,) for size None, else (size, n).
    """
    corr = np.asarray(model.autocorr_seq(np.arange(n)), dtype=complex)
    cov = toeplitz(corr, np.conj(corr))
    chol = _chol_jitter(cov)
    cols = 1 if size is None else int(size)
    zr = rng.standard_normal((n, cols))
    zi = rng.standard_normal((n, cols))
    block = chol @ ((zr + 1j * zi) * np.sqrt(0.5))
    return block[:, 0] if size is None else block.T


def _tone_phases(scheme: InputScheme, rng: np.random.Generator):
    """Draw the phase sequence theta(1..N); returns (tone index or None, phases)."""
    n = scheme.block_length
    steps = np.arange(1, n + 1)
    if scheme.phase_option == "fsk_discrete":
        tone = int(rng.integers(n))
        return tone, TWO_PI * tone / n * steps
    if scheme.phase_option == "fsk_continuous":
        return None, rng.uniform(0.0, TWO_PI) * steps
    return None, TWO_PI / scheme.psk_order * rng.integers(scheme.psk_order, size=n)


def sample_input_block(scheme: InputScheme, nt: int, rng: np.random.Generator):
    """Sample one input block; returns (Hypothesis, Z) with Z of shape (nt, N).

    Active entries are exactly unit modulus, so the peak constraints hold
    with equality; off blocks are all zero.
    """
    n = scheme.block_length
    u = rng.random()
    if scheme.constraint_mode == "sum":
        cum = np.cumsum(scheme.duty)
        if u >= cum[-1]:
            return Hypothesis(on=False), np.zeros((nt, n), dtype=complex)
        antenna = int(np.searchsorted(cum, u, side="right"))
        tone, phases = _tone_phases(scheme, rng)
        z = np.zeros((nt, n), dtype=complex)
        z[antenna] = np.exp(1j * phases)
        return Hypothesis(on=True, antenna=antenna, tone=tone), z
    # individual / delay spread: every antenna (or the scalar input) carries
    # the same gated tone
    if u >= scheme.duty[0]:
        return Hypothesis(on=False), np.zeros((nt, n), dtype=complex)
    tone, phases = _tone_phases(scheme, rng)
    z = np.tile(np.exp(1j * phases), (nt, 1))
    return Hypothesis(on=True, tone=tone), z


def hypothesis_covariance(spec: MimoChannelSpec, hyp: Hypothesis, rho: float,
                          n: int):
    """Per-receive-antenna output covariance given one hypothesis.

    Off blocks leave unit additive noise only.  An active antenna k
    contributes rho * D Toeplitz(R_{k,l}) D^H with D = diag(e^{j n theta});
    when all antennas carry the tone jointly (hyp.antenna None) the
    independent fading processes add, so Toeplitz(sum_k R_{k,l}) applies.
    Receive antennas are independent, so a list of per-l matrices is
    returned.
    """
    if not hyp.on or rho == 0.0:
        return [np.eye(n, dtype=complex) for _ in range(spec.nr)]
    theta = TWO_PI * hyp.tone / n
    d = np.exp(1j * theta * np.arange(1, n + 1))
    lags = np.arange(n)
    out = []
    for l in range(spec.nr):
        if hyp.antenna is not None:
            corr = np.asarray(spec.model(hyp.antenna, l).autocorr_seq(lags), dtype=complex)
        else:
            corr = np.zeros(n, dtype=complex)
            for k in range(spec.nt):
                corr += spec.model(k, l).autocorr_seq(lags)
        t = toeplitz(corr, np.conj(corr))
        out.append(rho * (d[:, None] * t * np.conj(d)[None, :]) + np.eye(n))
    return out


def log_likelihood(y: np.ndarray, cov: np.ndarray) -> float:
    """Log density of a circularly-symmetric complex Gaussian vector:
    -N log pi - log det K - y^H K^{-1} y, via triangular factorization."""
    y = np.asarray(y, dtype=complex)
    n = y.shape[0]
    chol = np.linalg.cholesky(np.asarray(cov, dtype=complex))
    u = solve_triangular(chol, y, lower=True)
    logdet = 2.0 * float(np.sum(np.log(np.real(np.diag(chol)))))
    return -n * LOG_PI - logdet - float(np.vdot(u, u).real)


# ---------------------------------------------------------------------------
# Trial engine
# ---------------------------------------------------------------------------
#
# The estimator is shared by all constraint modes.  A "group" is one on
# hypothesis family: each transmit antenna under sum constraints, or the
# single joint transmission otherwise, in which case the effective fading is
# the sum of the independent per-antenna (or per-tap) processes and only the
# summed correlation matters.


@dataclass(frozen=True)
class _TrialSetup:
    corr: tuple          # corr[g][l]: correlation sequence, length N, per group/receive pair
    priors: tuple        # on-probability per group
    rho: float
    block_length: int


def _build_setup(spec: MimoChannelSpec, scheme: InputScheme, rho: float) -> _TrialSetup:
    n = scheme.block_length
    lags = np.arange(n)
    if scheme.constraint_mode == "sum":
        if len(scheme.duty) != spec.nt:
            raise ValueError(f"duty has {len(scheme.duty)} entries for {spec.nt} transmit antennas")
        corr = tuple(
            tuple(np.asarray(spec.model(k, l).autocorr_seq(lags), dtype=complex)
                  for l in range(spec.nr))
            for k in range(spec.nt))
        return _TrialSetup(corr=corr, priors=scheme.duty, rho=rho, block_length=n)
    summed = []
    for l in range(spec.nr):
        acc = np.zeros(n, dtype=complex)
        for k in range(spec.nt):
            acc += spec.model(k, l).autocorr_seq(lags)
        summed.append(acc)
    return _TrialSetup(corr=(tuple(summed),), priors=scheme.duty, rho=rho,
                       block_length=n)


def _run_chunk(args):
    """Compute the per-trial information densities s_i for one trial range.

    Rebuilt state (factorizations, tone table) is a pure function of the
    setup, so every chunk is reproducible in isolation; trial i draws from
    Philox keyed by (master_seed, i).
    """
    setup, master_seed, start, stop = args
    n = setup.block_length
    rho = setup.rho
    sqrt_rho = np.sqrt(rho)
    ngroups = len(setup.corr)
    nr = len(setup.corr[0])

    # active groups only; zero-duty hypotheses leave the mixture
    active = [g for g in range(ngroups) if setup.priors[g] > 0.0]
    p_off = 1.0 - sum(setup.priors)
    cum = np.cumsum(setup.priors)

    # one factorization per (group, l): of the fading covariance for
    # synthesis and of the on covariance at tone 0 for likelihoods; tones
    # only conjugate by a unitary diagonal, so determinants are shared and
    # the observation is rotated instead.
    fad_chol = [[None] * nr for _ in range(ngroups)]
    cov_chol = [[None] * nr for _ in range(ngroups)]
    logdet = np.zeros((ngroups, nr))
    eye = np.eye(n)
    for g in range(ngroups):
        for l in range(nr):
            t = toeplitz(setup.corr[g][l], np.conj(setup.corr[g][l]))
            fad_chol[g][l] = _chol_jitter(t)
            c = _chol_jitter(rho * t + eye)
            cov_chol[g][l] = c
            logdet[g, l] = 2.0 * float(np.sum(np.log(np.real(np.diag(c)))))

    steps = np.arange(1, n + 1)
    # column m rotates y by the conjugate tone: (P_conj * y)[., m] = D_m^H y
    p_conj = np.exp(-1j * TWO_PI / n * np.outer(steps, np.arange(n)))

    log_prior_on = np.array([np.log(setup.priors[g] / n) for g in active])
    base = -n * LOG_PI
    out = np.empty(stop - start)
    for i in range(start, stop):
        rng = np.random.Generator(np.random.Philox(key=[master_seed, i]))
        u = rng.random()
        on = u < cum[-1]
        if on:
            g_true = int(np.searchsorted(cum, u, side="right"))
            tone = int(rng.integers(n))
            phase = np.exp(1j * (TWO_PI * tone / n) * steps)
            ys = []
            for l in range(nr):
                zr = rng.standard_normal(n)
                zi = rng.standard_normal(n)
                h = fad_chol[g_true][l] @ ((zr + 1j * zi) * np.sqrt(0.5))
                wr = rng.standard_normal(n)
                wi = rng.standard_normal(n)
                ys.append(sqrt_rho * phase * h + (wr + 1j * wi) * np.sqrt(0.5))
        else:
            ys = []
            for l in range(nr):
                wr = rng.standard_normal(n)
                wi = rng.standard_normal(n)
                ys.append((wr + 1j * wi) * np.sqrt(0.5))

        ll_off = base * nr - sum(float(np.vdot(y, y).real) for y in ys)
        ll_on = np.zeros((len(active), n))
        for gi, g in enumerate(active):
            acc = np.full(n, base * nr)
            for l in range(nr):
                rotated = ys[l][:, None] * p_conj
                sol = solve_triangular(cov_chol[g][l], rotated, lower=True)
                acc -= logdet[g, l] + np.sum(np.abs(sol) ** 2, axis=0)
            ll_on[gi] = acc

        terms = log_prior_on[:, None] + ll_on
        if p_off > 0.0:
            terms = np.concatenate([terms.ravel(), [np.log(p_off) + ll_off]])
        mix = float(logsumexp(terms))
        ll_true = ll_on[active.index(g_true), tone] if on else ll_off
        out[i - start] = ll_true - mix
    return out


def _estimate(setup: _TrialSetup, trials: int, master_seed: int,
              workers: Optional[int]) -> MiEstimate:
    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")
    edges = list(range(0, trials, CHUNK_TRIALS)) + [trials]
    jobs = [(setup, int(master_seed), lo, hi)
            for lo, hi in zip(edges[:-1], edges[1:])]
    if workers is None or workers <= 1:
        parts = [_run_chunk(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    s = np.concatenate(parts)
    n = setup.block_length
    mi = float(s.mean()) / n
    std_err = float(s.std(ddof=1)) / (np.sqrt(trials) * n)
    return MiEstimate(mi_per_use=mi, std_err=std_err,
                      ci95=(mi - 1.96 * std_err, mi + 1.96 * std_err),
                      trials=trials)


def _require_discrete(scheme: InputScheme):
    if scheme.phase_option != "fsk_discrete":
        raise UnsupportedSchemeError(
            f"MI estimation needs the finite tone alphabet of 'fsk_discrete'; "
            f"got {scheme.phase_option!r}")


def estimate_mi(spec: MimoChannelSpec, scheme: InputScheme, rho: float,
                trials: int, master_seed: int,
                workers: Optional[int] = None) -> MiEstimate:
    """Estimate the mutual information rate of the on-off tone scheme.

    Runs `trials` independent blocks, each with its own counter-based random
    stream, and averages the exact information density against the mixture
    over all hypotheses.  Deterministic in (spec, scheme, rho, trials,
    master_seed) regardless of worker count.
    """
    _require_discrete(scheme)
    if rho < 0.0:
        raise ValueError(f"SNR must be nonnegative, got {rho}")
    if scheme.constraint_mode == "delay_spread":
        raise ValueError("use estimate_mi_ds for delay-spread schemes")
    setup = _build_setup(spec, scheme, rho)
    return _estimate(setup, trials, master_seed, workers)


def estimate_mi_ds(ds: DelaySpreadSpec, scheme: InputScheme, rho: float,
                   trials: int, master_seed: int,
                   workers: Optional[int] = None) -> MiEstimate:
    """Delay-spread variant of estimate_mi.

    The scalar tone extends before the block start, so conditionally on the
    tone the taps add with phase offsets that cancel inside the covariance;
    the observation is distributed exactly as a single-antenna block whose
    correlation is the sum over taps, and the same trial engine applies.
    """
    _require_discrete(scheme)
    if scheme.constraint_mode != "delay_spread":
        raise ValueError(f"scheme mode must be 'delay_spread', got {scheme.constraint_mode!r}")
    if rho < 0.0:
        raise ValueError(f"SNR must be nonnegative, got {rho}")
    n = scheme.block_length
    summed = np.zeros(n, dtype=complex)
    for tap in ds.taps:
        summed += tap.autocorr_seq(np.arange(n))
    setup = _TrialSetup(corr=((summed,),), priors=scheme.duty, rho=rho,
                        block_length=n)
    return _estimate(setup, trials, master_seed, workers)
