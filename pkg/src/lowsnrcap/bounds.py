"""Capacity upper bounds and low-SNR normalized-capacity limits.

Implements the finite-SNR upper bound for sum power constraints, the
quadratic asymptotic-limit problem lim C/rho^2, and the closed-form
specializations for transmit-separable, nonephemeral, and delay-spread
channels.  Concave maximizations over the duty-allocation region are solved
by projected gradient ascent; a brute-force grid oracle over the same region
is provided for independent verification.

Formula tags on reports ("prop1", "prop2", "cor3" .. "cor10", "miso-prop1",
"miso-limit") identify which bound produced each number and appear verbatim
in the CSV output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .autocorr import corr_stats, information_rate, is_ephemeral
from .channel import (
    DelaySpreadSpec,
    MimoChannelSpec,
    SeparableStructure,
    classify_channel,
    detect_transmit_separable,
    ds_to_miso,
)
from .optim import golden_section_max, maximize_on_capped_simplex

# Per-term cutoff for truncating the cross-correlation series in the
# individual-constraint lower coefficients; geometric tails below this are
# negligible at double precision and finite supports are summed exactly.
SERIES_CUTOFF = 1e-12


class EphemeralChannelError(ValueError):
    """A corollary that requires a nonephemeral channel was applied to one
    with at least one ephemeral fading process."""


@dataclass
class BoundReport:
    """One bound/limit evaluation.

    upper is a finite-SNR value in nats per channel use (present only when
    rho is set); limit is a value of lim C/rho^2.  limit_upper/limit_lower
    carry coefficient sandwiches when only a sandwich is known, and
    miso_limit_upper carries the generic delay-spread coefficient bound.
    argmax / limit_argmax are the optimizing duty allocations for the upper
    bound and the limit problem respectively.
    """

    beta: float
    mode: str
    formula: str
    rho: Optional[float] = None
    upper: Optional[float] = None
    limit: Optional[float] = None
    argmax: Optional[np.ndarray] = None
    limit_argmax: Optional[np.ndarray] = None
    limit_upper: Optional[float] = None
    limit_lower: Optional[float] = None
    miso_limit_upper: Optional[float] = None
    generic_only: bool = False
    converged: bool = True
    note: Optional[str] = None


@dataclass(frozen=True)
class CoeffBounds:
    """Sandwich on lim C/rho^2: lower_coeff <= lim inf <= lim sup <= upper_coeff."""

    upper_coeff: float
    lower_coeff: float


def _check_beta(beta: float):
    if not beta >= 1.0:
        raise ValueError(f"peak-to-average ratio beta must be >= 1, got {beta}")


def upper_bound_sum(spec: MimoChannelSpec, rho: float, beta: float = 1.0,
                    quad_points: int = 4096, tol: float = 1e-10,
                    max_iter: int = 10000) -> BoundReport:
    """Finite-SNR capacity upper bound under sum power constraints.

    Maximizes sum_l { log(1 + rho sum_k R_{k,l}(0) a_k) - sum_k a_k I_{k,l}(rho) }
    over the duty region {a >= 0, sum a <= 1/beta}.  The objective is concave
    (log of an affine map minus a linear term), so projected gradient ascent
    finds the global maximum.
    """
    if not rho > 0.0:
        raise ValueError(f"SNR must be positive, got {rho}")
    _check_beta(beta)
    r0 = spec.r0_matrix()                       # (nt, nr)
    cost = spec.info_matrix(rho, quad_points).sum(axis=1)   # sum_l I_{k,l}(rho)

    def value_grad(a):
        v = a @ r0                              # received power per l
        f = float(np.sum(np.log1p(rho * v)) - a @ cost)
        g = r0 @ (rho / (1.0 + rho * v)) - cost
        return f, g

    a, f, conv = maximize_on_capped_simplex(value_grad, spec.nt, 1.0 / beta,
                                            tol=tol, max_iter=max_iter)
    return BoundReport(beta=beta, mode="sum", formula="prop1", rho=rho,
                       upper=f, argmax=a, converged=conv)


def limit_sum(spec: MimoChannelSpec, beta: float = 1.0, tol: float = 1e-10,
              max_iter: int = 10000) -> BoundReport:
    """lim C/rho^2 under sum power constraints.

    Equals (1/2) max over the duty region of
    sum_l { sum_k a_k lam_{k,l} - (sum_k a_k R_{k,l}(0))^2 }, a concave
    quadratic solved by the same projected-gradient machinery.
    """
    _check_beta(beta)
    r0 = spec.r0_matrix()
    lam_rows = spec.lam_matrix().sum(axis=1)    # sum_l lam_{k,l}

    def value_grad(a):
        v = a @ r0
        f = float(a @ lam_rows - np.sum(v * v))
        g = lam_rows - 2.0 * (r0 @ v)
        return f, g

    a, f, conv = maximize_on_capped_simplex(value_grad, spec.nt, 1.0 / beta,
                                            tol=tol, max_iter=max_iter)
    return BoundReport(beta=beta, mode="sum", formula="prop2",
                       limit=0.5 * f, limit_argmax=a, converged=conv)


def _inner_quadratic_max(lam_sum: float, r0sq_sum: float, beta: float):
    """max over a in [0, 1/beta] of a*sum(lam_l) - a^2*sum(R_l(0)^2),
    with its closed-form maximizer."""
    a = min(max(lam_sum / (2.0 * r0sq_sum), 0.0), 1.0 / beta)
    return a, a * lam_sum - a * a * r0sq_sum


def separable_sum_bounds(sep: SeparableStructure, rho: float, beta: float = 1.0,
                         quad_points: int = 4096) -> BoundReport:
    """Sum-constraint bound and limit specialized to transmit-separable channels.

    Only the antenna with the largest gain matters: the finite-SNR bound is a
    one-dimensional concave problem in its duty a, solved by golden section,
    and the limit has a closed-form inner maximizer.
    """
    if not rho > 0.0:
        raise ValueError(f"SNR must be positive, got {rho}")
    _check_beta(beta)
    amax = sep.alpha_max
    stats = [corr_stats(m) for m in sep.receive_models]
    r0 = np.array([s.r0 for s in stats])
    lam = np.array([s.lam for s in stats])
    info = np.array([information_rate(m, amax * rho, quad_points)
                     for m in sep.receive_models])
    info_total = float(info.sum())

    def f_up(a):
        return float(np.sum(np.log1p(a * amax * rho * r0))) - a * info_total

    a_up, up = golden_section_max(f_up, 0.0, 1.0 / beta)
    a_lim, inner = _inner_quadratic_max(float(lam.sum()), float(np.sum(r0 * r0)), beta)
    return BoundReport(beta=beta, mode="sum", formula="cor3", rho=rho,
                       upper=up, argmax=np.array([a_up]),
                       limit=0.5 * amax * amax * inner,
                       limit_argmax=np.array([a_lim]))


def limit_sum_separable(sep: SeparableStructure, beta: float = 1.0) -> BoundReport:
    """Limit side of separable_sum_bounds, with no SNR argument needed."""
    _check_beta(beta)
    stats = [corr_stats(m) for m in sep.receive_models]
    lam_sum = float(sum(s.lam for s in stats))
    r0sq_sum = float(sum(s.r0 ** 2 for s in stats))
    a, inner = _inner_quadratic_max(lam_sum, r0sq_sum, beta)
    return BoundReport(beta=beta, mode="sum", formula="cor3",
                       limit=0.5 * sep.alpha_max ** 2 * inner,
                       limit_argmax=np.array([a]))


def _require_nonephemeral(sep: SeparableStructure):
    # A zero-gain antenna is an identically zero fading process, which the
    # boundary-inclusive definition classifies as ephemeral.
    for k, a in enumerate(sep.alphas):
        if a <= 0.0:
            raise EphemeralChannelError(
                f"transmit antenna {k} has zero gain, so its fading processes are ephemeral")
    for l, m in enumerate(sep.receive_models):
        if is_ephemeral(m):
            s = corr_stats(m)
            raise EphemeralChannelError(
                f"receive model {l} is ephemeral: 2*phi = {2 * s.phi:.6g} <= "
                f"R(0)^2 = {s.r0 ** 2:.6g}")


def limit_sum_separable_noneph(sep: SeparableStructure) -> float:
    """lim C/rho^2 for a transmit-separable nonephemeral channel with no
    average power constraint (beta = 1): alpha_max^2 * sum_l phi_l."""
    _require_nonephemeral(sep)
    phi_total = sum(corr_stats(m).phi for m in sep.receive_models)
    return sep.alpha_max ** 2 * phi_total


def limit_indiv_separable(sep: SeparableStructure, beta: float = 1.0) -> BoundReport:
    """lim C/rho^2 under individual per-antenna power constraints for a
    transmit-separable channel: (1/2) (sum_k alpha_k)^2 * inner quadratic max."""
    _check_beta(beta)
    stats = [corr_stats(m) for m in sep.receive_models]
    lam_sum = float(sum(s.lam for s in stats))
    r0sq_sum = float(sum(s.r0 ** 2 for s in stats))
    a, inner = _inner_quadratic_max(lam_sum, r0sq_sum, beta)
    return BoundReport(beta=beta, mode="individual", formula="cor5",
                       limit=0.5 * sep.alpha_sum ** 2 * inner,
                       limit_argmax=np.array([a]))


def limit_indiv_separable_noneph(sep: SeparableStructure) -> float:
    """Individual-constraint limit for a transmit-separable nonephemeral
    channel at beta = 1: (sum_k alpha_k)^2 * sum_l phi_l."""
    _require_nonephemeral(sep)
    phi_total = sum(corr_stats(m).phi for m in sep.receive_models)
    return sep.alpha_sum ** 2 * phi_total


def _cross_series(models_by_l, cutoff: float = SERIES_CUTOFF,
                  chunk: int = 1 << 20) -> float:
    """sum_l sum_{n>=1} |sum_k R_{k,l}(n)|^2, truncated at the first lag where
    every |R_{k,l}(n)| has dropped below cutoff.

    Exact for finite supports; for geometric decay the discarded tail is
    below cutoff^2 per term and irrelevant at double precision.
    """
    n_stop = max((m.lag_below(cutoff) for row in models_by_l for m in row),
                 default=1)
    total = 0.0
    n = 1
    while n < n_stop:
        hi = min(n + chunk, n_stop)
        lags = np.arange(n, hi)
        for row in models_by_l:
            s = np.zeros(lags.shape, dtype=complex)
            for m in row:
                s += m.autocorr_seq(lags)
            total += float(np.sum(np.abs(s) ** 2))
        n = hi
    return total


def indiv_bounds_noneph(spec: MimoChannelSpec) -> CoeffBounds:
    """Coefficient sandwich on lim C/rho^2 under individual power constraints
    for a nonephemeral channel with beta = 1.

    upper_coeff = N_T * sum_{k,l} phi_{k,l};
    lower_coeff = sum_l sum_{n>=1} |sum_k R_{k,l}(n)|^2 (achieved by sending
    one constant-magnitude tone on every antenna simultaneously).
    """
    cls = classify_channel(spec)
    if not cls.channel_nonephemeral:
        for k, row in enumerate(cls.ephemeral):
            for l, flag in enumerate(row):
                if flag:
                    s = corr_stats(spec.model(k, l))
                    raise EphemeralChannelError(
                        f"fading pair ({k},{l}) is ephemeral: 2*phi = {2 * s.phi:.6g} "
                        f"<= R(0)^2 = {s.r0 ** 2:.6g}")
    upper = spec.nt * float(spec.phi_matrix().sum())
    columns = [[spec.model(k, l) for k in range(spec.nt)] for l in range(spec.nr)]
    lower = _cross_series(columns)
    return CoeffBounds(upper_coeff=upper, lower_coeff=lower)


def ds_upper_bound(ds: DelaySpreadSpec, rho: float, beta: float = 1.0,
                   quad_points: int = 4096, tol: float = 1e-10) -> BoundReport:
    """Finite-SNR upper bound for the delay-spread channel.

    The scalar channel is dominated by the tap-equivalent multi-antenna
    channel under individual constraints, and per-antenna peaks of 1 imply a
    sum peak of K; rescaling the input by 1/sqrt(K) turns that into the sum
    constraint at SNR K*rho.  The sum-constraint bound evaluated there is
    therefore a valid (generally loose) upper bound for the scalar channel.
    """
    miso = ds_to_miso(ds)
    k = ds.ntaps
    rep = upper_bound_sum(miso, k * rho, beta, quad_points, tol)
    return BoundReport(beta=beta, mode="delay_spread", formula="miso-prop1",
                       rho=rho, upper=rep.upper, argmax=rep.argmax,
                       converged=rep.converged,
                       note="upper bound through the tap-equivalent channel; "
                            "the shifted-input tie is not encoded, so the bound "
                            "is not tight in general")


def ds_bounds(ds: DelaySpreadSpec, beta: float = 1.0, tol: float = 1e-10,
              sep_tol: float = 1e-9) -> BoundReport:
    """Asymptotic bounds for the delay-spread channel.

    Delay-separable taps give the exact limit (the separable individual-
    constraint formula with one receive antenna).  Otherwise, a nonephemeral
    channel with beta = 1 gets the coefficient sandwich.  In all cases the
    report carries the generic coefficient bound K^2 * (sum-constraint limit
    of the tap-equivalent channel), valid by the same rescaling argument as
    the finite-SNR bound; when neither corollary applies that generic bound
    is all there is and the report is flagged.
    """
    _check_beta(beta)
    miso = ds_to_miso(ds)
    k = ds.ntaps
    generic = k * k * limit_sum(miso, beta, tol=tol).limit
    sep = detect_transmit_separable(miso, tol=sep_tol)
    if sep is not None:
        inner = limit_indiv_separable(sep, beta)
        return BoundReport(beta=beta, mode="delay_spread", formula="cor8",
                           limit=inner.limit, limit_argmax=inner.limit_argmax,
                           miso_limit_upper=generic)
    cls = classify_channel(miso)
    if cls.channel_nonephemeral and beta == 1.0:
        cb = indiv_bounds_noneph(miso)
        return BoundReport(beta=beta, mode="delay_spread", formula="cor10",
                           limit_upper=cb.upper_coeff, limit_lower=cb.lower_coeff,
                           miso_limit_upper=generic)
    return BoundReport(beta=beta, mode="delay_spread", formula="miso-limit",
                       miso_limit_upper=generic, generic_only=True,
                       note="taps neither separable nor (nonephemeral with "
                            "beta = 1); only the generic coefficient bound applies")


# ---------------------------------------------------------------------------
# Brute-force grid oracle
# ---------------------------------------------------------------------------

def _pairs_under(total: int):
    """All integer pairs (i, j) with i + j <= total, vectorized."""
    lens = total + 1 - np.arange(total + 1)
    i = np.repeat(np.arange(total + 1), lens)
    starts = np.concatenate(([0], np.cumsum(lens)[:-1]))
    j = np.arange(lens.sum()) - starts[i]
    return i, j


def grid_oracle(spec: MimoChannelSpec, objective: str, rho: float,
                beta: float = 1.0, resolution: int = 2000,
                quad_points: int = 4096) -> float:
    """Brute-force maximization of a bound objective over a uniform grid on
    the duty region, spacing (1/beta)/resolution per axis.

    objective 'sum_upper' evaluates the finite-SNR sum-constraint objective;
    'sum_limit' evaluates the quadratic limit objective (reported with its
    1/2 factor, matching limit_sum).  Supports up to three transmit antennas.
    For three, the innermost axis is resolved exactly through the discrete
    increment g(x+1) - g(x), which is decreasing along any grid line of a
    concave objective: binary search on its sign for the log objective, a
    direct count of positive increments for the quadratic one.  The result
    is identical to full enumeration of the same grid.
    """
    if spec.nt > 3:
        raise ValueError(f"grid oracle supports at most 3 transmit antennas, got {spec.nt}")
    if objective not in ("sum_upper", "sum_limit"):
        raise ValueError(f"unknown objective {objective!r}")
    _check_beta(beta)
    if rho < 0.0:
        raise ValueError(f"SNR must be nonnegative, got {rho}")

    r0 = spec.r0_matrix()                       # (nt, nr)
    delta = 1.0 / (beta * resolution)
    if objective == "sum_upper":
        cost = spec.info_matrix(rho, quad_points).sum(axis=1)

        def evaluate(counts):
            # counts: (nt, npts) integer grid multipliers
            v = delta * (counts.T @ r0)         # (npts, nr)
            return np.sum(np.log1p(rho * v), axis=1) - delta * (cost @ counts)

        post = 1.0
    else:
        lam_rows = spec.lam_matrix().sum(axis=1)

        def evaluate(counts):
            v = delta * (counts.T @ r0)
            return delta * (lam_rows @ counts) - np.sum(v * v, axis=1)

        post = 0.5

    res = int(resolution)
    if spec.nt == 1:
        m = np.arange(res + 1)[None, :]
        return post * float(np.max(evaluate(m)))

    if spec.nt == 2:
        i, j = _pairs_under(res)
        return post * float(np.max(evaluate(np.stack([i, j]))))

    # nt == 3: enumerate the first two axes, resolve the third exactly.  The
    # (i, j) contributions are fixed across the search, so precompute them
    # and form the discrete increment g(x+1) - g(x) directly; it needs one
    # log1p per receive antenna because log(A) - log(B) = log1p((A-B)/B).
    i, j = _pairs_under(res)
    budget = res - i - j
    fi = i.astype(float)
    fj = j.astype(float)
    base = [delta * (r0[0, l] * fi + r0[1, l] * fj) for l in range(spec.nr)]
    slope = [delta * r0[2, l] for l in range(spec.nr)]
    if objective == "sum_upper":
        lin = delta * (cost[0] * fi + cost[1] * fj)
        lin_slope = delta * cost[2]

        def eval_at(x):
            acc = -lin - lin_slope * x
            for b, s in zip(base, slope):
                acc = acc + np.log1p(rho * (b + s * x))
            return acc

        def increment(x):
            acc = None
            for b, s in zip(base, slope):
                z = (rho * s) / (1.0 + rho * (b + s * x))
                acc = z if acc is None else acc + z + acc * z
            return np.log1p(acc) - lin_slope
    else:
        lin = delta * (lam_rows[0] * fi + lam_rows[1] * fj)
        lin_slope = delta * lam_rows[2]

        def eval_at(x):
            acc = lin + lin_slope * x
            for b, s in zip(base, slope):
                v = b + s * x
                acc = acc - v * v
            return acc

        # the increment g(x+1) - g(x) = c - d*x is linear here, so the count
        # of positive increments (= the inner argmax) is available directly
        c = np.full(fi.shape, lin_slope)
        d = 0.0
        for b, s in zip(base, slope):
            c = c - s * (2.0 * b + s)
            d = d + 2.0 * s * s
        best_x = np.clip(np.ceil(c / d), 0.0, budget)
        return post * float(np.max(eval_at(best_x)))

    lo = np.zeros_like(budget)
    hi = budget.copy()
    while True:
        active = lo < hi
        if not np.any(active):
            break
        mid = (lo + hi) // 2
        increase = increment(mid.astype(float)) > 0.0
        lo = np.where(active & increase, mid + 1, lo)
        hi = np.where(active & ~increase, mid, hi)
    return post * float(np.max(eval_at(lo.astype(float))))
