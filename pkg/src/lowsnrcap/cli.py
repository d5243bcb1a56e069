"""Command-line interface: classification, bounds, limits, simulation, sweeps.

Commands read one JSON configuration (see config module) and emit either a
text report (classify) or CSV rows with the fixed column set

    rho,beta,upper_nats,upper_over_rho2,limit,mi_est,mi_stderr,mi_ci_lo,mi_ci_hi,formula_tag

Numbers are serialized with 9 significant digits; unavailable quantities stay
empty.  Output is deterministic in (config, seed) for any worker count.
Supplementary facts that do not fit the CSV schema (coefficient sandwiches
for individual constraints and delay spread) go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bounds as bnd
from .autocorr import corr_stats, is_ephemeral
from .channel import classify_channel, detect_transmit_separable, ds_to_miso
from .config import RunConfig, parse_config
from .mc import InputScheme, estimate_mi, estimate_mi_ds

CSV_HEADER = ("rho,beta,upper_nats,upper_over_rho2,limit,"
              "mi_est,mi_stderr,mi_ci_lo,mi_ci_hi,formula_tag")


def _fmt(x) -> str:
    return "" if x is None else f"{x:.9g}"


def _csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in r))
    return "\n".join(lines) + "\n"


def _require_rhos(cfg: RunConfig):
    if not cfg.rho_list:
        raise ValueError("sweep.rho: this command needs at least one SNR value")


class _LimitResult:
    """Channel-level asymptotic result: a limit value when one is identified,
    otherwise coefficient bounds, plus the duty used for simulation."""

    def __init__(self, value, tag, duty, notes=()):
        self.value = value
        self.tag = tag
        self.duty = duty
        self.notes = tuple(notes)


def _mimo_spec(cfg: RunConfig):
    return cfg.mimo if cfg.channel_kind == "mimo" else cfg.separable.expand()


def _limit_result(cfg: RunConfig) -> _LimitResult:
    beta = cfg.constraints.beta
    tol = cfg.numerics.optimizer_tol
    if cfg.channel_kind == "delay_spread":
        rep = bnd.ds_bounds(cfg.delay_spread, beta, tol=tol)
        notes = [f"generic coefficient bound (miso-limit): {rep.miso_limit_upper:.9g}"]
        if rep.formula == "cor8":
            duty = float(rep.limit_argmax[0])
            return _LimitResult(rep.limit, "cor8", duty, notes)
        if rep.formula == "cor10":
            notes.append(f"coefficient sandwich (cor10): "
                         f"upper {rep.limit_upper:.9g}, lower {rep.limit_lower:.9g}")
            return _LimitResult(None, "cor10", 1.0, notes)
        notes.append("no limit identified for these taps")
        return _LimitResult(None, rep.formula, 1.0 / beta, notes)

    if cfg.constraints.mode == "sum":
        if cfg.channel_kind == "separable":
            rep = bnd.limit_sum_separable(cfg.separable, beta)
            a = float(rep.limit_argmax[0])
            duty = np.zeros(cfg.separable.nt)
            duty[int(np.argmax(cfg.separable.alphas))] = a
            return _LimitResult(rep.limit, "cor3", duty)
        rep = bnd.limit_sum(cfg.mimo, beta, tol=tol)
        return _LimitResult(rep.limit, "prop2", rep.limit_argmax)

    # individual constraints
    sep = (cfg.separable if cfg.channel_kind == "separable"
           else detect_transmit_separable(cfg.mimo))
    if sep is not None:
        rep = bnd.limit_indiv_separable(sep, beta)
        return _LimitResult(rep.limit, "cor5", float(rep.limit_argmax[0]))
    cls = classify_channel(cfg.mimo)
    if cls.channel_nonephemeral and beta == 1.0:
        cb = bnd.indiv_bounds_noneph(cfg.mimo)
        notes = [f"coefficient sandwich (cor7): "
                 f"upper {cb.upper_coeff:.9g}, lower {cb.lower_coeff:.9g}"]
        return _LimitResult(None, "cor7", 1.0, notes)
    raise ValueError(
        "no individual-constraint limit is implemented for this channel: it is "
        "neither transmit separable nor (nonephemeral with beta = 1)")


def _upper_defined(cfg: RunConfig) -> bool:
    """Finite-SNR upper bounds exist for sum constraints and for delay
    spread (through the tap-equivalent channel at rescaled SNR), but not for
    individual constraints."""
    return cfg.channel_kind == "delay_spread" or cfg.constraints.mode == "sum"


def _upper_at(cfg: RunConfig, rho: float):
    """Finite-SNR upper bound for one sweep point; returns (value, tag)."""
    beta = cfg.constraints.beta
    quad = cfg.numerics.quad_points
    tol = cfg.numerics.optimizer_tol
    if cfg.channel_kind == "delay_spread":
        rep = bnd.ds_upper_bound(cfg.delay_spread, rho, beta, quad, tol)
        return rep.upper, "miso-prop1"
    if cfg.constraints.mode != "sum":
        raise ValueError("no finite-SNR upper bound is implemented for "
                         "individual power constraints")
    if cfg.channel_kind == "separable":
        rep = bnd.separable_sum_bounds(cfg.separable, rho, beta, quad)
        return rep.upper, "cor3"
    rep = bnd.upper_bound_sum(cfg.mimo, rho, beta, quad, tol)
    return rep.upper, "prop1"


def _sim_scheme(cfg: RunConfig, duty) -> InputScheme:
    if cfg.channel_kind == "delay_spread":
        mode = "delay_spread"
    else:
        mode = cfg.constraints.mode
    if cfg.sim.duty is not None:
        duty = cfg.sim.duty if mode == "sum" else cfg.sim.duty[0]
    return InputScheme(constraint_mode=mode, duty=duty,
                       block_length=cfg.sim.block_length,
                       phase_option=cfg.sim.phase_option,
                       psk_order=cfg.sim.psk_order,
                       beta=cfg.constraints.beta)


def _simulate_at(cfg: RunConfig, scheme: InputScheme, rho: float,
                 seed: int, workers):
    if cfg.channel_kind == "delay_spread":
        return estimate_mi_ds(cfg.delay_spread, scheme, rho, cfg.sim.trials,
                              seed, workers)
    return estimate_mi(_mimo_spec(cfg), scheme, rho, cfg.sim.trials, seed, workers)


def _classify_text(cfg: RunConfig) -> str:
    lines = []
    if cfg.channel_kind == "delay_spread":
        ds = cfg.delay_spread
        lines.append(f"delay-spread channel: {ds.ntaps} tap(s)")
        sep = detect_transmit_separable(ds_to_miso(ds))
        if sep is not None:
            alphas = ", ".join(_fmt(a) for a in sep.alphas)
            lines.append(f"delay separable: yes, alphas = ({alphas})")
        else:
            lines.append("delay separable: no")
        flags = []
        for k, tap in enumerate(ds.taps):
            s = corr_stats(tap)
            flag = is_ephemeral(tap)
            flags.append(flag)
            kind = "ephemeral" if flag else "nonephemeral"
            lines.append(f"tap {k}: {kind} (2*phi = {2 * s.phi:.9g}, R(0)^2 = {s.r0 ** 2:.9g})")
        lines.append(f"channel nonephemeral: {'no' if any(flags) else 'yes'}")
        return "\n".join(lines) + "\n"
    spec = _mimo_spec(cfg)
    lines.append(f"channel: {spec.nt}x{spec.nr} grid, constraints mode = {cfg.constraints.mode}, "
                 f"beta = {_fmt(cfg.constraints.beta)}")
    sep = detect_transmit_separable(spec)
    if sep is not None:
        alphas = ", ".join(_fmt(a) for a in sep.alphas)
        lines.append(f"transmit separable: yes, alphas = ({alphas})")
    else:
        lines.append("transmit separable: no")
    cls = classify_channel(spec)
    for k in range(spec.nt):
        for l in range(spec.nr):
            s = corr_stats(spec.model(k, l))
            kind = "ephemeral" if cls.ephemeral[k][l] else "nonephemeral"
            lines.append(f"pair ({k},{l}): {kind} (2*phi = {2 * s.phi:.9g}, "
                         f"R(0)^2 = {s.r0 ** 2:.9g})")
    lines.append(f"channel nonephemeral: {'yes' if cls.channel_nonephemeral else 'no'}")
    return "\n".join(lines) + "\n"


def execute(command: str, cfg: RunConfig, seed=None, workers=None):
    """Run one command; returns (output_text, notes) with notes for stderr."""
    beta = cfg.constraints.beta
    if command == "classify":
        return _classify_text(cfg), ()

    if command == "limit":
        res = _limit_result(cfg)
        rows = [(None, beta, None, None, res.value, None, None, None, None, res.tag)]
        return _csv(rows), res.notes

    if command == "bounds":
        _require_rhos(cfg)
        rows = []
        for rho in cfg.rho_list:
            up, tag = _upper_at(cfg, rho)
            rows.append((rho, beta, up, up / rho ** 2, None, None, None, None, None, tag))
        return _csv(rows), ()

    seed = cfg.sim.seed if seed is None else seed
    workers = workers if workers is not None else cfg.sim.workers
    if workers is None:
        workers = os.cpu_count()

    if command == "simulate":
        _require_rhos(cfg)
        res = _limit_result(cfg)
        scheme = _sim_scheme(cfg, res.duty)
        rows = []
        for rho in cfg.rho_list:
            est = _simulate_at(cfg, scheme, rho, seed, workers)
            rows.append((rho, beta, None, None, None, est.mi_per_use, est.std_err,
                         est.ci95[0], est.ci95[1], "mc"))
        return _csv(rows), res.notes

    if command == "sweep":
        _require_rhos(cfg)
        res = _limit_result(cfg)
        scheme = _sim_scheme(cfg, res.duty)
        rows = []
        for rho in cfg.rho_list:
            if _upper_defined(cfg):
                up, up_tag = _upper_at(cfg, rho)
                tags = [up_tag]
            else:
                up, tags = None, []
            est = _simulate_at(cfg, scheme, rho, seed, workers)
            tags += ([res.tag] if res.value is not None else []) + ["mc"]
            rows.append((rho, beta, up, None if up is None else up / rho ** 2,
                         res.value, est.mi_per_use, est.std_err,
                         est.ci95[0], est.ci95[1], "+".join(tags)))
        return _csv(rows), res.notes

    raise ValueError(f"unknown command {command!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowsnrcap",
        description="Low-SNR capacity bounds, limits, and Monte Carlo "
                    "mutual-information estimates for correlated fading channels.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
            ("classify", "separability and per-pair ephemeral classification"),
            ("bounds", "finite-SNR upper bounds at each sweep SNR"),
            ("limit", "asymptotic normalized-capacity limit"),
            ("simulate", "Monte Carlo mutual-information estimates at each sweep SNR"),
            ("sweep", "bounds, limit, and simulation combined into one CSV")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="path to the JSON configuration")
        p.add_argument("--out", help="write the output (CSV or report) to this path")
        p.add_argument("--seed", type=int, help="override sim.seed")
        p.add_argument("--workers", type=int, help="override sim.workers")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        text, notes = execute(args.command, cfg, seed=args.seed, workers=args.workers)
    except (ValueError, RuntimeError, OSError) as e:
        print(str(e), file=sys.stderr)
        return 1
    for note in notes:
        print(note, file=sys.stderr)
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
