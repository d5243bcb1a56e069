"""Run configuration: one JSON document fully determines one run.

The document carries the channel description (explicit correlation grid,
separable factorization, or delay-spread taps), the power-constraint
settings, the SNR sweep, simulation parameters, and numerics knobs.  Parsing
validates every field and constructs the channel objects, so a RunConfig
that exists is runnable.  parse_config(canonical_json(cfg)) reproduces an
identical RunConfig.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .autocorr import FiniteSupport, GaussMarkov
from .channel import (
    DelaySpreadSpec,
    MimoChannelSpec,
    PowerConstraints,
    SeparableStructure,
)


class ConfigError(ValueError):
    """Invalid configuration document; the message names the failing field."""


@dataclass(frozen=True)
class SimConfig:
    block_length: int = 32
    trials: int = 20000
    phase_option: str = "fsk_discrete"
    psk_order: int = 4
    seed: int = 0
    workers: Optional[int] = None
    duty: Optional[tuple] = None      # override for the simulated duty


@dataclass(frozen=True)
class NumericsConfig:
    quad_points: int = 4096
    optimizer_tol: float = 1e-10
    grid_oracle_resolution: int = 2000


@dataclass(frozen=True)
class RunConfig:
    channel_kind: str                 # "mimo" | "separable" | "delay_spread"
    mimo: Optional[MimoChannelSpec]
    separable: Optional[SeparableStructure]
    delay_spread: Optional[DelaySpreadSpec]
    constraints: PowerConstraints
    rho_list: tuple
    sim: SimConfig
    numerics: NumericsConfig


def _require_mapping(obj, path):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object, got {type(obj).__name__}")
    return obj


def _no_extra_keys(obj, path, allowed):
    extra = set(obj) - set(allowed)
    if extra:
        raise ConfigError(f"{path}: unknown field(s) {sorted(extra)}")


def _number(obj, path, minimum=None, strict_min=None):
    if not isinstance(obj, (int, float)) or isinstance(obj, bool):
        raise ConfigError(f"{path}: expected a number, got {obj!r}")
    x = float(obj)
    if minimum is not None and x < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {x}")
    if strict_min is not None and x <= strict_min:
        raise ConfigError(f"{path}: must be > {strict_min}, got {x}")
    return x


def _integer(obj, path, minimum=None):
    if not isinstance(obj, int) or isinstance(obj, bool):
        raise ConfigError(f"{path}: expected an integer, got {obj!r}")
    if minimum is not None and obj < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {obj}")
    return obj


def _complex_value(obj, path):
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(float(obj), 0.0)
    if (isinstance(obj, list) and len(obj) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)):
        return complex(float(obj[0]), float(obj[1]))
    raise ConfigError(f"{path}: expected a number or [re, im] pair, got {obj!r}")


def _model(obj, path):
    obj = _require_mapping(obj, path)
    kind = obj.get("type")
    if kind == "gauss_markov":
        _no_extra_keys(obj, path, ("type", "a", "r0"))
        if "a" not in obj:
            raise ConfigError(f"{path}.a: required")
        a = _number(obj["a"], f"{path}.a")
        r0 = _number(obj.get("r0", 1.0), f"{path}.r0")
        try:
            return GaussMarkov(a, r0)
        except ValueError as e:
            raise ConfigError(f"{path}: {e}") from e
    if kind == "finite_support":
        _no_extra_keys(obj, path, ("type", "values"))
        vals = obj.get("values")
        if not isinstance(vals, list) or len(vals) == 0:
            raise ConfigError(f"{path}.values: expected a non-empty list")
        seq = tuple(_complex_value(v, f"{path}.values[{i}]") for i, v in enumerate(vals))
        try:
            return FiniteSupport(seq)
        except ValueError as e:
            raise ConfigError(f"{path}: {e}") from e
    raise ConfigError(f"{path}.type: expected 'gauss_markov' or 'finite_support', got {kind!r}")


def _channel(obj):
    obj = _require_mapping(obj, "channel")
    kind = obj.get("type")
    if kind == "mimo":
        _no_extra_keys(obj, "channel", ("type", "models"))
        rows = obj.get("models")
        if not isinstance(rows, list) or len(rows) == 0:
            raise ConfigError("channel.models: expected a non-empty list of rows")
        grid = []
        for k, row in enumerate(rows):
            if not isinstance(row, list) or len(row) == 0:
                raise ConfigError(f"channel.models[{k}]: expected a non-empty list")
            grid.append(tuple(_model(m, f"channel.models[{k}][{l}]")
                              for l, m in enumerate(row)))
        return "mimo", MimoChannelSpec(tuple(grid)), None, None
    if kind == "separable":
        _no_extra_keys(obj, "channel", ("type", "alphas", "receive_models"))
        alphas = obj.get("alphas")
        if not isinstance(alphas, list) or len(alphas) == 0:
            raise ConfigError("channel.alphas: expected a non-empty list")
        alphas = tuple(_number(a, f"channel.alphas[{k}]", minimum=0.0)
                       for k, a in enumerate(alphas))
        models = obj.get("receive_models")
        if not isinstance(models, list) or len(models) == 0:
            raise ConfigError("channel.receive_models: expected a non-empty list")
        models = tuple(_model(m, f"channel.receive_models[{l}]")
                       for l, m in enumerate(models))
        try:
            sep = SeparableStructure(alphas, models)
        except ValueError as e:
            raise ConfigError(f"channel: {e}") from e
        return "separable", None, sep, None
    if kind == "delay_spread":
        _no_extra_keys(obj, "channel", ("type", "taps"))
        taps = obj.get("taps")
        if not isinstance(taps, list) or len(taps) == 0:
            raise ConfigError("channel.taps: expected a non-empty list")
        return "delay_spread", None, None, DelaySpreadSpec(
            tuple(_model(m, f"channel.taps[{k}]") for k, m in enumerate(taps)))
    raise ConfigError(f"channel.type: expected 'mimo', 'separable' or 'delay_spread', got {kind!r}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"not valid JSON: {e}") from e
    doc = _require_mapping(doc, "config")
    _no_extra_keys(doc, "config", ("channel", "constraints", "sweep", "sim", "numerics"))
    if "channel" not in doc:
        raise ConfigError("channel: required")
    kind, mimo, sep, ds = _channel(doc["channel"])

    cons = _require_mapping(doc.get("constraints", {}), "constraints")
    _no_extra_keys(cons, "constraints", ("mode", "beta"))
    mode = cons.get("mode", "sum")
    if mode not in ("sum", "individual"):
        raise ConfigError(f"constraints.mode: expected 'sum' or 'individual', got {mode!r}")
    beta = _number(cons.get("beta", 1.0), "constraints.beta", minimum=1.0)
    constraints = PowerConstraints(mode=mode, beta=beta)

    sweep = _require_mapping(doc.get("sweep", {}), "sweep")
    _no_extra_keys(sweep, "sweep", ("rho",))
    rho_raw = sweep.get("rho", [])
    if not isinstance(rho_raw, list):
        raise ConfigError("sweep.rho: expected a list")
    rho_list = tuple(_number(r, f"sweep.rho[{i}]", strict_min=0.0)
                     for i, r in enumerate(rho_raw))
    for i in range(1, len(rho_list)):
        if rho_list[i] >= rho_list[i - 1]:
            raise ConfigError("sweep.rho: values must be strictly decreasing")

    sim_doc = _require_mapping(doc.get("sim", {}), "sim")
    _no_extra_keys(sim_doc, "sim", ("block_length", "trials", "phase_option",
                                    "psk_order", "seed", "workers", "duty"))
    phase = sim_doc.get("phase_option", "fsk_discrete")
    if phase not in ("fsk_discrete", "fsk_continuous", "psk_iid"):
        raise ConfigError(f"sim.phase_option: unknown option {phase!r}")
    workers = sim_doc.get("workers")
    if workers is not None:
        workers = _integer(workers, "sim.workers", minimum=1)
    duty = sim_doc.get("duty")
    if duty is not None:
        if isinstance(duty, list):
            duty = tuple(_number(d, f"sim.duty[{i}]", minimum=0.0)
                         for i, d in enumerate(duty))
        else:
            duty = (_number(duty, "sim.duty", minimum=0.0),)
    sim = SimConfig(
        block_length=_integer(sim_doc.get("block_length", 32), "sim.block_length", minimum=1),
        trials=_integer(sim_doc.get("trials", 20000), "sim.trials", minimum=100),
        phase_option=phase,
        psk_order=_integer(sim_doc.get("psk_order", 4), "sim.psk_order", minimum=2),
        seed=_integer(sim_doc.get("seed", 0), "sim.seed", minimum=0),
        workers=workers,
        duty=duty,
    )

    num_doc = _require_mapping(doc.get("numerics", {}), "numerics")
    _no_extra_keys(num_doc, "numerics", ("quad_points", "optimizer_tol",
                                         "grid_oracle_resolution"))
    numerics = NumericsConfig(
        quad_points=_integer(num_doc.get("quad_points", 4096), "numerics.quad_points", minimum=64),
        optimizer_tol=_number(num_doc.get("optimizer_tol", 1e-10),
                              "numerics.optimizer_tol", strict_min=0.0),
        grid_oracle_resolution=_integer(num_doc.get("grid_oracle_resolution", 2000),
                                        "numerics.grid_oracle_resolution", minimum=10),
    )

    return RunConfig(channel_kind=kind, mimo=mimo, separable=sep, delay_spread=ds,
                     constraints=constraints, rho_list=rho_list, sim=sim,
                     numerics=numerics)


def _model_doc(model):
    if isinstance(model, GaussMarkov):
        return {"type": "gauss_markov", "a": model.a, "r0": model.r0}
    vals = [v.real if v.imag == 0.0 else [v.real, v.imag] for v in model.values]
    return {"type": "finite_support", "values": vals}


def canonical_json(cfg: RunConfig) -> str:
    """Echo a parsed configuration as a canonical document (defaults filled,
    keys sorted).  parse_config on the result reproduces an equal RunConfig."""
    if cfg.channel_kind == "mimo":
        channel = {"type": "mimo",
                   "models": [[_model_doc(m) for m in row] for row in cfg.mimo.models]}
    elif cfg.channel_kind == "separable":
        channel = {"type": "separable",
                   "alphas": list(cfg.separable.alphas),
                   "receive_models": [_model_doc(m) for m in cfg.separable.receive_models]}
    else:
        channel = {"type": "delay_spread",
                   "taps": [_model_doc(m) for m in cfg.delay_spread.taps]}
    doc = {
        "channel": channel,
        "constraints": {"mode": cfg.constraints.mode, "beta": cfg.constraints.beta},
        "sweep": {"rho": list(cfg.rho_list)},
        "sim": {
            "block_length": cfg.sim.block_length,
            "trials": cfg.sim.trials,
            "phase_option": cfg.sim.phase_option,
            "psk_order": cfg.sim.psk_order,
            "seed": cfg.sim.seed,
            "workers": cfg.sim.workers,
            "duty": None if cfg.sim.duty is None else list(cfg.sim.duty),
        },
        "numerics": {
            "quad_points": cfg.numerics.quad_points,
            "optimizer_tol": cfg.numerics.optimizer_tol,
            "grid_oracle_resolution": cfg.numerics.grid_oracle_resolution,
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
