"""Acceptance suite: one test per criterion, each at its stated tolerance,
printing one pass/fail line per criterion (run with -s to see them live)."""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from lowsnrcap import (
    DelaySpreadSpec,
    FiniteSupport,
    GaussMarkov,
    InputScheme,
    MimoChannelSpec,
    SeparableStructure,
    corr_stats,
    detect_transmit_separable,
    ds_bounds,
    ds_to_miso,
    estimate_mi,
    grid_oracle,
    indiv_bounds_noneph,
    information_rate,
    is_ephemeral,
    limit_indiv_separable,
    limit_indiv_separable_noneph,
    limit_sum,
    limit_sum_separable,
    limit_sum_separable_noneph,
    sample_fading_block,
    upper_bound_sum,
)
from lowsnrcap.cli import main

PHI9 = 0.81 / 0.19


@contextmanager
def criterion(num, desc, budget_s):
    start = time.monotonic()
    try:
        yield
    except Exception:
        print(f"\n[acceptance] criterion {num} ({desc}): FAIL")
        raise
    elapsed = time.monotonic() - start
    if elapsed > budget_s:
        print(f"\n[acceptance] criterion {num} ({desc}): FAIL "
              f"(over budget: {elapsed:.1f}s > {budget_s}s)")
        pytest.fail(f"criterion {num} exceeded its runtime budget")
    print(f"\n[acceptance] criterion {num} ({desc}): PASS ({elapsed:.1f}s)")


def ar1_information_rate(a, rho):
    c = 1.0 + a * a + rho * (1.0 - a * a)
    return np.log((c + np.sqrt(c * c - 4.0 * a * a)) / 2.0)


def test_criterion_1_quadrature_oracle():
    with criterion(1, "quadrature vs closed form", 1.0):
        for a in (0.0, 0.3, 0.5, 0.9):
            for rho in (0.01, 1.0, 10.0):
                got = information_rate(GaussMarkov(a), rho, 4096)
                assert abs(got - ar1_information_rate(a, rho)) <= 1e-10


def test_criterion_2_optimizer_vs_brute_force():
    with criterion(2, "optimizer vs grid oracle, 50 random channels", 60.0):
        rng = np.random.default_rng(20240617)
        for _ in range(50):
            nt = int(rng.integers(1, 4))
            nr = int(rng.integers(1, 3))
            beta = float(rng.choice([1.0, 2.0]))
            rho = float(rng.uniform(0.05, 1.0))
            rows = []
            for _ in range(nt):
                row = []
                for _ in range(nr):
                    if rng.random() < 0.5:
                        row.append(GaussMarkov(float(rng.uniform(0, 0.9)),
                                               float(rng.uniform(0.5, 1.5))))
                    else:
                        r0 = float(rng.uniform(0.5, 1.5))
                        off = r0 * float(rng.uniform(0.05, 0.45)) \
                            * np.exp(1j * rng.uniform(0, 2 * np.pi))
                        row.append(FiniteSupport((r0, off)))
                rows.append(tuple(row))
            spec = MimoChannelSpec(tuple(rows))
            up = upper_bound_sum(spec, rho, beta)
            assert abs(up.upper - grid_oracle(spec, "sum_upper", rho, beta, 2000)) <= 1e-5
            li = limit_sum(spec, beta)
            assert abs(li.limit - grid_oracle(spec, "sum_limit", 0.0, beta, 2000)) <= 1e-5


def test_criterion_3_normalized_bound_convergence():
    with criterion(3, "U/rho^2 converges to the limit", 5.0):
        spec = MimoChannelSpec(((GaussMarkov(0.9),),))
        rel = []
        for rho in (1e-1, 1e-2, 1e-3, 1e-4):
            rep = upper_bound_sum(spec, rho)
            rel.append(abs(rep.upper / rho ** 2 - PHI9) / PHI9)
        assert all(rel[i + 1] < rel[i] for i in range(len(rel) - 1))
        assert rel[-1] <= 0.01


def test_criterion_4_corollary_consistency_web():
    with criterion(4, "corollary consistency web", 1.0):
        reltol = 1e-12
        gm9 = GaussMarkov(0.9)
        gm8 = GaussMarkov(0.8)

        # separable limit = full-grid limit on the expanded correlation grid
        for sep, beta in (
                (SeparableStructure((1.0, 0.5), (gm9,)), 1.0),
                (SeparableStructure((2.0, 1.0), (GaussMarkov(0.0),)), 1.0),
                (SeparableStructure((1.3, 0.7), (GaussMarkov(0.6, 1.1),
                                                 FiniteSupport([1, 0.3]))), 2.0)):
            a = limit_sum_separable(sep, beta).limit
            b = limit_sum(sep.expand(), beta).limit
            assert abs(a - b) <= reltol * abs(a)

        # nonephemeral specialization at beta = 1, sum constraints
        sep = SeparableStructure((1.0, 0.5), (gm9, GaussMarkov(0.8, 1.2)))
        assert abs(limit_sum_separable_noneph(sep)
                   - limit_sum_separable(sep, 1.0).limit) \
            <= reltol * limit_sum_separable_noneph(sep)

        # nonephemeral specialization at beta = 1, individual constraints
        assert abs(limit_indiv_separable_noneph(sep)
                   - limit_indiv_separable(sep, 1.0).limit) \
            <= reltol * limit_indiv_separable_noneph(sep)

        # delay-separable limit equals the one-receive-antenna separable
        # individual-constraint formula on the tap-equivalent channel
        for beta in (1.0, 2.0):
            ds = DelaySpreadSpec((gm8, gm8.scaled(0.5)))
            sep_ds = detect_transmit_separable(ds_to_miso(ds))
            a = ds_bounds(ds, beta).limit
            b = limit_indiv_separable(sep_ds, beta).limit
            assert abs(a - b) <= reltol * abs(a)

        # delay-separable nonephemeral value at beta = 1
        ds = DelaySpreadSpec((gm8, gm8))
        phi = corr_stats(gm8).phi
        cor9 = (1.0 + 1.0) ** 2 * phi
        assert abs(ds_bounds(ds, 1.0).limit - cor9) <= reltol * cor9

        # identical transmit correlations: coefficient sandwich closes
        for nt in (2, 3):
            spec = MimoChannelSpec(tuple((gm9, gm8) for _ in range(nt)))
            cb = indiv_bounds_noneph(spec)
            target = nt * nt * (corr_stats(gm9).phi + corr_stats(gm8).phi)
            assert abs(cb.upper_coeff - target) <= reltol * target
            assert abs(cb.lower_coeff - target) <= reltol * target


def test_criterion_5_constraint_comparison_ratios():
    with criterion(5, "individual vs sum constraint ratios", 1.0):
        sep = SeparableStructure((1.0, 0.5), (GaussMarkov(0.9),))
        sum_lim = limit_sum_separable_noneph(sep)
        indiv_lim = limit_indiv_separable_noneph(sep)
        ratio = indiv_lim / sum_lim
        expected = (sep.alpha_sum / sep.alpha_max) ** 2
        assert expected == 2.25
        assert abs(ratio - expected) <= 1e-12 * expected

        # matching total peak power by scaling the sum-constraint SNR by the
        # antenna count multiplies its limit by nt^2
        nt = sep.nt
        sum_scaled = nt * nt * sum_lim
        advantage = sum_scaled / indiv_lim
        expected_adv = (nt * sep.alpha_max) ** 2 / sep.alpha_sum ** 2
        assert abs(advantage - expected_adv) <= 1e-12 * expected_adv
        assert advantage >= 1.0


def test_criterion_6_mi_sandwich():
    with criterion(6, "Monte Carlo MI sandwich", 600.0):
        spec = MimoChannelSpec(((GaussMarkov(0.9),),))
        scheme = InputScheme("sum", (1.0,), 32)
        rhos = (0.5, 0.25, 0.125)
        normalized = []
        for rho in rhos:
            est = estimate_mi(spec, scheme, rho, 20000, master_seed=20240617, workers=1)
            ub = upper_bound_sum(spec, rho).upper
            assert est.mi_per_use >= -3 * est.std_err
            assert est.mi_per_use <= ub + 3 * est.std_err
            normalized.append(est.mi_per_use / rho ** 2)
        assert all(normalized[i + 1] >= normalized[i] for i in range(len(rhos) - 1))


def test_criterion_7_fading_statistics():
    with criterion(7, "fading synthesis statistics", 30.0):
        draws = 100_000
        for model, r1 in ((GaussMarkov(0.9), 0.9), (FiniteSupport([1, 0.5]), 0.5)):
            rng = np.random.default_rng(20240617)
            blocks = sample_fading_block(model, 2, rng, size=draws)
            lag1 = blocks[:, 1] * np.conj(blocks[:, 0])
            se = lag1.std() / np.sqrt(draws)
            assert abs(lag1.mean() - r1) <= 3 * se
            pseudo = blocks[:, 0] ** 2
            se = pseudo.std() / np.sqrt(draws)
            assert abs(pseudo.mean()) <= 3 * se


def test_criterion_8_sweep_determinism(tmp_path, capsys):
    with criterion(8, "byte-identical sweeps across runs and workers", 600.0):
        doc = {
            "channel": {"type": "mimo",
                        "models": [[{"type": "gauss_markov", "a": 0.9, "r0": 1.0}]]},
            "constraints": {"mode": "sum", "beta": 1.0},
            "sweep": {"rho": [0.5, 0.25, 0.125]},
            "sim": {"block_length": 32, "trials": 20000, "seed": 20240617},
        }
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(doc))
        outputs = []
        for name, workers in (("a", "1"), ("b", "1"), ("c", "8")):
            out = tmp_path / f"sweep_{name}.csv"
            assert main(["sweep", "--config", str(cfg), "--workers", workers,
                         "--out", str(out)]) == 0
            outputs.append(out.read_bytes())
        capsys.readouterr()
        assert outputs[0] == outputs[1]
        assert outputs[0] == outputs[2]


def test_criterion_9_ephemeral_boundary():
    with criterion(9, "ephemeral boundary flip", 1.0):
        assert is_ephemeral(GaussMarkov(np.sqrt(1.0 / 3.0 - 1e-6)))
        assert not is_ephemeral(GaussMarkov(np.sqrt(1.0 / 3.0 + 1e-6)))
