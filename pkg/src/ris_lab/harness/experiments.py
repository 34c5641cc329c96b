"""Experiment presets: deterministic Monte Carlo sweeps written as CSV.

Trials are split into fixed-size chunks keyed by (seed, experiment, sweep
coordinate, trial); chunk results merge in chunk order, so output bytes do
not depend on the thread count. The scheduling presets are sequential by
nature (the multiplier state is a per-slot dependency) and run single-threaded.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from ..allocation import AllocationConfig, run_algorithm2
from ..beamforming import (
    LinkBudget,
    algorithm1,
    continuous_phase_set,
    make_phase_set,
    snr_upper_ideal,
)
from ..channel import Scenario, ScenarioGeometry, sample_rician
from ..modulation import simulate_ser, theoretical_ser
from ..numerics import BivariateAccumulator, StatAccumulator
from ..rng import substream
from .config import ExperimentSpec, LoadedConfig, nats_to_mbps
from .csvio import ResultRow, write_csv

_EXP_IDS = {
    "fig4-ratio": 4,
    "fig5-mrt-ratio": 5,
    "fig6-ser": 6,
    "fig7-convergence": 7,
    "fig8-individual": 8,
    "fig9-sumrate": 9,
    "custom": 10,
}

_CHUNK = 64


def _map_ordered(tasks, threads: int):
    """Run callables and return results in task order."""
    if threads <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda fn: fn(), tasks))


def _chunk_ranges(trials: int):
    return [(lo, min(lo + _CHUNK, trials)) for lo in range(0, trials, _CHUNK)]


def _phase_set_for(b):
    return continuous_phase_set() if b == "inf" else make_phase_set(int(b))


def _point_seed(seed: int, *ids: int) -> int:
    return int(np.random.SeedSequence([seed, *ids]).generate_state(1)[0])


def _ratio_rows(
    name: str, spec: ExperimentSpec, scenario: Scenario, threads: int
) -> list[ResultRow]:
    """Ergodic-rate ratio of the greedy selector (per control-bit count)
    against the ideal-reflection ceiling, over the element-count sweep."""
    exp_id = _EXP_IDS[name]
    budget = LinkBudget(
        tx_power=scenario.tx_power_rb, noise=scenario.noise_power_rb
    )
    phase_sets = {b: _phase_set_for(b) for b in spec.b_list}

    rows: list[ResultRow] = []
    for n_idx, n in enumerate(spec.n_list):
        sc = scenario.with_overrides(num_elements=n, num_due=0, num_rue=1)
        geo = ScenarioGeometry(sc)
        f_params, g_params = geo.f_params[0], geo.g_params[0]
        m = sc.num_bs_antennas

        def chunk_task(lo, hi, n=n, f_params=f_params, g_params=g_params, m=m, n_idx=n_idx):
            accs = {b: BivariateAccumulator() for b in spec.b_list}
            for trial in range(lo, hi):
                rng = substream(spec.seed, exp_id, n_idx, trial)
                G = sample_rician(g_params, n, m, rng)
                f = sample_rician(f_params, n, 1, rng).ravel()
                upper = math.log1p(snr_upper_ideal(f, G, budget))
                for b, ps in phase_sets.items():
                    res = algorithm1(f, G, ps)
                    gamma = budget.tx_power * res.snr / budget.noise
                    accs[b].add_many([math.log1p(gamma)], [upper])
            return accs

        tasks = [
            (lambda lo=lo, hi=hi: chunk_task(lo, hi))
            for lo, hi in _chunk_ranges(spec.trials)
        ]
        merged = {b: BivariateAccumulator() for b in spec.b_list}
        for result in _map_ordered(tasks, threads):
            for b in spec.b_list:
                merged[b] = merged[b].merge(result[b])

        for b in spec.b_list:
            acc = merged[b]
            lo, hi = acc.ratio_ci95()
            rows.append(
                ResultRow(
                    experiment=name,
                    coords={"N": n, "b": b},
                    metric="rate_ratio",
                    value=acc.ratio_of_means(),
                    ci_low=lo,
                    ci_high=hi,
                    trials=spec.trials,
                    seed=spec.seed,
                )
            )
    return rows


def _mrt_ratio_rows(
    spec: ExperimentSpec, scenario: Scenario, threads: int
) -> list[ResultRow]:
    """Matched precoding vs antenna selection after the greedy reflection."""
    name = "fig5-mrt-ratio"
    exp_id = _EXP_IDS[name]
    ps = continuous_phase_set()

    rows: list[ResultRow] = []
    for m_idx, m in enumerate(spec.m_list):
        for n_idx, n in enumerate(spec.n_list):
            sc = scenario.with_overrides(
                num_elements=n, num_bs_antennas=m, num_due=0, num_rue=1
            )
            geo = ScenarioGeometry(sc)
            f_params, g_params = geo.f_params[0], geo.g_params[0]
            budget = LinkBudget(tx_power=sc.tx_power_rb, noise=sc.noise_power_rb)
            snr_scale = budget.tx_power / budget.noise

            def chunk_task(lo, hi, n=n, m=m, n_idx=n_idx, m_idx=m_idx,
                           f_params=f_params, g_params=g_params, snr_scale=snr_scale):
                acc = BivariateAccumulator()
                for trial in range(lo, hi):
                    rng = substream(spec.seed, exp_id, m_idx, n_idx, trial)
                    G = sample_rician(g_params, n, m, rng)
                    f = sample_rician(f_params, n, 1, rng).ravel()
                    res = algorithm1(f, G, ps)
                    eff = res.reflection.apply(f, G)
                    mrt = math.log1p(snr_scale * float(np.sum(np.abs(eff) ** 2)))
                    sel = math.log1p(
                        snr_scale * float(np.abs(eff[res.selected_antenna]) ** 2)
                    )
                    acc.add_many([mrt], [sel])
                return acc

            tasks = [
                (lambda lo=lo, hi=hi: chunk_task(lo, hi))
                for lo, hi in _chunk_ranges(spec.trials)
            ]
            acc = BivariateAccumulator()
            for result in _map_ordered(tasks, threads):
                acc = acc.merge(result)
            lo, hi = acc.ratio_ci95()
            rows.append(
                ResultRow(
                    experiment=name,
                    coords={"N": n, "M": m},
                    metric="mrt_selection_rate_ratio",
                    value=acc.ratio_of_means(),
                    ci_low=lo,
                    ci_high=hi,
                    trials=spec.trials,
                    seed=spec.seed,
                )
            )
    return rows


def _ser_rows(
    spec: ExperimentSpec,
    scenario: Scenario,
    allocation: AllocationConfig,
    threads: int,
) -> list[ResultRow]:
    """Simulated and analytic symbol error rate of the reflected PSK link."""
    name = "fig6-ser"
    exp_id = _EXP_IDS[name]
    symbol_set = allocation.symbol_set

    def point_task(n_idx, es_idx, n, es_db):
        es = 10.0 ** (es_db / 10.0)
        sim, lo, hi = simulate_ser(
            scenario,
            symbol_set,
            n,
            spec.n_s,
            es,
            spec.trials,
            _point_seed(spec.seed, exp_id, n_idx, es_idx),
        )
        theory = theoretical_ser(symbol_set, n, spec.n_s, es)
        return [
            ResultRow(
                experiment=name,
                coords={"N": n, "es_n0_db": float(es_db)},
                metric="ser_sim",
                value=sim,
                ci_low=lo,
                ci_high=hi,
                trials=spec.trials,
                seed=spec.seed,
            ),
            ResultRow(
                experiment=name,
                coords={"N": n, "es_n0_db": float(es_db)},
                metric="ser_theory",
                value=theory,
                ci_low=theory,
                ci_high=theory,
                trials=spec.trials,
                seed=spec.seed,
            ),
        ]

    tasks = [
        (lambda ni=ni, ei=ei, n=n, db=db: point_task(ni, ei, n, db))
        for ni, n in enumerate(spec.n_list)
        for ei, db in enumerate(spec.snr_db_list)
    ]
    rows: list[ResultRow] = []
    for point_rows in _map_ordered(tasks, threads):
        rows.extend(point_rows)
    return rows


def _trajectory_rows(
    spec: ExperimentSpec, scenario: Scenario, allocation: AllocationConfig
) -> list[ResultRow]:
    """Multiplier-update convergence trace of the scheduler."""
    name = "fig7-convergence"
    traj = run_algorithm2(
        scenario, allocation, spec.slots, spec.snr_mode, spec.seed
    )
    sum_rates = traj.rates.sum(axis=1)
    run_rate = np.cumsum(sum_rates) / np.arange(1, spec.slots + 1)
    run_power = traj.running_mean_power()
    stride = max(1, spec.slots // 200)

    rows: list[ResultRow] = []
    for t in range(0, spec.slots, stride):
        coords = {"slot": t + 1}
        for metric, value in (
            ("running_sum_rate_mbps", nats_to_mbps(float(run_rate[t]), scenario)),
            ("running_total_power_w", float(run_power[t])),
            ("mu", float(traj.mus[t])),
            ("max_lambda", float(traj.lambdas[t].max())),
        ):
            rows.append(
                ResultRow(
                    experiment=name,
                    coords=coords,
                    metric=metric,
                    value=value,
                    ci_low=value,
                    ci_high=value,
                    trials=1,
                    seed=spec.seed,
                )
            )
    return rows


def _with_min_rate(allocation: AllocationConfig, min_rate: float) -> AllocationConfig:
    return replace(allocation, min_rate=min_rate)


def _individual_rows(
    spec: ExperimentSpec,
    scenario: Scenario,
    allocation: AllocationConfig,
    min_rate_mbps: float,
) -> list[ResultRow]:
    """Per-user trailing average rates with and without the rate floor."""
    name = "fig8-individual"
    window = spec.slots // 2
    rows: list[ResultRow] = []
    for label, cfg in (
        ("on", allocation),
        ("off", _with_min_rate(allocation, 0.0)),
    ):
        traj = run_algorithm2(scenario, cfg, spec.slots, spec.snr_mode, spec.seed)
        tail = traj.rates[-window:]
        for k in range(scenario.num_ues):
            acc = StatAccumulator()
            acc.add_many(tail[:, k])
            lo, hi = acc.ci95()
            rows.append(
                ResultRow(
                    experiment=name,
                    coords={"ue": k, "min_rate": label},
                    metric="avg_rate_mbps",
                    value=nats_to_mbps(acc.mean, scenario),
                    ci_low=nats_to_mbps(lo, scenario),
                    ci_high=nats_to_mbps(hi, scenario),
                    trials=window,
                    seed=spec.seed,
                )
            )
            rows.append(
                ResultRow(
                    experiment=name,
                    coords={"ue": k, "min_rate": label},
                    metric="min_rate_mbps",
                    value=min_rate_mbps if label == "on" else 0.0,
                    ci_low=min_rate_mbps if label == "on" else 0.0,
                    ci_high=min_rate_mbps if label == "on" else 0.0,
                    trials=window,
                    seed=spec.seed,
                )
            )
    return rows


def _sumrate_rows(
    spec: ExperimentSpec, scenario: Scenario, allocation: AllocationConfig
) -> list[ResultRow]:
    """Trailing average sum-rate with and without the rate floor, over N."""
    name = "fig9-sumrate"
    window = spec.slots // 2
    rows: list[ResultRow] = []
    for n in spec.n_list:
        sc = scenario.with_overrides(num_elements=n)
        for label, cfg in (
            ("on", allocation),
            ("off", _with_min_rate(allocation, 0.0)),
        ):
            traj = run_algorithm2(sc, cfg, spec.slots, spec.snr_mode, spec.seed)
            acc = StatAccumulator()
            acc.add_many(traj.rates[-window:].sum(axis=1))
            lo, hi = acc.ci95()
            rows.append(
                ResultRow(
                    experiment=name,
                    coords={"N": n, "min_rate": label},
                    metric="avg_sum_rate_mbps",
                    value=nats_to_mbps(acc.mean, sc),
                    ci_low=nats_to_mbps(lo, sc),
                    ci_high=nats_to_mbps(hi, sc),
                    trials=window,
                    seed=spec.seed,
                )
            )
    return rows


def run_experiment(
    loaded: LoadedConfig, threads: int = 1, write: bool = True
) -> list[ResultRow]:
    """Run the configured experiment; write `<output_dir>/<name>.csv`."""
    spec = loaded.experiment
    scenario = loaded.scenario
    if spec.name in ("fig4-ratio", "custom"):
        rows = _ratio_rows(spec.name, spec, scenario, threads)
    elif spec.name == "fig5-mrt-ratio":
        rows = _mrt_ratio_rows(spec, scenario, threads)
    elif spec.name == "fig6-ser":
        rows = _ser_rows(spec, scenario, loaded.allocation, threads)
    elif spec.name == "fig7-convergence":
        rows = _trajectory_rows(spec, scenario, loaded.allocation)
    elif spec.name == "fig8-individual":
        rows = _individual_rows(
            spec, scenario, loaded.allocation, loaded.min_rate_mbps
        )
    elif spec.name == "fig9-sumrate":
        rows = _sumrate_rows(spec, scenario, loaded.allocation)
    else:  # unreachable; ExperimentSpec validates names
        raise ValueError(f"unknown experiment {spec.name!r}")
    if write:
        write_csv(rows, f"{spec.output_dir}/{spec.name}.csv")
    return rows
