"""Scenario execution and sweep fan-out with deterministic CSV emission."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, SweepSpec, config_with_value
from .dynamics import EvolutionCache
from .operators import assemble_hamiltonian
from .production import EPReport, ep_thermo_averaged, full_report


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_horizon(t: float) -> str:
    return format(float(t), "g")


def max_parallelism() -> int:
    """Worker cap: QSPIN_THREADS if set, else the hardware parallelism."""
    env = os.environ.get("QSPIN_THREADS", "").strip()
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"QSPIN_THREADS must be >= 1, got {env!r}")
        return n
    return os.cpu_count() or 1


def timeseries_columns(n_regions: int) -> list[str]:
    cols = ["t", "S_total"]
    cols += [f"S_region_{a}" for a in range(n_regions)]
    cols += ["gap_D"]
    cols += [f"rate_eq1_region_{a}" for a in range(n_regions)]
    cols += ["e_micro_h", "e_micro_H", "e_thermo"]
    cols += [f"flux_region_{a}" for a in range(n_regions)]
    cols += ["floored_regions"]
    return cols


def _timeseries_row(r: EPReport) -> list[str]:
    row = [_fmt(r.t), _fmt(r.entropy_total)]
    row += [_fmt(s) for s in r.region_entropies]
    row += [_fmt(r.gap)]
    row += [_fmt(v) for v in r.rates]
    row += [_fmt(r.e_micro_h), _fmt(r.e_micro_total), _fmt(r.e_thermo)]
    row += [_fmt(f) for f in r.fluxes]
    row += [";".join(str(a) for a in r.floored_regions)]
    return row


@dataclass
class ScenarioResult:
    """Reports, averaged quantities, and the emitted file paths."""

    reports: list[EPReport]
    averaged: dict[float, float]  # horizon -> averaged flux bookkeeping
    summary: list[tuple[str, str]]
    timeseries_path: Path
    summary_path: Path


def _summary_rows(config: ScenarioConfig, reports, averaged) -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = [("n_points", str(len(reports)))]
    for horizon, value in averaged.items():
        rows.append((f"e_thermo_averaged_T={_fmt_horizon(horizon)}", _fmt(value)))
    if reports:
        s0 = reports[0].entropy_total
        drift = max(abs(r.entropy_total - s0) for r in reports)
        rows += [
            ("S_total_initial", _fmt(s0)),
            ("max_entropy_drift", _fmt(drift)),
            ("entropy_drift_pass", str(int(drift <= config.tolerances.entropy_drift_atol))),
            ("mean_e_micro_h", _fmt(float(np.mean([r.e_micro_h for r in reports])))),
            ("mean_e_micro_H", _fmt(float(np.mean([r.e_micro_total for r in reports])))),
            ("mean_e_thermo", _fmt(float(np.mean([r.e_thermo for r in reports])))),
            ("mean_gap_D", _fmt(float(np.mean([r.gap for r in reports])))),
            ("final_gap_D", _fmt(reports[-1].gap)),
            ("min_gap_D", _fmt(min(r.gap for r in reports))),
        ]
        n_regions = config.partition.n_regions
        for a in range(n_regions):
            rows.append(
                (
                    f"mean_flux_region_{a}",
                    _fmt(float(np.mean([r.fluxes[a] for r in reports]))),
                )
            )
        rows.append(
            ("floored_points", str(sum(1 for r in reports if r.floored_regions)))
        )
        for name in reports[0].checks:
            passed = sum(1 for r in reports if r.checks[name])
            rows.append((f"check_{name}_pass", str(passed)))
            rows.append((f"check_{name}_fail", str(len(reports) - passed)))
    return rows


def run_scenario(config: ScenarioConfig, out_dir=None) -> ScenarioResult:
    """Evaluate the scenario and write ``timeseries.csv`` and ``summary.csv``.

    Output is byte-identical across reruns of the same config on the same
    platform: all values go through one fixed floating-point format and the
    row order follows the grid.
    """
    out = Path(out_dir if out_dir is not None else (config.output_dir or "."))
    out.mkdir(parents=True, exist_ok=True)

    reports = full_report(
        config.psi0,
        config.interaction,
        config.partition,
        config.betas,
        config.time_grid,
        tolerances=config.tolerances,
    )
    cache = EvolutionCache.from_hamiltonian(
        assemble_hamiltonian(config.interaction, config.lattice)
    )
    averaged = {
        horizon: ep_thermo_averaged(
            config.psi0,
            config.interaction,
            config.partition,
            config.betas,
            horizon,
            cache=cache,
        )
        for horizon in config.horizons
    }

    ts_path = out / "timeseries.csv"
    with ts_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(timeseries_columns(config.partition.n_regions))
        for r in reports:
            writer.writerow(_timeseries_row(r))

    summary = _summary_rows(config, reports, averaged)
    sm_path = out / "summary.csv"
    with sm_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerows(summary)

    return ScenarioResult(reports, averaged, summary, ts_path, sm_path)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def sweep_columns(n_regions: int) -> list[str]:
    cols = [
        "value",
        "e_thermo_averaged",
        "gap_micro_thermo",
        "gap_D_final",
        "min_gap_D",
        "max_dev_micro_h_H",
    ]
    cols += [f"avg_flux_region_{a}" for a in range(n_regions)]
    cols += ["error"]
    return cols


def _sweep_row(base: ScenarioConfig, param: str, value) -> list[str]:
    config = config_with_value(base, param, value)
    reports = full_report(
        config.psi0,
        config.interaction,
        config.partition,
        config.betas,
        config.time_grid,
        tolerances=config.tolerances,
    )
    horizon = config.horizons[0] if config.horizons else float(config.time_grid[-1])
    averaged = ep_thermo_averaged(
        config.psi0, config.interaction, config.partition, config.betas, horizon
    )
    nan = float("nan")
    if reports:
        gap_micro_thermo = float(
            np.mean([abs(r.e_micro_h - r.e_thermo) for r in reports])
        )
        gap_final = reports[-1].gap
        min_gap = min(r.gap for r in reports)
        max_dev = max(abs(r.e_micro_h - r.e_micro_total) for r in reports)
        avg_flux = [
            float(np.mean([r.fluxes[a] for r in reports]))
            for a in range(config.partition.n_regions)
        ]
    else:
        gap_micro_thermo = gap_final = min_gap = max_dev = nan
        avg_flux = [nan] * config.partition.n_regions
    row = [
        _fmt(value) if isinstance(value, float) else str(value),
        _fmt(averaged),
        _fmt(gap_micro_thermo),
        _fmt(gap_final),
        _fmt(min_gap),
        _fmt(max_dev),
    ]
    row += [_fmt(f) for f in avg_flux]
    row += [""]
    return row


def run_sweep(sweep: SweepSpec, out_dir=None) -> Path:
    """One aggregated CSV row per sweep value, in input order.

    Values are evaluated in parallel (capped by ``QSPIN_THREADS``) but merged
    by index, so the output is deterministic; a failing value fills its
    ``error`` column and the sweep continues.
    """
    base = sweep.base
    out = Path(out_dir if out_dir is not None else (base.output_dir or "."))
    out.mkdir(parents=True, exist_ok=True)
    n_regions = base.partition.n_regions
    n_cols = len(sweep_columns(n_regions))

    def one(value) -> list[str]:
        try:
            return _sweep_row(base, sweep.param, value)
        except Exception as exc:  # failure isolation per sweep value
            row = [str(value)] + [""] * (n_cols - 2)
            row.append(f"{type(exc).__name__}: {exc}")
            return row

    workers = min(max_parallelism(), len(sweep.values))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, sweep.values))
    else:
        rows = [one(v) for v in sweep.values]

    path = out / "sweep.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(sweep_columns(n_regions))
        writer.writerows(rows)
    return path
