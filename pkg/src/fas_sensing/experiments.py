"""Seeded Monte Carlo campaigns: scheme comparison sweeps and AO convergence traces.

Every trial index owns a random stream derived from ``(seed, trial)``.  The
channel drawn from that stream is shared by all schemes and all sweep points,
so comparisons are paired and results do not depend on worker count or
scheduling order.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .baselines import eas_design, fpa_design, rpa_design
from .channel import (
    ConfigError,
    ScenarioConfig,
    channel_vector,
    dbm_to_watts,
    sample_channel,
    watts_to_dbm,
)
from .detector import DetectorConfig, Hypothesis, detection_prob, simulate_detector, snr
from .numerics import SeededRng
from .optimizer import AOConfig, AOTrace, alternating_optimize

log = logging.getLogger(__name__)

SCHEMES = ("FAS", "FPA", "RPA", "EAS")
DEFAULT_POWER_GRID_DBM = tuple(float(p) for p in range(0, 21, 2))
DEFAULT_DELTA_GRID = tuple(round(0.02 * k, 2) for k in range(1, 11))
DEFAULT_N_VALUES = (2, 4, 6)

# sweep parameter name -> scenario field it drives
SWEEP_PARAMS = {"P_dBm": "power", "delta": "max_false_alarm", "N": "n_antennas", "none": None}

TRIAL_COLUMNS = ["sweep_param", "sweep_value", "scheme", "trial", "gamma", "pd", "iterations", "seconds"]
CURVE_COLUMNS = ["sweep_value", "scheme", "mean_pd", "stderr"]
TRACE_COLUMNS = ["n_antennas", "trial", "iteration", "pd", "gamma"]


@dataclass(frozen=True)
class SweepSpec:
    param: str = "none"
    values: tuple = (math.nan,)

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ConfigError(f"unknown sweep parameter {self.param!r}; choose from {sorted(SWEEP_PARAMS)}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.param == "delta" and not all(0.0 < v < 1.0 for v in self.values):
            raise ConfigError("delta sweep values must lie in (0, 1)")
        if self.param == "N" and not all(v >= 1 and float(v).is_integer() for v in self.values):
            raise ConfigError("antenna-count sweep values must be positive integers")

    def scenario_at(self, base: ScenarioConfig, value: float) -> ScenarioConfig:
        target = SWEEP_PARAMS[self.param]
        if target is None:
            return base
        if self.param == "P_dBm":
            return base.with_updates(power=dbm_to_watts(value))
        if self.param == "N":
            return base.with_updates(n_antennas=int(value))
        return base.with_updates(**{target: value})


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    ao: AOConfig = field(default_factory=AOConfig)
    trials: int = 100
    seed: int = 0
    sweep: SweepSpec = field(default_factory=SweepSpec)
    schemes: tuple = SCHEMES
    workers: int = 1
    empirical: bool = False
    empirical_trials: int = 2000
    record_time: bool = False
    n_values: tuple = DEFAULT_N_VALUES

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ConfigError(f"unknown schemes {sorted(unknown)}; choose from {list(SCHEMES)}")
        # keep the canonical order so emitted rows never depend on how schemes were listed
        object.__setattr__(self, "schemes", tuple(s for s in SCHEMES if s in self.schemes))
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        kwargs = {}
        if "scenario" in data:
            kwargs["scenario"] = ScenarioConfig.from_dict(data.pop("scenario"))
        if "ao" in data:
            try:
                kwargs["ao"] = AOConfig(**data.pop("ao"))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad AO settings: {exc}") from exc
        if "sweep" in data:
            sw = data.pop("sweep")
            kwargs["sweep"] = SweepSpec(sw.get("param", "none"), tuple(sw.get("values", (math.nan,))))
        for key in ("schemes", "n_values"):
            if key in data:
                kwargs[key] = tuple(data.pop(key))
        for key in ("trials", "seed", "workers", "empirical", "empirical_trials", "record_time"):
            if key in data:
                kwargs[key] = data.pop(key)
        data.pop("out", None)
        if data:
            raise ConfigError(f"unknown experiment keys: {sorted(data)}")
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
        if "scenario" not in data and "ao" not in data and "trials" not in data:
            # bare scenario document
            return cls(scenario=ScenarioConfig.from_dict(data))
        return cls.from_dict(data)


@dataclass(frozen=True)
class TrialResult:
    sweep_param: str
    sweep_value: float
    scheme: str
    trial: int
    gamma: float
    pd: float
    iterations: int
    seconds: float | None = None
    pd_empirical: float | None = None

    def sort_key(self):
        # NaN marks "no sweep" and must not break the ordering
        value = -math.inf if math.isnan(self.sweep_value) else self.sweep_value
        return (value, SCHEMES.index(self.scheme), self.trial)


@dataclass(frozen=True)
class CurvePoint:
    sweep_value: float
    scheme: str
    mean_pd: float
    stderr: float
    n_trials: int = 0


@dataclass(frozen=True)
class ConvergenceRun:
    n_antennas: int
    trial: int
    trace: AOTrace

    @property
    def iterations(self) -> int:
        return self.trace.iterations

    @property
    def final_pd(self) -> float:
        return self.trace.pd[-1]


def trial_rng(config: ExperimentConfig, trial: int) -> SeededRng:
    return SeededRng(config.seed, trial)


def _scheme_design(scheme, scenario, realization, rng, ao):
    """Design for one scheme; FAS also returns its outer-iteration count."""
    if scheme == "FPA":
        return fpa_design(scenario, realization), 0
    if scheme == "RPA":
        return rpa_design(scenario, realization, rng.child(1)), 0
    if scheme == "EAS":
        return eas_design(scenario, realization), 0
    init = fpa_design(scenario, realization)
    design, trace = alternating_optimize(realization, scenario, ao, init)
    return design, trace.iterations


def _evaluate(config, scheme, scenario, realization, rng, trial, sweep_value) -> TrialResult:
    start = time.perf_counter()
    design, iterations = _scheme_design(scheme, scenario, realization, rng, config.ao)
    h = channel_vector(design.positions, realization, scenario.wavelength)
    det = DetectorConfig.from_scenario(scenario)
    gamma = snr(design.w, h, scenario.power, scenario.noise_power)
    pd = detection_prob(design.tau, gamma, det)
    elapsed = time.perf_counter() - start
    pd_emp = None
    if config.empirical:
        sim_rng = rng.child(2, SCHEMES.index(scheme))
        pd_emp = simulate_detector(h, design.w, design.tau, Hypothesis.H1, det,
                                   config.empirical_trials, sim_rng, power=scenario.power)
    return TrialResult(config.sweep.param, sweep_value, scheme, trial, gamma, pd, iterations,
                       elapsed if config.record_time else None, pd_emp)


def run_trial(config: ExperimentConfig, scheme: str, trial: int,
              scenario: ScenarioConfig | None = None, sweep_value: float = math.nan) -> TrialResult:
    """Sample the trial's channel and evaluate one scheme on it."""
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}")
    scenario = config.scenario if scenario is None else scenario
    rng = trial_rng(config, trial)
    realization = sample_channel(scenario, rng.child(0))
    return _evaluate(config, scheme, scenario, realization, rng, trial, sweep_value)


def _trial_task(args) -> list[TrialResult]:
    config, scenario, trial, sweep_value = args
    rng = trial_rng(config, trial)
    realization = sample_channel(scenario, rng.child(0))
    return [_evaluate(config, s, scenario, realization, rng, trial, sweep_value) for s in config.schemes]


def _map(fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def run_sweep(config: ExperimentConfig, sweep: SweepSpec | None = None) -> list[TrialResult]:
    sweep = config.sweep if sweep is None else sweep
    config = replace(config, sweep=sweep)
    tasks = [
        (config, sweep.scenario_at(config.scenario, value), trial, value)
        for value in sweep.values
        for trial in range(config.trials)
    ]
    log.info("running %d trials x %d sweep points (%s)", config.trials, len(sweep.values), sweep.param)
    results = [r for batch in _map(_trial_task, tasks, config.workers) for r in batch]
    return sorted(results, key=TrialResult.sort_key)


def aggregate(results: Iterable[TrialResult]) -> list[CurvePoint]:
    groups: dict[tuple, list[float]] = {}
    for r in results:
        groups.setdefault(r.sort_key()[:2], []).append((r.sweep_value, r.pd))
    points = []
    for (_, idx), entries in sorted(groups.items()):
        value = entries[0][0]
        pds = [pd for _, pd in entries]
        arr = np.asarray(pds)
        se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
        points.append(CurvePoint(value, SCHEMES[idx], float(arr.mean()), se, len(arr)))
    return points


def sweep_power(config: ExperimentConfig, values_dbm: Sequence[float] | None = None):
    """Detection probability versus transmit power (dBm); returns ``(trials, curve)``."""
    values = DEFAULT_POWER_GRID_DBM if values_dbm is None else tuple(values_dbm)
    results = run_sweep(config, SweepSpec("P_dBm", values))
    return results, aggregate(results)


def sweep_delta(config: ExperimentConfig, values: Sequence[float] | None = None):
    """Detection probability versus the false-alarm cap; returns ``(trials, curve)``."""
    values = DEFAULT_DELTA_GRID if values is None else tuple(values)
    results = run_sweep(config, SweepSpec("delta", values))
    return results, aggregate(results)


def run_campaign(config: ExperimentConfig):
    """All schemes at the configured scenario (or its configured sweep)."""
    results = run_sweep(config)
    return results, aggregate(results)


def _convergence_task(args) -> ConvergenceRun:
    config, n, trial = args
    scenario = config.scenario.with_updates(n_antennas=n)
    rng = trial_rng(config, trial)
    realization = sample_channel(scenario, rng.child(0))
    init = fpa_design(scenario, realization)
    _, trace = alternating_optimize(realization, scenario, config.ao, init)
    return ConvergenceRun(n, trial, trace)


def convergence_experiment(config: ExperimentConfig, n_values: Sequence[int] | None = None) -> list[ConvergenceRun]:
    """AO traces per antenna count on paired channel draws."""
    n_values = config.n_values if n_values is None else tuple(n_values)
    tasks = [(config, int(n), t) for n in n_values for t in range(config.trials)]
    runs = _map(_convergence_task, tasks, config.workers)
    return sorted(runs, key=lambda r: (r.n_antennas, r.trial))


def convergence_summary(runs: Sequence[ConvergenceRun]) -> dict[int, dict[str, float]]:
    out: dict[int, dict[str, float]] = {}
    for n in sorted({r.n_antennas for r in runs}):
        sel = [r for r in runs if r.n_antennas == n]
        out[n] = {
            "median_iterations": float(np.median([r.iterations for r in sel])),
            "mean_final_pd": float(np.mean([r.final_pd for r in sel])),
            "mean_initial_pd": float(np.mean([r.trace.pd[0] for r in sel])),
            "trials": len(sel),
        }
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def emit_csv(rows: Sequence, path, kind: str | None = None) -> Path:
    """Write trial, curve or convergence rows with a header line.

    ``kind`` is inferred from the row type; pass it explicitly for an empty
    list.  Trial files gain a ``pd_empirical`` column when any row carries
    an empirical estimate.
    """
    path = Path(path)
    rows = list(rows)
    if kind is None:
        if not rows:
            raise ValueError("pass kind= to emit an empty file")
        kind = {TrialResult: "trial", CurvePoint: "curve", ConvergenceRun: "trace"}[type(rows[0])]
    if kind == "trial":
        columns = list(TRIAL_COLUMNS)
        if any(r.pd_empirical is not None for r in rows):
            columns.append("pd_empirical")
        rows = sorted(rows, key=TrialResult.sort_key)
        body = [[getattr(r, c) for c in columns] for r in rows]
    elif kind == "curve":
        columns = CURVE_COLUMNS
        body = [[r.sweep_value, r.scheme, r.mean_pd, r.stderr] for r in rows]
    elif kind == "trace":
        columns = TRACE_COLUMNS
        body = [
            [r.n_antennas, r.trial, i, pd, g]
            for r in sorted(rows, key=lambda r: (r.n_antennas, r.trial))
            for i, (pd, g) in enumerate(zip(r.trace.pd, r.trace.gamma))
        ]
    else:
        raise ValueError(f"unknown CSV kind {kind!r}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in body:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def describe(config: ExperimentConfig) -> dict:
    """JSON-friendly summary of a config, for logs and output manifests."""
    scenario = config.scenario
    return {
        "scenario": asdict(scenario) | {"P_dBm": watts_to_dbm(scenario.power)},
        "ao": asdict(config.ao),
        "trials": config.trials,
        "seed": config.seed,
        "schemes": list(config.schemes),
    }
