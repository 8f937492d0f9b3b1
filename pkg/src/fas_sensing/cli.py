"""Command-line entry point.

Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
failures while running.  Logging goes to stderr; data goes to files under
``--out``.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .channel import ConfigError
from .detector import DetectorConfig, Hypothesis, detection_prob, false_alarm_prob, optimal_threshold, simulate_detector
from .experiments import (
    SCHEMES,
    ExperimentConfig,
    convergence_experiment,
    convergence_summary,
    emit_csv,
    run_campaign,
    sweep_delta,
    sweep_power,
)
from .numerics import SeededRng

log = logging.getLogger("fas_sensing")



class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")

    def print_help(self, file=None):
        super().print_help(file or sys.stderr)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _scheme_list(text: str) -> tuple[str, ...]:
    schemes = tuple(s.strip().upper() for s in text.split(",") if s.strip())
    bad = [s for s in schemes if s not in SCHEMES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown schemes {bad}; choose from {','.join(SCHEMES)}")
    return schemes


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment or scenario file")
    common.add_argument("--seed", type=int, help="master seed (overrides config)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    common.add_argument("--schemes", type=_scheme_list, help="comma list from FAS,FPA,RPA,EAS")
    common.add_argument("--empirical", action="store_true",
                        help="cross-check P_d with the sample-level detector")
    common.add_argument("--workers", type=int, help="parallel worker processes")
    common.add_argument("--timing", action="store_true", help="record per-trial wall-clock seconds")
    common.add_argument("--plot", action="store_true", help="also render PNG figures")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="fas-sensing", description="Fluid-antenna spectrum sensing simulator")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("run", parents=[common], help="all schemes at the configured scenario")
    for name, what in (("sweep-power", "PU power grid in dBm"), ("sweep-delta", "false-alarm cap grid")):
        p = sub.add_parser(name, parents=[common], help=f"P_d versus {what}")
        p.add_argument("--values", type=_float_list, help=f"comma-separated {what}")
    p = sub.add_parser("convergence", parents=[common], help="AO traces for several antenna counts")
    p.add_argument("--n-values", type=lambda s: tuple(int(v) for v in _float_list(s)),
                   help="comma-separated antenna counts (default 2,4,6)")
    p = sub.add_parser("validate-detector", parents=[common],
                       help="empirical energy detector versus the Gaussian approximation")
    p.add_argument("--snrs", type=_float_list, default=(0.05, 0.1, 0.3), help="linear SNRs under H1")
    return parser


def load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.schemes:
        updates["schemes"] = args.schemes
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.empirical:
        updates["empirical"] = True
    if args.timing:
        updates["record_time"] = True
    if getattr(args, "n_values", None):
        updates["n_values"] = args.n_values
    return replace(config, **updates) if updates else config


def _write_sweep(name, results, curve, out: Path, sweep_param: str, plot: bool):
    trials_path = emit_csv(results, out / f"{name}_trials.csv", kind="trial")
    curve_path = emit_csv(curve, out / f"{name}_curve.csv", kind="curve")
    log.info("wrote %s and %s", trials_path, curve_path)
    for p in curve:
        log.info("%-8g %-4s mean P_d = %.4f +/- %.4f", p.sweep_value, p.scheme, p.mean_pd, p.stderr)
    if plot:
        from .plotting import plot_curves

        log.info("wrote %s", plot_curves(curve, out / f"{name}.png", sweep_param))


def cmd_run(config, args):
    results, curve = run_campaign(config)
    _write_sweep("run", results, curve, args.out, config.sweep.param, args.plot)


def cmd_sweep_power(config, args):
    results, curve = sweep_power(config, args.values)
    _write_sweep("sweep_power", results, curve, args.out, "P_dBm", args.plot)


def cmd_sweep_delta(config, args):
    results, curve = sweep_delta(config, args.values)
    _write_sweep("sweep_delta", results, curve, args.out, "delta", args.plot)


def cmd_convergence(config, args):
    runs = convergence_experiment(config)
    path = emit_csv(runs, args.out / "convergence.csv", kind="trace")
    log.info("wrote %s", path)
    for n, s in convergence_summary(runs).items():
        log.info("N=%d: median iterations %.1f, mean P_d %.4f -> %.4f",
                 n, s["median_iterations"], s["mean_initial_pd"], s["mean_final_pd"])
    if args.plot:
        from .plotting import plot_convergence

        log.info("wrote %s", plot_convergence(runs, args.out / "convergence.png"))


def cmd_validate_detector(config, args):
    scenario = config.scenario
    det = DetectorConfig.from_scenario(scenario)
    tau = optimal_threshold(det)
    trials = args.trials if args.trials is not None else 20_000
    rng = SeededRng(config.seed, 0)
    N = scenario.n_antennas
    w = np.zeros(N, dtype=complex)
    w[0] = 1.0
    rows = [("H0", 0.0, tau, false_alarm_prob(tau, det),
             simulate_detector(np.zeros(N), w, tau, Hypothesis.H0, det, trials, rng.child(0),
                               power=scenario.power), trials)]
    for i, gamma in enumerate(args.snrs):
        h = np.zeros(N, dtype=complex)
        h[0] = math.sqrt(gamma * scenario.noise_power / scenario.power)
        emp = simulate_detector(h, w, tau, Hypothesis.H1, det, trials, rng.child(i + 1), power=scenario.power)
        rows.append(("H1", gamma, tau, detection_prob(tau, gamma, det), emp, trials))
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "detector_validation.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["hypothesis", "gamma", "threshold", "analytical", "empirical", "trials"])
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    for hyp, gamma, _, ana, emp, _ in rows:
        log.info("%s gamma=%-6g analytical %.4f empirical %.4f", hyp, gamma, ana, emp)
    log.info("wrote %s", path)


HANDLERS = {
    "run": cmd_run,
    "sweep-power": cmd_sweep_power,
    "sweep-delta": cmd_sweep_delta,
    "convergence": cmd_convergence,
    "validate-detector": cmd_validate_detector,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    try:
        config = load_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        HANDLERS[args.command](config, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.debug("failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
