"""Command-line interface.

Subcommands: `simulate` (pulse train -> trace CSV), `protocol` (named
recipes: cycle, relaxation, recover), `fit` (trace + schedule -> JSON),
`bench` (familiarity benchmark -> metrics CSV), `plot` (CSV -> static SVG),
and `replay` (reproduce a previous run from its manifest).

Configuration is a single YAML (or JSON) file; every run writes a
`manifest.json` with the fully resolved configuration next to its outputs.
Exit codes: 0 success, 1 usage/config error, 2 numerical or ingestion
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .bench import BenchConfig, lifetime, run_benchmark
from .chain import ChainConfig, DriveRule, LeakySynapse, build_propagator, device_config, zero_state
from .errors import IngestionError, InvalidInputError, NumericalFailure
from .fitting import FitProblem, fit
from .manifest import RunManifest, load_manifest
from .patterns import read_feature_file
from .protocol import (
    PulseSchedule,
    apply_pulse_train,
    recover_to_baseline,
    recovery_fraction,
    run_cycle,
    run_relaxation,
)
from .seeding import derive_seed, expand_seeds
from .traceio import atomic_write_text, format_value, read_trace, write_trace

_CONFIG_HELP = """\
config file keys (YAML or JSON):
  simulate: chain {capacities, couplings | preset, rate}, rule {mode,
            base_rate, bounds}, schedule {amplitude, frequency, on_fraction,
            count}, samples_per_phase
  protocol: recipe (cycle|relaxation|recover) plus recipe fields:
            relaxation: chain, rule, pulse, observe, points
            cycle: chain, rule, pot, dep, cycles, samples_per_phase
            recover: chain, rule, forward, reverse_amplitude, tolerance
  fit:      trace (csv path), schedules [..], capacities (null = unknown),
            couplings (null = unknown), bounds [[lo, hi] per unknown],
            rule, grid_points
  bench:    neurons, model {chain {...} | preset m | leaky {tau}},
            stream_length, probe_ages, q, trials, calibration_trials,
            n_null, n_targets, step_time, write_bound, seed,
            source (random|features), feature_file,
            thresholds {accuracy, snr}
defaults are filled in and recorded in manifest.json for exact replay
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInputError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="synapse-cascade",
        description=__doc__,
        epilog=_CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", "-c", help="YAML/JSON configuration file")
        p.add_argument("--out", "-o", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="64-bit master seed")
        p.add_argument("--threads", type=int, default=None, help="trial parallelism")
        p.add_argument("--format", choices=["csv"], default="csv")

    common(sub.add_parser("simulate", help="pulse train on a chain -> trace CSV"))
    p_proto = sub.add_parser("protocol", help="named device protocols")
    p_proto.add_argument("recipe", nargs="?", choices=["cycle", "relaxation", "recover"])
    common(p_proto)
    common(sub.add_parser("fit", help="extract chain parameters from a trace"))
    common(sub.add_parser("bench", help="familiarity-memory benchmark"))
    p_plot = sub.add_parser("plot", help="CSV columns -> static SVG chart")
    p_plot.add_argument("--csv", required=True)
    p_plot.add_argument("--columns", required=True, help="comma-separated y columns")
    p_plot.add_argument("--x", default=None, help="x column (default: first)")
    p_plot.add_argument("--log-x", action="store_true")
    p_plot.add_argument("--title", default=None)
    p_plot.add_argument("--out", "-o", default=".")
    p_replay = sub.add_parser("replay", help="re-run a recorded manifest")
    p_replay.add_argument("--manifest", required=True)
    p_replay.add_argument("--out", "-o", default=".")
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidInputError(f"malformed config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InvalidInputError(f"config {path} must be a mapping")
    return data


def _chain_from(spec) -> ChainConfig:
    if spec is None:
        raise InvalidInputError("missing chain specification")
    if "preset" in spec:
        return device_config(int(spec["preset"]), float(spec.get("rate", 1.0)))
    return ChainConfig(spec.get("capacities", [1.0]), spec.get("couplings", []))


def _chain_dict(cfg: ChainConfig) -> dict:
    return {
        "capacities": [float(c) for c in cfg.capacities],
        "couplings": [float(g) for g in cfg.couplings],
    }


def _rule_from(spec) -> DriveRule:
    if spec is None:
        return DriveRule.constant()
    mode = spec.get("mode", "constant")
    base = float(spec.get("base_rate", 2.0))
    if mode == "constant":
        return DriveRule.constant(base)
    bounds = spec.get("bounds")
    if bounds is None or len(bounds) != 2:
        raise InvalidInputError("soft rule needs bounds: [u_min, u_max]")
    return DriveRule.soft_bounded(float(bounds[0]), float(bounds[1]), base)


def _rule_dict(rule: DriveRule) -> dict:
    out = {"mode": "soft" if rule.mode == "soft" else "constant", "base_rate": rule.base_rate}
    if rule.bounds is not None:
        out["bounds"] = [float(b) for b in rule.bounds]
    return out


def _schedule_from(spec) -> PulseSchedule:
    if spec is None:
        raise InvalidInputError("missing pulse schedule")
    try:
        return PulseSchedule(
            amplitude=float(spec["amplitude"]),
            frequency=float(spec.get("frequency", 1.0)),
            on_fraction=float(spec.get("on_fraction", 0.5)),
            count=int(spec.get("count", 1)),
        )
    except KeyError as exc:
        raise InvalidInputError(f"schedule needs field {exc}") from exc


def _schedule_dict(s: PulseSchedule) -> dict:
    return {
        "amplitude": s.amplitude,
        "frequency": s.frequency,
        "on_fraction": s.on_fraction,
        "count": s.count,
    }


def _write_metrics_csv(series, path) -> None:
    cols = [
        "age",
        "fd_accuracy",
        "fd_accuracy_se",
        "fc_accuracy",
        "fc_accuracy_se",
        "io_snr",
        "io_snr_se",
        "r_snr",
        "r_snr_se",
    ]
    lines = [",".join(cols)]
    for i, age in enumerate(series.ages):
        row = [format_value(float(age))] + [
            format_value(float(getattr(series, c)[i])) for c in cols[1:]
        ]
        lines.append(",".join(row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _run_simulate(cfg: dict, out: Path) -> tuple[dict, list[str], list[int]]:
    chain = _chain_from(cfg.get("chain"))
    rule = _rule_from(cfg.get("rule"))
    sched = _schedule_from(cfg.get("schedule"))
    spp = int(cfg.get("samples_per_phase", 1))
    prop = build_propagator(chain)
    trace = apply_pulse_train(prop, zero_state(chain), sched, rule, spp)
    trace_path = out / "trace.csv"
    write_trace(trace, trace_path)
    resolved = {
        "chain": _chain_dict(chain),
        "rule": _rule_dict(rule),
        "schedule": _schedule_dict(sched),
        "samples_per_phase": spp,
    }
    return resolved, [str(trace_path)], []


_RECIPE_DEFAULTS = {
    # single-pulse relaxation of the two-component device
    "relaxation": {
        "chain": {"capacities": [1.0, 1.0], "couplings": [2.0**-7.5]},
        "pulse": {"amplitude": 3.0, "frequency": 1.0, "on_fraction": 1.0, "count": 1},
        "observe": 160.0,
        "points": 240,
    },
    # repeated potentiation/depression cycling of the two-component device
    "cycle": {
        "chain": {"capacities": [1.0, 1.0], "couplings": [2.0**-6]},
        "pot": {"amplitude": 1.0, "frequency": 1.0, "on_fraction": 0.5, "count": 80},
        "dep": {"amplitude": -1.0, "frequency": 1.0, "on_fraction": 0.5, "count": 80},
        "cycles": 5,
        "samples_per_phase": 1,
    },
    # saturating single-component synapse driven up 80 pulses, then back
    "recover": {
        "chain": {"capacities": [1.0], "couplings": []},
        "rule": {"mode": "soft", "bounds": [-4.5, 45.5]},
        "forward": {"amplitude": 1.0, "frequency": 1.0, "on_fraction": 0.5, "count": 80},
        "reverse_amplitude": -1.0,
        "tolerance": None,
    },
}


def _run_protocol(recipe: str | None, cfg: dict, out: Path) -> tuple[dict, list[str], list[int]]:
    recipe = recipe or cfg.get("recipe")
    if recipe not in _RECIPE_DEFAULTS:
        raise InvalidInputError(f"unknown protocol recipe {recipe!r}")
    merged = {**_RECIPE_DEFAULTS[recipe], **cfg}
    merged.pop("recipe", None)
    chain = _chain_from(merged.get("chain"))
    rule = _rule_from(merged.get("rule"))
    prop = build_propagator(chain)
    trace_path = out / "trace.csv"
    report_path = out / "report.json"
    resolved: dict = {
        "recipe": recipe,
        "chain": _chain_dict(chain),
        "rule": _rule_dict(rule),
    }
    if recipe == "relaxation":
        pulse = _schedule_from(merged.get("pulse"))
        observe = float(merged.get("observe", 160.0))
        points = int(merged.get("points", 240))
        trace = run_relaxation(prop, rule, pulse, observe, points)
        report = {"recovery_fraction": recovery_fraction(trace)}
        resolved.update(pulse=_schedule_dict(pulse), observe=observe, points=points)
    elif recipe == "cycle":
        pot = _schedule_from(merged.get("pot"))
        dep = _schedule_from(merged.get("dep"))
        cycles = int(merged.get("cycles", 5))
        spp = int(merged.get("samples_per_phase", 1))
        trace, rep = run_cycle(prop, rule, pot, dep, cycles, spp)
        report = {
            "per_cycle_range": [float(v) for v in rep.per_cycle_range],
            "convergence": [float(v) for v in rep.convergence],
        }
        resolved.update(
            pot=_schedule_dict(pot), dep=_schedule_dict(dep), cycles=cycles,
            samples_per_phase=spp,
        )
    else:  # recover
        forward = _schedule_from(merged.get("forward"))
        reverse_amplitude = float(merged.get("reverse_amplitude", -forward.amplitude))
        tolerance = merged.get("tolerance")
        tolerance = None if tolerance is None else float(tolerance)
        n = recover_to_baseline(prop, rule, forward, reverse_amplitude, tolerance)
        trace = apply_pulse_train(prop, zero_state(chain), forward, rule)
        report = {"reverse_pulses": n, "forward_pulses": forward.count}
        resolved.update(
            forward=_schedule_dict(forward),
            reverse_amplitude=reverse_amplitude,
            tolerance=tolerance,
        )
    write_trace(trace, trace_path)
    atomic_write_text(report_path, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return resolved, [str(trace_path), str(report_path)], []


def _run_fit(cfg: dict, out: Path) -> tuple[dict, list[str], list[int]]:
    trace_path = cfg.get("trace")
    if trace_path is None:
        raise InvalidInputError("fit config needs a trace path")
    trace = read_trace(trace_path)
    schedules = [_schedule_from(s) for s in cfg.get("schedules", [])]
    capacities = [None if c is None else float(c) for c in cfg.get("capacities", [])]
    couplings = [None if g is None else float(g) for g in cfg.get("couplings", [])]
    bounds = [(float(lo), float(hi)) for lo, hi in cfg.get("bounds", [])]
    rule = _rule_from(cfg.get("rule"))
    grid_points = int(cfg.get("grid_points", 17))
    problem = FitProblem.from_trace(
        trace,
        schedules=schedules,
        capacities=capacities,
        couplings=couplings,
        bounds=bounds,
        rule=rule,
    )
    result = fit(problem, grid_points=grid_points)
    labels = [f"g{i + 1}{i + 2}" for i, g in enumerate(couplings) if g is None]
    labels += [f"C{k + 1}" for k, c in enumerate(capacities) if c is None]
    payload = {
        "unknowns": labels,
        "estimates_log2": [float(v) for v in result.estimates],
        "estimates": [float(2.0**v) for v in result.estimates],
        "residual_rms": result.residual,
        "evaluations": result.iterations,
    }
    fit_path = out / "fit.json"
    atomic_write_text(fit_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    resolved = {
        "trace": str(trace_path),
        "schedules": [_schedule_dict(s) for s in schedules],
        "capacities": capacities,
        "couplings": couplings,
        "bounds": [[lo, hi] for lo, hi in bounds],
        "rule": _rule_dict(rule),
        "grid_points": grid_points,
    }
    return resolved, [str(fit_path)], []


def _bench_from(cfg: dict, seed_override: int | None) -> tuple[BenchConfig, dict]:
    model_spec = cfg.get("model", {})
    if "leaky" in model_spec:
        model = LeakySynapse(float(model_spec["leaky"]["tau"]))
        model_resolved = {"leaky": {"tau": model.tau}}
    else:
        chain_spec = model_spec.get("chain", model_spec if model_spec else None)
        if model_spec.get("preset"):
            chain = device_config(int(model_spec["preset"]), float(model_spec.get("rate", 1.0)))
        else:
            chain = _chain_from(chain_spec)
        model = chain
        model_resolved = {"chain": _chain_dict(chain)}
    seed = seed_override if seed_override is not None else int(cfg.get("seed", 0))
    thresholds = cfg.get("thresholds", {})
    source = cfg.get("source", "random")
    feature_matrix = None
    if source == "features":
        feature_file = cfg.get("feature_file")
        if feature_file is None:
            raise InvalidInputError("feature source needs feature_file")
        feature_matrix = read_feature_file(feature_file)
    bench = BenchConfig(
        n_neurons=int(cfg.get("neurons", 64)),
        model=model,
        stream_length=int(cfg["stream_length"]),
        probe_ages=tuple(int(a) for a in cfg["probe_ages"]),
        q=float(cfg.get("q", 1.0)),
        trials=int(cfg.get("trials", 20)),
        calibration_trials=(
            None if cfg.get("calibration_trials") is None else int(cfg["calibration_trials"])
        ),
        n_null=int(cfg.get("n_null", 200)),
        n_targets=int(cfg.get("n_targets", 1)),
        seed=seed,
        step_time=float(cfg.get("step_time", 1.0)),
        write_bound=(None if cfg.get("write_bound") is None else float(cfg["write_bound"])),
        accuracy_threshold=float(thresholds.get("accuracy", 0.6)),
        snr_threshold=float(thresholds.get("snr", 0.3)),
        source=source,
        feature_matrix=feature_matrix,
    )
    resolved = {
        "neurons": bench.n_neurons,
        "model": model_resolved,
        "stream_length": bench.stream_length,
        "probe_ages": list(bench.probe_ages),
        "q": bench.q,
        "trials": bench.trials,
        "calibration_trials": bench.n_calibration,
        "n_null": bench.n_null,
        "n_targets": bench.n_targets,
        "seed": seed,
        "step_time": bench.step_time,
        "write_bound": bench.write_bound,
        "thresholds": {"accuracy": bench.accuracy_threshold, "snr": bench.snr_threshold},
        "source": source,
        "feature_file": cfg.get("feature_file"),
    }
    return bench, resolved


def _run_bench(cfg: dict, out: Path, seed_override, threads: int):
    try:
        bench, resolved = _bench_from(cfg, seed_override)
    except KeyError as exc:
        raise InvalidInputError(f"bench config needs field {exc}") from exc
    series = run_benchmark(bench, threads=threads)
    metrics_path = out / "metrics.csv"
    _write_metrics_csv(series, metrics_path)
    def finite_or_tag(v: float):
        return v if v != float("inf") else "inf"

    report = {
        "lifetimes": {
            name: finite_or_tag(lifetime(series, name, thr))
            for name, thr in (
                ("fd", bench.accuracy_threshold),
                ("fc", bench.accuracy_threshold),
                ("iosnr", bench.snr_threshold),
                ("rsnr", bench.snr_threshold),
            )
        },
        "trials": series.trials,
    }
    report_path = out / "report.json"
    atomic_write_text(report_path, json.dumps(report, indent=2, sort_keys=True) + "\n")
    seeds = expand_seeds(derive_seed(bench.seed, 101), bench.trials)
    seeds += expand_seeds(derive_seed(bench.seed, 202), bench.n_calibration)
    return resolved, [str(metrics_path), str(report_path)], seeds


def _run_plot(args) -> tuple[dict, list[str], list[int]]:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    columns = [c for c in args.columns.split(",") if c]
    chart_path = out / "chart.svg"
    from .chart import emit_chart

    emit_chart(
        args.csv, columns, chart_path, x_column=args.x, log_x=args.log_x, title=args.title
    )
    resolved = {
        "csv": str(args.csv),
        "columns": columns,
        "x": args.x,
        "log_x": bool(args.log_x),
        "title": args.title,
    }
    return resolved, [str(chart_path)], []


def _dispatch(subcommand: str, args, cfg: dict, out: Path, seed, threads: int) -> int:
    start = time.perf_counter()
    if subcommand == "simulate":
        resolved, outputs, seeds = _run_simulate(cfg, out)
    elif subcommand == "protocol":
        resolved, outputs, seeds = _run_protocol(getattr(args, "recipe", None), cfg, out)
    elif subcommand == "fit":
        resolved, outputs, seeds = _run_fit(cfg, out)
    elif subcommand == "bench":
        resolved, outputs, seeds = _run_bench(cfg, out, seed, threads)
    else:
        raise InvalidInputError(f"unknown subcommand {subcommand!r}")
    RunManifest(
        subcommand=subcommand,
        config=resolved,
        seed=seed,
        seeds=seeds,
        version=__version__,
        outputs=outputs,
        duration_s=time.perf_counter() - start,
        threads=threads,
    ).write(out / "manifest.json")
    return 0


def _threads_from(args) -> int:
    if getattr(args, "threads", None) is not None:
        return max(1, args.threads)
    env = os.environ.get("SYNAPSE_CASCADE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InvalidInputError(f"bad SYNAPSE_CASCADE_THREADS value {env!r}") from exc
    return 1


def _diagnose(exc: Exception) -> None:
    # single-line diagnostic on stderr
    msg = " ".join(str(exc).split())
    print(f"synapse-cascade: {msg}", file=sys.stderr)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except InvalidInputError as exc:
        _diagnose(exc)
        return 1
    try:
        if args.subcommand == "plot":
            start = time.perf_counter()
            resolved, outputs, seeds = _run_plot(args)
            RunManifest(
                subcommand="plot",
                config=resolved,
                seed=None,
                seeds=seeds,
                version=__version__,
                outputs=outputs,
                duration_s=time.perf_counter() - start,
            ).write(Path(args.out) / "manifest.json")
            return 0
        if args.subcommand == "replay":
            man = load_manifest(args.manifest)
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            if man.subcommand == "plot":
                ns = argparse.Namespace(
                    csv=man.config["csv"],
                    columns=",".join(man.config["columns"]),
                    x=man.config.get("x"),
                    log_x=man.config.get("log_x", False),
                    title=man.config.get("title"),
                    out=str(out),
                )
                resolved, outputs, seeds = _run_plot(ns)
                RunManifest(
                    subcommand="plot",
                    config=resolved,
                    seed=None,
                    seeds=seeds,
                    version=__version__,
                    outputs=outputs,
                ).write(out / "manifest.json")
                return 0
            return _dispatch(
                man.subcommand, args, man.config, out, man.seed, man.threads
            )
        cfg = _load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _dispatch(args.subcommand, args, cfg, out, args.seed, _threads_from(args))
    except InvalidInputError as exc:
        _diagnose(exc)
        return 1
    except (IngestionError, NumericalFailure) as exc:
        _diagnose(exc)
        return 2
    except OSError as exc:
        _diagnose(exc)
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
