"""Prequential experiment harness.

Runs a classifier plus drift monitor over a chunk stream, once per seed,
and records a per-chunk trace. Chunk 0 is warm-up: the model trains on it
and evaluation starts at chunk 1, so every trace has exactly one row per
chunk. The "baseline" method reacts to an alarm by adapting on the current
chunk and resetting the monitor with the threshold unchanged; the "dtd"
method hands control to the candidate race in :mod:`drifttune.dtd`.

Seeds pair runs across methods: run seed k replaces the stream seed and,
for monitors that subsample (kswin), the subsample seed, so baseline and
dtd see identical data. Monitors that scale deviations by a per-update
sample count get that count set to the chunk size unless a config override
pins it.
"""

from __future__ import annotations

import dataclasses
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import yaml

from .classifier import GaussianNB, adapt, evaluate
from .detectors import DETECTOR_KINDS, PARAM_TYPES, DriftMonitor, make_monitor, params_from_dict
from .dtd import TRAINING_MODES, dtd_step, make_dtd_state
from .errors import ConfigError, ReportError
from .stream import Stream, StreamConfig, make_stream

METHODS = ("baseline", "dtd")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment cell: a stream, a monitor, a training mode, seeds."""

    name: str
    stream: StreamConfig
    detector: str
    detector_overrides: dict = field(default_factory=dict)
    method: str = "both"
    mode: str = "continual"
    race_len: int = 3
    eta: float = 1e-6
    seeds: tuple[int, ...] = tuple(range(20))
    out: str = "results"

    def __post_init__(self):
        if not self.name or "/" in self.name:
            raise ConfigError(f"experiment name must be a non-empty path-safe string, got {self.name!r}")
        if self.detector not in DETECTOR_KINDS:
            raise ConfigError(f"unknown detector kind {self.detector!r}, expected one of {DETECTOR_KINDS}")
        if self.method not in METHODS + ("both",):
            raise ConfigError(f"method must be baseline, dtd, or both, got {self.method!r}")
        if self.mode not in TRAINING_MODES:
            raise ConfigError(f"mode must be one of {TRAINING_MODES}, got {self.mode!r}")
        if self.race_len < 1:
            raise ConfigError("race_len must be at least 1")
        if not self.eta > 0.0:
            raise ConfigError("eta must be positive")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if any(not isinstance(s, int) or s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative integers")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be unique")
        # fail on bad override keys or values at config time, not per run
        params_from_dict(self.detector, self.detector_overrides)

    @property
    def methods(self) -> tuple[str, ...]:
        return METHODS if self.method == "both" else (self.method,)


def detector_for_run(config: ExperimentConfig, seed: int) -> DriftMonitor:
    """Build the monitor for one run, filling the per-run fields.

    Overrides win; otherwise any per-update sample count defaults to the
    chunk size and any subsample seed defaults to the run seed.
    """
    mapping = dict(config.detector_overrides)
    names = {f.name for f in dataclasses.fields(PARAM_TYPES[config.detector])}
    if "samples_per_update" in names:
        mapping.setdefault("samples_per_update", config.stream.chunk_size)
    if "seed" in names:
        mapping.setdefault("seed", seed)
    return make_monitor(config.detector, params_from_dict(config.detector, mapping))


@dataclass
class RunTrace:
    """Per-chunk record of one run. Lists share one index per chunk."""

    seed: int
    chunk_index: list[int] = field(default_factory=list)
    accuracy: list[float] = field(default_factory=list)
    statistic: list[float] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    alarm: list[bool] = field(default_factory=list)
    phase: list[str] = field(default_factory=list)

    def append(self, chunk_index: int, accuracy: float, statistic: float,
               threshold: float, alarm: bool, phase: str) -> None:
        self.chunk_index.append(int(chunk_index))
        self.accuracy.append(float(accuracy))
        self.statistic.append(float(statistic))
        self.threshold.append(float(threshold))
        self.alarm.append(bool(alarm))
        self.phase.append(str(phase))

    def __len__(self) -> int:
        return len(self.chunk_index)

    @property
    def mean_accuracy(self) -> float:
        evaluated = [a for a, p in zip(self.accuracy, self.phase) if p != "warmup"]
        if not evaluated:
            raise ReportError("trace has no evaluated chunks")
        return statistics.fmean(evaluated)

    @property
    def alarm_chunks(self) -> list[int]:
        return [i for i, a in zip(self.chunk_index, self.alarm) if a]

    def to_csv_text(self) -> str:
        lines = ["chunk_index,accuracy,statistic,threshold,alarm,phase"]
        for row in zip(self.chunk_index, self.accuracy, self.statistic,
                       self.threshold, self.alarm, self.phase):
            i, acc, stat, thr, alarm, phase = row
            lines.append(f"{i},{acc!r},{stat!r},{thr!r},{alarm},{phase}")
        return "\n".join(lines) + "\n"


def baseline_trace(stream: Stream, detector: DriftMonitor, mode: str = "continual",
                   threshold_fn: Callable[[int], float] | None = None,
                   seed: int = 0) -> RunTrace:
    """Fixed-threshold run: alarm means adapt on the chunk and reset history.

    ``threshold_fn``, when given, sets the monitor threshold before each
    chunk (including warm-up), which turns this runner into a scheduled
    threshold policy evaluator.
    """
    if mode not in TRAINING_MODES:
        raise ConfigError(f"mode must be one of {TRAINING_MODES}, got {mode!r}")
    if len(stream) < 2:
        raise ConfigError("a run needs at least two chunks: one warm-up, one evaluated")
    trace = RunTrace(seed=seed)
    model = GaussianNB()
    model.train(stream.chunk(0))
    if threshold_fn is not None:
        detector.threshold = threshold_fn(0)
    trace.append(0, math.nan, math.nan, detector.threshold, False, "warmup")
    for i in range(1, len(stream)):
        chunk = stream.chunk(i)
        if threshold_fn is not None:
            detector.threshold = threshold_fn(i)
        accuracy, statistic = evaluate(model, chunk, detector)
        alarmed = statistic > detector.threshold
        if alarmed:
            model = adapt(model, chunk)
            detector.reset()
        elif mode == "continual":
            model.train(chunk)
        trace.append(i, accuracy, statistic, detector.threshold, alarmed, "normal")
    return trace


def dtd_trace(stream: Stream, detector: DriftMonitor, mode: str = "continual",
              race_len: int = 3, eta: float = 1e-6, seed: int = 0) -> RunTrace:
    """Dynamic-threshold run: alarms open a candidate race over the next chunks."""
    if len(stream) < 2:
        raise ConfigError("a run needs at least two chunks: one warm-up, one evaluated")
    trace = RunTrace(seed=seed)
    model = GaussianNB()
    model.train(stream.chunk(0))
    state = make_dtd_state(model, detector, race_len=race_len, eta=eta, training_mode=mode)
    trace.append(0, math.nan, math.nan, detector.threshold, False, "warmup")
    for i in range(1, len(stream)):
        out = dtd_step(state, stream.chunk(i))
        trace.append(i, out.accuracy, out.statistic, out.threshold, out.alarm, out.phase)
    return trace


def run_single(config: ExperimentConfig, method: str, seed: int) -> RunTrace:
    """One (config, method, seed) run on a freshly seeded stream and monitor."""
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {method!r}")
    stream = make_stream(dataclasses.replace(config.stream, seed=seed))
    detector = detector_for_run(config, seed)
    if method == "baseline":
        return baseline_trace(stream, detector, mode=config.mode, seed=seed)
    return dtd_trace(stream, detector, mode=config.mode,
                     race_len=config.race_len, eta=config.eta, seed=seed)


def _run_task(task: tuple[ExperimentConfig, str, int]) -> tuple[str, str, int, RunTrace]:
    config, method, seed = task
    return config.name, method, seed, run_single(config, method, seed)


@dataclass
class ExperimentResult:
    """All traces for one experiment cell under one method."""

    name: str
    method: str
    config: ExperimentConfig
    traces: list[RunTrace]

    @property
    def per_seed_accuracy(self) -> list[float]:
        return [t.mean_accuracy for t in self.traces]

    @property
    def mean_accuracy(self) -> float:
        return statistics.fmean(self.per_seed_accuracy)

    @property
    def std_accuracy(self) -> float:
        return statistics.pstdev(self.per_seed_accuracy)

    def summary_dict(self) -> dict:
        return {
            "name": self.name,
            "method": self.method,
            "stream": dataclasses.asdict(self.config.stream),
            "detector": self.config.detector,
            "detector_overrides": {k: self.config.detector_overrides[k]
                                   for k in sorted(self.config.detector_overrides)},
            "mode": self.config.mode,
            "race_len": self.config.race_len,
            "eta": self.config.eta,
            "seeds": list(self.config.seeds),
            "n_chunks": len(self.traces[0]) if self.traces else 0,
            "per_seed_accuracy": [float(a) for a in self.per_seed_accuracy],
            "per_seed_alarm_chunks": [t.alarm_chunks for t in self.traces],
            "per_seed_final_threshold": [float(t.threshold[-1]) for t in self.traces],
            "mean_accuracy": float(self.mean_accuracy),
            "std_accuracy": float(self.std_accuracy),
        }


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_result(result: ExperimentResult, out_root: str | Path) -> Path:
    """Write seed<k>.csv per trace plus summary.json; returns the cell directory."""
    cell_dir = Path(out_root) / f"{result.name}__{result.method}"
    cell_dir.mkdir(parents=True, exist_ok=True)
    for trace in result.traces:
        (cell_dir / f"seed{trace.seed}.csv").write_text(trace.to_csv_text())
    (cell_dir / "summary.json").write_text(_dump_json(result.summary_dict()))
    return cell_dir


def run_experiment(config: ExperimentConfig, method: str | None = None,
                   parallel: int = 1, out: str | Path | None = None,
                   write: bool = True) -> dict[str, ExperimentResult]:
    """Run one experiment cell for the requested methods; returns results by method."""
    methods = (config.methods if method in (None, "both")
               else (method,) if method in METHODS
               else None)
    if methods is None:
        raise ConfigError(f"method must be baseline, dtd, or both, got {method!r}")
    results = _run_all([(config, m) for m in methods], parallel)
    if write:
        root = config.out if out is None else out
        for result in results:
            write_result(result, root)
    return {r.method: r for r in results}


def _run_all(cells: Sequence[tuple[ExperimentConfig, str]], parallel: int) -> list[ExperimentResult]:
    tasks = [(config, method, seed)
             for config, method in cells
             for seed in config.seeds]
    if parallel > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(_run_task, tasks))
    else:
        rows = [_run_task(task) for task in tasks]
    traces: dict[tuple[str, str], dict[int, RunTrace]] = {}
    for name, method, seed, trace in rows:
        traces.setdefault((name, method), {})[seed] = trace
    results = []
    for config, method in cells:
        by_seed = traces[(config.name, method)]
        results.append(ExperimentResult(
            name=config.name, method=method, config=config,
            traces=[by_seed[s] for s in config.seeds]))
    return results


def run_suite(configs: Sequence[ExperimentConfig], out: str | Path,
              parallel: int = 1, method: str | None = None) -> tuple[list[ExperimentResult], dict]:
    """Run every config (all its methods unless ``method`` narrows them),
    write per-cell results and a suite-level summary, and return both."""
    if not configs:
        raise ConfigError("suite needs at least one experiment config")
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ConfigError("experiment names must be unique within a suite")
    cells = []
    for config in configs:
        methods = config.methods if method in (None, "both") else (method,)
        for m in methods:
            if m not in METHODS:
                raise ConfigError(f"method must be one of {METHODS}, got {m!r}")
            cells.append((config, m))
    results = _run_all(cells, parallel)
    for result in results:
        write_result(result, out)
    report = summarize(results)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "suite_summary.json").write_text(_dump_json(report))
    (out_dir / "suite_summary.txt").write_text(render_table(report))
    return results, report


def summarize(results: Sequence[ExperimentResult]) -> dict:
    """Aggregate results into a report: per-cell means plus paired deltas.

    A pair is one experiment name holding both methods; pairs must share
    seeds and chunk counts. Win counting over pair means is strict, so
    equal means land in ``ties`` and lower the win rate.
    """
    if not results:
        raise ReportError("cannot summarize zero results")
    rows = []
    for r in results:
        lengths = {len(t) for t in r.traces}
        if len(lengths) != 1:
            raise ReportError(f"{r.name}/{r.method}: traces have mismatched chunk counts {sorted(lengths)}")
        rows.append({
            "name": r.name, "method": r.method,
            "seeds": list(r.config.seeds),
            "n_chunks": lengths.pop(),
            "per_seed_accuracy": [float(a) for a in r.per_seed_accuracy],
            "mean_accuracy": float(r.mean_accuracy),
            "std_accuracy": float(r.std_accuracy),
        })
    return _report_from_rows(rows)


def _report_from_rows(rows: list[dict]) -> dict:
    cells: dict[str, dict[str, dict]] = {}
    for row in rows:
        per_method = cells.setdefault(row["name"], {})
        if row["method"] in per_method:
            raise ReportError(f"duplicate cell {row['name']}/{row['method']}")
        per_method[row["method"]] = row
    pairs = {}
    wins = ties = losses = 0
    for name in sorted(cells):
        per_method = cells[name]
        if set(per_method) != set(METHODS):
            continue
        base, dtd = per_method["baseline"], per_method["dtd"]
        if base["seeds"] != dtd["seeds"]:
            raise ReportError(f"{name}: methods ran different seeds")
        if base["n_chunks"] != dtd["n_chunks"]:
            raise ReportError(f"{name}: methods ran different chunk counts")
        delta = dtd["mean_accuracy"] - base["mean_accuracy"]
        seed_deltas = [d - b for d, b in zip(dtd["per_seed_accuracy"], base["per_seed_accuracy"])]
        if delta > 0.0:
            wins += 1
        elif delta < 0.0:
            losses += 1
        else:
            ties += 1
        pairs[name] = {
            "baseline": base["mean_accuracy"],
            "dtd": dtd["mean_accuracy"],
            "delta": delta,
            "seed_wins": sum(1 for d in seed_deltas if d > 0.0),
            "seed_losses": sum(1 for d in seed_deltas if d < 0.0),
        }
    n_pairs = len(pairs)
    return {
        "cells": {name: {method: {k: row[k] for k in
                                  ("mean_accuracy", "std_accuracy", "n_chunks", "per_seed_accuracy")}
                         for method, row in sorted(per_method.items())}
                  for name, per_method in sorted(cells.items())},
        "pairs": pairs,
        "n_pairs": n_pairs,
        "wins": wins,
        "ties": ties,
        "losses": losses,
        "win_rate": (wins / n_pairs) if n_pairs else None,
        "win_or_tie_rate": ((wins + ties) / n_pairs) if n_pairs else None,
    }


def summarize_stored(out_root: str | Path) -> dict:
    """Rebuild the suite report from summary.json files under ``out_root``."""
    root = Path(out_root)
    paths = sorted(root.glob("*/summary.json"))
    if not paths:
        raise ReportError(f"no summary.json files under {root}")
    rows = []
    for path in paths:
        stored = json.loads(path.read_text())
        rows.append({key: stored[key] for key in
                     ("name", "method", "seeds", "n_chunks",
                      "per_seed_accuracy", "mean_accuracy", "std_accuracy")})
    return _report_from_rows(rows)


def render_table(report: dict) -> str:
    """Fixed-width text table of the report; accuracies shown as percent."""

    def pct(x: float) -> str:
        return f"{100.0 * x:.2f}"

    lines = []
    header = f"{'experiment':<28} {'baseline':>9} {'dtd':>9} {'delta':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for name, per_method in report["cells"].items():
        base = per_method.get("baseline")
        dtd = per_method.get("dtd")
        base_s = pct(base["mean_accuracy"]) if base else "-"
        dtd_s = pct(dtd["mean_accuracy"]) if dtd else "-"
        delta_s = (f"{100.0 * (dtd['mean_accuracy'] - base['mean_accuracy']):+.3f}"
                   if base and dtd else "-")
        lines.append(f"{name:<28} {base_s:>9} {dtd_s:>9} {delta_s:>8}")
    if report["n_pairs"]:
        lines.append("")
        lines.append(f"pairs {report['n_pairs']}  wins {report['wins']}  "
                     f"ties {report['ties']}  losses {report['losses']}  "
                     f"win_rate {report['win_rate']:.3f}  "
                     f"win_or_tie_rate {report['win_or_tie_rate']:.3f}")
    return "\n".join(lines) + "\n"


_TOP_KEYS = {"name", "stream", "detector", "mode", "method", "race_len", "K", "eta", "seeds", "out"}


def config_from_mapping(mapping: dict, default_name: str = "experiment") -> ExperimentConfig:
    """Validate a parsed config mapping and build an ExperimentConfig."""
    if not isinstance(mapping, dict):
        raise ConfigError(f"config must be a mapping, got {type(mapping).__name__}")
    unknown = set(mapping) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "race_len" in mapping and "K" in mapping:
        raise ConfigError("give race_len or K, not both")

    stream_map = mapping.get("stream")
    if not isinstance(stream_map, dict) or "kind" not in stream_map:
        raise ConfigError("config needs a stream mapping with a kind")
    if "seed" in stream_map:
        raise ConfigError("stream.seed is not configurable; per-run seeds come from 'seeds'")
    stream_fields = {f.name for f in dataclasses.fields(StreamConfig)} - {"seed"}
    unknown = set(stream_map) - stream_fields
    if unknown:
        raise ConfigError(f"unknown stream keys: {sorted(unknown)}")
    stream = StreamConfig(**stream_map)

    det_map = mapping.get("detector")
    if not isinstance(det_map, dict) or "kind" not in det_map:
        raise ConfigError("config needs a detector mapping with a kind")
    det_kind = det_map["kind"]
    overrides = {k: v for k, v in det_map.items() if k != "kind"}

    seeds = mapping.get("seeds", 20)
    if isinstance(seeds, bool):
        raise ConfigError(f"seeds must be a count or a list of integers, got {seeds!r}")
    if isinstance(seeds, int):
        if seeds < 1:
            raise ConfigError("seed count must be positive")
        seeds = tuple(range(seeds))
    elif isinstance(seeds, list):
        seeds = tuple(seeds)
    else:
        raise ConfigError(f"seeds must be a count or a list of integers, got {seeds!r}")

    race_len = mapping.get("race_len", mapping.get("K", 3))
    eta = mapping.get("eta", 1e-6)
    if isinstance(eta, str):
        raise ConfigError(f"eta must be a number, got {eta!r}")
    return ExperimentConfig(
        name=str(mapping.get("name", default_name)),
        stream=stream,
        detector=det_kind,
        detector_overrides=overrides,
        method=mapping.get("method", "both"),
        mode=mapping.get("mode", "continual"),
        race_len=race_len,
        eta=float(eta),
        seeds=seeds,
        out=str(mapping.get("out", "results")),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Load one YAML experiment config; the file stem is the default name."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        mapping = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    try:
        return config_from_mapping(mapping, default_name=path.stem)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_config_dir(path: str | Path) -> list[ExperimentConfig]:
    """Load every *.yaml / *.yml under a directory, sorted by filename."""
    root = Path(path)
    if root.is_file():
        return [load_config(root)]
    if not root.is_dir():
        raise ConfigError(f"config path {root} is neither a file nor a directory")
    files = sorted(p for p in root.iterdir() if p.suffix in (".yaml", ".yml"))
    if not files:
        raise ConfigError(f"no YAML configs under {root}")
    return [load_config(p) for p in files]
