"""Wall-time benchmarks of full evolution runs across backend configurations.

Each configuration is run ``repetitions`` times, strictly one after another,
with per-repetition seeds derived from one master seed. Repetition ``k`` uses
the same seed in every configuration, so all configurations evolve identical
populations and only the evaluator differs.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .backends import default_workers
from .core import Backend, Config
from .data import ColumnStore
from .evolve import run_evolution


@dataclass(frozen=True)
class BenchRow:
    label: str
    repetitions: int
    mean: float
    std: float
    ci95: float  # half-width of the 95% Student-t interval
    min: float
    max: float


@dataclass(frozen=True)
class Speedup:
    numerator: str
    denominator: str
    ratio: float


@dataclass(frozen=True)
class BenchReport:
    dataset: str
    n_rows: int
    n_features: int
    rows: tuple
    speedups: tuple = field(default=())

    def row(self, label: str) -> BenchRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)


def summarize(label: str, samples: Sequence[float]) -> BenchRow:
    n = len(samples)
    if n < 2:
        raise ValueError("at least two repetitions are needed for a confidence interval")
    samples = [float(s) for s in samples]
    mean = statistics.fmean(samples)
    std = statistics.stdev(samples)
    ci95 = float(stats.t.ppf(0.975, n - 1)) * std / math.sqrt(n) if std > 0 else 0.0
    return BenchRow(label, n, mean, std, ci95, min(samples), max(samples))


def speedup(slow: BenchRow, fast: BenchRow) -> Speedup:
    """Ratio of mean wall times, ``slow / fast``."""
    ratio = slow.mean / fast.mean if fast.mean > 0 else math.inf
    return Speedup(slow.label, fast.label, ratio)


def repetition_seeds(master_seed: int, repetitions: int) -> list[int]:
    state = np.random.SeedSequence(master_seed).generate_state(repetitions)
    return [int(s) for s in state]


def config_label(config: Config) -> str:
    workers = 1 if config.backend is Backend.SCALAR else (config.workers or default_workers())
    return f"{config.backend.value}/{workers}"


def benchmark_run(config: Config, store: ColumnStore, repetitions: int, *,
                  master_seed: int = 0, label: Optional[str] = None,
                  clock: Callable[[], float] = time.perf_counter,
                  dataset_label: str = "") -> BenchRow:
    """Time ``repetitions`` complete evolution runs and summarize them.

    Only the evolution itself is timed: dataset loading happens before, and the
    clock runs from building generation 1 to the final archive flush.
    """
    if repetitions < 2:
        raise ValueError("repetitions must be >= 2")
    samples = []
    for seed in repetition_seeds(master_seed, repetitions):
        result = run_evolution(config.replace(rng_seed=seed), store, clock=clock,
                               dataset_label=dataset_label)
        samples.append(result.elapsed)
    return summarize(label or config_label(config), samples)


def compare_backends(config: Config, store: ColumnStore, repetitions: int, *,
                     workers: Optional[int] = None, master_seed: int = 0,
                     dataset_label: str = "dataset",
                     progress: Optional[Callable[[str], None]] = None) -> BenchReport:
    """Benchmark scalar/1, vector/1 and vector/N and report scalar-over-vector speedups."""
    n = workers or default_workers()
    configs = [
        ("scalar/1", config.replace(backend=Backend.SCALAR, workers=1)),
        ("vector/1", config.replace(backend=Backend.VECTOR, workers=1)),
        (f"vector/{n}", config.replace(backend=Backend.VECTOR, workers=n)),
    ]
    rows = []
    for label, cfg in configs:
        if progress:
            progress(label)
        rows.append(benchmark_run(cfg, store, repetitions, master_seed=master_seed,
                                  label=label, dataset_label=dataset_label))
    scalar = rows[0]
    speedups = tuple(speedup(scalar, r) for r in rows[1:])
    return BenchReport(dataset_label, store.n_rows, store.n_features, tuple(rows), speedups)


# -- report files ------------------------------------------------------------

CSV_FIELDS = ("record", "dataset", "n_rows", "n_features", "config", "repetitions",
              "mean_s", "std_s", "ci95_s", "min_s", "max_s", "numerator", "denominator",
              "speedup")


def report_to_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    common = {"dataset": report.dataset, "n_rows": report.n_rows,
              "n_features": report.n_features}
    for r in report.rows:
        writer.writerow(dict(common, record="row", config=r.label, repetitions=r.repetitions,
                             mean_s=repr(r.mean), std_s=repr(r.std), ci95_s=repr(r.ci95),
                             min_s=repr(r.min), max_s=repr(r.max)))
    for s in report.speedups:
        writer.writerow(dict(common, record="speedup", numerator=s.numerator,
                             denominator=s.denominator, speedup=repr(s.ratio)))
    return buf.getvalue()


def report_from_csv(text: str) -> BenchReport:
    rows, speedups = [], []
    dataset, n_rows, n_features = "", 0, 0
    for rec in csv.DictReader(io.StringIO(text)):
        dataset, n_rows, n_features = rec["dataset"], int(rec["n_rows"]), int(rec["n_features"])
        if rec["record"] == "row":
            rows.append(BenchRow(rec["config"], int(rec["repetitions"]), float(rec["mean_s"]),
                                 float(rec["std_s"]), float(rec["ci95_s"]),
                                 float(rec["min_s"]), float(rec["max_s"])))
        elif rec["record"] == "speedup":
            speedups.append(Speedup(rec["numerator"], rec["denominator"],
                                    float(rec["speedup"])))
    return BenchReport(dataset, n_rows, n_features, tuple(rows), tuple(speedups))


def report_to_markdown(report: BenchReport) -> str:
    lines = [
        f"## {report.dataset} ({report.n_rows} x {report.n_features}, "
        f"{report.n_rows * report.n_features:,} data points)",
        "",
        "| config | n | mean (s) | std (s) | 95% CI (s) | min (s) | max (s) |",
        "|---|---:|---:|---:|---:|---:|---:|",
    ]
    for r in report.rows:
        lines.append(f"| {r.label} | {r.repetitions} | {r.mean:.4f} | {r.std:.4f} | "
                     f"±{r.ci95:.4f} | {r.min:.4f} | {r.max:.4f} |")
    if report.speedups:
        lines += ["", "| speedup | ratio |", "|---|---:|"]
        for s in report.speedups:
            lines.append(f"| {s.numerator} ÷ {s.denominator} | {s.ratio:.2f}x |")
    return "\n".join(lines) + "\n"


def write_report(report: BenchReport, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, md_path = out / "report.csv", out / "report.md"
    csv_path.write_text(report_to_csv(report), encoding="utf-8")
    md_path.write_text(report_to_markdown(report), encoding="utf-8")
    return csv_path, md_path
