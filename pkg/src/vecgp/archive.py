"""On-disk run archive.

Layout::

    <archive_dir>/<run-id>/manifest.txt   key=value run metadata
                          /config.txt     key=value Config snapshot
                          /gen_001.csv    one row per tree, one file per generation
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .compiler import render_expression
from .core import Config
from .errors import IoFailure

GEN_HEADER = ("id", "birth_generation", "depth", "node_count", "fitness", "expression")


@dataclass(frozen=True)
class RunArchive:
    root_dir: Path
    config_file: Path
    manifest_file: Path
    generation_files: tuple
    manifest: dict


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _write_kv(path: Path, values: dict) -> None:
    text = "".join(f"{k}={v}\n" for k, v in values.items())
    path.write_text(text, encoding="utf-8")


def read_kv(path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.startswith("#"):
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def init_run_dir(config: Config, dataset_fingerprint: str, seed: Optional[int] = None,
                 dataset_label: str = "") -> RunArchive:
    """Create a fresh run directory holding the config snapshot and manifest."""
    base = Path(config.archive_dir)
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    try:
        base.mkdir(parents=True, exist_ok=True)
        suffix = 0
        while True:
            run_id = stamp if suffix == 0 else f"{stamp}-{suffix}"
            root = base / run_id
            try:
                root.mkdir()
                break
            except FileExistsError:
                suffix += 1
        config_file = root / "config.txt"
        config_file.write_text(config.to_text(), encoding="utf-8")
        manifest = {
            "run_id": run_id,
            "start": _now(),
            "end": "",
            "status": "running",
            "dataset": dataset_label,
            "dataset_fingerprint": dataset_fingerprint,
            "backend": config.backend.value,
            "seed": "none" if seed is None else str(seed),
            "generations": "0",
        }
        manifest_file = root / "manifest.txt"
        _write_kv(manifest_file, manifest)
    except OSError as exc:
        raise IoFailure(f"cannot create run directory under {base}: {exc}") from exc
    return RunArchive(root, config_file, manifest_file, (), manifest)


def format_fitness(value: Optional[float], precision: int) -> str:
    if value is None:
        return ""
    return f"{value:.{precision}f}"


def write_generation(archive: RunArchive, population, precision: int) -> RunArchive:
    path = archive.root_dir / f"gen_{population.generation:03d}.csv"
    lines = [",".join(GEN_HEADER)]
    for tree in population.trees:
        expr = render_expression(tree).replace('"', '""')
        lines.append(f"{tree.id},{tree.birth_generation},{tree.depth},{tree.node_count},"
                     f"{format_fitness(tree.fitness, precision)},\"{expr}\"")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    manifest = dict(archive.manifest, generations=str(len(archive.generation_files) + 1))
    return replace(archive, generation_files=archive.generation_files + (path,),
                   manifest=manifest)


def snapshot_config(archive: RunArchive, config: Config) -> None:
    try:
        archive.config_file.write_text(config.to_text(), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def finalize(archive: RunArchive, status: str = "complete") -> RunArchive:
    manifest = dict(archive.manifest, end=_now(), status=status)
    try:
        _write_kv(archive.manifest_file, manifest)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return replace(archive, manifest=manifest)


def read_generation(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def generation_files(run_dir) -> list[Path]:
    return sorted(Path(run_dir).glob("gen_*.csv"))
