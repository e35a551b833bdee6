"""Command-line entry point.

    vecgp [run] --data PATH [flags]          evolve once (server mode)
    vecgp run --interactive --data PATH      text menu between generations
    vecgp bench --data PATH --runs N         time scalar vs vector backends

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import enum
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .core import Config
from .errors import ConfigError, DataError, GPError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class Mode(enum.Enum):
    RUN = "run"
    BENCH = "bench"
    INTERACTIVE = "interactive"


class UsageError(GPError):
    pass


class UnknownFlag(UsageError):
    pass


class InvalidValue(UsageError):
    def __init__(self, flag, message):
        self.flag = flag
        super().__init__(f"{flag}: {message}")


class MissingData(UsageError):
    pass


@dataclass(frozen=True)
class CliCommand:
    mode: Mode
    config: Config
    data: str
    runs: int = 10
    overrides: dict = field(default_factory=dict)
    output_dir: Optional[str] = None


# flag -> Config field
FLAG_FIELDS = {
    "--kernel": "kernel",
    "--tree-type": "tree_type",
    "--depth-base": "tree_depth_base",
    "--depth-max": "tree_depth_max",
    "--min-nodes": "min_nodes",
    "--pop": "tree_pop_max",
    "--tourn": "tournament_size",
    "--gens": "generation_max",
    "--precision": "precision",
    "--repro": "op_reproduction",
    "--mutate": "op_mutation",
    "--cross": "op_crossover",
    "--seed": "rng_seed",
    "--backend": "backend",
    "--workers": "workers",
    "--archive": "archive_dir",
}
FIELD_FLAGS = {v: k for k, v in FLAG_FIELDS.items()}
# op_crossover is where the fraction-sum check reports; name all three
FIELD_FLAGS["op_crossover"] = "--repro/--mutate/--cross"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "unrecognized arguments" in message:
            raise UnknownFlag(message)
        flag = next((f for f in FLAG_FIELDS if f in message), "argv")
        raise InvalidValue(flag, message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vecgp", add_help=True, allow_abbrev=False)
    p.add_argument("--kernel", choices=["r", "c", "m"])
    p.add_argument("--tree-type", choices=["f", "g", "r"])
    for flag in ("--depth-base", "--depth-max", "--min-nodes", "--pop", "--tourn", "--gens",
                 "--precision", "--seed", "--workers"):
        p.add_argument(flag, type=int)
    for flag in ("--repro", "--mutate", "--cross"):
        p.add_argument(flag, type=float)
    p.add_argument("--backend", choices=["scalar", "vector"])
    p.add_argument("--archive")
    p.add_argument("--data")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--interactive", action="store_true")
    return p


def parse_args(argv: Sequence[str]) -> CliCommand:
    """argv (without the program name) -> CliCommand, or a UsageError subclass."""
    argv = list(argv)
    mode = Mode.RUN
    if argv and argv[0] in ("run", "bench"):
        mode = Mode(argv.pop(0))
    ns = _build_parser().parse_args(argv)
    if ns.interactive:
        if mode is Mode.BENCH:
            raise InvalidValue("--interactive", "not available in bench mode")
        mode = Mode.INTERACTIVE
    if not ns.data:
        raise MissingData("--data PATH is required")
    if ns.runs < 2:
        raise InvalidValue("--runs", "must be >= 2")
    overrides = {}
    for flag, name in FLAG_FIELDS.items():
        value = getattr(ns, flag[2:].replace("-", "_"))
        if value is not None:
            overrides[name] = value
    try:
        config = Config(**overrides)
    except ConfigError as exc:
        raise InvalidValue(FIELD_FLAGS.get(exc.field, exc.field), str(exc)) from None
    return CliCommand(mode, config, ns.data, ns.runs, overrides,
                      output_dir=str(config.archive_dir))


def _load(data: str):
    from .data import resolve_dataset
    return resolve_dataset(data)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE

    try:
        store = _load(cmd.data)
    except (DataError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    label = Path(cmd.data).stem

    try:
        if cmd.mode is Mode.BENCH:
            return _bench(cmd, store, label)
        if cmd.mode is Mode.INTERACTIVE:
            from .interactive import interactive_loop
            result = interactive_loop(cmd.config, store, dataset_label=label)
        else:
            from .evolve import run_evolution
            result = run_evolution(cmd.config, store, dataset_label=label)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (GPError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _summary(result)
    return EXIT_OK


def _summary(result) -> None:
    from .compiler import render_expression
    last = result.history[-1]
    print(f"generations: {last.generation}  seed: {result.seed}  "
          f"wall time: {result.elapsed:.3f} s")
    print(f"best fitness: {last.best_fitness:g}  (tree {last.best_id})")
    print(f"best expression: {render_expression(result.best)}")
    if result.archive is not None:
        print(f"archive: {result.archive.root_dir}")


def _bench(cmd: CliCommand, store, label: str) -> int:
    from .bench import compare_backends, report_to_markdown, write_report
    seed = cmd.config.rng_seed or 0
    report = compare_backends(cmd.config, store, cmd.runs, workers=cmd.config.workers,
                              master_seed=seed, dataset_label=label,
                              progress=lambda lbl: print(f"benchmarking {lbl} ...", flush=True))
    out_dir = Path(cmd.config.archive_dir)
    csv_path, md_path = write_report(report, out_dir)
    print(report_to_markdown(report))
    print(f"report: {csv_path}  {md_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
