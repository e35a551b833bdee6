"""Per-kernel fitness of a result vector against the solution column."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .backends import infer_labels
from .core import Direction, Kernel, KernelKind
from .errors import LabelOutOfRange, LengthMismatch


@dataclass(frozen=True)
class FitnessScore:
    value: float
    direction: Direction


def _check_lengths(result, solution):
    result = np.asarray(result, dtype=np.float64)
    solution = np.asarray(solution, dtype=np.float64)
    if result.shape != solution.shape:
        raise LengthMismatch(f"result has {result.size} rows, solution {solution.size}")
    return result, solution


def score_regression(result, solution, precision: int) -> FitnessScore:
    """Sum of absolute errors, accumulated strictly in row order, then rounded."""
    result, solution = _check_lengths(result, solution)
    errors = np.abs(result - solution)
    with np.errstate(over="ignore"):
        # cumsum is a sequential left-to-right reduction, unlike np.sum
        total = float(np.cumsum(errors)[-1]) if errors.size else 0.0
    return FitnessScore(round(total, precision), Direction.MINIMIZE)


def infer_label(result_value: float, n_classes: int) -> int:
    """Round half up, then clamp into ``0..n_classes-1``."""
    return min(max(math.floor(result_value + 0.5), 0), n_classes - 1)


def score_classification(result, solution, n_classes: int) -> FitnessScore:
    result, solution = _check_lengths(result, solution)
    if ((solution < 0) | (solution > n_classes - 1) | (solution != np.floor(solution))).any():
        raise LabelOutOfRange(f"solution labels must be integers in 0..{n_classes - 1}")
    hits = int(np.count_nonzero(infer_labels(result, n_classes) == solution))
    return FitnessScore(float(hits), Direction.MAXIMIZE)


def score_match(result, solution, precision: int) -> FitnessScore:
    result, solution = _check_lengths(result, solution)
    tolerance = 0.5 * 10.0 ** (-precision)
    hits = int(np.count_nonzero(np.abs(result - solution) < tolerance))
    return FitnessScore(float(hits), Direction.MAXIMIZE)


# custom fitness hook: kernel kind -> (result, solution, kernel, precision) -> FitnessScore
FitnessFn = Callable[[np.ndarray, np.ndarray, Kernel, int], FitnessScore]
_CUSTOM: dict = {}


def register_fitness(kind, fn: FitnessFn) -> None:
    """Replace the scoring routine used for ``kind``. Pass ``None`` to restore the default."""
    kind = KernelKind(kind)
    if fn is None:
        _CUSTOM.pop(kind, None)
    else:
        _CUSTOM[kind] = fn


def score(kernel: Kernel, result, solution, precision: int) -> FitnessScore:
    custom = _CUSTOM.get(kernel.kind)
    if custom is not None:
        return custom(result, solution, kernel, precision)
    if kernel.kind is KernelKind.REGRESSION:
        return score_regression(result, solution, precision)
    if kernel.kind is KernelKind.CLASSIFICATION:
        return score_classification(result, solution, kernel.n_classes)
    return score_match(result, solution, precision)


def is_better(a: float, b: float, direction: Direction) -> bool:
    return a < b if direction is Direction.MINIMIZE else a > b
