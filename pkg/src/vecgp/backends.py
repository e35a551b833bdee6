"""Scalar (row-at-a-time) and vector (column-at-a-time) plan evaluators.

Both engines implement the same protected arithmetic:

* ``+ - *`` and negation are plain IEEE double operations;
* division returns 0 when ``|y| < 1e-12``;
* any operation whose result overflows to infinity yields 0 instead.

Inputs are finite, so NaN can never arise and every result stays finite.
Elementwise IEEE ops round identically whether applied to one Python float or
to a numpy vector, which makes the two engines bit-identical.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Optional

import numpy as np

from .compiler import ConstNode, EvalPlan, Feed, LabelNode, OpNode
from .core import Backend
from .data import ColumnStore
from .errors import FeatureMismatch, UnknownOperator

DIV_EPSILON = 1e-12
DEFAULT_CHUNK_SIZE = 8192
_MAX = 1.7976931348623157e308


# -- scalar semantics --------------------------------------------------------

def _add(x, y):
    r = x + y
    return r if -_MAX <= r <= _MAX else 0.0


def _sub(x, y):
    r = x - y
    return r if -_MAX <= r <= _MAX else 0.0


def _mul(x, y):
    r = x * y
    return r if -_MAX <= r <= _MAX else 0.0


def _div(x, y):
    if -DIV_EPSILON < y < DIV_EPSILON:
        return 0.0
    r = x / y
    return r if -_MAX <= r <= _MAX else 0.0


def _neg(x):
    return -x


_SCALAR_OPS = {"+": _add, "-": _sub, "*": _mul, "/": _div}


def protected_apply(op: str, x: float, y: Optional[float] = None) -> float:
    if op == "neg":
        return _neg(float(x))
    try:
        fn = _SCALAR_OPS[op]
    except KeyError:
        raise UnknownOperator(op) from None
    return fn(float(x), float(y))


def infer_label_scalar(value: float, n_classes: int) -> float:
    label = math.floor(value + 0.5)
    return float(min(max(label, 0), n_classes - 1))


def _feature_slots(plan: EvalPlan, store: ColumnStore) -> dict[int, int]:
    """Map plan feature index -> store row index, by name."""
    slots = {}
    for node in plan.nodes:
        if isinstance(node, Feed):
            name = plan.feature_names[node.index]
            try:
                slots[node.index] = store.feature_names.index(name)
            except ValueError:
                raise FeatureMismatch(f"store has no feature {name!r}") from None
    return slots


def eval_scalar(plan: EvalPlan, store: ColumnStore, *, upto: Optional[int] = None) -> np.ndarray:
    """Interpret the plan once per row on Python floats. Single-threaded, no caching."""
    slots = _feature_slots(plan, store)
    last = plan.output if upto is None else upto
    # one step per plan node: (code, a, b, payload)
    steps = []
    for node in plan.nodes[:last + 1]:
        if isinstance(node, Feed):
            steps.append((0, slots[node.index], 0, None))
        elif isinstance(node, ConstNode):
            steps.append((1, 0, 0, node.value))
        elif isinstance(node, OpNode):
            if node.op == "neg":
                steps.append((3, node.inputs[0], 0, None))
            else:
                if node.op not in _SCALAR_OPS:
                    raise UnknownOperator(node.op)
                steps.append((2, node.inputs[0], node.inputs[1], _SCALAR_OPS[node.op]))
        elif isinstance(node, LabelNode):
            steps.append((4, node.input, node.n_classes, None))
    rows = [store.columns[i].tolist() for i in range(store.n_features)]
    n = store.n_rows
    out = [0.0] * n
    for j in range(n):
        vals = []
        push = vals.append
        for code, a, b, payload in steps:
            if code == 2:
                push(payload(vals[a], vals[b]))
            elif code == 0:
                push(rows[a][j])
            elif code == 1:
                push(payload)
            elif code == 3:
                push(-vals[a])
            else:
                push(infer_label_scalar(vals[a], b))
        out[j] = vals[-1]
    return np.array(out, dtype=np.float64)


# -- vector semantics --------------------------------------------------------

def _finite_or_zero(r: np.ndarray) -> np.ndarray:
    bad = ~np.isfinite(r)
    if bad.any():
        r[bad] = 0.0
    return r


def _vdiv(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast_shapes(x.shape, y.shape))
    np.divide(x, y, out=out, where=np.abs(y) >= DIV_EPSILON)
    return _finite_or_zero(out)


_VECTOR_OPS = {
    "+": lambda x, y: _finite_or_zero(np.add(x, y)),
    "-": lambda x, y: _finite_or_zero(np.subtract(x, y)),
    "*": lambda x, y: _finite_or_zero(np.multiply(x, y)),
    "/": _vdiv,
}


def infer_labels(values: np.ndarray, n_classes: int) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, n_classes - 1)


def _eval_columns(plan: EvalPlan, columns: dict, n: int, last: int,
                  trace: Optional[dict] = None) -> np.ndarray:
    vals = []
    with np.errstate(over="ignore", invalid="ignore"):
        for i, node in enumerate(plan.nodes[:last + 1]):
            if isinstance(node, Feed):
                v = columns[node.index]
            elif isinstance(node, ConstNode):
                v = np.full(n, node.value)
            elif isinstance(node, OpNode):
                if node.op == "neg":
                    v = np.negative(vals[node.inputs[0]])
                else:
                    try:
                        fn = _VECTOR_OPS[node.op]
                    except KeyError:
                        raise UnknownOperator(node.op) from None
                    v = fn(vals[node.inputs[0]], vals[node.inputs[1]])
            else:
                v = infer_labels(vals[node.input], node.n_classes)
            vals.append(v)
            if trace is not None:
                trace[i] = v
    return vals[-1]


@lru_cache(maxsize=None)
def _pool(workers: int) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="vecgp-eval")


def default_workers() -> int:
    return os.cpu_count() or 1


def eval_vector(plan: EvalPlan, store: ColumnStore, *, workers: int = 1,
                chunk_size: int = DEFAULT_CHUNK_SIZE, upto: Optional[int] = None,
                trace: Optional[dict] = None) -> np.ndarray:
    """Apply each plan node to whole columns, optionally split into row chunks.

    ``trace``, when a dict is passed, receives every intermediate vector keyed
    by plan node index (single-chunk evaluation only).
    """
    slots = _feature_slots(plan, store)
    last = plan.output if upto is None else upto
    n = store.n_rows
    columns = {f: store.columns[s] for f, s in slots.items()}
    if workers <= 1 or n <= chunk_size or trace is not None:
        out = _eval_columns(plan, columns, n, last, trace)
        # a bare feed aliases the (read-only) store column
        return np.array(out, dtype=np.float64, copy=True)

    out = np.empty(n, dtype=np.float64)

    def run(start: int) -> None:
        stop = min(start + chunk_size, n)
        chunk = {f: col[start:stop] for f, col in columns.items()}
        out[start:stop] = _eval_columns(plan, chunk, stop - start, last)

    # disjoint slices of ``out``; no locking needed
    list(_pool(workers).map(run, range(0, n, chunk_size)))
    return out


def evaluate(plan: EvalPlan, store: ColumnStore, backend=Backend.VECTOR,
             workers: int = 1, chunk_size: int = DEFAULT_CHUNK_SIZE) -> np.ndarray:
    if Backend(backend) is Backend.SCALAR:
        return eval_scalar(plan, store)
    return eval_vector(plan, store, workers=workers, chunk_size=chunk_size)


def eval_outputs(plan: EvalPlan, store: ColumnStore, backend=Backend.VECTOR) -> dict:
    """Every named kernel output (``result``, and ``labels`` for classification)."""
    out = {}
    for name, idx in plan.kernel_outputs.items():
        if Backend(backend) is Backend.SCALAR:
            out[name] = eval_scalar(plan, store, upto=idx)
        else:
            out[name] = eval_vector(plan, store, upto=idx)
    return out
