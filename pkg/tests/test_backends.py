import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import adversarial_floats, trees
from vecgp.backends import (eval_outputs, eval_scalar, eval_vector, evaluate, infer_label_scalar,
                            protected_apply)
from vecgp.compiler import build_plan, compile_tree, parse_expression
from vecgp.core import Kernel
from vecgp.data import ColumnStore, synth_dataset
from vecgp.errors import FeatureMismatch, UnknownOperator
from vecgp.generate import gen_tree


def bits(a):
    return np.asarray(a, dtype=np.float64).view(np.int64)


@pytest.mark.parametrize("op, x, y, want", [
    ("/", 1.0, 0.0, 0.0),
    ("/", 6.0, 3.0, 2.0),
    ("*", -2.0, 0.5, -1.0),
    ("/", 1.0, 1e-13, 0.0),
    ("/", 1.0, -1e-13, 0.0),
    ("/", 2.0, 1e-12, 2e12),
    ("+", 1e308, 1e308, 0.0),   # overflow is protected too
    ("*", 1e200, 1e200, 0.0),
    ("-", 5.0, 7.0, -2.0),
])
def test_protected_apply(op, x, y, want):
    assert protected_apply(op, x, y) == want


def test_protected_apply_neg_and_unknown():
    assert protected_apply("neg", 3.0) == -3.0
    with pytest.raises(UnknownOperator):
        protected_apply("^", 1.0, 2.0)


ABC = ("a", "b", "c")
HAND = ColumnStore(ABC, [[1.0, 2.0], [2.0, 4.0], [4.0, 8.0]], [0.0, 0.0])


def plan_of(expr, names=ABC, kernel=None):
    return build_plan(parse_expression(expr, names), kernel, names)


def test_scalar_hand_example():
    # row 0: 1*1 + 4/2 = 3; row 1: 2*2 + 8/4 = 6
    assert eval_scalar(plan_of("a*a + c/b"), HAND).tolist() == [3.0, 6.0]


def test_vector_hand_example_bit_identical():
    v = eval_vector(plan_of("a*a + c/b"), HAND)
    assert np.array_equal(bits(v), bits(eval_scalar(plan_of("a*a + c/b"), HAND)))
    assert v.tolist() == [3.0, 6.0]


def test_identity_plan():
    store = ColumnStore(("a",), [[5.0, 7.0, 9.0]], [0, 0, 0])
    for fn in (eval_scalar, eval_vector):
        assert fn(plan_of("a", ("a",)), store).tolist() == [5.0, 7.0, 9.0]


def test_division_by_zero_element():
    store = ColumnStore(("b", "c"), [[2.0, 0.0], [4.0, 8.0]], [0, 0])
    for fn in (eval_scalar, eval_vector):
        assert fn(plan_of("c/b", ("b", "c")), store).tolist() == [2.0, 0.0]


def test_constant_broadcast():
    for fn in (eval_scalar, eval_vector):
        assert fn(plan_of("2.5 * 2"), HAND).tolist() == [5.0, 5.0]


def test_vector_result_does_not_alias_store():
    out = eval_vector(plan_of("a"), HAND)
    out[0] = 42.0
    assert HAND.columns[0, 0] == 1.0


def test_feature_mismatch():
    other = ColumnStore(("a", "b"), [[1.0], [2.0]], [0.0])
    for fn in (eval_scalar, eval_vector):
        with pytest.raises(FeatureMismatch):
            fn(plan_of("a + c"), other)


def test_features_resolved_by_name():
    swapped = ColumnStore(("c", "b", "a"), [[4.0, 8.0], [2.0, 4.0], [1.0, 2.0]], [0, 0])
    assert eval_vector(plan_of("a*a + c/b"), swapped).tolist() == [3.0, 6.0]


def test_label_outputs():
    plan = plan_of("a - 1.5", kernel=Kernel("c", 3))
    store = ColumnStore(("a", "b", "c"), [[0.0, 2.9, 3.0, 9.0], [0] * 4, [0] * 4], [0] * 4)
    for backend in ("scalar", "vector"):
        out = eval_outputs(plan, store, backend)
        assert out["result"].tolist() == [-1.5, 1.4, 1.5, 7.5]
        assert out["labels"].tolist() == [0.0, 1.0, 2.0, 2.0]
    assert infer_label_scalar(1.5, 3) == 2.0


def test_trace_hook_reads_intermediates():
    plan = plan_of("a*a + c/b")
    trace = {}
    eval_vector(plan, HAND, trace=trace)
    assert sorted(trace) == list(range(len(plan.nodes)))
    assert trace[plan.output].tolist() == [3.0, 6.0]


@settings(max_examples=200, deadline=None)
@given(trees(3, list(ABC)), st.lists(adversarial_floats, min_size=6, max_size=6))
def test_equivalence_and_finiteness_adversarial(tree, values):
    cols = np.array(values + [0.0] * 6).reshape(3, 4)  # third column all zeros
    store = ColumnStore(ABC, cols, np.zeros(4))
    plan = compile_tree(tree, None, ABC)
    s, v = eval_scalar(plan, store), eval_vector(plan, store)
    assert np.isfinite(s).all() and np.isfinite(v).all()
    assert np.array_equal(bits(s), bits(v))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3, 4]), st.sampled_from([1, 7, 256, 4096]))
def test_chunked_results_independent_of_workers(seed, workers, chunk):
    store = synth_dataset(5000, 3, "r", seed % 7)
    rng = np.random.default_rng(seed)
    tree = gen_tree("grow", 5, store.feature_names, ("+", "-", "*", "/"), 3, rng)
    plan = compile_tree(tree, None, store.feature_names)
    ref = eval_vector(plan, store)
    got = eval_vector(plan, store, workers=workers, chunk_size=chunk)
    assert np.array_equal(bits(ref), bits(got))


def test_large_store_equivalence(kat7):
    rng = np.random.default_rng(2024)
    for _ in range(3):
        tree = gen_tree("full", 5, kat7.feature_names, ("+", "-", "*", "/"), 3, rng)
        plan = compile_tree(tree, None, kat7.feature_names)
        assert np.array_equal(bits(eval_scalar(plan, kat7)),
                              bits(evaluate(plan, kat7, "vector", workers=2, chunk_size=8192)))
