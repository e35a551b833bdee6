import numpy as np
import pytest

from vecgp.backends import protected_apply
from vecgp.core import Constant, Variable
from vecgp.data import load_bundled, synth_dataset


def eval_tree_direct(node, row):
    """Recursive reference evaluator straight off the tree, one row of floats."""
    kind = node.kind
    if isinstance(kind, Variable):
        return row[kind.index]
    if isinstance(kind, Constant):
        return kind.value
    args = [eval_tree_direct(c, row) for c in node.children]
    return protected_apply(kind.symbol, *args)


def eval_tree_rows(tree, store):
    cols = store.columns
    return np.array([eval_tree_direct(tree.root, cols[:, j].tolist())
                     for j in range(store.n_rows)])


@pytest.fixture(scope="session")
def iris():
    return load_bundled("iris")


@pytest.fixture(scope="session")
def kepler():
    return load_bundled("kepler")


@pytest.fixture(scope="session")
def kat7():
    return synth_dataset(10_000, 9, "r", 42)


# -- hypothesis strategies ---------------------------------------------------

from hypothesis import strategies as st  # noqa: E402

from vecgp.core import Node, Tree, operator  # noqa: E402

adversarial_floats = st.one_of(
    st.sampled_from([0.0, -0.0, 1e-13, -1e-13, 1e-12, 1.0, -1.0, 1e300, -1e300, 1e-300]),
    st.floats(allow_nan=False, allow_infinity=False, width=64),
)


def tree_nodes(n_features, names=None, constants=True):
    names = names or [f"x{i}" for i in range(n_features)]
    var = st.integers(0, n_features - 1).map(lambda i: Node(Variable(i, names[i])))
    leaves = st.one_of(var, adversarial_floats.map(lambda v: Node(Constant(v)))) \
        if constants else var

    def extend(children):
        binary = st.tuples(st.sampled_from(["+", "-", "*", "/"]), children, children).map(
            lambda t: Node(operator(t[0]), (t[1], t[2])))
        unary = children.map(lambda c: Node(operator("neg"), (c,)))
        return st.one_of(binary, binary, binary, unary)

    return st.recursive(leaves, extend, max_leaves=24)


def trees(n_features, names=None, constants=True):
    return tree_nodes(n_features, names, constants).map(Tree)


# -- acceptance report -------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
