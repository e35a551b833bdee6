import pytest

from vecgp.core import (Config, Constant, Direction, Kernel, KernelKind, Node, Operator, Tree,
                        Variable, operator, validate_tree)
from vecgp.errors import ConfigError, InvalidTree


def leaf(i, name="x"):
    return Node(Variable(i, name))


def test_defaults_match_benchmark_table():
    c = Config()
    assert (c.tree_depth_base, c.tree_depth_max, c.min_nodes) == (5, 5, 3)
    assert (c.tree_pop_max, c.tournament_size, c.generation_max, c.precision) == (100, 10, 30, 4)
    assert (c.op_reproduction, c.op_mutation, c.op_crossover) == (0.1, 0.2, 0.7)
    assert c.tree_type.value == "r"
    assert c.operator_set == ("+", "-", "*", "/")


def test_operator_fractions_are_exact():
    assert sum(Config().operator_fractions()) == 1


@pytest.mark.parametrize("changes, field", [
    ({"tree_depth_base": 0}, "tree_depth_base"),
    ({"tree_depth_base": 6}, "tree_depth_max"),
    ({"min_nodes": 0}, "min_nodes"),
    ({"tree_pop_max": 1, "tournament_size": 1}, "tree_pop_max"),
    ({"tournament_size": 101}, "tournament_size"),
    ({"generation_max": 0}, "generation_max"),
    ({"precision": -1}, "precision"),
    ({"op_reproduction": 0.2}, "op_crossover"),
    ({"op_mutation": -0.1}, "op_mutation"),
    ({"operator_set": ("+", "^")}, "operator_set"),
    ({"kernel": "x"}, "kernel"),
    ({"tree_type": "q"}, "tree_type"),
    ({"backend": "gpu"}, "backend"),
    ({"rng_seed": -3}, "rng_seed"),
    ({"workers": 0}, "workers"),
])
def test_config_rejects_each_field(changes, field):
    with pytest.raises(ConfigError) as info:
        Config(**changes)
    assert info.value.field == field


def test_config_text_round_trip():
    c = Config(kernel="c", rng_seed=7, backend="scalar", workers=2, op_reproduction=0.15,
               op_mutation=0.15, archive_dir="/tmp/x")
    assert Config.from_text(c.to_text()) == c


def test_config_text_unknown_key():
    with pytest.raises(ConfigError):
        Config.from_text("bogus=1\n")


def test_kernel_directions():
    assert Kernel("r").direction is Direction.MINIMIZE
    assert Kernel("c", 3).direction is Direction.MAXIMIZE
    assert Kernel(KernelKind.MATCH).direction is Direction.MAXIMIZE
    with pytest.raises(ValueError):
        Kernel("c", 1)


def test_tree_depth_convention():
    assert Tree(leaf(0)).depth == 0
    t = Tree(Node(operator("+"), (leaf(0), Node(operator("*"), (leaf(0), leaf(1))))))
    assert (t.depth, t.node_count) == (2, 5)


def test_tree_nodes_listing():
    t = Tree(Node(operator("+"), (leaf(0, "a"), leaf(1, "b"))))
    assert t.nodes() == [(0, Operator("+", 2), (1, 2)), (1, Variable(0, "a"), ()),
                         (2, Variable(1, "b"), ())]


def test_validator_accepts_good_tree():
    t = Tree(Node(operator("/"), (leaf(0), Node(Constant(2.0)))))
    validate_tree(t, n_features=1, depth_max=5, min_nodes=3)


@pytest.mark.parametrize("root", [
    Node(Operator("+", 2), (leaf(0),)),                      # too few children
    Node(Operator("+", 1), (leaf(0),)),                      # wrong arity in table
    Node(Variable(0, "x"), (leaf(0),)),                      # leaf with children
    Node(Constant(float("inf"))),
])
def test_validator_rejects_malformed(root):
    with pytest.raises(InvalidTree):
        validate_tree(Tree(root))


def test_validator_rejects_shared_node():
    shared = leaf(0)
    with pytest.raises(InvalidTree):
        validate_tree(Tree(Node(operator("+"), (shared, shared))))


def test_validator_bounds():
    t = Tree(Node(operator("+"), (leaf(0), leaf(3))))
    with pytest.raises(InvalidTree):
        validate_tree(t, n_features=2)
    with pytest.raises(InvalidTree):
        validate_tree(t, depth_max=0)
    with pytest.raises(InvalidTree):
        validate_tree(t, min_nodes=4)
