"""Random tree construction and the initial population."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Config, Node, Tree, TreeType, Variable, node_count, operator
from .errors import RetryExhausted

MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class Population:
    generation: int
    trees: tuple

    def __len__(self):
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)


def random_terminal(feature_names: Sequence[str], rng: np.random.Generator) -> Node:
    i = int(rng.integers(len(feature_names)))
    return Node(Variable(i, feature_names[i]))


def build_subtree(method: str, depth_target: int, feature_names: Sequence[str],
                  operator_set: Sequence[str], rng: np.random.Generator,
                  grow_bias: float = 0.5, _depth: int = 0) -> Node:
    """One random subtree without node-count constraints.

    Full puts every leaf at exactly ``depth_target``. Grow picks an operator
    with probability ``grow_bias`` at every level above the target.
    """
    if _depth >= depth_target:
        return random_terminal(feature_names, rng)
    if method == "grow" and rng.random() >= grow_bias:
        return random_terminal(feature_names, rng)
    op = operator(operator_set[int(rng.integers(len(operator_set)))])
    children = tuple(
        build_subtree(method, depth_target, feature_names, operator_set, rng,
                      grow_bias, _depth + 1)
        for _ in range(op.arity)
    )
    return Node(op, children)


def gen_tree(method: str, depth_target: int, feature_names: Sequence[str],
             operator_set: Sequence[str], min_nodes: int, rng: np.random.Generator,
             grow_bias: float = 0.5, tree_id: int = 0, generation: int = 1) -> Tree:
    method = _method_name(method)
    if depth_target < 0:
        raise ValueError("depth_target must be >= 0")
    for _ in range(MAX_ATTEMPTS):
        root = build_subtree(method, depth_target, feature_names, operator_set, rng, grow_bias)
        if node_count(root) >= min_nodes:
            return Tree(root, id=tree_id, birth_generation=generation)
    raise RetryExhausted(
        f"{method} tree of depth {depth_target} never reached {min_nodes} nodes "
        f"in {MAX_ATTEMPTS} attempts")


def _method_name(method) -> str:
    if isinstance(method, TreeType):
        method = {TreeType.FULL: "full", TreeType.GROW: "grow"}.get(method, method.value)
    method = str(method).lower()
    if method in ("f", "full"):
        return "full"
    if method in ("g", "grow"):
        return "grow"
    raise ValueError(f"unknown tree method {method!r}")


def ramp_plan(config: Config) -> list[tuple[str, int]]:
    """(method, depth) for each tree of a fresh population, in id order."""
    pop, base = config.tree_pop_max, config.tree_depth_base
    if config.tree_type is TreeType.FULL:
        return [("full", base)] * pop
    if config.tree_type is TreeType.GROW:
        return [("grow", base)] * pop
    depths = list(range(min(2, base), base + 1))
    per_depth = pop // len(depths)
    plan = []
    for depth in depths:
        n_full = per_depth // 2
        plan += [("full", depth)] * n_full + [("grow", depth)] * (per_depth - n_full)
    plan += [("grow", base)] * (pop - len(plan))
    return plan


def gen_population(config: Config, feature_names: Sequence[str],
                   rng: np.random.Generator) -> Population:
    trees = tuple(
        gen_tree(method, depth, feature_names, config.operator_set, config.min_nodes,
                 rng, config.grow_bias, tree_id=i, generation=1)
        for i, (method, depth) in enumerate(ramp_plan(config), start=1)
    )
    return Population(1, trees)
