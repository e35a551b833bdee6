"""Domain types shared by every other module: nodes, trees, kernels, config."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

from .errors import ConfigError, InvalidTree

# operator id -> arity
OPERATORS = {
    "+": 2,
    "-": 2,
    "*": 2,
    "/": 2,
    "neg": 1,
}

DEFAULT_OPERATOR_SET = ("+", "-", "*", "/")


class Direction(enum.Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


class KernelKind(str, enum.Enum):
    REGRESSION = "r"
    CLASSIFICATION = "c"
    MATCH = "m"


class TreeType(str, enum.Enum):
    FULL = "f"
    GROW = "g"
    RAMPED = "r"


class Backend(str, enum.Enum):
    SCALAR = "scalar"
    VECTOR = "vector"


# -- node kinds --------------------------------------------------------------

@dataclass(frozen=True)
class Operator:
    symbol: str
    arity: int


@dataclass(frozen=True)
class Variable:
    index: int
    name: str


@dataclass(frozen=True)
class Constant:
    value: float


NodeKind = Union[Operator, Variable, Constant]


def operator(symbol: str) -> Operator:
    return Operator(symbol, OPERATORS[symbol])


@dataclass(frozen=True, eq=True)
class Node:
    """One node of a pointer-style expression tree. Leaves have no children."""

    kind: NodeKind
    children: tuple = ()

    @property
    def is_terminal(self) -> bool:
        return not isinstance(self.kind, Operator)


def node_depth(node: Node) -> int:
    if not node.children:
        return 0
    return 1 + max(node_depth(c) for c in node.children)


def node_count(node: Node) -> int:
    return 1 + sum(node_count(c) for c in node.children)


def iter_nodes(node: Node, depth: int = 0, path: tuple = ()) -> Iterator[tuple]:
    """Yield ``(path, depth, node)`` in prefix order. The node id is the position in this order."""
    yield path, depth, node
    for i, child in enumerate(node.children):
        yield from iter_nodes(child, depth + 1, path + (i,))


def subtree_at(node: Node, path: Sequence[int]) -> Node:
    for i in path:
        node = node.children[i]
    return node


def replace_at(node: Node, path: Sequence[int], new: Node) -> Node:
    """Return a copy of ``node`` with the subtree at ``path`` swapped for ``new``."""
    if not path:
        return new
    i = path[0]
    children = list(node.children)
    children[i] = replace_at(children[i], path[1:], new)
    return Node(node.kind, tuple(children))


def copy_node(node: Node) -> Node:
    return Node(node.kind, tuple(copy_node(c) for c in node.children))


@dataclass(frozen=True)
class Tree:
    root: Node
    id: int = 0
    birth_generation: int = 1
    fitness: Optional[float] = None
    depth: int = field(init=False, compare=False)
    node_count: int = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "depth", node_depth(self.root))
        object.__setattr__(self, "node_count", node_count(self.root))

    def nodes(self):
        """``(node_id, kind, child_ids)`` triples in prefix order."""
        entries = list(iter_nodes(self.root))
        index = {path: i for i, (path, _, _) in enumerate(entries)}
        return [
            (i, n.kind, tuple(index[path + (k,)] for k in range(len(n.children))))
            for i, (path, _, n) in enumerate(entries)
        ]

    def with_fitness(self, fitness: Optional[float]) -> "Tree":
        return replace(self, fitness=fitness)


def validate_tree(tree: Tree, *, n_features: Optional[int] = None,
                  depth_max: Optional[int] = None, min_nodes: Optional[int] = None) -> None:
    """Raise InvalidTree unless ``tree`` is a single rooted, arity-correct tree."""
    seen = set()
    stack = [(tree.root, 0)]
    deepest = 0
    count = 0
    while stack:
        node, depth = stack.pop()
        if id(node) in seen:
            raise InvalidTree("node reachable through more than one parent")
        seen.add(id(node))
        count += 1
        deepest = max(deepest, depth)
        kind = node.kind
        if isinstance(kind, Operator):
            if OPERATORS.get(kind.symbol) != kind.arity:
                raise InvalidTree(f"operator {kind.symbol!r} has wrong arity {kind.arity}")
            if len(node.children) != kind.arity:
                raise InvalidTree(f"operator {kind.symbol!r} has {len(node.children)} children")
        elif isinstance(kind, Variable):
            if node.children:
                raise InvalidTree("variable with children")
            if kind.index < 0 or (n_features is not None and kind.index >= n_features):
                raise InvalidTree(f"variable index {kind.index} out of range")
        elif isinstance(kind, Constant):
            if node.children:
                raise InvalidTree("constant with children")
            if not math.isfinite(kind.value):
                raise InvalidTree("non-finite constant")
        else:
            raise InvalidTree(f"unknown node kind {kind!r}")
        stack.extend((c, depth + 1) for c in node.children)
    if deepest != tree.depth or count != tree.node_count:
        raise InvalidTree("cached depth/node count disagree with structure")
    if depth_max is not None and tree.depth > depth_max:
        raise InvalidTree(f"depth {tree.depth} exceeds {depth_max}")
    if min_nodes is not None and tree.node_count < min_nodes:
        raise InvalidTree(f"{tree.node_count} nodes, fewer than {min_nodes}")


# -- kernels -----------------------------------------------------------------

@dataclass(frozen=True)
class Kernel:
    kind: KernelKind
    n_classes: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if self.kind is KernelKind.CLASSIFICATION:
            if self.n_classes is None or self.n_classes < 2:
                raise ValueError("classification needs n_classes >= 2")

    @property
    def direction(self) -> Direction:
        if self.kind is KernelKind.REGRESSION:
            return Direction.MINIMIZE
        return Direction.MAXIMIZE


# -- configuration -----------------------------------------------------------

@dataclass(frozen=True)
class Config:
    """Run-time parameters. Defaults reproduce the benchmark configuration."""

    kernel: KernelKind = KernelKind.REGRESSION
    tree_type: TreeType = TreeType.RAMPED
    tree_depth_base: int = 5
    tree_depth_max: int = 5
    min_nodes: int = 3
    tree_pop_max: int = 100
    tournament_size: int = 10
    generation_max: int = 30
    precision: int = 4
    op_reproduction: float = 0.1
    op_mutation: float = 0.2
    op_crossover: float = 0.7
    operator_set: tuple = DEFAULT_OPERATOR_SET
    rng_seed: Optional[int] = None
    backend: Backend = Backend.VECTOR
    archive_dir: str = "runs"
    workers: Optional[int] = None
    grow_bias: float = 0.5
    point_mutation_share: float = 0.5
    tree_parallel: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "kernel", KernelKind(self.kernel))
        except ValueError:
            raise ConfigError("kernel", f"must be one of r, c, m; got {self.kernel!r}")
        try:
            object.__setattr__(self, "tree_type", TreeType(self.tree_type))
        except ValueError:
            raise ConfigError("tree_type", f"must be one of f, g, r; got {self.tree_type!r}")
        try:
            object.__setattr__(self, "backend", Backend(self.backend))
        except ValueError:
            raise ConfigError("backend", f"must be scalar or vector; got {self.backend!r}")
        object.__setattr__(self, "operator_set", tuple(self.operator_set))
        self._validate()

    def _validate(self):
        ints = ("tree_depth_base", "tree_depth_max", "min_nodes", "tree_pop_max",
                "tournament_size", "generation_max", "precision")
        for name in ints:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(name, f"must be an integer, got {value!r}")
        if self.tree_depth_base < 1:
            raise ConfigError("tree_depth_base", "must be >= 1")
        if self.tree_depth_max < self.tree_depth_base:
            raise ConfigError("tree_depth_max", "must be >= tree_depth_base")
        if self.min_nodes < 1:
            raise ConfigError("min_nodes", "must be >= 1")
        if self.tree_pop_max < 2:
            raise ConfigError("tree_pop_max", "must be >= 2")
        if not 1 <= self.tournament_size <= self.tree_pop_max:
            raise ConfigError("tournament_size", "must be between 1 and tree_pop_max")
        if self.generation_max < 1:
            raise ConfigError("generation_max", "must be >= 1")
        if self.precision < 0:
            raise ConfigError("precision", "must be >= 0")
        for name in ("op_reproduction", "op_mutation", "op_crossover"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                raise ConfigError(name, f"must be a fraction in [0, 1], got {value!r}")
        total = self.op_reproduction + self.op_mutation + self.op_crossover
        if abs(total - 1.0) > 1e-9:
            raise ConfigError("op_crossover",
                              f"reproduction + mutation + crossover must sum to 1, got {total:g}")
        if not self.operator_set:
            raise ConfigError("operator_set", "must not be empty")
        for op in self.operator_set:
            if op not in OPERATORS:
                raise ConfigError("operator_set", f"unknown operator {op!r}")
        if self.rng_seed is not None and (isinstance(self.rng_seed, bool)
                                          or not isinstance(self.rng_seed, int)
                                          or self.rng_seed < 0):
            raise ConfigError("rng_seed", "must be a non-negative integer or None")
        if self.workers is not None and (not isinstance(self.workers, int) or self.workers < 1):
            raise ConfigError("workers", "must be a positive integer or None")
        if not 0.0 <= self.grow_bias <= 1.0:
            raise ConfigError("grow_bias", "must be in [0, 1]")
        if not 0.0 <= self.point_mutation_share <= 1.0:
            raise ConfigError("point_mutation_share", "must be in [0, 1]")
        if not str(self.archive_dir):
            raise ConfigError("archive_dir", "must not be empty")

    def operator_fractions(self) -> tuple:
        """Exact (reproduction, mutation, crossover) shares normalized to sum to 1."""
        raw = [Fraction(repr(float(f))) for f in
               (self.op_reproduction, self.op_mutation, self.op_crossover)]
        total = sum(raw)
        return tuple(f / total for f in raw)

    def replace(self, **changes) -> "Config":
        return replace(self, **changes)

    # key=value text form ----------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name}={_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Config":
        known = {f.name: f for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}", f"expected key=value, got {raw!r}")
            key, _, value = (part.strip() for part in line.partition("="))
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
            values[key] = _parse_value(key, value)
        return cls(**values)

    @classmethod
    def load(cls, path) -> "Config":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(value)
    return str(value)


_INT_KEYS = {"tree_depth_base", "tree_depth_max", "min_nodes", "tree_pop_max",
             "tournament_size", "generation_max", "precision", "rng_seed", "workers"}
_FLOAT_KEYS = {"op_reproduction", "op_mutation", "op_crossover", "grow_bias",
               "point_mutation_share"}


def _parse_value(key: str, text: str):
    try:
        if key in _INT_KEYS:
            return None if text.lower() == "none" else int(text)
        if key in _FLOAT_KEYS:
            return float(text)
        if key == "operator_set":
            return tuple(op.strip() for op in text.split(",") if op.strip())
        if key == "tree_parallel":
            if text.lower() not in ("true", "false"):
                raise ValueError(text)
            return text.lower() == "true"
    except ValueError:
        raise ConfigError(key, f"cannot parse {text!r}")
    return text
