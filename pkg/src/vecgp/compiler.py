"""Tree -> expression string -> AST -> evaluation plan.

Grammar accepted by :func:`parse_expression`::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | primary
    primary := NUMBER | IDENT | "(" expr ")"

``NUMBER`` is a decimal real with optional exponent, ``IDENT`` a feature name.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .core import Constant, Kernel, KernelKind, Node, Operator, Tree, Variable, operator
from .errors import ExpressionSyntaxError, UnknownIdentifier, UnknownOperator

# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Ast"
    right: "Ast"


@dataclass(frozen=True)
class UnaryOp:
    op: str
    operand: "Ast"


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: float


Ast = Union[BinaryOp, UnaryOp, Var, Const]


# -- rendering ---------------------------------------------------------------

def render_node(node: Node) -> str:
    kind = node.kind
    if isinstance(kind, Variable):
        return kind.name
    if isinstance(kind, Constant):
        return repr(float(kind.value))
    if kind.arity == 1:
        return f"-({render_node(node.children[0])})"
    left, right = (render_node(c) for c in node.children)
    if kind.symbol in ("+", "-"):
        return f"({left}) {kind.symbol} ({right})"
    return f"({left}){kind.symbol}({right})"


def render_expression(tree: Tree) -> str:
    """Fully parenthesized infix form of ``tree``; every operand sits in parentheses."""
    return render_node(tree.root)


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<badop>\*\*|//|[\^%&|<>=!~@])
  | (?P<op>[-+*/()])
""", re.VERBOSE)

_ALIASES = {"×": "*", "÷": "/", "−": "-"}


def tokenize(expr: str):
    pos = 0
    tokens = []
    while pos < len(expr):
        ch = expr[pos]
        if ch in _ALIASES:
            tokens.append(("op", _ALIASES[ch], pos))
            pos += 1
            continue
        m = _TOKEN.match(expr, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {ch!r}", pos)
        kind = m.lastgroup
        if kind == "badop":
            raise UnknownOperator(m.group(), pos)
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(expr)))
    return tokens


class _Parser:
    def __init__(self, expr: str, feature_names: Optional[Sequence[str]]):
        self.tokens = tokenize(expr)
        self.i = 0
        self.names = None if feature_names is None else set(feature_names)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Ast:
        if self.peek()[0] == "end":
            raise ExpressionSyntaxError("empty expression", 0)
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", pos)
        return node

    def expr(self) -> Ast:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Ast:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self) -> Ast:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return UnaryOp("neg", self.unary())
        return self.primary()

    def primary(self) -> Ast:
        kind, text, pos = self.take()
        if kind == "number":
            value = float(text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError(f"constant {text} is not finite", pos)
            return Const(value)
        if kind == "ident":
            if self.names is not None and text not in self.names:
                raise UnknownIdentifier(text, pos)
            return Var(text)
        if kind == "op" and text == "(":
            node = self.expr()
            kind, text, pos = self.take()
            if text != ")" or kind != "op":
                raise ExpressionSyntaxError("expected ')'", pos)
            return node
        if kind == "end":
            raise ExpressionSyntaxError("unexpected end of expression", pos)
        raise ExpressionSyntaxError(f"unexpected {text!r}", pos)


def parse_expression(expr: str, feature_names: Optional[Sequence[str]] = None) -> Ast:
    """Parse infix arithmetic. With ``feature_names`` given, unknown names are rejected."""
    return _Parser(expr, feature_names).parse()


def ast_to_tree(ast: Ast, feature_names: Sequence[str], tree_id: int = 0,
                generation: int = 1) -> Tree:
    """Build a seed tree from an AST. A negated literal folds into one constant."""
    index = {name: i for i, name in enumerate(feature_names)}

    def build(node) -> Node:
        if isinstance(node, Var):
            if node.name not in index:
                raise UnknownIdentifier(node.name)
            return Node(Variable(index[node.name], node.name))
        if isinstance(node, Const):
            return Node(Constant(node.value))
        if isinstance(node, UnaryOp):
            if isinstance(node.operand, Const):
                return Node(Constant(-node.operand.value))
            return Node(operator(node.op), (build(node.operand),))
        return Node(operator(node.op), (build(node.left), build(node.right)))

    return Tree(build(ast), id=tree_id, birth_generation=generation)


def tree_from_expression(expr: str, feature_names: Sequence[str], tree_id: int = 0) -> Tree:
    return ast_to_tree(parse_expression(expr, feature_names), feature_names, tree_id)


# -- evaluation plan ---------------------------------------------------------

@dataclass(frozen=True)
class Feed:
    index: int


@dataclass(frozen=True)
class ConstNode:
    value: float


@dataclass(frozen=True)
class OpNode:
    op: str
    inputs: tuple


@dataclass(frozen=True)
class LabelNode:
    """Bucket a real value into a class label (round half up, clamp)."""
    n_classes: int
    input: int


PlanNode = Union[Feed, ConstNode, OpNode, LabelNode]


@dataclass(frozen=True)
class EvalPlan:
    nodes: tuple
    output: int
    feature_names: tuple
    kernel_outputs: dict = field(default_factory=dict, compare=False)

    @property
    def feeds(self) -> list[str]:
        return [self.feature_names[n.index] for n in self.nodes if isinstance(n, Feed)]


def build_plan(ast: Ast, kernel: Optional[Kernel], feature_names: Sequence[str]) -> EvalPlan:
    names = tuple(feature_names)
    index = {name: i for i, name in enumerate(names)}
    nodes: list = []
    feed_slot: dict[int, int] = {}

    def emit(node) -> int:
        if isinstance(node, Var):
            if node.name not in index:
                raise UnknownIdentifier(node.name)
            f = index[node.name]
            if f not in feed_slot:
                feed_slot[f] = len(nodes)
                nodes.append(Feed(f))
            return feed_slot[f]
        if isinstance(node, Const):
            nodes.append(ConstNode(float(node.value)))
        elif isinstance(node, UnaryOp):
            if node.op != "neg":
                raise UnknownOperator(node.op)
            arg = emit(node.operand)
            nodes.append(OpNode("neg", (arg,)))
        elif isinstance(node, BinaryOp):
            if node.op not in ("+", "-", "*", "/"):
                raise UnknownOperator(node.op)
            left = emit(node.left)
            right = emit(node.right)
            nodes.append(OpNode(node.op, (left, right)))
        else:
            raise TypeError(f"not an AST node: {node!r}")
        return len(nodes) - 1

    output = emit(ast)
    outputs = {"result": output}
    if kernel is not None and kernel.kind is KernelKind.CLASSIFICATION:
        nodes.append(LabelNode(kernel.n_classes, output))
        outputs["labels"] = len(nodes) - 1
    return EvalPlan(tuple(nodes), output, names, outputs)


def check_topological(plan: EvalPlan) -> None:
    """Raise ValueError unless every node's inputs precede it."""
    for i, node in enumerate(plan.nodes):
        if isinstance(node, OpNode):
            inputs = node.inputs
        elif isinstance(node, LabelNode):
            inputs = (node.input,)
        else:
            inputs = ()
        for j in inputs:
            if not 0 <= j < i:
                raise ValueError(f"plan node {i} reads node {j}")
    if not 0 <= plan.output < len(plan.nodes):
        raise ValueError("output index out of range")


def compile_tree(tree: Tree, kernel: Optional[Kernel], feature_names: Sequence[str]) -> EvalPlan:
    """The archival route: render, re-parse, then plan."""
    expr = render_expression(tree)
    return build_plan(parse_expression(expr, feature_names), kernel, feature_names)


def format_plan(plan: EvalPlan) -> str:
    lines = []
    for i, node in enumerate(plan.nodes):
        if isinstance(node, Feed):
            text = f"feed {plan.feature_names[node.index]}"
        elif isinstance(node, ConstNode):
            text = f"const {node.value!r}"
        elif isinstance(node, LabelNode):
            text = f"labels({node.n_classes}) <- %{node.input}"
        else:
            text = f"{node.op} " + ", ".join(f"%{j}" for j in node.inputs)
        tags = [name for name, idx in plan.kernel_outputs.items() if idx == i]
        suffix = f"    -> {', '.join(tags)}" if tags else ""
        lines.append(f"%{i} = {text}{suffix}")
    return "\n".join(lines)
