"""Syntax tree for metamorphic relations.

Nodes compare structurally; source positions are carried along but excluded
from equality so that a parsed, printed and re-parsed tree equals the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

METAMORPHIC_OPS = ("IMPLIES", "AND", "OR", "NOT", "EQUAL", "TRUE", "FALSE")
DATA_FUNCTIONS = ("Input", "Action", "Session", "User", "Output", "HttpMethod", "RandomFilePath", "RandomValue")
# data functions whose index selects an item of a pooled input type
POOL_DESIGNATORS = ("Input", "Action", "Session", "User")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-")


@dataclass(frozen=True)
class Pos:
    line: int = 0
    col: int = 0


def _pos() -> Pos:
    return field(default=Pos(), compare=False, repr=False)


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class StringLit:
    value: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = _pos()


@dataclass(frozen=True)
class VarRef:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    """A Web-specific (library) function call."""

    name: str
    args: tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class MetamorphicOp:
    op: str
    args: tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class DataFn:
    name: str
    args: tuple["Expr", ...]
    pos: Pos = _pos()

    @property
    def designator(self) -> tuple[str, int] | None:
        """``(name, index)`` for pooled designators with a literal index, else None."""
        if self.name in POOL_DESIGNATORS and len(self.args) == 1 and isinstance(self.args[0], IntLit):
            return (self.name, self.args[0].value)
        return None


@dataclass(frozen=True)
class Compare:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Arith:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class RangeExpr:
    """Inclusive integer range ``lo..hi``."""

    lo: "Expr"
    hi: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class FieldAccess:
    target: "Expr"
    name: str
    pos: Pos = _pos()


Expr = Union[IntLit, StringLit, BoolLit, VarRef, Call, MetamorphicOp, DataFn, Compare, Arith, RangeExpr, FieldAccess]


@dataclass(frozen=True)
class ForLoop:
    var: str
    iterable: Expr
    body: tuple["Statement", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class VarDecl:
    name: str
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    pos: Pos = _pos()


Statement = Union[ForLoop, VarDecl, ExprStmt]


@dataclass(frozen=True)
class RelationAst:
    package: str
    imports: tuple[str, ...]
    name: str
    body: tuple[Statement, ...]
    pos: Pos = _pos()

    @property
    def qualified_name(self) -> str:
        return f"{self.package}.{self.name}" if self.package else self.name


def walk(node):
    """Yield ``node`` and every expression/statement below it, depth first."""
    yield node
    if isinstance(node, RelationAst):
        for s in node.body:
            yield from walk(s)
    elif isinstance(node, ForLoop):
        yield from walk(node.iterable)
        for s in node.body:
            yield from walk(s)
    elif isinstance(node, VarDecl):
        yield from walk(node.expr)
    elif isinstance(node, ExprStmt):
        yield from walk(node.expr)
    elif isinstance(node, (Call, MetamorphicOp, DataFn)):
        for a in node.args:
            yield from walk(a)
    elif isinstance(node, (Compare, Arith)):
        yield from walk(node.lhs)
        yield from walk(node.rhs)
    elif isinstance(node, RangeExpr):
        yield from walk(node.lo)
        yield from walk(node.hi)
    elif isinstance(node, FieldAccess):
        yield from walk(node.target)
