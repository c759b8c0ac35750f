"""Pretty-printer producing source that parses back to an equal tree."""

from __future__ import annotations

from .ast import (
    Arith,
    BoolLit,
    Call,
    Compare,
    DataFn,
    ExprStmt,
    FieldAccess,
    ForLoop,
    IntLit,
    MetamorphicOp,
    RangeExpr,
    RelationAst,
    StringLit,
    VarDecl,
    VarRef,
)

_PREC = {RangeExpr: 1, Compare: 2, Arith: 3}
_ESC = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r", "\0": "\\0"}


def _prec(e) -> int:
    return _PREC.get(type(e), 4)


def _wrap(e, min_prec: int) -> str:
    s = format_expr(e)
    return f"({s})" if _prec(e) < min_prec else s


def format_expr(e) -> str:
    if isinstance(e, IntLit):
        if e.value < 0:
            raise ValueError("negative literals have no concrete syntax")
        return str(e.value)
    if isinstance(e, StringLit):
        return '"' + "".join(_ESC.get(c, c) for c in e.value) + '"'
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, (Call, MetamorphicOp, DataFn)):
        name = e.op if isinstance(e, MetamorphicOp) else e.name
        return f"{name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, FieldAccess):
        return f"{_wrap(e.target, 4)}.{e.name}"
    if isinstance(e, Arith):
        return f"{_wrap(e.lhs, 3)} {e.op} {_wrap(e.rhs, 4)}"
    if isinstance(e, Compare):
        return f"{_wrap(e.lhs, 3)} {e.op} {_wrap(e.rhs, 3)}"
    if isinstance(e, RangeExpr):
        return f"{_wrap(e.lo, 2)}..{_wrap(e.hi, 2)}"
    raise TypeError(f"not an expression: {e!r}")


def _stmts(body, indent: int) -> list[str]:
    pad = "    " * indent
    out = []
    for s in body:
        if isinstance(s, ForLoop):
            out.append(f"{pad}for (var {s.var} : {format_expr(s.iterable)}) {{")
            out.extend(_stmts(s.body, indent + 1))
            out.append(f"{pad}}}")
        elif isinstance(s, VarDecl):
            out.append(f"{pad}var {s.name} = {format_expr(s.expr)};")
        elif isinstance(s, ExprStmt):
            out.append(f"{pad}{format_expr(s.expr)};")
        else:
            raise TypeError(f"not a statement: {s!r}")
    return out


def format_relation(rel: RelationAst, header: bool = True) -> str:
    lines = []
    if header:
        if rel.package:
            lines.append(f"package {rel.package};")
        lines.extend(f"import {i};" for i in rel.imports)
        if lines:
            lines.append("")
    lines.append(f"MR {rel.name} {{")
    lines.extend(_stmts(rel.body, 1))
    lines.append("}")
    return "\n".join(lines) + "\n"
