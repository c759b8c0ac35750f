"""Static semantics: name resolution, arity and argument kinds."""

from __future__ import annotations

from typing import Iterable, Optional

from .ast import (
    POOL_DESIGNATORS,
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
from .lexer import SmrlError
from .signatures import (
    DATA_SIGNATURES,
    OP_ARITY,
    RANDOM_VALUE_TYPES,
    WEB_SIGNATURES,
    accessor_kind,
    compatible,
)


class SemError(SmrlError):
    pass


class CheckFailed(SmrlError):
    """Raised by :func:`check`; ``errors`` holds every diagnostic found."""

    def __init__(self, errors: list[SemError]):
        first = errors[0]
        super().__init__(first.message, first.line, first.col)
        self.errors = errors


class _Scope:
    def __init__(self, parent: Optional["_Scope"] = None):
        self.parent = parent
        self.names: dict[str, tuple[str, Optional[DataFn]]] = {}

    def lookup(self, name: str):
        s = self
        while s is not None:
            if name in s.names:
                return s.names[name]
            s = s.parent
        return None


class _Checker:
    def __init__(self, functions: dict | None = None):
        self.errors: list[SemError] = []
        self.functions = WEB_SIGNATURES if functions is None else functions

    def err(self, node, msg: str) -> None:
        self.errors.append(SemError(msg, node.pos.line, node.pos.col))

    def body(self, stmts, scope: _Scope) -> None:
        for s in stmts:
            if isinstance(s, ForLoop):
                k = self.expr(s.iterable, scope)
                if k.startswith("list:"):
                    elem = k[5:]
                elif k == "any":
                    elem = "any"
                else:
                    self.err(s.iterable, f"cannot iterate over a value of kind {k}")
                    elem = "any"
                inner = _Scope(scope)
                inner.names[s.var] = (elem, None)
                self.body(s.body, inner)
            elif isinstance(s, VarDecl):
                k = self.expr(s.expr, scope)
                if s.name in scope.names:
                    self.err(s, f"variable {s.name} already declared")
                alias = s.expr if isinstance(s.expr, DataFn) else None
                if isinstance(s.expr, VarRef):
                    found = scope.lookup(s.expr.name)
                    alias = found[1] if found else None
                scope.names[s.name] = (k, alias)
            elif isinstance(s, ExprStmt):
                k = self.expr(s.expr, scope)
                if not compatible(k, "bool"):
                    self.err(s, f"a metamorphic expression must be boolean, not {k}")

    def expect(self, node, scope: _Scope, kind: str, what: str) -> str:
        k = self.expr(node, scope)
        if not compatible(k, kind):
            self.err(node, f"{what} expects {kind}, got {k}")
        return k

    def expr(self, e, scope: _Scope) -> str:
        if isinstance(e, IntLit):
            return "int"
        if isinstance(e, StringLit):
            return "string"
        if isinstance(e, BoolLit):
            return "bool"
        if isinstance(e, VarRef):
            found = scope.lookup(e.name)
            if found is None:
                self.err(e, f"unresolved variable {e.name}")
                return "any"
            return found[0]
        if isinstance(e, MetamorphicOp):
            return self.metamorphic(e, scope)
        if isinstance(e, DataFn):
            return self.data_fn(e, scope)
        if isinstance(e, Call):
            if e.name not in self.functions:
                self.err(e, f"unresolved function {e.name}")
                for a in e.args:
                    self.expr(a, scope)
                return "any"
            return self.overload(e, e.name, self.functions[e.name], scope)
        if isinstance(e, Compare):
            lk, rk = self.expr(e.lhs, scope), self.expr(e.rhs, scope)
            if e.op not in ("==", "!="):
                for node, k in ((e.lhs, lk), (e.rhs, rk)):
                    if not compatible(k, "int"):
                        self.err(node, f"operator {e.op} expects int, got {k}")
            return "bool"
        if isinstance(e, Arith):
            self.expect(e.lhs, scope, "int", f"operator {e.op}")
            self.expect(e.rhs, scope, "int", f"operator {e.op}")
            return "int"
        if isinstance(e, RangeExpr):
            self.expect(e.lo, scope, "int", "range")
            self.expect(e.hi, scope, "int", "range")
            return "list:int"
        if isinstance(e, FieldAccess):
            tk = self.expr(e.target, scope)
            if tk == "any":
                return "any"
            k = accessor_kind(tk, e.name)
            if k is None:
                self.err(e, f"no field {e.name} on {tk}")
                return "any"
            return k
        raise TypeError(f"unknown node {e!r}")

    def metamorphic(self, e: MetamorphicOp, scope: _Scope) -> str:
        lo, hi = OP_ARITY[e.op]
        n = len(e.args)
        if n < lo or (hi is not None and n > hi):
            want = f"{lo}" if lo == hi else f"at least {lo}"
            self.err(e, f"{e.op} takes {want} argument(s), got {n}")
        if e.op == "EQUAL":
            if n >= 1:
                target = self.equal_target(e.args[0], scope)
                if target is None:
                    self.err(e.args[0], "EQUAL target must be an input designator")
            kinds = [self.expr(a, scope) for a in e.args]
            if len(kinds) == 2 and not compatible(*kinds):
                self.err(e, f"EQUAL operands differ in kind: {kinds[0]} and {kinds[1]}")
        else:
            for a in e.args:
                self.expect(a, scope, "bool", e.op)
        return "bool"

    def equal_target(self, a, scope: _Scope) -> Optional[DataFn]:
        if isinstance(a, DataFn):
            return a
        if isinstance(a, VarRef):
            found = scope.lookup(a.name)
            return found[1] if found else None
        return None

    def data_fn(self, e: DataFn, scope: _Scope) -> str:
        if e.name in POOL_DESIGNATORS and len(e.args) == 1:
            idx = e.args[0]
            if not isinstance(idx, IntLit):
                self.expect(idx, scope, "int", e.name)
                self.err(idx, f"index of {e.name} must be an integer literal")
                return DATA_SIGNATURES[e.name][0][1]
            if idx.value < 1:
                self.err(idx, f"index of {e.name} must be positive")
        if e.name == "RandomValue" and len(e.args) == 1 and isinstance(e.args[0], StringLit):
            if e.args[0].value not in RANDOM_VALUE_TYPES:
                self.err(e.args[0], f"RandomValue supports {', '.join(RANDOM_VALUE_TYPES)}")
        return self.overload(e, e.name, DATA_SIGNATURES[e.name], scope)

    def overload(self, e, name: str, sigs, scope: _Scope) -> str:
        kinds = [self.expr(a, scope) for a in e.args]
        arities = sorted({len(p) for p, _ in sigs})
        if len(kinds) not in arities:
            self.err(e, f"{name} takes {' or '.join(map(str, arities))} argument(s), got {len(kinds)}")
            return sigs[0][1]
        candidates = [(p, r) for p, r in sigs if len(p) == len(kinds)]
        for params, ret in candidates:
            if all(compatible(k, p) for k, p in zip(kinds, params)):
                return ret
        params = candidates[0][0]
        for a, k, p in zip(e.args, kinds, params):
            if not compatible(k, p):
                self.err(a, f"{name} expects {p}, got {k}")
                break
        return candidates[0][1]


def diagnose(ast: RelationAst, functions: dict | None = None) -> list[SemError]:
    c = _Checker(functions)
    c.body(ast.body, _Scope())
    return sorted(c.errors, key=lambda x: (x.line, x.col))


def check(ast: RelationAst, functions: dict | None = None) -> RelationAst:
    """Validate ``ast``; raise :class:`CheckFailed` listing every problem."""
    errors = diagnose(ast, functions)
    if errors:
        raise CheckFailed(errors)
    return ast


def check_all(asts: Iterable[RelationAst], functions: dict | None = None) -> list[SemError]:
    """Diagnose a compilation set, including duplicate qualified names."""
    errors: list[SemError] = []
    seen: dict[str, RelationAst] = {}
    for a in asts:
        if a.qualified_name in seen:
            errors.append(SemError(f"duplicate relation {a.qualified_name}", a.pos.line, a.pos.col))
        seen[a.qualified_name] = a
        errors.extend(diagnose(a, functions))
    return errors
