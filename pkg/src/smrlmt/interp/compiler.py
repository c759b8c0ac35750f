"""Compile a checked relation into nested Python closures and evaluate it.

A relation holds when every metamorphic expression, in every loop iteration,
evaluates to true; evaluation stops at the first false one. ``EQUAL`` binds an
input designator that has not been read yet and compares otherwise. Bindings
made while evaluating one metamorphic expression are dropped once that
expression has been evaluated, so the next iteration builds its follow-up
inputs afresh.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..dsl.ast import (
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
    walk,
)
from ..distance import DEFAULT_THRESHOLD
from ..model import InputSequence, OutputSequence, Page, Session, User
from .values import ActionRef, EvalError, ParamRef, action_refs, param_refs, values_equal

Designator = tuple[str, int]
# pool-backed types; Output is computed, not drawn from a pool
POOLED_TYPES = POOL_DESIGNATORS + ("HttpMethod", "RandomFilePath", "RandomValue")


@dataclass
class ExecutionContext:
    provider: Any
    executor: Any
    functions: dict[str, Callable]
    rng: random.Random
    page_eq_threshold: float = DEFAULT_THRESHOLD
    bindings: dict[Designator, Any] = field(default_factory=dict)
    used: dict[Designator, Any] = field(default_factory=dict)
    output_cache: dict[str, OutputSequence] = field(default_factory=dict)
    executions: int = 0
    # bindings alive when the relation failed, kept for the failure report
    failed_bindings: dict[Designator, Any] = field(default_factory=dict)

    def output_of(self, seq: InputSequence) -> OutputSequence:
        out = self.output_cache.get(seq.id)
        if out is None:
            out = self.executor.execute(seq, fresh_session=True)
            self.executions += 1
            self.output_cache[seq.id] = out
        return out

    def source_inputs(self) -> list[InputSequence]:
        return [v for k, v in sorted(self.used.items()) if k[0] == "Input"]

    def follow_up_inputs(self) -> list[InputSequence]:
        return [v for k, v in sorted(self.failed_bindings.items()) if isinstance(v, InputSequence)]


class _Frame:
    __slots__ = ("ctx", "vars")

    def __init__(self, ctx: ExecutionContext, vars: dict | None = None):
        self.ctx = ctx
        self.vars = vars if vars is not None else {}


def _truth(v, where: str) -> bool:
    if not isinstance(v, bool):
        raise EvalError(f"{where} needs a boolean, got {type(v).__name__}")
    return v


_ACCESS: dict[type, dict[str, Callable]] = {
    InputSequence: {
        "actions": action_refs,
        "length": len,
        "user": lambda s: s.user,
        "id": lambda s: s.id,
    },
    ActionRef: {
        "url": lambda r: r.action.url,
        "method": lambda r: r.action.method,
        "channel": lambda r: r.action.channel.value,
        "position": lambda r: r.position,
        "parameters": lambda r: param_refs(r.action),
        "user": lambda r: r.action.user,
        "session": lambda r: r.action.session,
    },
    ParamRef: {"name": lambda p: p.name, "value": lambda p: p.value, "position": lambda p: p.position},
    User: {
        "id": lambda u: u.id,
        "username": lambda u: u.username,
        "password": lambda u: u.password,
        "role": lambda u: u.role,
    },
    Session: {"id": lambda s: s.id},
    OutputSequence: {"pages": lambda o: list(o.pages), "length": len},
    Page: {
        "body": lambda p: p.text,
        "status": lambda p: p.status,
        "sessionId": lambda p: p.session_id,
        "url": lambda p: p.final_url,
    },
    list: {"length": len},
}


def _access(value, name: str):
    table = _ACCESS.get(type(value))
    if table is None or name not in table:
        raise EvalError(f"no field {name} on {type(value).__name__}")
    return table[name](value)


def _random_value(rng: random.Random, kind: str):
    if kind == "int":
        return rng.randrange(0, 2**31)
    if kind == "boolean":
        return rng.random() < 0.5
    if kind == "string":
        alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
        return "".join(rng.choice(alphabet) for _ in range(8))
    raise EvalError(f"RandomValue does not support {kind!r}")


class _Compiler:
    def __init__(self) -> None:
        self.aliases: list[dict[str, Optional[DataFn]]] = [{}]

    def alias_of(self, name: str) -> Optional[DataFn]:
        for scope in reversed(self.aliases):
            if name in scope:
                return scope[name]
        return None

    # statements return False when the relation must fail
    def stmts(self, body) -> Callable[[_Frame], bool]:
        compiled = [self.stmt(s) for s in body]

        def run(f: _Frame) -> bool:
            for c in compiled:
                if not c(f):
                    return False
            return True

        return run

    def stmt(self, s) -> Callable[[_Frame], bool]:
        if isinstance(s, ForLoop):
            it = self.expr(s.iterable)
            self.aliases.append({s.var: None})
            body = self.stmts(s.body)
            self.aliases.pop()
            var = s.var

            def loop(f: _Frame) -> bool:
                items = it(f)
                if not isinstance(items, list):
                    raise EvalError(f"cannot iterate over {type(items).__name__}")
                saved = f.vars.get(var, _MISSING)
                try:
                    for item in items:
                        f.vars[var] = item
                        if not body(f):
                            return False
                finally:
                    if saved is _MISSING:
                        f.vars.pop(var, None)
                    else:
                        f.vars[var] = saved
                return True

            return loop
        if isinstance(s, VarDecl):
            e = self.expr(s.expr)
            alias = s.expr if isinstance(s.expr, DataFn) else (
                self.alias_of(s.expr.name) if isinstance(s.expr, VarRef) else None
            )
            self.aliases[-1][s.name] = alias
            name = s.name
            if alias is not None and alias.designator is not None:
                # aliases of input designators resolve at use, so EQUAL can still bind them
                return lambda f: True

            def decl(f: _Frame) -> bool:
                f.vars[name] = e(f)
                return True

            return decl
        if isinstance(s, ExprStmt):
            e = self.expr(s.expr)

            def metamorphic(f: _Frame) -> bool:
                ctx = f.ctx
                before = set(ctx.bindings)
                ok = _truth(e(f), "a metamorphic expression")
                if not ok:
                    ctx.failed_bindings = dict(ctx.bindings)
                for k in set(ctx.bindings) - before:
                    del ctx.bindings[k]
                return ok

            return metamorphic
        raise TypeError(f"unknown statement {s!r}")

    def expr(self, e) -> Callable[[_Frame], Any]:
        if isinstance(e, (IntLit, StringLit, BoolLit)):
            v = e.value
            return lambda f: v
        if isinstance(e, VarRef):
            name = e.name
            alias = self.alias_of(name)
            if alias is not None and alias.designator is not None:
                return self.data_fn(alias)

            def ref(f: _Frame):
                try:
                    return f.vars[name]
                except KeyError:
                    raise EvalError(f"unbound variable {name}") from None

            return ref
        if isinstance(e, MetamorphicOp):
            return self.metamorphic_op(e)
        if isinstance(e, DataFn):
            return self.data_fn(e)
        if isinstance(e, Call):
            args = [self.expr(a) for a in e.args]
            name = e.name

            def call(f: _Frame):
                fn = f.ctx.functions.get(name)
                if fn is None:
                    raise EvalError(f"function {name} is not available")
                return fn(*[a(f) for a in args])

            return call
        if isinstance(e, Compare):
            lhs, rhs, op = self.expr(e.lhs), self.expr(e.rhs), e.op

            def cmp(f: _Frame):
                a, b = lhs(f), rhs(f)
                if op == "==":
                    return values_equal(a, b, f.ctx.page_eq_threshold)
                if op == "!=":
                    return not values_equal(a, b, f.ctx.page_eq_threshold)
                if not (isinstance(a, int) and isinstance(b, int)):
                    raise EvalError(f"operator {op} needs integers")
                return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]

            return cmp
        if isinstance(e, Arith):
            lhs, rhs, op = self.expr(e.lhs), self.expr(e.rhs), e.op

            def arith(f: _Frame):
                a, b = lhs(f), rhs(f)
                if not (isinstance(a, int) and isinstance(b, int)) or isinstance(a, bool) or isinstance(b, bool):
                    raise EvalError(f"operator {op} needs integers")
                return a + b if op == "+" else a - b

            return arith
        if isinstance(e, RangeExpr):
            lo, hi = self.expr(e.lo), self.expr(e.hi)
            return lambda f: list(range(lo(f), hi(f) + 1))
        if isinstance(e, FieldAccess):
            target, name = self.expr(e.target), e.name
            return lambda f: _access(target(f), name)
        raise TypeError(f"unknown expression {e!r}")

    def metamorphic_op(self, e: MetamorphicOp) -> Callable[[_Frame], Any]:
        op = e.op
        if op == "TRUE":
            return lambda f: True
        if op == "FALSE":
            return lambda f: False
        args = [self.expr(a) for a in e.args]
        if op == "NOT":
            (a,) = args
            return lambda f: not _truth(a(f), "NOT")
        if op == "IMPLIES":
            a, b = args

            def implies(f: _Frame) -> bool:
                if not _truth(a(f), "IMPLIES"):
                    return True
                return _truth(b(f), "IMPLIES")

            return implies
        if op == "AND":

            def conj(f: _Frame) -> bool:
                for a in args:
                    if not _truth(a(f), "AND"):
                        return False
                return True

            return conj
        if op == "OR":

            def disj(f: _Frame) -> bool:
                for a in args:
                    if _truth(a(f), "OR"):
                        return True
                return False

            return disj
        if op == "EQUAL":
            return self.equal(e, args)
        raise TypeError(f"unknown operator {op}")

    def equal(self, e: MetamorphicOp, args) -> Callable[[_Frame], bool]:
        target = e.args[0]
        if isinstance(target, VarRef):
            target = self.alias_of(target.name) or target
        key = target.designator if isinstance(target, DataFn) else None
        lhs, rhs = args

        def equal(f: _Frame) -> bool:
            ctx = f.ctx
            if key is not None and key not in ctx.bindings and key not in ctx.used:
                ctx.bindings[key] = rhs(f)
                return True
            return values_equal(lhs(f), rhs(f), ctx.page_eq_threshold)

        return equal

    def data_fn(self, e: DataFn) -> Callable[[_Frame], Any]:
        name = e.name
        if name in POOL_DESIGNATORS:
            key = e.designator
            if key is None:
                raise EvalError(f"{name} needs a literal index")

            def designator(f: _Frame):
                ctx = f.ctx
                if key in ctx.bindings:
                    return ctx.bindings[key]
                if key not in ctx.used:
                    ctx.used[key] = ctx.provider.item(key[0], key[1])
                return ctx.used[key]

            return designator
        args = [self.expr(a) for a in e.args]
        if name == "Output":

            def output(f: _Frame):
                seq = args[0](f)
                if not isinstance(seq, InputSequence):
                    raise EvalError(f"Output needs an input sequence, got {type(seq).__name__}")
                out = f.ctx.output_of(seq)
                if len(args) == 1:
                    return out
                n = args[1](f)
                if not isinstance(n, int) or not 1 <= n <= len(out):
                    raise EvalError(f"Output of {seq.id} has no page {n!r}")
                return out.page(n)

            return output
        if name in ("HttpMethod", "RandomFilePath"):
            return lambda f: f.ctx.provider.item(name, 1)
        if name == "RandomValue":
            kind = args[0]
            return lambda f: _random_value(f.ctx.rng, kind(f))
        raise TypeError(f"unknown data function {name}")


_MISSING = object()


def referenced_input_types(ast: RelationAst) -> dict[str, int]:
    """Pool-backed data functions used by ``ast`` with the highest index of each."""
    out: dict[str, int] = {}
    for node in walk(ast):
        if isinstance(node, DataFn) and node.name in POOLED_TYPES:
            idx = node.designator[1] if node.designator else 1
            out[node.name] = max(out.get(node.name, 0), idx)
    return out


@dataclass(frozen=True)
class CompiledRelation:
    name: str
    referenced_input_types: dict[str, int]
    body: Callable[[_Frame], bool]
    ast: RelationAst

    def eval(self, ctx: ExecutionContext) -> bool:
        return self.body(_Frame(ctx))

    def run(
        self,
        provider,
        executor,
        functions: dict[str, Callable],
        seed: int = 42,
        page_eq_threshold: float = DEFAULT_THRESHOLD,
    ) -> tuple[bool, ExecutionContext]:
        """One MR.run: fresh context over the provider's current view."""
        rng_seed = provider.rng_seed(seed) if hasattr(provider, "rng_seed") else seed
        ctx = ExecutionContext(provider, executor, functions, random.Random(rng_seed), page_eq_threshold)
        return self.eval(ctx), ctx


def compile_relation(ast: RelationAst) -> CompiledRelation:
    """Compile a checked relation. Unknown library functions fail at call time."""
    body = _Compiler().stmts(ast.body)
    return CompiledRelation(ast.qualified_name, referenced_input_types(ast), body, ast)

