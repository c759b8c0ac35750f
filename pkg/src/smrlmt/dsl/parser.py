"""Recursive-descent parser.

Grammar (EBNF)::

    file      = [ "package" dotted ";" ] { "import" dotted ";" } { relation } EOF
    relation  = "MR" IDENT block
    block     = "{" { statement } "}"
    statement = "for" "(" "var" IDENT ":" expr ")" ( block | statement )
              | "var" IDENT "=" expr ";"
              | block                       (* inlined into the enclosing body *)
              | expr ";"
    expr      = range
    range     = compare [ ".." compare ]
    compare   = arith [ ( "==" | "!=" | "<" | "<=" | ">" | ">=" ) arith ]
    arith     = postfix { ( "+" | "-" ) postfix }
    postfix   = primary { "." IDENT }
    primary   = INT | STRING | "true" | "false" | "(" expr ")"
              | IDENT "(" [ expr { "," expr } ] ")" | IDENT
"""

from __future__ import annotations

from .ast import (
    DATA_FUNCTIONS,
    METAMORPHIC_OPS,
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
    Pos,
    RangeExpr,
    RelationAst,
    StringLit,
    VarDecl,
    VarRef,
)
from .lexer import SmrlError, Token, tokenize

CMP_TOKENS = {"EQ": "==", "NE": "!=", "LT": "<", "LE": "<=", "GT": ">", "GE": ">="}


class ParseError(SmrlError):
    def __init__(self, message: str, line: int, col: int, expected: frozenset[str] = frozenset()):
        super().__init__(message, line, col)
        self.expected = expected


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *kinds: str) -> bool:
        return self.tok.kind in kinds

    def error(self, *expected: str) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.value)
        exp = " or ".join(sorted(expected))
        return ParseError(f"expected {exp}, found {found}", t.line, t.col, frozenset(expected))

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise self.error(kind)
        t = self.tok
        self.i += 1
        return t

    def dotted(self) -> str:
        parts = [self.expect("IDENT").value]
        while self.at("DOT"):
            self.i += 1
            parts.append(self.expect("IDENT").value)
        return ".".join(parts)

    def file(self) -> list[RelationAst]:
        package = ""
        if self.at("PACKAGE"):
            self.i += 1
            package = self.dotted()
            self.expect("SEMI")
        imports = []
        while self.at("IMPORT"):
            self.i += 1
            imports.append(self.dotted())
            self.expect("SEMI")
        rels = []
        while not self.at("EOF"):
            if not self.at("MR"):
                raise self.error("MR", "EOF") if rels or imports or package else self.error("MR", "PACKAGE", "IMPORT", "EOF")
            t = self.expect("MR")
            name = self.expect("IDENT").value
            body = self.block()
            rels.append(RelationAst(package, tuple(imports), name, body, Pos(t.line, t.col)))
        return rels

    def block(self) -> tuple:
        self.expect("LBRACE")
        body = []
        while not self.at("RBRACE"):
            if self.at("EOF"):
                raise self.error("RBRACE")
            body.extend(self.statement())
        self.expect("RBRACE")
        return tuple(body)

    def statement(self) -> list:
        t = self.tok
        if t.kind == "FOR":
            self.i += 1
            self.expect("LPAREN")
            self.expect("VAR")
            var = self.expect("IDENT").value
            self.expect("COLON")
            it = self.expr()
            self.expect("RPAREN")
            body = self.block() if self.at("LBRACE") else tuple(self.statement())
            return [ForLoop(var, it, body, Pos(t.line, t.col))]
        if t.kind == "VAR":
            self.i += 1
            name = self.expect("IDENT").value
            self.expect("ASSIGN")
            e = self.expr()
            self.expect("SEMI")
            return [VarDecl(name, e, Pos(t.line, t.col))]
        if t.kind == "LBRACE":
            return list(self.block())
        e = self.expr()
        self.expect("SEMI")
        return [ExprStmt(e, Pos(t.line, t.col))]

    def expr(self):
        lo = self.compare()
        if self.at("DOTDOT"):
            t = self.tok
            self.i += 1
            hi = self.compare()
            return RangeExpr(lo, hi, Pos(t.line, t.col))
        return lo

    def compare(self):
        lhs = self.arith()
        if self.tok.kind in CMP_TOKENS:
            t = self.tok
            self.i += 1
            rhs = self.arith()
            return Compare(CMP_TOKENS[t.kind], lhs, rhs, Pos(t.line, t.col))
        return lhs

    def arith(self):
        lhs = self.postfix()
        while self.at("PLUS", "MINUS"):
            t = self.tok
            self.i += 1
            rhs = self.postfix()
            lhs = Arith(t.value, lhs, rhs, Pos(t.line, t.col))
        return lhs

    def postfix(self):
        e = self.primary()
        while self.at("DOT"):
            self.i += 1
            t = self.expect("IDENT")
            e = FieldAccess(e, t.value, Pos(t.line, t.col))
        return e

    def primary(self):
        t = self.tok
        pos = Pos(t.line, t.col)
        if t.kind == "INT":
            self.i += 1
            return IntLit(t.value, pos)
        if t.kind == "STRING":
            self.i += 1
            return StringLit(t.value, pos)
        if t.kind in ("TRUE", "FALSE"):
            self.i += 1
            return BoolLit(t.kind == "TRUE", pos)
        if t.kind == "LPAREN":
            self.i += 1
            e = self.expr()
            self.expect("RPAREN")
            return e
        if t.kind == "IDENT":
            self.i += 1
            if not self.at("LPAREN"):
                return VarRef(t.value, pos)
            args = self.args()
            if t.value in METAMORPHIC_OPS:
                return MetamorphicOp(t.value, args, pos)
            if t.value in DATA_FUNCTIONS:
                return DataFn(t.value, args, pos)
            return Call(t.value, args, pos)
        raise self.error("INT", "STRING", "IDENT", "LPAREN", "TRUE", "FALSE")

    def args(self) -> tuple:
        self.expect("LPAREN")
        out = []
        if not self.at("RPAREN"):
            out.append(self.expr())
            while self.at("COMMA"):
                self.i += 1
                out.append(self.expr())
        self.expect("RPAREN")
        return tuple(out)


def parse(tokens: list[Token]) -> list[RelationAst]:
    """Parse a token stream into one RelationAst per ``MR`` block."""
    return _Parser(tokens).file()


def parse_source(source: str) -> list[RelationAst]:
    return parse(tokenize(source))
