"""Front-end for the metamorphic relation language: tokenize, parse, check, print."""

from .ast import RelationAst
from .checker import CheckFailed, SemError, check, check_all, diagnose
from .lexer import LexError, SmrlError, Token, tokenize
from .parser import ParseError, parse, parse_source
from .printer import format_expr, format_relation


def load_relations(source: str) -> list[RelationAst]:
    """Tokenize, parse and check ``source``; raise on the first failing stage."""
    rels = parse(tokenize(source))
    errors = check_all(rels)
    if errors:
        raise CheckFailed(errors)
    return rels


__all__ = [
    "CheckFailed",
    "LexError",
    "ParseError",
    "RelationAst",
    "SemError",
    "SmrlError",
    "Token",
    "check",
    "check_all",
    "diagnose",
    "format_expr",
    "format_relation",
    "load_relations",
    "parse",
    "parse_source",
    "tokenize",
]
