"""Tokenizer for ``.smrl`` sources."""

from __future__ import annotations

from dataclasses import dataclass

KEYWORDS = {"package", "import", "MR", "for", "var", "true", "false"}

# longest first so that ``..`` wins over ``.`` and ``<=`` over ``<``
PUNCT = [
    ("..", "DOTDOT"),
    ("==", "EQ"),
    ("!=", "NE"),
    ("<=", "LE"),
    (">=", "GE"),
    ("<", "LT"),
    (">", "GT"),
    ("(", "LPAREN"),
    (")", "RPAREN"),
    ("{", "LBRACE"),
    ("}", "RBRACE"),
    (",", "COMMA"),
    (";", "SEMI"),
    (":", "COLON"),
    (".", "DOT"),
    ("=", "ASSIGN"),
    ("+", "PLUS"),
    ("-", "MINUS"),
]

ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\", "0": "\0"}


class SmrlError(Exception):
    """Base for every diagnostic the front-end raises. Positions are 1-based."""

    severity = "error"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.severity}: {self.message}"


class LexError(SmrlError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    line: int
    col: int

    def __repr__(self) -> str:
        if self.kind in ("IDENT", "INT", "STRING"):
            return f"{self.kind} {self.value!r}"
        return self.kind


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens, ending with an EOF token.

    Keywords get their upper-cased spelling as kind (``FOR``, ``VAR``...),
    except ``MR`` which is ``MR``. Comments are dropped.
    """
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for ch in source[i : i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = source[i]
        if ch in " \t\r\n\f":
            advance(1)
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            advance((j if j >= 0 else n) - i)
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                raise LexError("unterminated block comment", line, col)
            advance(j + 2 - i)
            continue

        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            if word in KEYWORDS:
                kind = "MR" if word == "MR" else word.upper()
                toks.append(Token(kind, word, start_line, start_col))
            else:
                toks.append(Token("IDENT", word, start_line, start_col))
            advance(j - i)
            continue
        if ch.isdigit():
            j = i + 1
            while j < n and source[j].isdigit():
                j += 1
            toks.append(Token("INT", int(source[i:j]), start_line, start_col))
            advance(j - i)
            continue
        if ch == '"':
            j = i + 1
            buf = []
            while True:
                if j >= n or source[j] == "\n":
                    raise LexError("unterminated string literal", start_line, start_col)
                c = source[j]
                if c == '"':
                    break
                if c == "\\":
                    if j + 1 >= n or source[j + 1] not in ESCAPES:
                        raise LexError("bad escape in string literal", start_line, start_col)
                    buf.append(ESCAPES[source[j + 1]])
                    j += 2
                    continue
                buf.append(c)
                j += 1
            toks.append(Token("STRING", "".join(buf), start_line, start_col))
            advance(j + 1 - i)
            continue
        for text, kind in PUNCT:
            if source.startswith(text, i):
                toks.append(Token(kind, text, start_line, start_col))
                advance(len(text))
                break
        else:
            raise LexError(f"illegal character {ch!r}", start_line, start_col)

    toks.append(Token("EOF", None, line, col))
    return toks
