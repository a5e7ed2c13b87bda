"""Tokenizer for the host subset, including embedded-segment extraction.

Embedded stream expressions sit between the exact byte sequences ``/@``
and ``@/``; an optional dialect tag follows the opener as ``#TAG``.  The
text in between is captured verbatim into a single SEGMENT token and
never touches the host grammar.  Nesting is not a thing: a second ``/@``
before the closer is an error, a missing closer is an error.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import CompileError

KEYWORDS = {
    "class", "extends", "implements", "public", "private", "protected", "static",
    "void", "int", "long", "double", "float", "boolean",
    "new", "return", "if", "else", "for", "null", "true", "false", "this",
}

_TWO_CHAR = {"&&", "||", "==", "!=", "<=", ">="}
_ONE_CHAR = set("+-*/%<>!=.,;:()[]{}")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    start: int
    end: int
    payload: object = None  # (tag, text, text_line, text_col) for SEGMENT

    def __repr__(self):
        return "Token(%s, %r)" % (self.kind, self.text)


def tokenize(source: str, filename: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(source)
    line, col = 1, 1

    def bump(text):
        nonlocal line, col
        for c in text:
            if c == "\n":
                line += 1
                col = 1
            else:
                col += 1

    while i < n:
        c = source[i]
        if c in " \t\r\n":
            bump(c)
            i += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            j = n if j < 0 else j
            bump(source[i:j])
            i = j
            continue
        start_line, start_col, start = line, col, i
        if source.startswith("/@", i):
            close = source.find("@/", i + 2)
            if close < 0:
                raise CompileError("unterminated Lucid segment", start_line, start_col, filename)
            inner = source[i + 2 : close]
            if "/@" in inner:
                raise CompileError(
                    "nested Lucid segment opener '/@'", start_line, start_col, filename
                )
            tag = ""
            body = inner
            consumed = 2
            if body.startswith("#"):
                j = 1
                while j < len(body) and (body[j].isalnum() or body[j] == "_"):
                    j += 1
                tag = body[1:j]
                body = body[j:]
                consumed += j
            bump(source[i : i + consumed])
            text_line, text_col = line, col
            bump(source[i + consumed : close + 2])
            tokens.append(
                Token(
                    "SEGMENT",
                    source[start : close + 2],
                    start_line,
                    start_col,
                    start,
                    close + 2,
                    payload=(tag, body, text_line, text_col),
                )
            )
            i = close + 2
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = word if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, start_line, start_col, start, j))
            bump(word)
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                tokens.append(Token("DOUBLE", source[i:j], start_line, start_col, start, j))
            else:
                tokens.append(Token("INT", source[i:j], start_line, start_col, start, j))
            bump(source[i:j])
            i = j
            continue
        if c == '"':
            j = i + 1
            out = []
            while j < n and source[j] != '"':
                if source[j] == "\\" and j + 1 < n:
                    esc = source[j + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    j += 2
                elif source[j] == "\n":
                    raise CompileError("unterminated string literal", start_line, start_col, filename)
                else:
                    out.append(source[j])
                    j += 1
            if j >= n:
                raise CompileError("unterminated string literal", start_line, start_col, filename)
            tokens.append(
                Token("STRING", "".join(out), start_line, start_col, start, j + 1)
            )
            bump(source[i : j + 1])
            i = j + 1
            continue
        two = source[i : i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token(two, two, start_line, start_col, start, i + 2))
            bump(two)
            i += 2
            continue
        if c in _ONE_CHAR:
            tokens.append(Token(c, c, start_line, start_col, start, i + 1))
            bump(c)
            i += 1
            continue
        raise CompileError("unexpected character %r" % c, line, col, filename)
    tokens.append(Token("EOF", "", line, col, n, n))
    return tokens
