"""Tokenizer for stream expressions."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import CompileError

KEYWORDS = {
    "if", "then", "else", "fi", "where", "end", "dimension",
    "first", "next", "fby", "wvr", "upon", "asa", "true", "false",
}

_TWO_CHAR = {"&&", "||", "==", "!=", "<=", ">="}
_ONE_CHAR = set("+-*/%<>!#@.,;:()[]=")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, DOUBLE, STRING, keyword or operator lexeme, EOF
    text: str
    line: int
    col: int

    def __repr__(self):
        return "Token(%s, %r)" % (self.kind, self.text)


def tokenize(source: str, filename: str | None = None, line: int = 1, col: int = 1):
    """Token list for `source`, raising on anything unlexable.

    `line`/`col` seed the position counters so diagnostics for embedded
    segments point into the enclosing file.
    """
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = word if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n - 0 and source[j : j + 1] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                tokens.append(Token("DOUBLE", source[i:j], start_line, start_col))
            else:
                tokens.append(Token("INT", source[i:j], start_line, start_col))
            col += j - i
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
            tokens.append(Token("STRING", "".join(out), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if source[i : i + 2] in _TWO_CHAR:
            tokens.append(Token(source[i : i + 2], source[i : i + 2], start_line, start_col))
            i += 2
            col += 2
            continue
        if c in _ONE_CHAR:
            tokens.append(Token(c, c, start_line, start_col))
            i += 1
            col += 1
            continue
        raise CompileError("unexpected character %r" % c, line, col, filename)
    tokens.append(Token("EOF", "", line, col))
    return tokens
