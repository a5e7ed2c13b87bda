"""Recursive-descent parser for stream expressions.

Operator precedence, loosest first:

    where
    wvr / upon / asa          (left associative)
    fby                       (right associative)
    if/then/else [fi]
    && ||
    comparisons
    + -
    * / %
    unary - !  #  first.d  next.d
    postfix  .id  .id(args)  @[d:E,...]  @.d E  (args)
    primary

The table-driven grammar never pins this down, so the order above is the
one under which every program in the test corpus parses with its evident
meaning.  `@` accepts both the bracket form `E @[d:E']` and the dotted
indexical form `E @.d E'` (sugar for a one-dimension bracket); a bare
dimension after `@` is accepted too.  The tag operand of the dotted form
binds at unary strength: `N @.d f - 1` is `(N @[d:f]) - 1`.
"""

from __future__ import annotations

from ..errors import CompileError
from . import ast
from .lexer import Token, tokenize

_STREAM_BINARY = {"wvr", "upon", "asa"}
_CMP_OPS = {"==", "!=", "<", "<=", ">", ">="}
_ADD_OPS = {"+", "-"}
_MUL_OPS = {"*", "/", "%"}
_BOOL_OPS = {"&&", "||"}


class Parser:
    def __init__(self, tokens: list[Token], filename: str | None = None):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename

    # -- token plumbing ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def accept(self, kind: str) -> Token | None:
        if self.tok.kind == kind:
            return self.advance()
        return None

    def expect(self, *kinds: str) -> Token:
        if self.tok.kind in kinds:
            return self.advance()
        expected = ", ".join(repr(k) for k in sorted(kinds))
        raise CompileError(
            "expected %s, found %r" % (expected, self.tok.text or "end of input"),
            self.tok.line,
            self.tok.col,
            self.filename,
        )

    def error(self, message: str):
        raise CompileError(message, self.tok.line, self.tok.col, self.filename)

    def _pos(self, tok: Token) -> dict:
        return {"line": tok.line, "col": tok.col}

    # -- grammar -----------------------------------------------------------

    def parse_expression(self) -> ast.Node:
        expr = self.where_level()
        if self.tok.kind != "EOF":
            self.error("unexpected %r after expression" % self.tok.text)
        return expr

    def where_level(self) -> ast.Node:
        expr = self.stream_level()
        while self.tok.kind == "where":
            start = self.advance()
            decls = []
            while self.tok.kind != "end":
                if self.tok.kind == "EOF":
                    self.error("expected 'end' to close where clause")
                decls.append(self.declaration())
            self.expect("end")
            expr = ast.Where(body=expr, decls=decls, **self._pos(start))
        return expr

    def stream_level(self) -> ast.Node:
        expr = self.fby_level()
        while self.tok.kind in _STREAM_BINARY:
            op = self.advance()
            dim = self.op_dimension()
            right = self.fby_level()
            expr = ast.StreamOp(op=op.kind, dim=dim, x=expr, y=right, **self._pos(op))
        return expr

    def fby_level(self) -> ast.Node:
        expr = self.cond_level()
        if self.tok.kind == "fby":
            op = self.advance()
            dim = self.op_dimension()
            right = self.fby_level()  # right associative
            expr = ast.StreamOp(op="fby", dim=dim, x=expr, y=right, **self._pos(op))
        return expr

    def cond_level(self) -> ast.Node:
        if self.tok.kind == "if":
            start = self.advance()
            cond = self.cond_level()
            self.expect("then")
            then = self.cond_level()
            self.expect("else")
            orelse = self.cond_level()
            self.accept("fi")
            return ast.If(cond=cond, then=then, orelse=orelse, **self._pos(start))
        return self.bool_level()

    def bool_level(self) -> ast.Node:
        expr = self.cmp_level()
        while self.tok.kind in _BOOL_OPS:
            op = self.advance()
            expr = ast.BinOp(op=op.kind, left=expr, right=self.cmp_level(), **self._pos(op))
        return expr

    def cmp_level(self) -> ast.Node:
        expr = self.add_level()
        while self.tok.kind in _CMP_OPS:
            op = self.advance()
            expr = ast.BinOp(op=op.kind, left=expr, right=self.add_level(), **self._pos(op))
        return expr

    def add_level(self) -> ast.Node:
        expr = self.mul_level()
        while self.tok.kind in _ADD_OPS:
            op = self.advance()
            expr = ast.BinOp(op=op.kind, left=expr, right=self.mul_level(), **self._pos(op))
        return expr

    def mul_level(self) -> ast.Node:
        expr = self.unary()
        while self.tok.kind in _MUL_OPS:
            op = self.advance()
            expr = ast.BinOp(op=op.kind, left=expr, right=self.unary(), **self._pos(op))
        return expr

    def unary(self) -> ast.Node:
        t = self.tok
        if t.kind in ("-", "!"):
            self.advance()
            return ast.UnOp(op=t.kind, operand=self.unary(), **self._pos(t))
        if t.kind == "#":
            self.advance()
            self.accept(".")
            return ast.TagQuery(dim=self.postfix(), **self._pos(t))
        if t.kind in ("first", "next"):
            self.advance()
            dim = self.op_dimension()
            return ast.StreamOp(op=t.kind, dim=dim, x=self.unary(), **self._pos(t))
        return self.postfix()

    # Stream-operator words double as perfectly good member names after a
    # dot (`statu.next()`): the prefix/infix readings never start with '.'.
    _MEMBER_WORDS = ("IDENT", "first", "next", "fby", "wvr", "upon", "asa")

    def postfix(self) -> ast.Node:
        expr = self.primary()
        while True:
            t = self.tok
            if t.kind == ".":
                self.advance()
                name = self.expect(*self._MEMBER_WORDS).text
                if self.accept("("):
                    args = self.call_args()
                    expr = ast.DotCall(obj=expr, name=name, args=args, **self._pos(t))
                else:
                    expr = ast.Dot(obj=expr, name=name, **self._pos(t))
            elif t.kind == "@":
                self.advance()
                expr = self.at_suffix(expr, t)
            elif t.kind == "(":
                self.advance()
                args = self.call_args()
                expr = ast.Call(callee=expr, args=args, **self._pos(t))
            else:
                return expr

    def at_suffix(self, body: ast.Node, at: Token) -> ast.Node:
        if self.tok.kind == "[":
            # `E @[d:E'][e:E'']` chains as nested rebindings.
            expr = body
            while self.accept("["):
                bindings = []
                while True:
                    dim = self.where_level()
                    self.expect(":")
                    tag = self.where_level()
                    bindings.append((dim, tag))
                    if not self.accept(","):
                        break
                self.expect("]")
                expr = ast.At(body=expr, bindings=bindings, **self._pos(at))
            return expr
        self.accept(".")
        dim_tok = self.expect("IDENT")
        dim = ast.Ident(name=dim_tok.text, **self._pos(dim_tok))
        tag = self.unary()
        return ast.At(body=body, bindings=[(dim, tag)], **self._pos(at))

    def call_args(self) -> list[ast.Node]:
        args: list[ast.Node] = []
        if self.accept(")"):
            return args
        while True:
            args.append(self.where_level())
            if not self.accept(","):
                break
        self.expect(")")
        return args

    def primary(self) -> ast.Node:
        t = self.tok
        if t.kind == "IDENT":
            self.advance()
            return ast.Ident(name=t.text, **self._pos(t))
        if t.kind == "INT":
            self.advance()
            return ast.Literal(value=int(t.text), kind="int", **self._pos(t))
        if t.kind == "DOUBLE":
            self.advance()
            return ast.Literal(value=float(t.text), kind="double", **self._pos(t))
        if t.kind == "STRING":
            self.advance()
            return ast.Literal(value=t.text, kind="string", **self._pos(t))
        if t.kind in ("true", "false"):
            self.advance()
            return ast.Literal(value=t.kind == "true", kind="bool", **self._pos(t))
        if t.kind == "(":
            self.advance()
            expr = self.where_level()
            self.expect(")")
            return expr
        self.error("expected an expression, found %r" % (t.text or "end of input"))

    def op_dimension(self) -> str:
        self.expect(".")
        return self.expect("IDENT").text

    # -- where declarations --------------------------------------------------

    def declaration(self) -> ast.Node:
        t = self.tok
        if t.kind == "dimension":
            self.advance()
            names = [self.expect("IDENT").text]
            while self.accept(","):
                names.append(self.expect("IDENT").text)
            self.expect(";")
            return ast.DimDecl(names=names, **self._pos(t))
        name = self.expect("IDENT")
        dim_params: list[str] = []
        while self.tok.kind == ".":
            self.advance()
            dim_params.append(self.expect("IDENT").text)
        if dim_params or self.tok.kind == "(":
            params: list[str] = []
            self.expect("(")
            if not self.accept(")"):
                while True:
                    params.append(self.expect("IDENT").text)
                    if not self.accept(","):
                        break
                self.expect(")")
            self.expect("=")
            expr = self.where_level()
            self.expect(";")
            return ast.FunDef(
                name=name.text, dim_params=dim_params, params=params, expr=expr, **self._pos(name)
            )
        self.expect("=")
        expr = self.where_level()
        self.expect(";")
        return ast.VarDef(name=name.text, expr=expr, **self._pos(name))


def parse(source: str, filename: str | None = None, line: int = 1, col: int = 1) -> ast.Node:
    """Parse one complete expression."""
    tokens = tokenize(source, filename, line, col)
    return Parser(tokens, filename).parse_expression()
