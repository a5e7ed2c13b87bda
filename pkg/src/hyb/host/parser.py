"""Recursive-descent parser for the host subset.

The subset is the smallest closed language that runs the example corpus:
classes with fields, methods, constructors, and static blocks; types
int/long/double/float/boolean/String, one-dimensional arrays, and class
types; statements: local declaration, assignment, if, for, return, and
expression statements; `print`/`println` are ordinary calls resolved as
builtins.  Embedded segments arrive from the lexer as single tokens and
may stand wherever an expression term may: field initialisers and
expression positions.
"""

from __future__ import annotations

from ..errors import CompileError
from . import ast
from .lexer import Token, tokenize

_BUILTIN_TYPES = {"int", "long", "double", "float", "boolean"}
_MODIFIERS = {"public", "private", "protected", "static"}


class HostParser:
    def __init__(self, tokens: list[Token], source: str, filename=None):
        self.tokens = tokens
        self.pos = 0
        self.source = source
        self.filename = filename
        self.segment_count = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset=1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def accept(self, kind) -> Token | None:
        if self.tok.kind == kind:
            return self.advance()
        return None

    def expect(self, *kinds) -> Token:
        if self.tok.kind in kinds:
            return self.advance()
        raise CompileError(
            "expected %s, found %r"
            % (", ".join(repr(k) for k in kinds), self.tok.text or "end of input"),
            self.tok.line,
            self.tok.col,
            self.filename,
        )

    def error(self, message):
        raise CompileError(message, self.tok.line, self.tok.col, self.filename)

    def _pos(self, tok: Token) -> dict:
        return {"line": tok.line, "col": tok.col, "start": tok.start}

    def _close(self, node: ast.HNode, end_tok: Token | None = None) -> ast.HNode:
        prev = self.tokens[self.pos - 1] if self.pos else self.tokens[0]
        node.end = (end_tok or prev).end
        return node

    # -- unit -------------------------------------------------------------------

    def parse_unit(self) -> ast.Unit:
        first = self.tok
        decls = []
        while self.tok.kind != "EOF":
            decls.append(self.top_level())
        unit = ast.Unit(decls=decls, source=self.source, filename=self.filename, **self._pos(first))
        return self._close(unit)

    def top_level(self):
        mods = self.modifiers()
        if self.tok.kind == "class":
            return self.class_decl(mods)
        # a free function: type name ( params ) block
        rtype = self.type_name(allow_void=True)
        name = self.expect("IDENT")
        self.expect("(")
        params = self.params()
        body = self.block()
        fn = ast.FreeFun(return_type=rtype, name=name.text, params=params, body=body,
                         **self._pos(name))
        return self._close(fn)

    def modifiers(self) -> list[str]:
        mods = []
        while self.tok.kind in _MODIFIERS:
            mods.append(self.advance().kind)
        return mods

    def class_decl(self, mods) -> ast.ClassDecl:
        start = self.expect("class")
        name = self.expect("IDENT").text
        parent = None
        interfaces = []
        if self.accept("extends"):
            parent = self.expect("IDENT").text
        if self.accept("implements"):
            interfaces.append(self.expect("IDENT").text)
            while self.accept(","):
                interfaces.append(self.expect("IDENT").text)
        open_brace = self.expect("{")
        members = []
        while self.tok.kind != "}":
            if self.tok.kind == "EOF":
                self.error("expected '}' to close class %s" % name)
            members.append(self.class_member(name))
        close_brace = self.expect("}")
        node = ast.ClassDecl(
            name=name,
            parent=parent,
            interfaces=interfaces,
            members=members,
            modifiers=mods,
            body_start=open_brace.end,
            body_end=close_brace.start,
            **self._pos(start),
        )
        return self._close(node, close_brace)

    def class_member(self, class_name: str):
        start = self.tok
        mods = self.modifiers()
        if "static" in mods and self.tok.kind == "{":
            body = self.block()
            node = ast.StaticBlock(body=body, **self._pos(start))
            return self._close(node)
        if self.tok.kind == "IDENT" and self.tok.text == class_name and self.peek().kind == "(":
            name = self.advance()
            self.expect("(")
            params = self.params()
            body = self.block()
            node = ast.MethodDecl(
                modifiers=mods, return_type=None, name=name.text, params=params,
                body=body, is_ctor=True, **self._pos(start if mods else name),
            )
            node.start = start.start
            return self._close(node)
        if self.tok.kind == "void":
            self.advance()
            rtype = None
            name = self.expect("IDENT")
            self.expect("(")
            params = self.params()
            body = self.block()
            node = ast.MethodDecl(
                modifiers=mods, return_type=ast.HType("void"), name=name.text,
                params=params, body=body, **self._pos(start),
            )
            node.start = start.start
            return self._close(node)
        ftype = self.type_name()
        name = self.expect("IDENT")
        if self.accept("("):
            params = self.params()
            body = self.block()
            node = ast.MethodDecl(
                modifiers=mods, return_type=ftype, name=name.text, params=params,
                body=body, **self._pos(start),
            )
            node.start = start.start
            return self._close(node)
        init = None
        if self.accept("="):
            init = self.segment_or_expr()
        semi = self.expect(";")
        node = ast.FieldDecl(modifiers=mods, type=ftype, name=name.text, init=init,
                             **self._pos(start))
        node.start = start.start
        return self._close(node, semi)

    def type_name(self, allow_void=False) -> ast.HType:
        t = self.tok
        if t.kind in _BUILTIN_TYPES or t.kind == "IDENT":
            self.advance()
            name = t.text
        elif allow_void and t.kind == "void":
            self.advance()
            name = "void"
        else:
            self.error("expected a type, found %r" % (t.text or "end of input"))
        is_array = False
        if self.tok.kind == "[" and self.peek().kind == "]":
            self.advance()
            self.advance()
            is_array = True
        return ast.HType(name, is_array)

    def params(self) -> list:
        params = []
        if self.accept(")"):
            return params
        while True:
            ptype = self.type_name()
            pname = self.expect("IDENT").text
            params.append((ptype, pname))
            if not self.accept(","):
                break
        self.expect(")")
        return params

    # -- statements ----------------------------------------------------------------

    def block(self) -> ast.Block:
        start = self.expect("{")
        stmts = []
        while self.tok.kind != "}":
            if self.tok.kind == "EOF":
                self.error("expected '}'")
            stmts.append(self.statement())
        close = self.expect("}")
        node = ast.Block(stmts=stmts, **self._pos(start))
        return self._close(node, close)

    def statement(self):
        t = self.tok
        if t.kind == "{":
            return self.block()
        if t.kind == "if":
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.statement()
            orelse = None
            if self.accept("else"):
                orelse = self.statement()
            node = ast.IfStmt(cond=cond, then=then, orelse=orelse, **self._pos(t))
            return self._close(node)
        if t.kind == "for":
            self.advance()
            self.expect("(")
            init = None
            if not self.accept(";"):
                init = self.decl_or_assign(require_assign=False)
                self.expect(";")
            cond = None
            if self.tok.kind != ";":
                cond = self.expression()
            self.expect(";")
            update = None
            if self.tok.kind != ")":
                update = self.decl_or_assign(require_assign=True)
            self.expect(")")
            body = self.statement()
            node = ast.ForStmt(init=init, cond=cond, update=update, body=body, **self._pos(t))
            return self._close(node)
        if t.kind == "return":
            self.advance()
            expr = None
            if self.tok.kind != ";":
                expr = self.expression()
            semi = self.expect(";")
            node = ast.ReturnStmt(expr=expr, **self._pos(t))
            return self._close(node, semi)
        stmt = self.decl_or_assign(require_assign=False)
        semi = self.expect(";")
        return self._close(stmt, semi)

    def decl_or_assign(self, require_assign: bool):
        t = self.tok
        if self._looks_like_decl():
            dtype = self.type_name()
            name = self.expect("IDENT").text
            init = None
            if self.accept("="):
                init = self.segment_or_expr()
            node = ast.LocalDecl(type=dtype, name=name, init=init, **self._pos(t))
            return self._close(node)
        expr = self.segment_or_expr()
        if self.accept("="):
            if not isinstance(expr, (ast.HName, ast.HField, ast.HIndex)):
                self.error("cannot assign to this expression")
            value = self.segment_or_expr()
            node = ast.Assign(target=expr, expr=value, **self._pos(t))
            return self._close(node)
        if require_assign:
            self.error("expected an assignment")
        node = ast.ExprStmt(expr=expr, **self._pos(t))
        return self._close(node)

    def _looks_like_decl(self) -> bool:
        t = self.tok
        if t.kind in _BUILTIN_TYPES:
            return True
        if t.kind != "IDENT":
            return False
        nxt = self.peek()
        if nxt.kind == "IDENT":
            return True
        return nxt.kind == "[" and self.peek(2).kind == "]" and self.peek(3).kind == "IDENT"

    # -- expressions --------------------------------------------------------------

    def segment_or_expr(self):
        return self.expression()

    def expression(self):
        return self.or_level()

    def _binary(self, ops, sub):
        expr = sub()
        while self.tok.kind in ops:
            op = self.advance()
            expr = ast.HBin(op=op.kind, left=expr, right=sub(), **self._pos(op))
            expr.start = expr.left.start
            self._close(expr)
        return expr

    def or_level(self):
        return self._binary({"||"}, self.and_level)

    def and_level(self):
        return self._binary({"&&"}, self.eq_level)

    def eq_level(self):
        return self._binary({"==", "!="}, self.rel_level)

    def rel_level(self):
        return self._binary({"<", "<=", ">", ">="}, self.add_level)

    def add_level(self):
        return self._binary({"+", "-"}, self.mul_level)

    def mul_level(self):
        return self._binary({"*", "/", "%"}, self.unary)

    def unary(self):
        t = self.tok
        if t.kind in ("-", "!"):
            self.advance()
            node = ast.HUn(op=t.kind, operand=self.unary(), **self._pos(t))
            return self._close(node)
        return self.postfix()

    def postfix(self):
        expr = self.primary()
        while True:
            t = self.tok
            if t.kind == ".":
                self.advance()
                name = self.expect("IDENT").text
                if self.accept("("):
                    args = self.args()
                    expr2 = ast.HMethod(obj=expr, name=name, args=args, **self._pos(t))
                else:
                    expr2 = ast.HField(obj=expr, name=name, **self._pos(t))
                expr2.start = expr.start
                expr = self._close(expr2)
            elif t.kind == "[":
                self.advance()
                index = self.expression()
                close = self.expect("]")
                expr2 = ast.HIndex(obj=expr, index=index, **self._pos(t))
                expr2.start = expr.start
                expr = self._close(expr2, close)
            else:
                return expr

    def args(self) -> list:
        out = []
        if self.accept(")"):
            return out
        while True:
            out.append(self.expression())
            if not self.accept(","):
                break
        self.expect(")")
        return out

    def primary(self):
        t = self.tok
        if t.kind == "SEGMENT":
            self.advance()
            tag, text, tline, tcol = t.payload
            self.segment_count += 1
            node = ast.Segment(
                index=self.segment_count, tag=tag, text=text, text_line=tline, text_col=tcol,
                **self._pos(t),
            )
            return self._close(node, t)
        if t.kind == "INT":
            self.advance()
            return self._close(ast.HLit(value=int(t.text), kind="int", **self._pos(t)), t)
        if t.kind == "DOUBLE":
            self.advance()
            return self._close(ast.HLit(value=float(t.text), kind="double", **self._pos(t)), t)
        if t.kind == "STRING":
            self.advance()
            return self._close(ast.HLit(value=t.text, kind="String", **self._pos(t)), t)
        if t.kind in ("true", "false"):
            self.advance()
            return self._close(
                ast.HLit(value=t.kind == "true", kind="boolean", **self._pos(t)), t
            )
        if t.kind == "null":
            self.advance()
            return self._close(ast.HLit(value=None, kind="null", **self._pos(t)), t)
        if t.kind == "this":
            self.advance()
            return self._close(ast.HThis(**self._pos(t)), t)
        if t.kind == "new":
            self.advance()
            ntype = self.type_name()
            if ntype.is_array:
                self.expect("{")
                items = []
                if self.tok.kind != "}":
                    while True:
                        items.append(self.expression())
                        if not self.accept(","):
                            break
                close = self.expect("}")
                node = ast.HNewArray(
                    elem_type=ast.HType(ntype.name), items=items, **self._pos(t)
                )
                return self._close(node, close)
            self.expect("(")
            args = self.args()
            node = ast.HNew(class_name=ntype.name, args=args, **self._pos(t))
            return self._close(node)
        if t.kind == "IDENT":
            self.advance()
            if self.accept("("):
                args = self.args()
                node = ast.HCall(name=t.text, args=args, **self._pos(t))
                return self._close(node)
            return self._close(ast.HName(name=t.text, **self._pos(t)), t)
        if t.kind == "(":
            self.advance()
            expr = self.expression()
            self.expect(")")
            return expr
        self.error("expected an expression, found %r" % (t.text or "end of input"))


def parse_host(source: str, filename: str | None = None) -> ast.Unit:
    """Parse a hybrid compilation unit, extracting embedded segments."""
    tokens = tokenize(source, filename)
    return HostParser(tokens, source, filename).parse_unit()
