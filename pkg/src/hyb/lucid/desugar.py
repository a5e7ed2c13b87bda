"""Rewrites the indexical stream operators into the core language.

    first.d X   =>  X @[d:0]
    next.d X    =>  X @[d: #.d + 1]
    X fby.d Y   =>  if #.d <= 0 then X else Y @[d: #.d - 1]
    X wvr.d Y   =>  X @[d:T] where T = U fby.d (U @[d:T+1]);
                              U = if Y then #.d else next.d U; end
    X upon.d Y  =>  X @[d:W] where W = 0 fby.d (if Y then W+1 else W); end
    X asa.d Y   =>  first.d (X wvr.d Y)

The auxiliary names (t/u/w) are drawn from a generator that skips every
identifier occurring anywhere in the tree, so the rewrite cannot capture
user names.  The pass is pure and idempotent: core nodes pass through
untouched and the replacements it builds contain no indexical operators
once the rewrite bottoms out.
"""

from __future__ import annotations

from . import ast


class FreshNames:
    def __init__(self, used: set[str]):
        self.used = set(used)
        self.counter = 0

    def make(self, stem: str) -> str:
        while True:
            self.counter += 1
            name = "%s%d" % (stem, self.counter)
            if name not in self.used:
                self.used.add(name)
                return name


def _used_names(root: ast.Node) -> set[str]:
    names = set()
    for node in ast.walk(root):
        if isinstance(node, ast.Ident):
            names.add(node.name)
        elif isinstance(node, ast.VarDef):
            names.add(node.name)
        elif isinstance(node, ast.FunDef):
            names.add(node.name)
            names.update(node.params)
            names.update(node.dim_params)
        elif isinstance(node, ast.DimDecl):
            names.update(node.names)
        elif isinstance(node, (ast.Dot, ast.DotCall)):
            names.add(node.name)
        elif isinstance(node, ast.StreamOp):
            names.add(node.dim)
    return names


def desugar_indexical(root: ast.Node, fresh: FreshNames | None = None) -> ast.Node:
    if fresh is None:
        fresh = FreshNames(_used_names(root))
    return _rewrite(root, fresh)


def _rewrite(node: ast.Node, fresh: FreshNames) -> ast.Node:
    node = _rewrite_children(node, fresh)
    if not isinstance(node, ast.StreamOp):
        return node
    pos = {"line": node.line, "col": node.col}
    d = node.dim
    if node.op == "first":
        return ast.At(body=node.x, bindings=[(_ident(d, pos), _int(0, pos))], **pos)
    if node.op == "next":
        tag = ast.BinOp(op="+", left=_query(d, pos), right=_int(1, pos), **pos)
        return ast.At(body=node.x, bindings=[(_ident(d, pos), tag)], **pos)
    if node.op == "fby":
        cond = ast.BinOp(op="<=", left=_query(d, pos), right=_int(0, pos), **pos)
        back = ast.BinOp(op="-", left=_query(d, pos), right=_int(1, pos), **pos)
        shifted = ast.At(body=node.y, bindings=[(_ident(d, pos), back)], **pos)
        return ast.If(cond=cond, then=node.x, orelse=shifted, **pos)
    if node.op == "wvr":
        t = fresh.make("t")
        u = fresh.make("u")
        # T = U fby.d (U @[d:T+1]);  U = if Y then #.d else next.d U;
        t_def = ast.VarDef(
            name=t,
            expr=ast.StreamOp(
                op="fby",
                dim=d,
                x=_ident(u, pos),
                y=ast.At(
                    body=_ident(u, pos),
                    bindings=[(_ident(d, pos), ast.BinOp(op="+", left=_ident(t, pos), right=_int(1, pos), **pos))],
                    **pos,
                ),
                **pos,
            ),
            **pos,
        )
        u_def = ast.VarDef(
            name=u,
            expr=ast.If(
                cond=node.y,
                then=_query(d, pos),
                orelse=ast.StreamOp(op="next", dim=d, x=_ident(u, pos), **pos),
                **pos,
            ),
            **pos,
        )
        body = ast.At(body=node.x, bindings=[(_ident(d, pos), _ident(t, pos))], **pos)
        return _rewrite(ast.Where(body=body, decls=[t_def, u_def], **pos), fresh)
    if node.op == "upon":
        w = fresh.make("w")
        advanced = ast.If(
            cond=node.y,
            then=ast.BinOp(op="+", left=_ident(w, pos), right=_int(1, pos), **pos),
            orelse=_ident(w, pos),
            **pos,
        )
        w_def = ast.VarDef(
            name=w,
            expr=ast.StreamOp(op="fby", dim=d, x=_int(0, pos), y=advanced, **pos),
            **pos,
        )
        body = ast.At(body=node.x, bindings=[(_ident(d, pos), _ident(w, pos))], **pos)
        return _rewrite(ast.Where(body=body, decls=[w_def], **pos), fresh)
    if node.op == "asa":
        inner = ast.StreamOp(op="wvr", dim=d, x=node.x, y=node.y, **pos)
        return _rewrite(ast.StreamOp(op="first", dim=d, x=inner, **pos), fresh)
    raise AssertionError("unknown stream operator %r" % node.op)


def _rewrite_children(node: ast.Node, fresh: FreshNames) -> ast.Node:
    r = lambda child: _rewrite(child, fresh)
    if isinstance(node, ast.Call):
        node.callee = r(node.callee)
        node.args = [r(a) for a in node.args]
    elif isinstance(node, ast.If):
        node.cond, node.then, node.orelse = r(node.cond), r(node.then), r(node.orelse)
    elif isinstance(node, ast.TagQuery):
        node.dim = r(node.dim)
    elif isinstance(node, ast.At):
        node.body = r(node.body)
        node.bindings = [(r(d), r(t)) for d, t in node.bindings]
    elif isinstance(node, ast.Where):
        node.body = r(node.body)
        node.decls = [r(d) for d in node.decls]
    elif isinstance(node, (ast.VarDef, ast.FunDef)):
        node.expr = r(node.expr)
    elif isinstance(node, ast.Dot):
        node.obj = r(node.obj)
    elif isinstance(node, ast.DotCall):
        node.obj = r(node.obj)
        node.args = [r(a) for a in node.args]
    elif isinstance(node, ast.BinOp):
        node.left, node.right = r(node.left), r(node.right)
    elif isinstance(node, ast.UnOp):
        node.operand = r(node.operand)
    elif isinstance(node, ast.StreamOp):
        node.x = r(node.x)
        if node.y is not None:
            node.y = r(node.y)
    return node


def _ident(name: str, pos) -> ast.Ident:
    return ast.Ident(name=name, **pos)


def _int(value: int, pos) -> ast.Literal:
    return ast.Literal(value=value, kind="int", **pos)


def _query(dim: str, pos) -> ast.TagQuery:
    return ast.TagQuery(dim=_ident(dim, pos), **pos)
