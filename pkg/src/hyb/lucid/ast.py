"""AST for the stream-expression language.

Node ids are unique within one compilation unit (they are part of the
warehouse key), assigned after all tree rewrites by ``assign_ids``.  The
indexical operators live in ``StreamOp`` nodes, which the desugarer
rewrites away; the evaluator only ever sees the core node kinds.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Node:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)
    nid: int | None = field(default=None, kw_only=True)


@dataclass
class Ident(Node):
    name: str = ""


@dataclass
class Literal(Node):
    value: object = None
    kind: str = "int"  # int | double | bool | string


@dataclass
class Call(Node):
    callee: Node = None
    args: list[Node] = field(default_factory=list)
    # Filled by the resolver when the callee is a stream function with
    # dimension parameters written in dotted form (f.d(x)).
    dim_args: list[str] = field(default_factory=list)


@dataclass
class If(Node):
    cond: Node = None
    then: Node = None
    orelse: Node = None


@dataclass
class TagQuery(Node):
    dim: Node = None  # an Ident after parsing


@dataclass
class At(Node):
    body: Node = None
    bindings: list[tuple[Node, Node]] = field(default_factory=list)  # (dim, tag expr)


@dataclass
class DimDecl(Node):
    names: list[str] = field(default_factory=list)


@dataclass
class VarDef(Node):
    name: str = ""
    expr: Node = None


@dataclass
class FunDef(Node):
    name: str = ""
    dim_params: list[str] = field(default_factory=list)
    params: list[str] = field(default_factory=list)
    expr: Node = None


@dataclass
class Where(Node):
    body: Node = None
    decls: list[Node] = field(default_factory=list)


@dataclass
class Dot(Node):
    obj: Node = None
    name: str = ""


@dataclass
class DotCall(Node):
    obj: Node = None
    name: str = ""
    args: list[Node] = field(default_factory=list)


@dataclass
class BinOp(Node):
    op: str = ""
    left: Node = None
    right: Node = None


@dataclass
class UnOp(Node):
    op: str = ""
    operand: Node = None


@dataclass
class StreamOp(Node):
    """Indexical operator before desugaring.

    Unary: first, next (y is None).  Binary: fby, wvr, upon, asa.
    """

    op: str = ""
    dim: str = ""
    x: Node = None
    y: Node | None = None


def children(node: Node):
    if isinstance(node, (Ident, Literal, DimDecl)):
        return ()
    if isinstance(node, Call):
        return (node.callee, *node.args)
    if isinstance(node, If):
        return (node.cond, node.then, node.orelse)
    if isinstance(node, TagQuery):
        return (node.dim,)
    if isinstance(node, At):
        out = [node.body]
        for d, t in node.bindings:
            out.append(d)
            out.append(t)
        return tuple(out)
    if isinstance(node, Where):
        return (node.body, *node.decls)
    if isinstance(node, (VarDef,)):
        return (node.expr,)
    if isinstance(node, FunDef):
        return (node.expr,)
    if isinstance(node, Dot):
        return (node.obj,)
    if isinstance(node, DotCall):
        return (node.obj, *node.args)
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, UnOp):
        return (node.operand,)
    if isinstance(node, StreamOp):
        return (node.x,) if node.y is None else (node.x, node.y)
    raise TypeError("unknown node %r" % (node,))


def walk(node: Node):
    yield node
    for child in children(node):
        yield from walk(child)


class IdAlloc:
    """Sequential node-id source, one per compilation unit."""

    def __init__(self):
        self._next = 0

    def next(self) -> int:
        self._next += 1
        return self._next


def assign_ids(root: Node, alloc: IdAlloc) -> None:
    """Give every node without an id a fresh one (preorder, deterministic)."""
    for node in walk(root):
        if node.nid is None:
            node.nid = alloc.next()


# ---------------------------------------------------------------------------
# Pretty printer.  Output reparses to an isomorphic tree; it is also what the
# translator embeds when it needs an expression in host syntax (pure capture
# arithmetic only).

_PREC = {
    "||": 1,
    "&&": 1,
    "==": 2,
    "!=": 2,
    "<": 2,
    "<=": 2,
    ">": 2,
    ">=": 2,
    "+": 3,
    "-": 3,
    "*": 4,
    "/": 4,
    "%": 4,
}


def to_source(node: Node) -> str:
    return _fmt(node, 0)


def _fmt(node: Node, prec: int) -> str:
    if isinstance(node, Ident):
        return node.name
    if isinstance(node, Literal):
        if node.kind == "string":
            return '"%s"' % str(node.value).replace("\\", "\\\\").replace('"', '\\"')
        if node.kind == "bool":
            return "true" if node.value else "false"
        if node.kind == "double":
            return repr(float(node.value))
        return str(node.value)
    if isinstance(node, TagQuery):
        return "#.%s" % _fmt(node.dim, 10)
    if isinstance(node, At):
        inner = ",".join("%s:%s" % (_fmt(d, 0), _fmt(t, 0)) for d, t in node.bindings)
        return _wrap("%s @[%s]" % (_fmt(node.body, 9), inner), 9, prec)
    if isinstance(node, Call):
        dims = "".join("." + d for d in node.dim_args)
        args = ", ".join(_fmt(a, 0) for a in node.args)
        return "%s%s(%s)" % (_fmt(node.callee, 10), dims, args)
    if isinstance(node, Dot):
        return "%s.%s" % (_fmt(node.obj, 10), node.name)
    if isinstance(node, DotCall):
        args = ", ".join(_fmt(a, 0) for a in node.args)
        return "%s.%s(%s)" % (_fmt(node.obj, 10), node.name, args)
    if isinstance(node, UnOp):
        return _wrap("%s%s" % (node.op, _fmt(node.operand, 8)), 8, prec)
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        text = "%s %s %s" % (_fmt(node.left, p), node.op, _fmt(node.right, p + 1))
        return _wrap(text, p, prec)
    if isinstance(node, If):
        text = "if %s then %s else %s fi" % (
            _fmt(node.cond, 1),
            _fmt(node.then, 1),
            _fmt(node.orelse, 1),
        )
        return _wrap(text, 0.5, prec)
    if isinstance(node, StreamOp):
        if node.y is None:
            return _wrap("%s.%s %s" % (node.op, node.dim, _fmt(node.x, 8)), 8, prec)
        text = "%s %s.%s %s" % (_fmt(node.x, 0.4), node.op, node.dim, _fmt(node.y, 0.3))
        return _wrap(text, 0.3, prec)
    if isinstance(node, Where):
        decls = " ".join(_fmt_decl(d) for d in node.decls)
        return _wrap("%s where %s end" % (_fmt(node.body, 0.2), decls), 0.1, prec)
    raise TypeError("cannot print %r" % (node,))


def _fmt_decl(decl: Node) -> str:
    if isinstance(decl, DimDecl):
        return "dimension %s;" % ", ".join(decl.names)
    if isinstance(decl, VarDef):
        return "%s = %s;" % (decl.name, _fmt(decl.expr, 0))
    if isinstance(decl, FunDef):
        dims = "".join("." + d for d in decl.dim_params)
        return "%s%s(%s) = %s;" % (decl.name, dims, ", ".join(decl.params), _fmt(decl.expr, 0))
    raise TypeError("cannot print declaration %r" % (decl,))


def _wrap(text: str, mine, outer) -> str:
    return "(%s)" % text if mine < outer else text


def isomorphic(a: Node, b: Node) -> bool:
    """Structural equality ignoring ids and source positions."""
    if type(a) is not type(b):
        return False
    if isinstance(a, Ident):
        return a.name == b.name
    if isinstance(a, Literal):
        return a.kind == b.kind and a.value == b.value
    if isinstance(a, DimDecl):
        return a.names == b.names
    if isinstance(a, (VarDef, FunDef, Dot, DotCall, StreamOp, BinOp, UnOp)):
        for attr in ("name", "op", "dim", "dim_params", "params", "dim_args"):
            if getattr(a, attr, None) != getattr(b, attr, None):
                return False
    if isinstance(a, At) and len(a.bindings) != len(b.bindings):
        return False
    ca, cb = children(a), children(b)
    if len(ca) != len(cb):
        return False
    return all(isomorphic(x, y) for x, y in zip(ca, cb))
