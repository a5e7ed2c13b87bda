"""AST of the host object subset.

Every node records its character span in the original source so the
translator can splice rewritten text without disturbing anything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class HNode:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)
    start: int = field(default=0, kw_only=True)
    end: int = field(default=0, kw_only=True)


@dataclass
class HType:
    name: str  # int long double float boolean String void | class name
    is_array: bool = False

    def __str__(self):
        return self.name + ("[]" if self.is_array else "")


@dataclass
class Unit(HNode):
    decls: list = field(default_factory=list)  # ClassDecl | FreeFun
    source: str = ""
    filename: str | None = None


@dataclass
class ClassDecl(HNode):
    name: str = ""
    parent: str | None = None
    interfaces: list = field(default_factory=list)
    members: list = field(default_factory=list)  # FieldDecl | MethodDecl | StaticBlock
    modifiers: list = field(default_factory=list)
    body_start: int = 0  # offset just after '{'
    body_end: int = 0  # offset of '}'


@dataclass
class FreeFun(HNode):
    return_type: HType = None
    name: str = ""
    params: list = field(default_factory=list)  # (HType, name)
    body: "Block" = None


@dataclass
class FieldDecl(HNode):
    modifiers: list = field(default_factory=list)
    type: HType = None
    name: str = ""
    init: "HNode | None" = None  # expression or Segment


@dataclass
class MethodDecl(HNode):
    modifiers: list = field(default_factory=list)
    return_type: HType | None = None  # None for constructors
    name: str = ""
    params: list = field(default_factory=list)  # (HType, name)
    body: "Block" = None
    is_ctor: bool = False


@dataclass
class StaticBlock(HNode):
    body: "Block" = None


# -- statements --


@dataclass
class Block(HNode):
    stmts: list = field(default_factory=list)


@dataclass
class LocalDecl(HNode):
    type: HType = None
    name: str = ""
    init: HNode | None = None


@dataclass
class IfStmt(HNode):
    cond: HNode = None
    then: HNode = None
    orelse: HNode | None = None


@dataclass
class ForStmt(HNode):
    init: HNode | None = None  # LocalDecl or Assign
    cond: HNode | None = None
    update: HNode | None = None  # Assign
    body: HNode = None


@dataclass
class ReturnStmt(HNode):
    expr: HNode | None = None


@dataclass
class ExprStmt(HNode):
    expr: HNode = None


@dataclass
class Assign(HNode):
    target: HNode = None  # HName | HField | HIndex
    expr: HNode = None


# -- expressions --


@dataclass
class HName(HNode):
    name: str = ""


@dataclass
class HLit(HNode):
    value: object = None
    kind: str = "int"  # int double boolean String null


@dataclass
class HBin(HNode):
    op: str = ""
    left: HNode = None
    right: HNode = None


@dataclass
class HUn(HNode):
    op: str = ""
    operand: HNode = None


@dataclass
class HCall(HNode):
    name: str = ""
    args: list = field(default_factory=list)


@dataclass
class HMethod(HNode):
    obj: HNode = None
    name: str = ""
    args: list = field(default_factory=list)


@dataclass
class HField(HNode):
    obj: HNode = None
    name: str = ""


@dataclass
class HIndex(HNode):
    obj: HNode = None
    index: HNode = None


@dataclass
class HNew(HNode):
    class_name: str = ""
    args: list = field(default_factory=list)


@dataclass
class HNewArray(HNode):
    elem_type: HType = None
    items: list = field(default_factory=list)


@dataclass
class HThis(HNode):
    pass


@dataclass
class Segment(HNode):
    """An embedded stream expression, replaced in the host tree by this
    placeholder.  `index` counts segments in source order from 1."""

    index: int = 0
    tag: str = ""
    text: str = ""
    text_line: int = 0
    text_col: int = 0


def walk_statements(node):
    """All statements under a statement/block, including itself."""
    if node is None:
        return
    yield node
    if isinstance(node, Block):
        for s in node.stmts:
            yield from walk_statements(s)
    elif isinstance(node, IfStmt):
        yield from walk_statements(node.then)
        yield from walk_statements(node.orelse)
    elif isinstance(node, ForStmt):
        yield from walk_statements(node.init)
        yield from walk_statements(node.update)
        yield from walk_statements(node.body)


def walk_expressions(node):
    """Every expression node under a statement or expression, preorder."""
    if node is None:
        return
    if isinstance(node, Block):
        for s in node.stmts:
            yield from walk_expressions(s)
    elif isinstance(node, IfStmt):
        yield from walk_expressions(node.cond)
        yield from walk_expressions(node.then)
        yield from walk_expressions(node.orelse)
    elif isinstance(node, ForStmt):
        for part in (node.init, node.cond, node.update, node.body):
            yield from walk_expressions(part)
    elif isinstance(node, LocalDecl):
        yield from walk_expressions(node.init)
    elif isinstance(node, (ReturnStmt, ExprStmt)):
        yield from walk_expressions(node.expr)
    elif isinstance(node, Assign):
        yield from walk_expressions(node.target)
        yield from walk_expressions(node.expr)
    else:
        yield node
        if isinstance(node, HBin):
            yield from walk_expressions(node.left)
            yield from walk_expressions(node.right)
        elif isinstance(node, HUn):
            yield from walk_expressions(node.operand)
        elif isinstance(node, HCall):
            for a in node.args:
                yield from walk_expressions(a)
        elif isinstance(node, HMethod):
            yield from walk_expressions(node.obj)
            for a in node.args:
                yield from walk_expressions(a)
        elif isinstance(node, HField):
            yield from walk_expressions(node.obj)
        elif isinstance(node, HIndex):
            yield from walk_expressions(node.obj)
            yield from walk_expressions(node.index)
        elif isinstance(node, HNew):
            for a in node.args:
                yield from walk_expressions(a)
        elif isinstance(node, HNewArray):
            for a in node.items:
                yield from walk_expressions(a)
