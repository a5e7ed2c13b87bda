"""Compiled program units: expression + dictionary + capture/dimension data.

A ``Program`` is what the evaluator runs: the resolved core AST of one
stream expression together with its scope dictionary, the host
identifiers it captures, and a per-node free-dimension table used to
project warehouse keys.

Free dimensions are a sound over-approximation computed by fixpoint over
every program of a unit at once (member streams may reference each other
across segments).  A node's set answers: which dimensions can evaluating
this node possibly query?  Rebinding at an ``@`` removes the rebound
dimension from the body's set and adds whatever the tag expressions need.
Dimensions declared by a ``where`` stay in the set: declarations make a
global axis name visible, they do not localise it, so a body that queries
a declared dimension still varies along it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .lucid import ast


@dataclass
class Scope:
    label: str
    parent: "Scope | None" = None
    # name -> ("dimension", None) | ("variable", VarDef) | ("function", FunInfo)
    entries: dict = field(default_factory=dict)


@dataclass
class FunInfo:
    name: str
    def_node: ast.FunDef
    scope: Scope  # scope the function itself was declared in
    specializations: dict = field(default_factory=dict)  # dim tuple -> SpecInfo


@dataclass
class SpecInfo:
    fun_name: str
    params: list[str]
    body: ast.Node  # resolved clone
    params_scope: Scope
    label: str


@dataclass
class HostEnv:
    """What a segment can see of its host surroundings."""

    class_name: str | None = None
    plain_members: dict = field(default_factory=dict)  # name -> declared type
    intensional_members: set = field(default_factory=set)
    method_params: dict = field(default_factory=dict)  # name -> declared type
    free_functions: dict = field(default_factory=dict)  # name -> arity
    class_dims: set = field(default_factory=set)
    ambient_dims: set = field(default_factory=set)
    object_dialect: bool = True  # dot access to host objects allowed
    translated: bool = False  # unresolved names become frame-deferred captures


@dataclass
class Program:
    """One compiled stream expression (a member definition, an embedded
    expression segment, or a standalone CLI expression)."""

    root: ast.Node
    source: str
    dialect: str
    label: str
    env: HostEnv
    base_scope: Scope
    bindings: dict  # nid -> binding tuple
    captures: list  # (kind, name) kinds: member | param | deferred
    dictionary: list  # (scope label, identifier, kind) triples
    host_tag_binds: list  # (dimension name, tag expr node) with host-only tags
    scopes_by_nid: dict = field(default_factory=dict)  # Where nid -> Scope
    specs: list = field(default_factory=list)  # every SpecInfo created
    digest: str = ""
    free_dims: dict = field(default_factory=dict)  # nid -> frozenset[str]
    unit_digest: str = ""

    def __post_init__(self):
        if not self.digest:
            self.digest = source_digest(self.source)

    def capture_names(self):
        return [name for _, name in self.captures]

    def free_dimensions(self, nid: int) -> frozenset:
        try:
            return self.free_dims[nid]
        except KeyError:
            raise KeyError("unknown node id %d in program %s" % (nid, self.label))


def source_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Free-dimension analysis.


class FreeDims:
    """Joint fixpoint over a set of programs.

    `members` maps (class name, member name) -> Program for intensional
    members, so cross-segment stream references resolve precisely.
    `member_types` maps (class name, member name) -> declared type name,
    used to type dotted access bases.  Anything untypeable falls back to
    the set of every dimension mentioned in the unit, which is sound.
    """

    def __init__(self, programs, members=None, member_types=None, all_dims=None):
        self.programs = list(programs)
        self.members = members or {}
        self.member_types = member_types or {}
        if all_dims is None:
            all_dims = set()
            for p in self.programs:
                for node in ast.walk(p.root):
                    if isinstance(node, ast.DimDecl):
                        all_dims.update(node.names)
                all_dims |= set(p.env.class_dims) | set(p.env.ambient_dims)
        self.all_dims = frozenset(all_dims)
        # Fixpoint variables.
        self.var_free = {}  # (program label, def nid) -> frozenset
        self.member_free = {}  # (class, member) -> frozenset
        self.param_free = {}  # (spec label, param) -> frozenset
        self.changed = False

    def run(self):
        for _ in range(max(4, len(self.all_dims) * 4 + 8)):
            self.changed = False
            for program in self.programs:
                self._sweep(program)
            if not self.changed:
                break
        for program in self.programs:
            table = {}
            for node in ast.walk(program.root):
                table[node.nid] = self._free(node, program, {})
            for spec in _all_specs(program):
                for node in ast.walk(spec.body):
                    table[node.nid] = self._free(node, program, {})
            program.free_dims = table

    # -- fixpoint sweeps ----------------------------------------------------

    def _sweep(self, program):
        owner = program.env.class_name
        for node in ast.walk(program.root):
            if isinstance(node, ast.VarDef):
                self._update(self.var_free, (program.label, node.nid),
                             self._free(node.expr, program, {}))
        for spec in _all_specs(program):
            for node in ast.walk(spec.body):
                if isinstance(node, ast.VarDef):
                    self._update(self.var_free, (program.label, node.nid),
                                 self._free(node.expr, program, {}))
        if owner is not None:
            for (cls, member), mprog in self.members.items():
                if mprog is program:
                    self._update(self.member_free, (cls, member),
                                 self._free(program.root, program, {}))

    def _update(self, table, key, value):
        old = table.get(key, frozenset())
        new = old | value
        if new != old:
            table[key] = new
            self.changed = True

    # -- per-node sets --------------------------------------------------------

    def _free(self, node, program, stack):
        binding = program.bindings.get(node.nid)
        if isinstance(node, ast.Ident):
            if binding is None:
                return frozenset()
            kind = binding[0]
            if kind == "var":
                return self.var_free.get((program.label, binding[1].nid), frozenset())
            if kind == "param":
                return self.param_free.get((binding[2], binding[1]), frozenset())
            if kind == "member":
                cls, name = binding[1], binding[2]
                if (cls, name) in self.members:
                    return self.member_free.get((cls, name), frozenset())
                return self.all_dims
            return frozenset()  # capture, deferred
        if isinstance(node, ast.Literal):
            return frozenset()
        if isinstance(node, ast.TagQuery):
            if isinstance(node.dim, ast.Ident):
                return frozenset((node.dim.name,))
            return self.all_dims
        if isinstance(node, ast.At):
            out = self._free(node.body, program, stack)
            for dim, tag in node.bindings:
                if isinstance(dim, ast.Ident):
                    out = out - {dim.name}
                self._free(dim, program, stack)
            for dim, tag in node.bindings:
                out = out | self._free(tag, program, stack)
            return out
        if isinstance(node, ast.Where):
            out = self._free(node.body, program, stack)
            for decl in node.decls:
                if isinstance(decl, (ast.VarDef, ast.FunDef)):
                    self._free(decl.expr, program, stack)
            return out
        if isinstance(node, ast.If):
            return (
                self._free(node.cond, program, stack)
                | self._free(node.then, program, stack)
                | self._free(node.orelse, program, stack)
            )
        if isinstance(node, ast.BinOp):
            return self._free(node.left, program, stack) | self._free(node.right, program, stack)
        if isinstance(node, ast.UnOp):
            return self._free(node.operand, program, stack)
        if isinstance(node, ast.Call):
            binding = program.bindings.get(node.nid)
            out = frozenset()
            for arg in node.args:
                out |= self._free(arg, program, stack)
            if binding is not None and binding[0] == "call":
                spec = binding[1]
                for param, arg in zip(spec.params, node.args):
                    self._update(self.param_free, (spec.label, param),
                                 self._free(arg, program, stack))
                if spec.label in stack:
                    return out | self.all_dims  # recursion: give up precisely
                stack = dict(stack)
                stack[spec.label] = True
                return out | self._free(spec.body, program, stack)
            return out  # free-function call: host code cannot query the context
        if isinstance(node, ast.Dot):
            out = self._free(node.obj, program, stack)
            target = self._dot_target(node, program)
            if target == "plain":
                return out
            if target is not None:
                return out | self.member_free.get(target, frozenset())
            return out | self.all_dims
        if isinstance(node, ast.DotCall):
            out = self._free(node.obj, program, stack)
            for arg in node.args:
                out |= self._free(arg, program, stack)
            return out  # method bodies run host code at the object's own context
        if isinstance(node, (ast.VarDef, ast.FunDef)):
            return self._free(node.expr, program, stack)
        if isinstance(node, ast.DimDecl):
            return frozenset()
        raise TypeError("free dims of %r" % (node,))

    def _dot_target(self, node, program):
        """(class, member) when the dotted base has a known class type and the
        member is intensional; "plain" when it is a known plain member; None
        when nothing can be said statically."""
        base = node.obj
        binding = program.bindings.get(base.nid) if base.nid is not None else None
        cls = None
        if isinstance(base, ast.Ident) and binding is not None and binding[0] == "capture":
            env = program.env
            cls = env.plain_members.get(base.name) or env.method_params.get(base.name)
        if cls is None:
            return None
        if (cls, node.name) in self.members:
            return (cls, node.name)
        # Known class, not an intensional member: a plain field read.
        return "plain"


def _all_specs(program):
    return list(program.specs)
