"""Symbol tables for host classes and the classifications built on them.

One table per class records every member; the entry for an intensional
member (one whose initialiser is an embedded segment) carries the node id
of its compiled expression and the segment's dictionary, and only then --
plain members leave both unset.  Free functions collect into a synthetic
wrapper table named ``ffw``.

This module also hosts two whole-unit scans used downstream: the static
mutability classification (a class is mutable when any code outside field
initialisers assigns one of its fields) and the recogniser for translated
units, which re-links generated accessors back to their program slots.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .. import bridge
from ..errors import CompileError
from . import ast


@dataclass
class MemberEntry:
    id: str
    is_host_member: bool
    mapped_type: int
    owning_class: str
    decl_source: str
    kind: str  # field | method | constructor
    declared_type: ast.HType | None = None
    visibility: str = "default"
    static: bool = False
    decl: object = None
    segment: ast.Segment | None = None
    ast_entry: int | None = None  # node id of the compiled segment root
    lucid_dictionary: object | None = None
    params: list = field(default_factory=list)


@dataclass
class ClassTable:
    class_name: str
    parent_name: str | None
    interface_names: list
    members: dict  # name -> MemberEntry


def _visibility(mods) -> str:
    for v in ("public", "private", "protected"):
        if v in mods:
            return v
    return "default"


def build_symbol_tables(unit: ast.Unit) -> dict:
    """All class tables plus the synthetic ``ffw`` table of free functions."""
    tables: dict[str, ClassTable] = {}
    ffw = ClassTable("ffw", None, [], {})
    for decl in unit.decls:
        if isinstance(decl, ast.FreeFun):
            if decl.name in ffw.members:
                raise CompileError(
                    "multiply defined free function '%s'" % decl.name, decl.line, decl.col,
                    unit.filename,
                )
            ffw.members[decl.name] = MemberEntry(
                id=decl.name,
                is_host_member=True,
                mapped_type=bridge.mapped_type_index(decl.return_type.name, decl.return_type.is_array),
                owning_class="ffw",
                decl_source=unit.source[decl.start : decl.end],
                kind="method",
                declared_type=decl.return_type,
                static=True,
                decl=decl,
                params=list(decl.params),
            )
            continue
        if decl.name in tables:
            raise CompileError(
                "multiply defined class '%s'" % decl.name, decl.line, decl.col, unit.filename
            )
        table = ClassTable(decl.name, decl.parent, list(decl.interfaces), {})
        tables[decl.name] = table
        for member in decl.members:
            if isinstance(member, ast.StaticBlock):
                continue
            if member.name in table.members:
                raise CompileError(
                    "multiply defined member '%s' in class %s" % (member.name, decl.name),
                    member.line,
                    member.col,
                    unit.filename,
                )
            if isinstance(member, ast.FieldDecl):
                intensional = isinstance(member.init, ast.Segment)
                table.members[member.name] = MemberEntry(
                    id=member.name,
                    is_host_member=not intensional,
                    mapped_type=bridge.mapped_type_index(member.type.name, member.type.is_array),
                    owning_class=decl.name,
                    decl_source=(
                        member.init.text if intensional else unit.source[member.start : member.end]
                    ),
                    kind="field",
                    declared_type=member.type,
                    visibility=_visibility(member.modifiers),
                    static="static" in member.modifiers,
                    decl=member,
                    segment=member.init if intensional else None,
                )
            else:
                table.members[member.name] = MemberEntry(
                    id=member.name,
                    is_host_member=True,
                    mapped_type=bridge.mapped_type_index(
                        member.return_type.name if member.return_type else decl.name,
                        member.return_type.is_array if member.return_type else False,
                    ),
                    owning_class=decl.name,
                    decl_source=unit.source[member.start : member.end],
                    kind="constructor" if member.is_ctor else "method",
                    declared_type=member.return_type,
                    visibility=_visibility(member.modifiers),
                    static="static" in member.modifiers,
                    decl=member,
                    params=list(member.params),
                )
    tables["ffw"] = ffw
    return tables


# ---------------------------------------------------------------------------
# Mutability classification.


def mutable_classes(unit: ast.Unit, tables: dict) -> set:
    """Classes with at least one field assigned outside field initialisers."""
    mutable: set[str] = set()
    class_fields = {
        name: {m for m, e in t.members.items() if e.kind == "field"}
        for name, t in tables.items()
    }

    def body_scan(owner: str | None, params, body):
        local_types: dict[str, str] = {p[1]: p[0].name for p in params}
        for stmt in ast.walk_statements(body):
            if isinstance(stmt, ast.LocalDecl):
                local_types[stmt.name] = stmt.type.name
            targets = []
            if isinstance(stmt, ast.Assign):
                targets.append(stmt.target)
            elif isinstance(stmt, ast.ForStmt):
                if isinstance(stmt.init, ast.Assign):
                    targets.append(stmt.init.target)
                if isinstance(stmt.update, ast.Assign):
                    targets.append(stmt.update.target)
            for target in targets:
                _mark_target(target, owner, local_types, class_fields, mutable)

    for decl in unit.decls:
        if isinstance(decl, ast.FreeFun):
            body_scan(None, decl.params, decl.body)
        else:
            for member in decl.members:
                if isinstance(member, ast.MethodDecl):
                    body_scan(decl.name, member.params, member.body)
                elif isinstance(member, ast.StaticBlock):
                    body_scan(decl.name, [], member.body)
    return mutable


def _mark_target(target, owner, local_types, class_fields, mutable):
    if isinstance(target, ast.HIndex):
        _mark_target(target.obj, owner, local_types, class_fields, mutable)
        return
    if isinstance(target, ast.HName):
        name = target.name
        if name in local_types:
            return
        if owner is not None and name in class_fields.get(owner, ()):
            mutable.add(owner)
        return
    if isinstance(target, ast.HField):
        base = target.obj
        cls = None
        if isinstance(base, ast.HThis):
            cls = owner
        elif isinstance(base, ast.HName):
            cls = local_types.get(base.name)
            if cls is None and owner is not None and base.name in class_fields.get(owner, ()):
                cls = None  # field-of-field: unknown static type
        if cls is not None and cls in class_fields:
            if target.name in class_fields[cls]:
                mutable.add(cls)
            return
        # Unknown base type: conservatively mark every class owning the field.
        for cname, fields in class_fields.items():
            if target.name in fields:
                mutable.add(cname)


# ---------------------------------------------------------------------------
# Translated-unit recognition.

_SLOT_RE = re.compile(r"^__geer_(\d+)$")
_GETTER_RE = re.compile(r"^__get_(\w+)$")
_ENGINE_RE = re.compile(r"^__engine_(\d+)$")


@dataclass
class TranslatedInfo:
    translated: bool = False
    slots: dict = field(default_factory=dict)  # index -> (tag, source, class name)
    member_slots: dict = field(default_factory=dict)  # (class, member) -> slot index


def scan_translated(unit: ast.Unit) -> TranslatedInfo:
    """Recognise generated scaffolding so a translated unit re-links its
    members to their program slots: static stores of the form
    ``__geer_i = __compile(tag, source)`` and accessors ``__get_m`` whose
    bodies evaluate ``__engine_i``."""
    info = TranslatedInfo()
    for decl in unit.decls:
        if not isinstance(decl, ast.ClassDecl):
            continue
        for member in decl.members:
            if isinstance(member, ast.StaticBlock):
                for stmt in ast.walk_statements(member.body):
                    if not isinstance(stmt, ast.Assign):
                        continue
                    if not isinstance(stmt.target, ast.HName):
                        continue
                    m = _SLOT_RE.match(stmt.target.name)
                    if not m:
                        continue
                    call = stmt.expr
                    if (
                        isinstance(call, ast.HCall)
                        and call.name == "__compile"
                        and len(call.args) == 2
                        and isinstance(call.args[0], ast.HLit)
                        and isinstance(call.args[1], ast.HLit)
                    ):
                        info.slots[int(m.group(1))] = (
                            call.args[0].value,
                            call.args[1].value,
                            decl.name,
                        )
                        info.translated = True
            elif isinstance(member, ast.MethodDecl):
                g = _GETTER_RE.match(member.name)
                if not g:
                    continue
                for expr in ast.walk_expressions(member.body):
                    if isinstance(expr, ast.HName):
                        e = _ENGINE_RE.match(expr.name)
                        if e:
                            info.member_slots[(decl.name, g.group(1))] = int(e.group(1))
                            break
    return info
