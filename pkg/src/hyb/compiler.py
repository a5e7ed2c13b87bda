"""Whole-unit compilation: host parse, symbol tables, segment compilation,
cross-segment linking, and the semantic checks that span both languages.

The pipeline is the same for a hybrid source file and for the output of
the translator.  A translated unit carries no raw segments; instead its
generated static blocks name each segment's dialect and source, and the
generated accessors tie members back to program slots, so the scan in
``host.symbols`` reconstructs the same compiled-unit structure and the
evaluator runs both forms identically.

A dimension declared in any segment of a class is visible to every
segment of that class; an expression that names a dimension declared
nowhere is rejected with "undefined dimension".
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CompileError
from .lucid import ast as last
from .lucid import parse_segment
from .lucid.resolve import Resolver
from .program import FreeDims, HostEnv, Program, source_digest
from .host import ast as hast
from .host.parser import parse_host
from .host.symbols import build_symbol_tables, mutable_classes, scan_translated


@dataclass
class SegmentSite:
    index: int
    class_name: str | None
    member_name: str | None  # set for field-initialiser segments
    method: hast.MethodDecl | hast.FreeFun | None  # enclosing method, if any
    tag: str
    text: str
    line: int = 0
    col: int = 0


@dataclass
class CompiledUnit:
    unit: hast.Unit
    source: str
    filename: str | None
    digest: str
    tables: dict
    classes: dict  # name -> ClassDecl
    free_funs: dict  # name -> FreeFun
    sites: list  # SegmentSite in source order
    programs: dict  # segment index -> Program
    member_programs: dict  # (class, member) -> Program
    class_dims: dict  # class -> set of dimension names
    mutable: set
    main_class: str | None
    translated: bool
    programs_by_source: dict = field(default_factory=dict)  # (class, tag, text) -> Program

    @property
    def segment_count(self) -> int:
        return len(self.sites)

    def dictionary_dump(self) -> str:
        """Stable, sorted `scope identifier kind` lines plus segment census."""
        lines = set()
        for table in self.tables.values():
            for name, entry in table.members.items():
                if table.class_name == "ffw":
                    lines.add("ffw %s freefun" % name)
                elif entry.kind == "field":
                    kind = "member" if entry.is_host_member else "intensional"
                    lines.add("%s %s %s" % (table.class_name, name, kind))
                else:
                    lines.add("%s %s %s" % (table.class_name, name, entry.kind))
        for program in self.programs.values():
            for scope, name, kind in program.dictionary:
                lines.add("%s %s %s" % (scope, name, kind))
        out = "\n".join(sorted(lines))
        census = "segments: %d" % self.segment_count
        return (out + "\n" + census) if out else census


def compile_unit(source: str, filename: str | None = None, warn=None) -> CompiledUnit:
    unit = parse_host(source, filename)
    tables = build_symbol_tables(unit)
    info = scan_translated(unit)
    mutable = mutable_classes(unit, tables)
    classes = {d.name: d for d in unit.decls if isinstance(d, hast.ClassDecl)}
    free_funs = {d.name: d for d in unit.decls if isinstance(d, hast.FreeFun)}

    sites = _collect_sites(unit, info, filename)

    # Phase 1: parse and desugar every segment, collecting per-class dimensions.
    parsed = {}
    class_dims: dict = {}
    for site in sites:
        root, tag = parse_segment(
            site.tag, site.text, filename=filename, line=site.line, col=site.col, warn=warn
        )
        parsed[site.index] = (root, tag)
        if site.class_name is not None:
            dims = class_dims.setdefault(site.class_name, set())
            for node in last.walk(root):
                if isinstance(node, last.DimDecl):
                    dims.update(node.names)

    # Which members resolve as stream references, per class.
    intensional: dict = {}
    for site in sites:
        if site.member_name is not None and site.class_name is not None:
            intensional.setdefault(site.class_name, set()).add(site.member_name)

    # Phase 2: resolve each segment against its host environment.
    alloc = last.IdAlloc()
    digest = source_digest(source)
    programs: dict = {}
    member_programs: dict = {}
    member_types: dict = {}
    for site in sites:
        root, tag = parsed[site.index]
        env = _environment(site, tables, intensional, class_dims, info.translated, tag)
        label = (
            "%s.%s" % (site.class_name, site.member_name)
            if site.member_name
            else "%s.seg%d" % (site.class_name or "unit", site.index)
        )
        resolver = Resolver(env, label, alloc, filename=filename)
        program = resolver.resolve(root, site.text, tag)
        program.unit_digest = digest
        programs[site.index] = program
        if site.member_name is not None:
            member_programs[(site.class_name, site.member_name)] = program
            entry = tables[site.class_name].members.get(site.member_name)
            if entry is not None and entry.segment is not None:
                entry.ast_entry = program.root.nid
                entry.lucid_dictionary = program.dictionary

    for cname, table in tables.items():
        for mname, entry in table.members.items():
            if entry.kind == "field" and entry.declared_type is not None:
                member_types[(cname, mname)] = entry.declared_type.name

    FreeDims(
        list(programs.values()), members=member_programs, member_types=member_types
    ).run()

    _check_capture_cycles(tables, member_programs, filename)

    main_class = _find_main(classes, filename)
    compiled = CompiledUnit(
        unit=unit,
        source=source,
        filename=filename,
        digest=digest,
        tables=tables,
        classes=classes,
        free_funs=free_funs,
        sites=sites,
        programs=programs,
        member_programs=member_programs,
        class_dims=class_dims,
        mutable=mutable,
        main_class=main_class,
        translated=info.translated,
    )
    for site in sites:
        compiled.programs_by_source[(site.class_name, site.tag or "GIPL", site.text)] = programs[
            site.index
        ]
    return compiled


def _collect_sites(unit: hast.Unit, info, filename) -> list:
    sites: list[SegmentSite] = []
    if info.translated:
        member_of_slot = {v: k for k, v in info.member_slots.items()}
        for index in sorted(info.slots):
            tag, text, cls = info.slots[index]
            member = member_of_slot.get(index, (None, None))[1]
            sites.append(
                SegmentSite(
                    index=index, class_name=cls, member_name=member, method=None,
                    tag=tag, text=text, line=1, col=1,
                )
            )
        return sites
    for decl in unit.decls:
        if isinstance(decl, hast.FreeFun):
            for seg in _expr_segments(decl.body):
                sites.append(
                    SegmentSite(
                        index=seg.index, class_name=None, member_name=None, method=decl,
                        tag=seg.tag, text=seg.text, line=seg.text_line, col=seg.text_col,
                    )
                )
            continue
        for member in decl.members:
            if isinstance(member, hast.FieldDecl) and isinstance(member.init, hast.Segment):
                seg = member.init
                sites.append(
                    SegmentSite(
                        index=seg.index, class_name=decl.name, member_name=member.name,
                        method=None, tag=seg.tag, text=seg.text,
                        line=seg.text_line, col=seg.text_col,
                    )
                )
            elif isinstance(member, (hast.MethodDecl, hast.StaticBlock)):
                method = member if isinstance(member, hast.MethodDecl) else None
                for seg in _expr_segments(member.body):
                    sites.append(
                        SegmentSite(
                            index=seg.index, class_name=decl.name, member_name=None,
                            method=method, tag=seg.tag, text=seg.text,
                            line=seg.text_line, col=seg.text_col,
                        )
                    )
    sites.sort(key=lambda s: s.index)
    return sites


def _expr_segments(body):
    for expr in hast.walk_expressions(body):
        if isinstance(expr, hast.Segment):
            yield expr


def _environment(site, tables, intensional, class_dims, translated, tag) -> HostEnv:
    plain: dict = {}
    intens: set = set()
    if site.class_name is not None:
        table = tables[site.class_name]
        intens = set(intensional.get(site.class_name, set()))
        for name, entry in table.members.items():
            if entry.kind != "field":
                continue
            if name in intens:
                continue
            plain[name] = entry.declared_type.name if entry.declared_type else "object"
    params = {}
    if site.method is not None:
        params = {p[1]: p[0].name for p in site.method.params}
    free = {
        name: len(entry.params)
        for name, entry in tables["ffw"].members.items()
    }
    return HostEnv(
        class_name=site.class_name,
        plain_members=plain,
        intensional_members=intens,
        method_params=params,
        free_functions=free,
        class_dims=set(class_dims.get(site.class_name, set())),
        object_dialect=tag != "GIPL" or translated,
        translated=translated,
    )


def _check_capture_cycles(tables, member_programs, filename):
    """Reject capture cycles that pass through a plain host member.

    Edges: an intensional member depends on the plain members it captures;
    a plain member's eager initialiser depends on the same-class fields it
    names.  Stream-only recursion (member <-> member through stream
    references) is fine; a cycle with a plain member in it would make the
    demand-time snapshot chase its own tail.
    """
    for cname, table in tables.items():
        if cname == "ffw":
            continue
        edges: dict = {}
        plain_fields = {
            n for n, e in table.members.items() if e.kind == "field" and e.segment is None
        }
        for (cls, member), program in member_programs.items():
            if cls != cname:
                continue
            edges[member] = {n for k, n in program.captures if k == "member"}
        for name, entry in table.members.items():
            if name not in plain_fields or entry.decl is None:
                continue
            init = entry.decl.init
            if init is None or isinstance(init, hast.Segment):
                continue
            if entry.declared_type is not None and entry.declared_type.name in tables:
                continue  # class-typed fields are lazy; laziness breaks cycles
            deps = set()
            for expr in hast.walk_expressions(init):
                if isinstance(expr, hast.HName) and expr.name in table.members:
                    deps.add(expr.name)
            edges[name] = deps
        # cycle detection over `edges`, flagging cycles touching a plain field
        state: dict = {}

        def visit(node, path):
            state[node] = "active"
            path.append(node)
            for dep in edges.get(node, ()):
                if state.get(dep) == "active":
                    cycle = path[path.index(dep):] + [dep]
                    if any(n in plain_fields for n in cycle):
                        raise CompileError(
                            "capture cycle through host member: %s" % " -> ".join(cycle),
                            filename=filename,
                        )
                elif state.get(dep) is None and dep in edges:
                    visit(dep, path)
            path.pop()
            state[node] = "done"

        for node in list(edges):
            if state.get(node) is None:
                visit(node, [])


def _find_main(classes, filename):
    mains = []
    for name, decl in classes.items():
        for member in decl.members:
            if isinstance(member, hast.MethodDecl) and member.name == "main" and not member.is_ctor:
                mains.append(name)
    if len(mains) > 1:
        raise CompileError("multiple main methods (%s)" % ", ".join(sorted(mains)), filename=filename)
    return mains[0] if mains else None
