"""Scope resolution: builds the dictionary, classifies identifiers, and
specialises functions over their dimension parameters.

Identifier lookup order inside a segment: lexical where-declarations
(innermost first), then the host layer in this order: dimension names
declared anywhere in the owning class, intensional members (stream
references), plain members and enclosing-method parameters (captures,
constant per demand), free functions.  Anything else is undefined -- or,
inside a machine-generated translated unit, a frame-deferred capture
looked up among the host parameters live at the engine call.

Functions with dimension parameters are specialised syntactically per
distinct actual-dimension tuple: the body is cloned with the parameter
names substituted (hygienically, fresh node ids) and resolved like any
other expression.  Plain functions get a single specialisation.
"""

from __future__ import annotations

from ..errors import CompileError
from ..program import FunInfo, HostEnv, Program, Scope, SpecInfo
from . import ast

_MAX_SPEC_DEPTH = 64


class Resolver:
    def __init__(self, env: HostEnv, label: str, alloc: ast.IdAlloc, filename=None):
        self.env = env
        self.label = label
        self.alloc = alloc
        self.filename = filename
        self.bindings = {}
        self.captures = []
        self._capture_seen = set()
        self.dictionary = []
        self.specs = []
        self.scopes_by_nid = {}
        self._where_count = 0
        self._spec_depth = 0
        self._fresh = 0

    # -- entry ---------------------------------------------------------------

    def resolve(self, root: ast.Node, source: str, dialect: str) -> Program:
        ast.assign_ids(root, self.alloc)
        base = Scope(label=self.label)
        root = self.bind(root, base)
        program = Program(
            root=root,
            source=source,
            dialect=dialect,
            label=self.label,
            env=self.env,
            base_scope=base,
            bindings=self.bindings,
            captures=self.captures,
            dictionary=sorted(self.dictionary),
            host_tag_binds=self._collect_host_tag_binds(root),
            scopes_by_nid=self.scopes_by_nid,
            specs=self.specs,
        )
        return program

    # -- helpers ---------------------------------------------------------------

    def error(self, message, node=None):
        line = getattr(node, "line", None)
        col = getattr(node, "col", None)
        raise CompileError(message, line, col, self.filename)

    def lookup(self, name, scope):
        while scope is not None:
            if name in scope.entries:
                kind, payload = scope.entries[name]
                return kind, payload, scope
            scope = scope.parent
        return None

    def _capture(self, kind, name):
        if name not in self._capture_seen:
            self._capture_seen.add(name)
            self.captures.append((kind, name))

    def _fresh_name(self, stem):
        self._fresh += 1
        return "%s_%d" % (stem, self._fresh)

    # -- binding walk -----------------------------------------------------------

    def bind(self, node: ast.Node, scope: Scope) -> ast.Node:
        if isinstance(node, ast.StreamOp):
            raise AssertionError("stream operator survived desugaring")
        if isinstance(node, ast.Ident):
            self._bind_value_ident(node, scope)
            return node
        if isinstance(node, ast.Literal):
            return node
        if isinstance(node, ast.TagQuery):
            self._resolve_dim(node.dim, scope)
            return node
        if isinstance(node, ast.At):
            node.body = self.bind(node.body, scope)
            new_bindings = []
            for dim, tag in node.bindings:
                self._resolve_dim(dim, scope)
                new_bindings.append((dim, self.bind(tag, scope)))
            node.bindings = new_bindings
            return node
        if isinstance(node, ast.If):
            node.cond = self.bind(node.cond, scope)
            node.then = self.bind(node.then, scope)
            node.orelse = self.bind(node.orelse, scope)
            return node
        if isinstance(node, ast.BinOp):
            node.left = self.bind(node.left, scope)
            node.right = self.bind(node.right, scope)
            return node
        if isinstance(node, ast.UnOp):
            node.operand = self.bind(node.operand, scope)
            return node
        if isinstance(node, ast.Where):
            return self._bind_where(node, scope)
        if isinstance(node, ast.Call):
            return self._bind_call(node, scope)
        if isinstance(node, (ast.Dot, ast.DotCall)):
            return self._bind_dotted(node, scope)
        raise TypeError("cannot resolve %r" % (node,))

    def _bind_value_ident(self, node: ast.Ident, scope: Scope):
        name = node.name
        hit = self.lookup(name, scope)
        if hit is not None:
            kind, payload, def_scope = hit
            if kind == "dimension":
                self.error("dimension '%s' used as a value" % name, node)
            if kind == "function":
                self.error("function '%s' used as a value" % name, node)
            if kind == "variable":
                self.bindings[node.nid] = ("var", payload, def_scope)
                return
            if kind == "param":
                pname, spec_label = payload
                self.bindings[node.nid] = ("param", pname, spec_label, def_scope)
                return
        env = self.env
        if name in env.class_dims or name in env.ambient_dims:
            self.error("dimension '%s' used as a value" % name, node)
        if name in env.intensional_members:
            self.bindings[node.nid] = ("member", env.class_name, name)
            return
        if name in env.plain_members:
            self.bindings[node.nid] = ("capture", name)
            self._capture("member", name)
            return
        if name in env.method_params:
            self.bindings[node.nid] = ("capture", name)
            self._capture("param", name)
            return
        if name in env.free_functions:
            self.error("free function '%s' used as a value" % name, node)
        if env.translated:
            self.bindings[node.nid] = ("deferred", name)
            self._capture("deferred", name)
            return
        if env.class_name is not None:
            self.error("undefined identifier in Lucid segment: '%s'" % name, node)
        self.error("undefined identifier '%s'" % name, node)

    def _resolve_dim(self, node: ast.Node, scope: Scope) -> str:
        if not isinstance(node, ast.Ident):
            self.error("dimension position must be an identifier", node)
        name = node.name
        hit = self.lookup(name, scope)
        if hit is not None:
            if hit[0] != "dimension":
                self.error("'%s' is not a dimension" % name, node)
            self.bindings[node.nid] = ("dim", name)
            return name
        if name in self.env.class_dims or name in self.env.ambient_dims:
            self.bindings[node.nid] = ("dim", name)
            return name
        self.error("undefined dimension %s" % name, node)

    def _bind_where(self, node: ast.Where, scope: Scope) -> ast.Node:
        self._where_count += 1
        sc = Scope(label="%s.w%d" % (self.label, self._where_count), parent=scope)
        self.scopes_by_nid[node.nid] = sc
        for decl in node.decls:
            if isinstance(decl, ast.DimDecl):
                for name in decl.names:
                    self._declare(sc, name, ("dimension", None), decl)
            elif isinstance(decl, ast.VarDef):
                self._declare(sc, decl.name, ("variable", decl), decl)
            elif isinstance(decl, ast.FunDef):
                info = FunInfo(name=decl.name, def_node=decl, scope=sc)
                self._declare(sc, decl.name, ("function", info), decl)
            else:
                raise TypeError("bad declaration %r" % (decl,))
        for decl in node.decls:
            if isinstance(decl, ast.VarDef):
                decl.expr = self.bind(decl.expr, sc)
        node.body = self.bind(node.body, sc)
        return node

    def _declare(self, scope: Scope, name: str, entry, node):
        if name in scope.entries:
            self.error("multiply defined identifier '%s'" % name, node)
        scope.entries[name] = entry
        kind = {"dimension": "dimension", "variable": "variable", "function": "function"}[entry[0]]
        self.dictionary.append((scope.label, name, kind))

    # -- calls --------------------------------------------------------------------

    def _bind_call(self, node: ast.Call, scope: Scope) -> ast.Node:
        callee = node.callee
        if not isinstance(callee, ast.Ident):
            self.error("only named functions can be called", node)
        name = callee.name
        hit = self.lookup(name, scope)
        if hit is not None and hit[0] == "function":
            info = hit[1]
            if info.def_node.dim_params:
                self.error(
                    "function '%s' needs %d dimension argument(s)"
                    % (name, len(info.def_node.dim_params)),
                    node,
                )
            return self._specialize_call(node, info, (), scope)
        if hit is not None:
            self.error("'%s' is not a function" % name, node)
        if name in self.env.free_functions:
            arity = self.env.free_functions[name]
            if arity is not None and arity != len(node.args):
                self.error(
                    "free function '%s' expects %d argument(s), got %d"
                    % (name, arity, len(node.args)),
                    node,
                )
            self.bindings[node.nid] = ("freefun", name)
            node.args = [self.bind(a, scope) for a in node.args]
            return node
        if self.env.translated:
            # Machine-generated units may call frame-visible host functions.
            self.bindings[node.nid] = ("freefun", name)
            node.args = [self.bind(a, scope) for a in node.args]
            return node
        self.error("undefined free function '%s'" % name, node)

    def _bind_dotted(self, node: ast.Node, scope: Scope) -> ast.Node:
        root, names, args = _unwind_dots(node)
        if isinstance(root, ast.Ident) and args is not None:
            hit = self.lookup(root.name, scope)
            if hit is not None and hit[0] == "function":
                info = hit[1]
                for dim_ident in names:
                    self._resolve_dim(dim_ident, scope)
                dims = tuple(ident.name for ident in names)
                if len(dims) != len(info.def_node.dim_params):
                    self.error(
                        "function '%s' takes %d dimension argument(s), got %d"
                        % (root.name, len(info.def_node.dim_params), len(dims)),
                        node,
                    )
                call = ast.Call(
                    callee=root,
                    args=args,
                    dim_args=list(dims),
                    line=node.line,
                    col=node.col,
                    nid=node.nid,
                )
                return self._specialize_call(call, info, dims, scope)
        # Host object access.
        if not self.env.object_dialect:
            self.error("object member access requires the OBJECTIVELUCID dialect", node)
        if isinstance(node, ast.Dot):
            node.obj = self.bind(node.obj, scope)
        else:
            node.obj = self.bind(node.obj, scope)
            node.args = [self.bind(a, scope) for a in node.args]
        return node

    def _specialize_call(self, call: ast.Call, info: FunInfo, dims: tuple, scope: Scope):
        spec = self._specialize(info, dims, call)
        if len(call.args) != len(spec.params):
            self.error(
                "function '%s' expects %d argument(s), got %d"
                % (info.name, len(spec.params), len(call.args)),
                call,
            )
        self.bindings[call.nid] = ("call", spec, info.scope)
        call.args = [self.bind(a, scope) for a in call.args]
        return call

    def _specialize(self, info: FunInfo, dims: tuple, at_node) -> SpecInfo:
        if dims in info.specializations:
            return info.specializations[dims]
        if self._spec_depth > _MAX_SPEC_DEPTH:
            self.error(
                "dimension-parameter recursion too deep while expanding '%s'" % info.name,
                at_node,
            )
        decl = info.def_node
        label = "%s.%s" % (info.scope.label, info.name)
        if dims:
            label += "." + ".".join(dims)
        params_scope = Scope(label=label, parent=info.scope)
        seen = set()
        for p in decl.params:
            if p in seen:
                self.error("multiply defined identifier '%s'" % p, decl)
            seen.add(p)
            params_scope.entries[p] = ("param", (p, label))
        mapping = dict(zip(decl.dim_params, dims))
        body = _clone(decl.expr, mapping, {}, self)
        ast.assign_ids(body, self.alloc)
        spec = SpecInfo(
            fun_name=info.name, params=list(decl.params), body=body, params_scope=params_scope,
            label=label,
        )
        info.specializations[dims] = spec
        self.specs.append(spec)
        self._spec_depth += 1
        try:
            spec.body = self.bind(body, params_scope)
        finally:
            self._spec_depth -= 1
        return spec

    # -- host-bound tags ---------------------------------------------------------

    def _collect_host_tag_binds(self, root: ast.Node):
        binds = []
        for node in ast.walk(root):
            if not isinstance(node, ast.At):
                continue
            for dim, tag in node.bindings:
                if isinstance(dim, ast.Ident) and self._is_host_expr(tag):
                    binds.append((dim.name, tag))
        return binds

    def _is_host_expr(self, node: ast.Node) -> bool:
        """True when every leaf is a literal or a constant host capture, i.e.
        the tag can be evaluated by plain host code at the call site."""
        for sub in ast.walk(node):
            if isinstance(sub, (ast.Literal, ast.BinOp, ast.UnOp)):
                continue
            if isinstance(sub, ast.Ident):
                kind = self.bindings.get(sub.nid, ("?",))[0]
                if kind in ("capture", "deferred"):
                    continue
                return False
            return False
        return True


def _unwind_dots(node):
    """Flatten Dot/DotCall chains: returns (root expr, [name Idents], args or None)."""
    names = []
    args = None
    cur = node
    if isinstance(cur, ast.DotCall):
        names.append(ast.Ident(name=cur.name, line=cur.line, col=cur.col))
        args = cur.args
        cur = cur.obj
    elif isinstance(cur, ast.Dot):
        names.append(ast.Ident(name=cur.name, line=cur.line, col=cur.col))
        cur = cur.obj
    while isinstance(cur, ast.Dot):
        names.append(ast.Ident(name=cur.name, line=cur.line, col=cur.col))
        cur = cur.obj
    names.reverse()
    return cur, names, args


def _clone(node: ast.Node, dim_map: dict, var_map: dict, resolver: Resolver) -> ast.Node:
    """Deep copy with dimension-parameter substitution and capture hygiene.

    `dim_map` renames dimension parameters to their actual dimensions;
    `var_map` renames body-local declarations that would otherwise collide
    with an incoming actual dimension name.
    """
    pos = {"line": node.line, "col": node.col}
    if isinstance(node, ast.Ident):
        name = var_map.get(node.name, dim_map.get(node.name, node.name))
        return ast.Ident(name=name, **pos)
    if isinstance(node, ast.Literal):
        return ast.Literal(value=node.value, kind=node.kind, **pos)
    if isinstance(node, ast.TagQuery):
        return ast.TagQuery(dim=_clone(node.dim, dim_map, var_map, resolver), **pos)
    if isinstance(node, ast.At):
        return ast.At(
            body=_clone(node.body, dim_map, var_map, resolver),
            bindings=[
                (_clone(d, dim_map, var_map, resolver), _clone(t, dim_map, var_map, resolver))
                for d, t in node.bindings
            ],
            **pos,
        )
    if isinstance(node, ast.If):
        return ast.If(
            cond=_clone(node.cond, dim_map, var_map, resolver),
            then=_clone(node.then, dim_map, var_map, resolver),
            orelse=_clone(node.orelse, dim_map, var_map, resolver),
            **pos,
        )
    if isinstance(node, ast.BinOp):
        return ast.BinOp(
            op=node.op,
            left=_clone(node.left, dim_map, var_map, resolver),
            right=_clone(node.right, dim_map, var_map, resolver),
            **pos,
        )
    if isinstance(node, ast.UnOp):
        return ast.UnOp(op=node.op, operand=_clone(node.operand, dim_map, var_map, resolver), **pos)
    if isinstance(node, ast.Call):
        return ast.Call(
            callee=_clone(node.callee, dim_map, var_map, resolver),
            args=[_clone(a, dim_map, var_map, resolver) for a in node.args],
            dim_args=[var_map.get(d, dim_map.get(d, d)) for d in node.dim_args],
            **pos,
        )
    if isinstance(node, ast.Dot):
        return ast.Dot(obj=_clone(node.obj, dim_map, var_map, resolver), name=node.name, **pos)
    if isinstance(node, ast.DotCall):
        return ast.DotCall(
            obj=_clone(node.obj, dim_map, var_map, resolver),
            name=node.name,
            args=[_clone(a, dim_map, var_map, resolver) for a in node.args],
            **pos,
        )
    if isinstance(node, ast.StreamOp):
        dim = var_map.get(node.dim, dim_map.get(node.dim, node.dim))
        return ast.StreamOp(
            op=node.op,
            dim=dim,
            x=_clone(node.x, dim_map, var_map, resolver),
            y=None if node.y is None else _clone(node.y, dim_map, var_map, resolver),
            **pos,
        )
    if isinstance(node, ast.Where):
        dim_map = dict(dim_map)
        var_map = dict(var_map)
        taken = set(dim_map.values())
        decls = []
        for decl in node.decls:
            if isinstance(decl, ast.DimDecl):
                # A declaration of the parameter name tracks the substitution;
                # dimensions are global axes, so redeclaring the actual is fine.
                decls.append(
                    ast.DimDecl(
                        names=[var_map.get(n, dim_map.get(n, n)) for n in decl.names],
                        line=decl.line,
                        col=decl.col,
                    )
                )
            else:
                name = decl.name
                if name in dim_map:
                    del dim_map[name]  # local value shadows the parameter name
                if name in taken:
                    var_map[name] = resolver._fresh_name(name)  # avoid capture
                decls.append(decl)
        out_decls = []
        for decl in decls:
            if isinstance(decl, ast.DimDecl):
                out_decls.append(decl)
            elif isinstance(decl, ast.VarDef):
                out_decls.append(
                    ast.VarDef(
                        name=var_map.get(decl.name, decl.name),
                        expr=_clone(decl.expr, dim_map, var_map, resolver),
                        line=decl.line,
                        col=decl.col,
                    )
                )
            else:
                inner_dims = {
                    k: v for k, v in dim_map.items() if k not in decl.dim_params
                }
                inner_vars = {
                    k: v for k, v in var_map.items()
                    if k not in decl.params and k not in decl.dim_params
                }
                out_decls.append(
                    ast.FunDef(
                        name=var_map.get(decl.name, decl.name),
                        dim_params=list(decl.dim_params),
                        params=list(decl.params),
                        expr=_clone(decl.expr, inner_dims, inner_vars, resolver),
                        line=decl.line,
                        col=decl.col,
                    )
                )
        return ast.Where(
            body=_clone(node.body, dim_map, var_map, resolver), decls=out_decls, **pos
        )
    raise TypeError("cannot clone %r" % (node,))
