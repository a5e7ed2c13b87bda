"""Tree-walking interpreter for host units, hybrid or translated.

Execution follows conventional strict object semantics until it reaches a
stream boundary: an embedded segment in expression position, or a read of
an unwritten intensional member, transfers control to the demand engine
with the object's context and a fresh snapshot of the captured host
values.  The translated form reaches the same engine through its
generated scaffolding (``__engine_i.eval(__ctx)`` and the ``__get_m``
accessors), so both forms print identical output.

Object construction is demand driven: plain fields initialise eagerly in
declaration order, while class-typed and intensional fields install lazy
thunks forced on first read.  That is what lets mutually-referential
classes construct each other without diverging.

Intensional members carry a written flag: once host code assigns one, its
reads return the host value and the engine is no longer consulted.

Per-object state includes a hidden context member (``__ctx`` in
translated output).  Evaluating an expression segment resets it to the
bindings derived from the segment's host-bound tags; it is not visible in
the hybrid surface syntax.  Reads of unwritten intensional members use
whatever it currently holds -- the engine's rebinding nodes carry the
actual coordinates, so the member is belt and braces, kept for parity
with the translated form.
"""

from __future__ import annotations

from .. import bridge
from ..bridge import HNULL, HVOID, FreeFunctionRegistry, HVal
from ..context import Context
from ..engine import Engine, Warehouse, Value, eval_pure, format_double, format_value
from ..engine import VOID_VALUE
from ..errors import HybError, HybRuntimeError
from . import ast


class HArray:
    __slots__ = ("elem_kind", "_items")

    def __init__(self, elem_kind: str, items):
        self.elem_kind = elem_kind
        self._items = list(items)

    def items(self):
        return list(self._items)

    def get(self, i: int) -> HVal:
        self._check(i)
        return self._items[i]

    def set(self, i: int, value: HVal):
        self._check(i)
        self._items[i] = value

    def _check(self, i):
        if not isinstance(i, int) or not (0 <= i < len(self._items)):
            raise HybRuntimeError("array index %r out of bounds (length %d)" % (i, len(self._items)))

    def __len__(self):
        return len(self._items)


class HostObject:
    __slots__ = ("class_name", "oid", "slots", "ctx")

    def __init__(self, class_name: str, oid: int):
        self.class_name = class_name
        self.oid = oid
        self.slots: dict = {}
        self.ctx = Context()

    def __str__(self):
        return "%s@%d" % (self.class_name, self.oid)

    def __repr__(self):
        return "<HostObject %s>" % self


class ReturnSignal(Exception):
    def __init__(self, value: HVal):
        self.value = value


_BUILTIN_CLASSES = {"__Program": "program", "__Engine": "engine", "__Ctx": "context"}
_WIDEN = {
    "int": {"int"},
    "long": {"int", "long"},
    "float": {"int", "long", "float"},
    "double": {"int", "long", "float", "double"},
}


def format_hval(h: HVal) -> str:
    k = h.kind
    if k in ("int", "long"):
        return str(h.v)
    if k == "double":
        return format_double(h.v)
    if k == "float":
        return format_double(h.v)
    if k == "boolean":
        return "true" if h.v else "false"
    if k in ("String", "char"):
        return str(h.v)
    if k == "null":
        return "null"
    if k == "object":
        return str(h.v)
    if k == "array":
        return "[%s]" % ", ".join(format_hval(e) for e in h.v.items())
    if k == "context":
        from ..context import format_context

        return format_context(h.v)
    if k == "lucid":
        return format_value(h.v)
    return "<%s>" % k


class Frame:
    __slots__ = ("this_obj", "cls", "params", "param_types", "locals", "local_types")

    def __init__(self, this_obj, cls, params=None, param_types=None):
        self.this_obj = this_obj
        self.cls = cls
        self.params = params or {}
        self.param_types = param_types or {}
        self.locals: list[dict] = [{}]
        self.local_types: dict = {}

    def push(self):
        self.locals.append({})

    def pop(self):
        self.locals.pop()

    def find_local(self, name):
        for scope in reversed(self.locals):
            if name in scope:
                return scope
        return None


class Interpreter:
    def __init__(self, unit, warehouse: Warehouse | None = None, trace=None, warn=None):
        self.unit = unit
        self.warn = warn or (lambda msg: None)
        self.engine = Engine(warehouse=warehouse, bridge=InterpreterBridge(self), trace=trace)
        self.registry = FreeFunctionRegistry()
        self.statics: dict = {}
        self._out: list[str] = []
        self._oid = 0
        self._forcing: set = set()
        for name, decl in unit.free_funs.items():
            self.registry.register(name, decl)

    # -- program entry ------------------------------------------------------------

    def run(self, argv=None) -> str:
        self.load()
        main_cls = self.unit.main_class
        if main_cls is None:
            raise HybRuntimeError("no main method in unit")
        instance = self.construct_object(main_cls, [], user_ctor="if-zero-arg")
        decl = self._method_decl(main_cls, "main")
        self.invoke(instance, main_cls, decl, [HNULL])
        return self.output()

    def output(self) -> str:
        return "".join(self._out)

    def load(self):
        """Initialise statics and run static blocks, in declaration order."""
        for cname, cdecl in self.unit.classes.items():
            store = self.statics.setdefault(cname, {})
            for member in cdecl.members:
                if isinstance(member, ast.FieldDecl) and "static" in member.modifiers:
                    if member.init is None or isinstance(member.init, ast.Segment):
                        store[member.name] = self._default(member.type)
                    else:
                        frame = Frame(None, cname)
                        store[member.name] = self._coerce(
                            self.eval_expr(member.init, frame), member.type
                        )
            for member in cdecl.members:
                if isinstance(member, ast.StaticBlock):
                    frame = Frame(None, cname)
                    self.exec_block(member.body, frame)

    # -- objects --------------------------------------------------------------------

    def construct_object(self, class_name: str, args, ctx: Context | None = None,
                         user_ctor=True):
        cdecl = self.unit.classes.get(class_name)
        if cdecl is None:
            raise HybRuntimeError("unknown class '%s'" % class_name)
        self._oid += 1
        obj = HostObject(class_name, self._oid)
        obj.ctx = ctx or Context()
        for member in cdecl.members:
            if not isinstance(member, ast.FieldDecl) or "static" in member.modifiers:
                continue
            if isinstance(member.init, ast.Segment):
                obj.slots[member.name] = ["intensional", False, None]
            elif self._is_lazy_type(member.type):
                obj.slots[member.name] = ["lazy", member.init, member.type]
            else:
                frame = Frame(obj, class_name)
                value = (
                    self._coerce(self.eval_expr(member.init, frame), member.type)
                    if member.init is not None
                    else self._default(member.type)
                )
                obj.slots[member.name] = ["value", value, member.type]
        ctor = self._constructor(class_name)
        if ctor is not None and (user_ctor is True or (user_ctor == "if-zero-arg" and not ctor.params)):
            if user_ctor == "if-zero-arg" and ctor.params:
                return obj
            if len(ctor.params) != len(args):
                raise HybRuntimeError(
                    "constructor of %s expects %d argument(s), got %d"
                    % (class_name, len(ctor.params), len(args))
                )
            self.invoke(obj, class_name, ctor, args)
        elif ctor is None and args:
            raise HybRuntimeError("class %s has no constructor taking arguments" % class_name)
        return obj

    def _is_lazy_type(self, htype: ast.HType) -> bool:
        if htype.is_array:
            return False
        return htype.name in self.unit.classes or htype.name in _BUILTIN_CLASSES

    def _constructor(self, class_name):
        table = self.unit.tables[class_name]
        entry = table.members.get(class_name)
        if entry is not None and entry.kind == "constructor":
            return entry.decl
        return None

    def _method_decl(self, class_name, name):
        entry = self.unit.tables[class_name].members.get(name)
        if entry is None or entry.kind != "method":
            raise HybRuntimeError("no such method: %s.%s" % (class_name, name))
        return entry.decl

    # -- fields -----------------------------------------------------------------------

    def read_field(self, obj: HostObject, name: str, from_class=None) -> HVal:
        if obj is None:
            raise HybRuntimeError("null dereference reading field '%s'" % name)
        entry = self._field_entry(obj.class_name, name, from_class)
        slot = obj.slots.get(name)
        if slot is None:
            store = self.statics.get(obj.class_name, {})
            if name in store:
                return store[name]
            raise HybRuntimeError("no such member: %s.%s" % (obj.class_name, name))
        if slot[0] == "value":
            return slot[1]
        if slot[0] == "lazy":
            key = (obj.oid, name)
            if key in self._forcing:
                raise HybRuntimeError(
                    "field initialisation cycle at %s.%s" % (obj.class_name, name)
                )
            self._forcing.add(key)
            try:
                frame = Frame(obj, obj.class_name)
                value = (
                    self._coerce(self.eval_expr(slot[1], frame), slot[2])
                    if slot[1] is not None
                    else self._default(slot[2])
                )
            finally:
                self._forcing.discard(key)
            obj.slots[name] = ["value", value, slot[2]]
            return value
        # intensional member
        if slot[1]:
            return slot[2]
        value = self.engine.eval_member(obj, name, obj.ctx)
        declared = entry.declared_type
        return bridge.to_host(value, declared, warn=self.warn, class_of=lambda o: o.class_name)

    def write_field(self, obj: HostObject, name: str, value: HVal, from_class=None):
        if obj is None:
            raise HybRuntimeError("null dereference writing field '%s'" % name)
        entry = self._field_entry(obj.class_name, name, from_class)
        slot = obj.slots.get(name)
        if slot is None:
            store = self.statics.get(obj.class_name, {})
            if name in store:
                store[name] = self._coerce(value, entry.declared_type)
                return
            raise HybRuntimeError("no such member: %s.%s" % (obj.class_name, name))
        coerced = self._coerce(value, entry.declared_type)
        if slot[0] == "intensional":
            obj.slots[name] = ["intensional", True, coerced]
        else:
            obj.slots[name] = ["value", coerced, entry.declared_type]

    def _field_entry(self, class_name, name, from_class):
        table = self.unit.tables.get(class_name)
        entry = table.members.get(name) if table else None
        if entry is None or entry.kind != "field":
            raise HybRuntimeError("no such member: %s.%s" % (class_name, name))
        if from_class != class_name and entry.visibility != "public":
            raise HybRuntimeError("member not accessible: %s.%s" % (class_name, name))
        return entry

    # -- invocation ----------------------------------------------------------------------

    def invoke(self, this_obj, class_name, decl, args) -> HVal:
        if len(args) != len(decl.params):
            raise HybRuntimeError(
                "arity mismatch calling %s: expected %d argument(s), got %d"
                % (decl.name, len(decl.params), len(args))
            )
        params = {}
        ptypes = {}
        for (ptype, pname), arg in zip(decl.params, args):
            params[pname] = self._coerce(arg, ptype)
            ptypes[pname] = ptype
        frame = Frame(this_obj, class_name, params, ptypes)
        try:
            self.exec_block(decl.body, frame)
        except ReturnSignal as signal:
            if decl.is_ctor or decl.return_type is None:
                return HVOID
            if decl.return_type.name == "void":
                return HVOID
            return self._coerce(signal.value, decl.return_type)
        if decl.is_ctor or decl.return_type is None or decl.return_type.name == "void":
            return HVOID
        raise HybRuntimeError(
            "method %s.%s fell off the end without returning a %s"
            % (class_name, decl.name, decl.return_type)
        )

    def call_free_function(self, name, args) -> HVal:
        fn = self.registry.lookup(name)
        if fn is None:
            raise HybRuntimeError("undefined free function '%s'" % name)
        if isinstance(fn, ast.FreeFun):
            if len(args) != len(fn.params):
                raise HybRuntimeError(
                    "arity mismatch calling %s: expected %d argument(s), got %d"
                    % (name, len(fn.params), len(args))
                )
            params = {p[1]: self._coerce(a, p[0]) for p, a in zip(fn.params, args)}
            ptypes = {p[1]: p[0] for p in fn.params}
            frame = Frame(None, None, params, ptypes)
            try:
                self.exec_block(fn.body, frame)
            except ReturnSignal as signal:
                if fn.return_type.name == "void":
                    return HVOID
                return self._coerce(signal.value, fn.return_type)
            if fn.return_type.name == "void":
                return HVOID
            raise HybRuntimeError("function %s fell off the end without returning" % name)
        # a Python callable registered programmatically
        raw = fn(*[a.v for a in args])
        return _wrap_python(raw)

    # -- statements ------------------------------------------------------------------------

    def exec_block(self, block: ast.Block, frame: Frame):
        frame.push()
        try:
            for stmt in block.stmts:
                self.exec_stmt(stmt, frame)
        finally:
            frame.pop()

    def exec_stmt(self, stmt, frame: Frame):
        if isinstance(stmt, ast.Block):
            self.exec_block(stmt, frame)
        elif isinstance(stmt, ast.LocalDecl):
            value = (
                self._coerce(self.eval_expr(stmt.init, frame), stmt.type)
                if stmt.init is not None
                else self._default(stmt.type)
            )
            frame.locals[-1][stmt.name] = value
            frame.local_types[stmt.name] = stmt.type
        elif isinstance(stmt, ast.Assign):
            self._assign(stmt.target, self.eval_expr(stmt.expr, frame), frame)
        elif isinstance(stmt, ast.IfStmt):
            cond = self.eval_expr(stmt.cond, frame)
            if cond.kind != "boolean":
                raise HybRuntimeError("if condition must be boolean, got %s" % cond.kind)
            if cond.v:
                self.exec_stmt(stmt.then, frame)
            elif stmt.orelse is not None:
                self.exec_stmt(stmt.orelse, frame)
        elif isinstance(stmt, ast.ForStmt):
            frame.push()
            try:
                if stmt.init is not None:
                    self.exec_stmt(stmt.init, frame)
                while True:
                    if stmt.cond is not None:
                        cond = self.eval_expr(stmt.cond, frame)
                        if cond.kind != "boolean":
                            raise HybRuntimeError(
                                "for condition must be boolean, got %s" % cond.kind
                            )
                        if not cond.v:
                            break
                    self.exec_stmt(stmt.body, frame)
                    if stmt.update is not None:
                        self.exec_stmt(stmt.update, frame)
            finally:
                frame.pop()
        elif isinstance(stmt, ast.ReturnStmt):
            value = self.eval_expr(stmt.expr, frame) if stmt.expr is not None else HVOID
            raise ReturnSignal(value)
        elif isinstance(stmt, ast.ExprStmt):
            self.eval_expr(stmt.expr, frame)
        else:
            raise AssertionError("unknown statement %r" % (stmt,))

    def _assign(self, target, value: HVal, frame: Frame):
        if isinstance(target, ast.HName):
            name = target.name
            scope = frame.find_local(name)
            if scope is not None:
                scope[name] = self._coerce(value, frame.local_types[name])
                return
            if name in frame.params:
                frame.params[name] = self._coerce(value, frame.param_types[name])
                return
            if frame.this_obj is not None and name in frame.this_obj.slots:
                self.write_field(frame.this_obj, name, value, from_class=frame.cls)
                return
            store = self.statics.get(frame.cls, {})
            if name in store:
                entry = self.unit.tables[frame.cls].members[name]
                store[name] = self._coerce(value, entry.declared_type)
                return
            raise HybRuntimeError("undefined name '%s'" % name)
        if isinstance(target, ast.HField):
            obj = self.eval_expr(target.obj, frame)
            if obj.kind != "object":
                raise HybRuntimeError("field assignment on non-object (%s)" % obj.kind)
            self.write_field(obj.v, target.name, value, from_class=frame.cls)
            return
        if isinstance(target, ast.HIndex):
            arr = self.eval_expr(target.obj, frame)
            idx = self.eval_expr(target.index, frame)
            if arr.kind != "array":
                raise HybRuntimeError("indexing a non-array (%s)" % arr.kind)
            if idx.kind not in ("int", "long"):
                raise HybRuntimeError("array index must be an integer")
            arr.v.set(idx.v, self._coerce(value, ast.HType(arr.v.elem_kind)))
            return
        raise AssertionError("bad assignment target")

    # -- expressions ----------------------------------------------------------------------

    def eval_expr(self, node, frame: Frame) -> HVal:
        if isinstance(node, ast.HLit):
            if node.kind == "null":
                return HNULL
            return HVal(node.kind, node.value)
        if isinstance(node, ast.HName):
            return self._name_value(node.name, frame)
        if isinstance(node, ast.HThis):
            if frame.this_obj is None:
                raise HybRuntimeError("'this' outside an instance context")
            return HVal("object", frame.this_obj)
        if isinstance(node, ast.HBin):
            return self._binop(node, frame)
        if isinstance(node, ast.HUn):
            value = self.eval_expr(node.operand, frame)
            if node.op == "-":
                if value.kind in ("int", "long"):
                    return HVal(value.kind, -value.v)
                if value.kind in ("double", "float"):
                    return HVal("double", -value.v)
            if node.op == "!" and value.kind == "boolean":
                return HVal("boolean", not value.v)
            raise HybRuntimeError("cannot apply unary '%s' to %s" % (node.op, value.kind))
        if isinstance(node, ast.HIndex):
            arr = self.eval_expr(node.obj, frame)
            idx = self.eval_expr(node.index, frame)
            if arr.kind != "array":
                raise HybRuntimeError("indexing a non-array (%s)" % arr.kind)
            if idx.kind not in ("int", "long"):
                raise HybRuntimeError("array index must be an integer")
            return arr.v.get(idx.v)
        if isinstance(node, ast.HField):
            obj = self.eval_expr(node.obj, frame)
            if obj.kind != "object":
                raise HybRuntimeError("field access on non-object (%s)" % obj.kind)
            return self.read_field(obj.v, node.name, from_class=frame.cls)
        if isinstance(node, ast.HNew):
            return self._new(node, frame)
        if isinstance(node, ast.HNewArray):
            items = [
                self._coerce(self.eval_expr(e, frame), node.elem_type) for e in node.items
            ]
            return HVal("array", HArray(node.elem_type.name, items))
        if isinstance(node, ast.HCall):
            return self._call(node, frame)
        if isinstance(node, ast.HMethod):
            return self._method_call(node, frame)
        if isinstance(node, ast.Segment):
            return self.eval_segment(node, frame)
        raise AssertionError("unknown expression %r" % (node,))

    def _name_value(self, name, frame: Frame) -> HVal:
        scope = frame.find_local(name)
        if scope is not None:
            return scope[name]
        if name in frame.params:
            return frame.params[name]
        if frame.this_obj is not None and name in frame.this_obj.slots:
            return self.read_field(frame.this_obj, name, from_class=frame.cls)
        if frame.cls is not None:
            store = self.statics.get(frame.cls, {})
            if name in store:
                return store[name]
        raise HybRuntimeError("undefined name '%s'" % name)

    def _new(self, node: ast.HNew, frame: Frame) -> HVal:
        name = node.class_name
        args = [self.eval_expr(a, frame) for a in node.args]
        if name in _BUILTIN_CLASSES:
            if name == "__Ctx":
                return HVal("context", Context())
            if name == "__Engine":
                if len(args) != 1 or args[0].kind != "program":
                    raise HybRuntimeError("__Engine takes one compiled program")
                return HVal("engine", (args[0].v, frame.this_obj))
            raise HybRuntimeError("cannot construct %s directly" % name)
        return HVal("object", self.construct_object(name, args))

    def _call(self, node: ast.HCall, frame: Frame) -> HVal:
        name = node.name
        args = [self.eval_expr(a, frame) for a in node.args]
        if frame.cls is not None:
            table = self.unit.tables.get(frame.cls)
            entry = table.members.get(name) if table else None
            if entry is not None and entry.kind == "method":
                return self.invoke(frame.this_obj, frame.cls, entry.decl, args)
        if self.registry.lookup(name) is not None:
            return self.call_free_function(name, args)
        if name in ("print", "println"):
            if len(args) > 1:
                raise HybRuntimeError("%s expects at most one argument" % name)
            text = format_hval(args[0]) if args else ""
            self._out.append(text + ("\n" if name == "println" else ""))
            return HVOID
        if name == "__compile":
            return self._builtin_compile(args, frame)
        if name == "__bind":
            return self._builtin_bind(args)
        if name == "__convert":
            return self._builtin_convert(args)
        raise HybRuntimeError("undefined function '%s'" % name)

    def _method_call(self, node: ast.HMethod, frame: Frame) -> HVal:
        obj = self.eval_expr(node.obj, frame)
        args = [self.eval_expr(a, frame) for a in node.args]
        if obj.kind == "String":
            if node.name == "equals" and len(args) == 1:
                return HVal("boolean", args[0].kind == "String" and obj.v == args[0].v)
            raise HybRuntimeError("no such String method '%s'" % node.name)
        if obj.kind == "engine":
            if node.name != "eval" or len(args) != 1 or args[0].kind != "context":
                raise HybRuntimeError("engine handles support eval(context) only")
            program, owner = obj.v
            bindings = self._snapshot(program, owner, frame)
            value = self.engine.eval_program(program, args[0].v, bindings, owner=owner)
            return HVal("lucid", value)
        if obj.kind != "object":
            raise HybRuntimeError("method call on non-object (%s)" % obj.kind)
        target = obj.v
        entry = self.unit.tables[target.class_name].members.get(node.name)
        if entry is None or entry.kind != "method":
            raise HybRuntimeError("no such method: %s.%s" % (target.class_name, node.name))
        if frame.cls != target.class_name and entry.visibility != "public":
            raise HybRuntimeError(
                "member not accessible: %s.%s" % (target.class_name, node.name)
            )
        return self.invoke(target, target.class_name, entry.decl, args)

    # -- stream boundary ---------------------------------------------------------------------

    def eval_segment(self, seg: ast.Segment, frame: Frame) -> HVal:
        program = self.unit.programs[seg.index]
        obj = frame.this_obj
        bindings = self._segment_bindings(program, obj, frame)
        ctx = Context()
        for dim, tag_node in program.host_tag_binds:
            tag = eval_pure(tag_node, program, bindings)
            if tag.kind not in ("int", "string"):
                raise HybRuntimeError(
                    "context tag for '%s' must be an integer or string, got %s"
                    % (dim, tag.kind)
                )
            ctx = ctx.override({dim: tag.v})
        if obj is not None:
            obj.ctx = ctx
        value = self.engine.eval_program(program, ctx, bindings, owner=obj)
        return bridge.to_host(value, None, warn=self.warn)

    def _segment_bindings(self, program, obj, frame: Frame | None) -> dict:
        bindings = {}
        for kind, name in program.captures:
            if kind == "member":
                if obj is None:
                    raise HybRuntimeError(
                        "no enclosing object for captured member '%s'" % name
                    )
                bindings[name] = bridge.to_lucid(
                    self.read_field(obj, name, from_class=program.env.class_name)
                )
            else:  # param or deferred: enclosing-method parameters only
                if frame is not None and name in frame.params:
                    bindings[name] = bridge.to_lucid(frame.params[name])
        return bindings

    def _snapshot(self, program, owner, frame: Frame | None) -> dict:
        return self._segment_bindings(program, owner, frame)

    # -- translated-unit builtins -----------------------------------------------------------

    def _builtin_compile(self, args, frame: Frame) -> HVal:
        if len(args) != 2 or args[0].kind != "String" or args[1].kind != "String":
            raise HybRuntimeError("__compile takes (tag, source) strings")
        key = (frame.cls, args[0].v or "GIPL", args[1].v)
        program = self.unit.programs_by_source.get(key)
        if program is None:
            raise HybRuntimeError("no compiled segment for this source in class %s" % frame.cls)
        return HVal("program", program)

    def _builtin_bind(self, args) -> HVal:
        if len(args) != 3 or args[0].kind != "context" or args[1].kind != "String":
            raise HybRuntimeError("__bind takes (context, dimension name, tag)")
        tag = args[2]
        if tag.kind in ("int",):
            value = tag.v
        elif tag.kind == "String":
            value = tag.v
        else:
            raise HybRuntimeError(
                "context tag must be an integer or string, got %s" % tag.kind
            )
        return HVal("context", args[0].v.override({args[1].v: value}))

    def _builtin_convert(self, args) -> HVal:
        if len(args) != 2 or args[0].kind != "lucid" or args[1].kind != "String":
            raise HybRuntimeError("__convert takes (stream value, type name)")
        spec = args[1].v
        if spec == "":
            return bridge.to_host(args[0].v, None, warn=self.warn)
        is_array = spec.endswith("[]")
        htype = ast.HType(spec[:-2] if is_array else spec, is_array)
        return bridge.to_host(
            args[0].v, htype, warn=self.warn, class_of=lambda o: o.class_name
        )

    # -- host arithmetic -----------------------------------------------------------------------

    def _binop(self, node: ast.HBin, frame: Frame) -> HVal:
        op = node.op
        if op in ("&&", "||"):
            left = self.eval_expr(node.left, frame)
            if left.kind != "boolean":
                raise HybRuntimeError("cannot apply '%s' to %s" % (op, left.kind))
            if op == "&&" and not left.v:
                return HVal("boolean", False)
            if op == "||" and left.v:
                return HVal("boolean", True)
            right = self.eval_expr(node.right, frame)
            if right.kind != "boolean":
                raise HybRuntimeError("cannot apply '%s' to %s" % (op, right.kind))
            return HVal("boolean", right.v)
        left = self.eval_expr(node.left, frame)
        right = self.eval_expr(node.right, frame)
        return host_binop(op, left, right)

    # -- conversions ------------------------------------------------------------------------------

    def _default(self, htype: ast.HType) -> HVal:
        if htype.is_array:
            return HNULL
        name = htype.name
        if name in ("int", "long"):
            return HVal(name, 0)
        if name == "double":
            return HVal("double", 0.0)
        if name == "float":
            return HVal("float", 0.0)
        if name == "boolean":
            return HVal("boolean", False)
        if name == "String":
            return HVal("String", "")
        return HNULL

    def _coerce(self, value: HVal, htype: ast.HType | None) -> HVal:
        if htype is None:
            return value
        name = htype.name
        if htype.is_array:
            if value.kind == "null":
                return value
            if value.kind == "array":
                return value
            raise HybRuntimeError("cannot assign %s to %s" % (value.kind, htype))
        if name in _WIDEN:
            if value.kind in _WIDEN[name]:
                if name == "float":
                    rounded = bridge.float32(float(value.v))
                    if value.kind == "float":
                        return value
                    return HVal("float", rounded)
                if name == "double":
                    return HVal("double", float(value.v))
                return HVal(name, value.v)
            if name == "float" and value.kind == "double":
                rounded = bridge.float32(value.v)
                if rounded != value.v:
                    self.warn("double %r is not exactly representable as float" % value.v)
                return HVal("float", rounded)
            raise HybRuntimeError("cannot assign %s to %s" % (value.kind, name))
        if name == "boolean":
            if value.kind == "boolean":
                return value
            raise HybRuntimeError("cannot assign %s to boolean" % value.kind)
        if name == "String":
            if value.kind in ("String", "null"):
                return value
            raise HybRuntimeError("cannot assign %s to String" % value.kind)
        if name in _BUILTIN_CLASSES:
            if value.kind in (_BUILTIN_CLASSES[name], "null"):
                return value
            raise HybRuntimeError("cannot assign %s to %s" % (value.kind, name))
        if name == "void":
            raise HybRuntimeError("cannot assign to void")
        # class type
        if value.kind == "null":
            return value
        if value.kind == "object" and value.v.class_name == name:
            return value
        raise HybRuntimeError(
            "cannot assign %s to %s"
            % (value.v.class_name if value.kind == "object" else value.kind, name)
        )


def host_binop(op: str, left: HVal, right: HVal) -> HVal:
    lk, rk = left.kind, right.kind
    numeric = ("int", "long", "double", "float")
    if op == "+" and (lk == "String" or rk == "String"):
        return HVal("String", format_hval(left) + format_hval(right))
    if op in ("+", "-", "*", "/", "%"):
        if lk in numeric and rk in numeric:
            if lk in ("int", "long") and rk in ("int", "long"):
                a, b = left.v, right.v
                kind = "long" if "long" in (lk, rk) else "int"
                if op == "+":
                    return HVal(kind, a + b)
                if op == "-":
                    return HVal(kind, a - b)
                if op == "*":
                    return HVal(kind, a * b)
                if b == 0:
                    raise HybRuntimeError("division by zero")
                q = abs(a) // abs(b)
                q = q if (a >= 0) == (b >= 0) else -q
                return HVal(kind, q if op == "/" else a - q * b)
            a, b = float(left.v), float(right.v)
            if op == "%":
                raise HybRuntimeError("'%' is defined on integers only")
            if op == "+":
                return HVal("double", a + b)
            if op == "-":
                return HVal("double", a - b)
            if op == "*":
                return HVal("double", a * b)
            if b == 0.0:
                raise HybRuntimeError("division by zero")
            return HVal("double", a / b)
        raise HybRuntimeError("cannot apply '%s' to %s and %s" % (op, lk, rk))
    if op in ("==", "!="):
        if lk in numeric and rk in numeric:
            result = float(left.v) == float(right.v) if lk != rk else left.v == right.v
        elif lk == "null" or rk == "null":
            result = left.kind == right.kind
        elif lk == "object" and rk == "object":
            result = left.v is right.v
        elif lk == rk:
            result = left.v == right.v
        else:
            result = False
        return HVal("boolean", result if op == "==" else not result)
    if op in ("<", "<=", ">", ">="):
        if lk in numeric and rk in numeric:
            a, b = left.v, right.v
        else:
            raise HybRuntimeError("cannot apply '%s' to %s and %s" % (op, lk, rk))
        return HVal(
            "boolean",
            a < b if op == "<" else a <= b if op == "<=" else a > b if op == ">" else a >= b,
        )
    raise AssertionError("unknown operator %r" % op)


def _wrap_python(raw) -> HVal:
    if raw is None:
        return HVOID
    if isinstance(raw, bool):
        return HVal("boolean", raw)
    if isinstance(raw, int):
        return HVal("int", raw)
    if isinstance(raw, float):
        return HVal("double", raw)
    if isinstance(raw, str):
        return HVal("String", raw)
    raise HybRuntimeError("free function returned an unmappable %r" % type(raw).__name__)


class InterpreterBridge:
    """What the demand engine sees of the host world."""

    def __init__(self, interp: Interpreter):
        self.interp = interp

    def class_of(self, obj):
        return obj.class_name

    def member_program(self, cls, name):
        return self.interp.unit.member_programs.get((cls, name))

    def member_written(self, obj, name):
        slot = obj.slots.get(name)
        if slot is not None and slot[0] == "intensional":
            return slot[1]
        flag = obj.slots.get("__%s_written" % name)
        if flag is not None and flag[0] == "value":
            return bool(flag[1].v)
        return False

    def member_host_value(self, obj, name):
        slot = obj.slots.get(name)
        if slot is not None and slot[0] == "intensional":
            return bridge.to_lucid(slot[2])
        return bridge.to_lucid(self.interp.read_field(obj, name, from_class=obj.class_name))

    def check_member_access(self, obj, name, from_class):
        self.interp._field_entry(obj.class_name, name, from_class)

    def read_plain_member(self, obj, name, from_class):
        entry = self.interp.unit.tables.get(obj.class_name)
        entry = entry.members.get(name) if entry else None
        if entry is not None and entry.kind != "field":
            raise HybRuntimeError("no such member: %s.%s" % (obj.class_name, name))
        return bridge.to_lucid(self.interp.read_field(obj, name, from_class=from_class))

    def call_method(self, obj, name, args, from_class):
        entry = self.interp.unit.tables[obj.class_name].members.get(name)
        if entry is None or entry.kind != "method":
            raise HybRuntimeError("no such method: %s.%s" % (obj.class_name, name))
        if from_class != obj.class_name and entry.visibility != "public":
            raise HybRuntimeError("member not accessible: %s.%s" % (obj.class_name, name))
        hargs = [bridge.to_host(v, None, warn=self.interp.warn) for v in args]
        result = self.interp.invoke(obj, obj.class_name, entry.decl, hargs)
        return bridge.to_lucid(result) if result.kind != "void" else VOID_VALUE
    def call_free(self, name, args, frame_hint=None):
        hargs = [bridge.to_host(v, None, warn=self.interp.warn) for v in args]
        result = self.interp.call_free_function(name, hargs)
        return bridge.to_lucid(result) if result.kind != "void" else VOID_VALUE

    def snapshot(self, obj, captures):
        return self.interp._segment_bindings(
            _ProgramView(captures, obj.class_name), obj, None
        )

    def is_mutable_class(self, cls):
        return cls in self.interp.unit.mutable


class _ProgramView:
    """Minimal capture-list carrier for snapshotting member programs."""

    def __init__(self, captures, class_name):
        self.captures = captures

        class _Env:
            pass

        self.env = _Env()
        self.env.class_name = class_name
