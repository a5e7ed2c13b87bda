"""The demand-driven evaluator and its value warehouse.

Evaluation is organised around demands: (definition node, lexical frame,
context) triples.  Variable, parameter, and member-stream references all
go through ``_demand``, which consults the warehouse first and stores on
completion.  A demand key is (unit digest, node id, frame token,
canonical key of the context projected onto the node's free dimensions).

Frames mirror lexical scopes at run time and are interned, so the same
scope entered from the same parent (with the same call arguments) reuses
one frame token and warehouse entries survive across demands.  Function
calls bind value parameters as definitions (call by name, memoised into
call by need per context).

Mutable host state is the one thing the warehouse must not capture: any
value computed through a dot access on an object of a statically mutable
class is tainted and never stored, so streams over mutable objects
advance instead of replaying their first cached element.  Pure values
computed underneath a tainted demand still get stored.

A value stored under a key is never overwritten with a different value;
re-demanding a key while it is being computed is a demand cycle and
reports the identifier chain instead of diverging.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from .context import Context, format_context
from .errors import DemandCycleError, HybRuntimeError
from .lucid import ast

sys.setrecursionlimit(max(sys.getrecursionlimit(), 50000))


# ---------------------------------------------------------------------------
# Values.

INT = "int"
FLOAT = "float"
DOUBLE = "double"
BOOL = "bool"
CHAR = "char"
STRING = "string"
ARRAY = "array"
OBJECT = "object"
CONTEXT = "context"
VOID = "void"


@dataclass(frozen=True)
class Value:
    kind: str
    v: object = None


TRUE = Value(BOOL, True)
FALSE = Value(BOOL, False)
# The void value carries boolean true, after the type table's void row.
VOID_VALUE = Value(VOID, True)


def vint(n: int) -> Value:
    return Value(INT, n)


def vdouble(x: float) -> Value:
    return Value(DOUBLE, float(x))


def vbool(b: bool) -> Value:
    return TRUE if b else FALSE


def vstring(s: str) -> Value:
    return Value(STRING, s)


def format_double(x: float) -> str:
    return repr(float(x))


def format_value(value: Value) -> str:
    k = value.kind
    if k == INT:
        return str(value.v)
    if k in (DOUBLE, FLOAT):
        return format_double(value.v)
    if k == BOOL:
        return "true" if value.v else "false"
    if k in (STRING, CHAR):
        return str(value.v)
    if k == ARRAY:
        return "[%s]" % ", ".join(format_value(e) for e in value.v)
    if k == OBJECT:
        return str(value.v)
    if k == CONTEXT:
        return format_context(value.v)
    if k == VOID:
        return "void"
    raise AssertionError(k)


# ---------------------------------------------------------------------------
# Warehouse.


class Warehouse:
    """Write-once memo store for demand results, with instrumentation."""

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self.store: dict = {}
        self.demands = 0
        self.hits = 0
        self.misses = 0
        self.def_evals: dict = {}  # display name -> body evaluations
        self.node_evals = 0
        self.in_flight = 0

    def reset(self):
        self.store.clear()
        self.demands = 0
        self.hits = 0
        self.misses = 0
        self.def_evals.clear()
        self.node_evals = 0
        self.in_flight = 0

    def put(self, key, value: Value):
        old = self.store.get(key)
        if old is not None and old != value:
            raise AssertionError("warehouse overwrite at %r: %r -> %r" % (key, old, value))
        self.store[key] = value

    def stats(self) -> dict:
        return {
            "demands": self.demands,
            "hits": self.hits,
            "misses": self.misses,
            "in_flight": self.in_flight,
            "node_evals": self.node_evals,
            "def_evals": dict(self.def_evals),
        }


# ---------------------------------------------------------------------------
# Frames.


class Frame:
    __slots__ = ("scope", "parent", "slots", "token", "captures", "owner")

    def __init__(self, scope, parent, token, slots=None, captures=None, owner=None):
        self.scope = scope
        self.parent = parent
        self.token = token
        self.slots = slots or {}
        self.captures = captures
        self.owner = owner

    def find_scope(self, scope) -> "Frame":
        fr = self
        while fr is not None:
            if fr.scope is scope:
                return fr
            fr = fr.parent
        raise AssertionError("no frame for scope %s" % getattr(scope, "label", scope))

    def find_captures(self, name):
        fr = self
        while fr is not None:
            if fr.captures is not None and name in fr.captures:
                return fr.captures[name]
            fr = fr.parent
        return None

    def base_owner(self):
        fr = self
        while fr is not None:
            if fr.owner is not None:
                return fr.owner
            fr = fr.parent
        return None


class NullBridge:
    """Host bridge for standalone expressions: no objects, no free functions."""

    def member_program(self, cls, name):
        return None

    def member_written(self, obj, name):
        raise HybRuntimeError("no host environment")

    def member_host_value(self, obj, name):
        raise HybRuntimeError("no host environment")

    def read_plain_member(self, obj, name, from_class):
        raise HybRuntimeError("no host environment")

    def call_method(self, obj, name, args, from_class):
        raise HybRuntimeError("no host environment")

    def call_free(self, name, args, frame_hint=None):
        raise HybRuntimeError("undefined free function '%s'" % name)

    def snapshot(self, obj, captures):
        return {}

    def is_mutable_class(self, cls):
        return False

    def check_member_access(self, obj, name, from_class):
        pass

    def class_of(self, obj):
        raise HybRuntimeError("no host environment")


# ---------------------------------------------------------------------------
# Evaluator.


class Engine:
    def __init__(self, warehouse: Warehouse | None = None, bridge=None, trace=None):
        self.warehouse = warehouse if warehouse is not None else Warehouse()
        self.bridge = bridge if bridge is not None else NullBridge()
        self.trace = trace  # callable(str) or None
        self._frames: dict = {}
        self._next_token = 0
        self._in_flight: dict = {}
        self._demand_stack: list[str] = []
        self._taint: list[bool] = []
        self._member_frames: dict = {}

    # -- frames ----------------------------------------------------------------

    def _new_token(self) -> int:
        self._next_token += 1
        return self._next_token

    def _intern(self, scope, parent: Frame, args_sig=(), slots=None) -> Frame:
        key = (id(scope), parent.token if parent else 0, args_sig)
        frame = self._frames.get(key)
        if frame is None:
            frame = Frame(scope, parent, self._new_token(), slots=slots)
            self._frames[key] = frame
        return frame

    # -- public entry points -----------------------------------------------------

    def eval_program(self, program, ctx: Context, bindings=None, owner=None) -> Value:
        """Evaluate a program root at `ctx` with capture `bindings` (a map of
        capture name -> Value, snapshotted by the caller at demand time)."""
        frame = Frame(
            program.base_scope,
            None,
            self._new_token(),
            captures=dict(bindings or {}),
            owner=owner,
        )
        self._taint.append(False)
        try:
            return self.eval(program.root, ctx, frame, program)
        finally:
            self._taint.pop()

    def eval_member(self, obj, name: str, ctx: Context) -> Value:
        """Demand an intensional member of a host object (host-side read of
        an unwritten member, at the object's current context)."""
        self._taint.append(False)
        try:
            return self._demand_member(obj, name, ctx, via_dot=False)
        finally:
            self._taint.pop()

    # -- demands -----------------------------------------------------------------

    def _demand(self, program, def_node, body, ctx, frame: Frame, name: str) -> Value:
        w = self.warehouse
        free = program.free_dims.get(def_node.nid)
        proj = ctx.project(sorted(free)) if free is not None else ctx
        key = (program.unit_digest or program.digest, def_node.nid, frame.token, proj.canonical_key())
        w.demands += 1
        if w.enabled:
            cached = w.store.get(key)
            if cached is not None:
                w.hits += 1
                self._emit_trace(def_node, proj, cached)
                return cached
        if key in self._in_flight:
            chain = self._demand_stack[self._demand_stack.index(self._in_flight[key]):]
            raise DemandCycleError(
                "demand cycle: %s" % " -> ".join(chain + [name]), tuple(self._demand_stack)
            )
        w.misses += 1
        w.def_evals[name] = w.def_evals.get(name, 0) + 1
        self._in_flight[key] = name
        self._demand_stack.append(name)
        self._taint.append(False)
        w.in_flight = len(self._in_flight)
        try:
            value = self.eval(body, ctx, frame, program)
        finally:
            tainted = self._taint.pop()
            del self._in_flight[key]
            self._demand_stack.pop()
            w.in_flight = len(self._in_flight)
        if self._taint:
            self._taint[-1] = self._taint[-1] or tainted
        if w.enabled and not tainted:
            w.put(key, value)
        self._emit_trace(def_node, proj, value)
        return value

    def _emit_trace(self, def_node, proj, value):
        if self.trace is not None:
            self.trace(
                "DEMAND n%d @ %s -> %s" % (def_node.nid, format_context(proj), format_value(value))
            )

    def _demand_member(self, obj, name: str, ctx: Context, via_dot: bool) -> Value:
        bridge = self.bridge
        cls = bridge.class_of(obj)
        if bridge.member_written(obj, name):
            return bridge.member_host_value(obj, name)
        entry = bridge.member_program(cls, name)
        if entry is None:
            raise HybRuntimeError(
                "no such member: '%s' has no intensional member '%s'" % (cls, name),
                tuple(self._demand_stack),
            )
        program = entry
        fkey = (program.label, getattr(obj, "oid", id(obj)))
        frame = self._member_frames.get(fkey)
        if frame is None:
            frame = Frame(
                program.base_scope,
                None,
                self._new_token(),
                captures=bridge.snapshot(obj, program.captures),
                owner=obj,
            )
            self._member_frames[fkey] = frame
        if via_dot and bridge.is_mutable_class(cls) and self._taint:
            self._taint[-1] = True
        return self._demand(program, program.root, program.root, ctx, frame, "%s.%s" % (cls, name))

    # -- the evaluator ------------------------------------------------------------

    def eval(self, node, ctx: Context, frame: Frame, program) -> Value:
        self.warehouse.node_evals += 1
        if isinstance(node, ast.Literal):
            return _literal_value(node)
        if isinstance(node, ast.Ident):
            return self._eval_ident(node, ctx, frame, program)
        if isinstance(node, ast.TagQuery):
            tag = ctx.query(node.dim.name)
            return vint(tag) if isinstance(tag, int) else vstring(tag)
        if isinstance(node, ast.At):
            delta = {}
            for dim, tag_expr in node.bindings:
                tag = self.eval(tag_expr, ctx, frame, program)
                if tag.kind == INT or tag.kind == STRING:
                    delta[dim.name] = tag.v
                else:
                    raise HybRuntimeError(
                        "type error: context tag for '%s' must be an integer or string, got %s"
                        % (dim.name, tag.kind),
                        tuple(self._demand_stack),
                    )
            return self.eval(node.body, ctx.override(delta), frame, program)
        if isinstance(node, ast.If):
            cond = self.eval(node.cond, ctx, frame, program)
            if cond.kind != BOOL:
                raise HybRuntimeError(
                    "type error: condition must be a boolean, got %s" % cond.kind,
                    tuple(self._demand_stack),
                )
            branch = node.then if cond.v else node.orelse
            return self.eval(branch, ctx, frame, program)
        if isinstance(node, ast.BinOp):
            return self._eval_binop(node, ctx, frame, program)
        if isinstance(node, ast.UnOp):
            return self._eval_unop(node, ctx, frame, program)
        if isinstance(node, ast.Where):
            scope = program.scopes_by_nid[node.nid]
            inner = self._intern(scope, frame)
            return self.eval(node.body, ctx, inner, program)
        if isinstance(node, ast.Call):
            return self._eval_call(node, ctx, frame, program)
        if isinstance(node, ast.Dot):
            return self._eval_dot_member(node, ctx, frame, program)
        if isinstance(node, ast.DotCall):
            return self._eval_dot_method(node, ctx, frame, program)
        raise AssertionError("cannot evaluate %r" % (node,))

    def _eval_ident(self, node, ctx, frame, program):
        binding = program.bindings.get(node.nid)
        if binding is None:
            raise AssertionError("unresolved identifier %r" % node.name)
        kind = binding[0]
        if kind == "var":
            vardef, scope = binding[1], binding[2]
            fr = frame.find_scope(scope)
            return self._demand(program, vardef, vardef.expr, ctx, fr, node.name)
        if kind == "param":
            pname, _spec_label, scope = binding[1], binding[2], binding[3]
            fr = frame.find_scope(scope)
            arg_node, caller = fr.slots[pname]
            return self._demand(program, arg_node, arg_node, ctx, caller, pname)
        if kind == "member":
            owner = frame.base_owner()
            if owner is None:
                raise HybRuntimeError(
                    "no enclosing object for member '%s'" % binding[2], tuple(self._demand_stack)
                )
            return self._demand_member(owner, binding[2], ctx, via_dot=False)
        if kind == "capture" or kind == "deferred":
            value = frame.find_captures(node.name)
            if value is None:
                if kind == "capture":
                    raise HybRuntimeError(
                        "capture '%s' missing from bindings" % node.name,
                        tuple(self._demand_stack),
                    )
                raise HybRuntimeError(
                    "undefined identifier '%s'" % node.name, tuple(self._demand_stack)
                )
            return value
        raise AssertionError("bad identifier binding %r" % (binding,))

    def _eval_call(self, node, ctx, frame, program):
        binding = program.bindings.get(node.nid)
        if binding is None:
            raise AssertionError("unresolved call")
        if binding[0] == "freefun":
            args = [self.eval(a, ctx, frame, program) for a in node.args]
            return self.bridge.call_free(node.callee.name, args, frame_hint=frame)
        if binding[0] == "call":
            spec, fun_scope = binding[1], binding[2]
            parent = frame.find_scope(fun_scope)
            args_sig = tuple((a.nid, frame.token) for a in node.args)
            key = (id(spec.params_scope), parent.token, args_sig)
            call_frame = self._frames.get(key)
            if call_frame is None:
                slots = {p: (a, frame) for p, a in zip(spec.params, node.args)}
                call_frame = Frame(spec.params_scope, parent, self._new_token(), slots=slots)
                self._frames[key] = call_frame
            return self.eval(spec.body, ctx, call_frame, program)
        raise AssertionError("bad call binding %r" % (binding,))

    def _eval_dot_member(self, node, ctx, frame, program):
        obj_value = self.eval(node.obj, ctx, frame, program)
        if obj_value.kind != OBJECT:
            raise HybRuntimeError(
                "type error: dot access on a non-object value (%s)" % obj_value.kind,
                tuple(self._demand_stack),
            )
        obj = obj_value.v
        bridge = self.bridge
        cls = bridge.class_of(obj)
        from_class = program.env.class_name
        if bridge.member_program(cls, node.name) is not None:
            bridge.check_member_access(obj, node.name, from_class)
            return self._demand_member(obj, node.name, ctx, via_dot=True)
        if bridge.is_mutable_class(cls) and self._taint:
            self._taint[-1] = True
        return bridge.read_plain_member(obj, node.name, from_class)

    def _eval_dot_method(self, node, ctx, frame, program):
        obj_value = self.eval(node.obj, ctx, frame, program)
        if obj_value.kind != OBJECT:
            raise HybRuntimeError(
                "type error: method call on a non-object value (%s)" % obj_value.kind,
                tuple(self._demand_stack),
            )
        obj = obj_value.v
        args = [self.eval(a, ctx, frame, program) for a in node.args]
        if self.bridge.is_mutable_class(self.bridge.class_of(obj)) and self._taint:
            self._taint[-1] = True
        return self.bridge.call_method(obj, node.name, args, program.env.class_name)

    # -- operators -------------------------------------------------------------

    def _eval_binop(self, node, ctx, frame, program):
        op = node.op
        if op == "&&" or op == "||":
            left = self.eval(node.left, ctx, frame, program)
            if left.kind != BOOL:
                self._op_type_error(op, left, None)
            if op == "&&" and not left.v:
                return FALSE
            if op == "||" and left.v:
                return TRUE
            right = self.eval(node.right, ctx, frame, program)
            if right.kind != BOOL:
                self._op_type_error(op, left, right)
            return vbool(right.v)
        left = self.eval(node.left, ctx, frame, program)
        right = self.eval(node.right, ctx, frame, program)
        return apply_binop(op, left, right, self._demand_stack)

    def _eval_unop(self, node, ctx, frame, program):
        value = self.eval(node.operand, ctx, frame, program)
        if node.op == "-":
            if value.kind == INT:
                return vint(-value.v)
            if value.kind in (DOUBLE, FLOAT):
                return vdouble(-value.v)
        if node.op == "!":
            if value.kind == BOOL:
                return vbool(not value.v)
        raise HybRuntimeError(
            "type error: cannot apply unary '%s' to %s" % (node.op, value.kind),
            tuple(self._demand_stack),
        )

    def _op_type_error(self, op, left, right):
        kinds = left.kind if right is None else "%s and %s" % (left.kind, right.kind)
        raise HybRuntimeError(
            "type error: cannot apply '%s' to %s" % (op, kinds), tuple(self._demand_stack)
        )


def _literal_value(node: ast.Literal) -> Value:
    if node.kind == "int":
        return vint(node.value)
    if node.kind == "double":
        return vdouble(node.value)
    if node.kind == "bool":
        return vbool(node.value)
    if node.kind == "string":
        return vstring(node.value)
    raise AssertionError(node.kind)


def eval_pure(node, program, bindings: dict) -> Value:
    """Evaluate a capture-only expression (literals, captured host values,
    arithmetic) without a context or frame.  Used for host-bound context
    tags, whose value must match what the translated call site computes."""
    if isinstance(node, ast.Literal):
        return _literal_value(node)
    if isinstance(node, ast.Ident):
        if node.name in bindings:
            return bindings[node.name]
        raise HybRuntimeError("undefined identifier '%s'" % node.name)
    if isinstance(node, ast.BinOp):
        left = eval_pure(node.left, program, bindings)
        right = eval_pure(node.right, program, bindings)
        if node.op in ("&&", "||"):
            if left.kind != BOOL or right.kind != BOOL:
                raise HybRuntimeError("type error: cannot apply '%s'" % node.op)
            return vbool(left.v and right.v if node.op == "&&" else left.v or right.v)
        return apply_binop(node.op, left, right)
    if isinstance(node, ast.UnOp):
        value = eval_pure(node.operand, program, bindings)
        if node.op == "-" and value.kind == INT:
            return vint(-value.v)
        if node.op == "-" and value.kind in (DOUBLE, FLOAT):
            return vdouble(-value.v)
        if node.op == "!" and value.kind == BOOL:
            return vbool(not value.v)
        raise HybRuntimeError("type error: cannot apply unary '%s'" % node.op)
    raise HybRuntimeError("not a host-evaluable expression")


def trunc_div(a: int, b: int) -> int:
    if b == 0:
        raise HybRuntimeError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def trunc_rem(a: int, b: int) -> int:
    if b == 0:
        raise HybRuntimeError("division by zero")
    return a - trunc_div(a, b) * b


_NUMERIC = (INT, DOUBLE, FLOAT)


def apply_binop(op: str, left: Value, right: Value, stack=()) -> Value:
    lk, rk = left.kind, right.kind
    if op in ("+", "-", "*", "/", "%"):
        if lk == INT and rk == INT:
            a, b = left.v, right.v
            if op == "+":
                return vint(a + b)
            if op == "-":
                return vint(a - b)
            if op == "*":
                return vint(a * b)
            if op == "/":
                return vint(trunc_div(a, b))
            return vint(trunc_rem(a, b))
        if lk in _NUMERIC and rk in _NUMERIC:
            if op == "%":
                raise HybRuntimeError(
                    "type error: '%%' is defined on integers only (got %s and %s)" % (lk, rk),
                    tuple(stack),
                )
            a, b = float(left.v), float(right.v)
            if op == "+":
                return vdouble(a + b)
            if op == "-":
                return vdouble(a - b)
            if op == "*":
                return vdouble(a * b)
            if b == 0.0:
                raise HybRuntimeError("division by zero", tuple(stack))
            return vdouble(a / b)
        if op == "+" and lk == STRING and rk == STRING:
            return vstring(left.v + right.v)
        raise HybRuntimeError(
            "type error: cannot apply '%s' to %s and %s" % (op, lk, rk), tuple(stack)
        )
    if op in ("==", "!="):
        if lk in _NUMERIC and rk in _NUMERIC:
            result = float(left.v) == float(right.v) if (lk != rk) else left.v == right.v
        elif lk == rk:
            result = left.v == right.v
        else:
            result = False  # no cross-kind equality
        return vbool(result if op == "==" else not result)
    if op in ("<", "<=", ">", ">="):
        if lk in _NUMERIC and rk in _NUMERIC:
            a, b = left.v, right.v
        elif lk == STRING and rk == STRING:
            a, b = left.v, right.v
        else:
            raise HybRuntimeError(
                "type error: cannot apply '%s' to %s and %s" % (op, lk, rk), tuple(stack)
            )
        if op == "<":
            return vbool(a < b)
        if op == "<=":
            return vbool(a <= b)
        if op == ">":
            return vbool(a > b)
        return vbool(a >= b)
    raise AssertionError("unknown operator %r" % op)
