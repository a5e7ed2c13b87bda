"""Run-time type bridge between host values and stream values.

The mapping table is fixed: one row per (stream type, host type) pair,
including the rows with no mapping on one side (host ``long`` and
``interface`` have none).  Conversion happens when an evaluated stream
value returns to host code or a host value crosses into a stream; a
failed match raises the run-time type check semantic error.

Host integers narrow to byte/short only inside their ranges.  Host
``long`` values never enter streams.  A double assigned to a host float
field is rounded to single precision, with a warning when that loses
information.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from . import engine
from .errors import HybRuntimeError, TypeBridgeError


@dataclass(frozen=True)
class HVal:
    kind: str  # int long double float boolean char String array object null void
    v: object = None


HNULL = HVal("null", None)
HVOID = HVal("void", None)


@dataclass(frozen=True)
class TypeMapRow:
    lucid_type: str | None
    host_type: str | None
    runtime_kind: str | None
    convertibility: str  # exact | widening | error


TYPE_TABLE: tuple[TypeMapRow, ...] = (
    TypeMapRow("dimension", "int, String", "context", "error"),
    TypeMapRow("char", "char", "char", "exact"),
    TypeMapRow("int", "byte", "int", "widening"),
    TypeMapRow("int", "short", "int", "widening"),
    TypeMapRow("int", "int", "int", "exact"),
    TypeMapRow(None, "long", "int", "error"),
    TypeMapRow("float", "float", "float", "exact"),
    TypeMapRow("double", "double", "double", "exact"),
    TypeMapRow("bool", "boolean", "bool", "exact"),
    TypeMapRow("[]", "array", "array", "exact"),
    TypeMapRow("string", "String", "string", "exact"),
    TypeMapRow("object", "class", "object", "exact"),
    TypeMapRow(None, "interface", None, "error"),
    TypeMapRow(None, "enum", "object", "error"),
    TypeMapRow("bool:true", "void", "void", "exact"),
)

ROW_INDEX = {row.host_type: i for i, row in enumerate(TYPE_TABLE)}

BYTE_MIN, BYTE_MAX = -128, 127
SHORT_MIN, SHORT_MAX = -32768, 32767

_PRIMITIVE_TYPES = {"int", "long", "double", "float", "boolean", "String"}


def mapped_type_index(type_name: str, is_array: bool = False) -> int:
    if is_array:
        return ROW_INDEX["array"]
    if type_name in ROW_INDEX:
        return ROW_INDEX[type_name]
    if type_name == "void":
        return ROW_INDEX["void"]
    if type_name == "String":
        return ROW_INDEX["String"]
    return ROW_INDEX["class"]


def float32(x: float) -> float:
    return struct.unpack("f", struct.pack("f", x))[0]


def _error(expected, got):
    raise TypeBridgeError(
        "run-time type check semantic error: expected %s, got %s" % (expected, got)
    )


def to_lucid(h: HVal) -> engine.Value:
    """Host value -> stream value, by table row."""
    k = h.kind
    if k == "int":
        return engine.Value(engine.INT, h.v)
    if k == "long":
        raise TypeBridgeError(
            "run-time type check semantic error: host long has no stream mapping"
        )
    if k == "double":
        return engine.Value(engine.DOUBLE, h.v)
    if k == "float":
        return engine.Value(engine.FLOAT, h.v)
    if k == "boolean":
        return engine.Value(engine.BOOL, h.v)
    if k == "char":
        return engine.Value(engine.CHAR, h.v)
    if k == "String":
        return engine.Value(engine.STRING, h.v)
    if k == "array":
        elems = tuple(to_lucid(e) for e in h.v.items())
        kinds = {e.kind for e in elems}
        if len(kinds) > 1:
            raise TypeBridgeError(
                "run-time type check semantic error: mixed element kinds in array"
            )
        return engine.Value(engine.ARRAY, elems)
    if k == "object":
        return engine.Value(engine.OBJECT, h.v)
    if k == "void":
        return engine.VOID_VALUE
    if k == "null":
        raise TypeBridgeError("run-time type check semantic error: null has no stream mapping")
    raise AssertionError(k)


def to_host(value: engine.Value, expected=None, warn=None, class_of=None) -> HVal:
    """Stream value -> host value.

    `expected` is an HType-like object (``name``/``is_array``) or None for
    the natural inverse mapping.  `class_of` names an object's class for
    the class-match check.
    """
    k = value.kind
    if expected is None:
        if k == engine.INT:
            return HVal("int", value.v)
        if k == engine.DOUBLE:
            return HVal("double", value.v)
        if k == engine.FLOAT:
            return HVal("float", value.v)
        if k == engine.BOOL:
            return HVal("boolean", value.v)
        if k == engine.CHAR:
            return HVal("char", value.v)
        if k == engine.STRING:
            return HVal("String", value.v)
        if k == engine.ARRAY:
            from .host.interp import HArray  # runtime containers live host-side

            elems = [to_host(e) for e in value.v]
            kind = elems[0].kind if elems else "int"
            return HVal("array", HArray(kind, elems))
        if k == engine.OBJECT:
            return HVal("object", value.v)
        if k == engine.VOID:
            return HVOID
        _error("a host-mappable value", k)
    name = expected.name
    if getattr(expected, "is_array", False):
        if k != engine.ARRAY:
            _error(str(expected), k)
        from .host.interp import HArray

        inner = type(expected)(name) if hasattr(expected, "is_array") else expected
        elems = [to_host(e, _scalar(expected), warn=warn, class_of=class_of) for e in value.v]
        return HVal("array", HArray(name, elems))
    if name == "int":
        if k != engine.INT:
            _error("int", k)
        return HVal("int", value.v)
    if name == "byte":
        if k != engine.INT:
            _error("byte", k)
        if not (BYTE_MIN <= value.v <= BYTE_MAX):
            _error("byte (range %d..%d)" % (BYTE_MIN, BYTE_MAX), "integer %d" % value.v)
        return HVal("int", value.v)
    if name == "short":
        if k != engine.INT:
            _error("short", k)
        if not (SHORT_MIN <= value.v <= SHORT_MAX):
            _error("short (range %d..%d)" % (SHORT_MIN, SHORT_MAX), "integer %d" % value.v)
        return HVal("int", value.v)
    if name == "long":
        _error("long (no stream type maps to host long)", k)
    if name == "double":
        if k == engine.DOUBLE or k == engine.FLOAT:
            return HVal("double", float(value.v))
        _error("double", k)
    if name == "float":
        if k == engine.FLOAT:
            return HVal("float", value.v)
        if k == engine.DOUBLE:
            rounded = float32(value.v)
            if rounded != value.v and warn is not None:
                warn("double %r is not exactly representable as float" % value.v)
            return HVal("float", rounded)
        _error("float", k)
    if name == "boolean":
        if k != engine.BOOL:
            _error("boolean", k)
        return HVal("boolean", value.v)
    if name == "char":
        if k != engine.CHAR:
            _error("char", k)
        return HVal("char", value.v)
    if name == "String":
        if k != engine.STRING:
            _error("String", k)
        return HVal("String", value.v)
    if name == "void":
        if k != engine.VOID:
            _error("void", k)
        return HVOID
    # a class type
    if k != engine.OBJECT:
        _error("class %s" % name, k)
    actual = class_of(value.v) if class_of else getattr(value.v, "class_name", None)
    if actual != name:
        _error("class %s" % name, "class %s" % actual)
    return HVal("object", value.v)


def _scalar(htype):
    return type(htype)(htype.name, False) if hasattr(htype, "is_array") else htype


class FreeFunctionRegistry:
    """Host free functions callable from stream expressions (the wrapper
    class of the semantics; here a plain name -> callable table)."""

    def __init__(self):
        self._table: dict[str, object] = {}

    def register(self, name: str, fn) -> None:
        if name in self._table:
            raise HybRuntimeError("free function '%s' registered twice" % name)
        self._table[name] = fn

    def lookup(self, name: str):
        return self._table.get(name)

    def names(self):
        return sorted(self._table)
