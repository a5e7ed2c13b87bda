"""The context calculus: dimensions, tags, and evaluation points.

A context is a finite map from dimension names to tags.  Tags are either
integers or strings; the two kinds never compare equal.  Querying a
dimension that a context does not bind yields the integer origin tag 0,
which is what makes demands at the initial (empty) point well defined.

Contexts are immutable: ``override`` returns a fresh context.  That is a
hard requirement, because canonical context keys index the value
warehouse and must never alias mutable state.
"""

from __future__ import annotations

from .errors import CompileError

Tag = int | str

DEFAULT_TAG: Tag = 0

_IDENT_FIRST = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_REST = _IDENT_FIRST | set("0123456789")


def is_dimension_name(name: str) -> bool:
    """True when `name` is a valid identifier lexeme."""
    if not name or name[0] not in _IDENT_FIRST:
        return False
    return all(c in _IDENT_REST for c in name[1:])


def _check_tag(tag):
    # bool is an int subclass; reject it explicitly so equality stays exact.
    if isinstance(tag, bool) or not isinstance(tag, (int, str)):
        raise TypeError("tag must be an int or str, got %r" % (tag,))
    return tag


class Context:
    """An immutable dimension-name -> tag map."""

    __slots__ = ("_bindings", "_key")

    def __init__(self, bindings=None):
        items = {}
        if bindings:
            for name, tag in dict(bindings).items():
                if not is_dimension_name(name):
                    raise ValueError("invalid dimension name %r" % (name,))
                items[name] = _check_tag(tag)
        self._bindings = items
        self._key = None

    def bindings(self) -> dict[str, Tag]:
        return dict(self._bindings)

    def dimensions(self) -> frozenset[str]:
        return frozenset(self._bindings)

    def __contains__(self, name):
        return name in self._bindings

    def __len__(self):
        return len(self._bindings)

    def __eq__(self, other):
        if not isinstance(other, Context):
            return NotImplemented
        return self._bindings == other._bindings

    def __hash__(self):
        return hash(self.canonical_key())

    def __repr__(self):
        return "Context(%s)" % format_context(self)

    def query(self, dim: str) -> Tag:
        """Current tag of `dim`; unbound dimensions sit at the origin 0."""
        return self._bindings.get(dim, DEFAULT_TAG)

    def override(self, delta: "Context | dict[str, Tag]") -> "Context":
        """All bindings of self, with `delta`'s replacing same-named ones."""
        if isinstance(delta, Context):
            delta = delta._bindings
        out = Context()
        merged = dict(self._bindings)
        for name, tag in delta.items():
            if not is_dimension_name(name):
                raise ValueError("invalid dimension name %r" % (name,))
            merged[name] = _check_tag(tag)
        out._bindings = merged
        return out

    def project(self, dims) -> "Context":
        """Keep exactly `dims`, materialising the default tag for absent ones.

        The materialised default keeps the canonical key of a projected
        context independent of whether a demanded dimension happened to be
        bound explicitly at its origin or not bound at all.
        """
        out = Context()
        out._bindings = {d: self._bindings.get(d, DEFAULT_TAG) for d in dims}
        return out

    def canonical_key(self) -> bytes:
        """Injective byte encoding; equal contexts give identical keys.

        Bindings are serialised in lexicographic dimension order and every
        component is length-prefixed, so no tag content can collide with
        the separators.
        """
        if self._key is None:
            parts = []
            for name in sorted(self._bindings):
                tag = self._bindings[name]
                nb = name.encode("utf-8")
                parts.append(b"%d:%s" % (len(nb), nb))
                if isinstance(tag, int):
                    parts.append(b"i%d;" % tag)
                else:
                    tb = tag.encode("utf-8")
                    parts.append(b"s%d:%s;" % (len(tb), tb))
            self._key = b"".join(parts)
        return self._key


EMPTY = Context()


def override(base: Context, delta: Context) -> Context:
    return base.override(delta)


def query(ctx: Context, dim: str) -> Tag:
    return ctx.query(dim)


def project(ctx: Context, dims) -> Context:
    return ctx.project(dims)


def canonical_key(ctx: Context) -> bytes:
    return ctx.canonical_key()


def format_tag(tag: Tag) -> str:
    return str(tag)


def format_context(ctx: Context) -> str:
    """Render as ``{d:3,e:hello}`` with dimensions sorted."""
    inner = ",".join(
        "%s:%s" % (name, format_tag(ctx.query(name))) for name in sorted(ctx.dimensions())
    )
    return "{%s}" % inner


def parse_context_literal(text: str) -> Context:
    """Parse the CLI context literal ``d:3,e:hello``.

    A tag lexes as an integer when it looks like one (optional sign, all
    digits); anything else is a string tag.  An empty literal is the empty
    context.
    """
    text = text.strip()
    if not text:
        return Context()
    bindings: dict[str, Tag] = {}
    for piece in text.split(","):
        piece = piece.strip()
        if not piece or ":" not in piece:
            raise CompileError("bad context literal component %r (want name:tag)" % piece)
        name, raw = piece.split(":", 1)
        name = name.strip()
        raw = raw.strip()
        if not is_dimension_name(name):
            raise CompileError("bad dimension name %r in context literal" % name)
        if name in bindings:
            raise CompileError("dimension %r bound twice in context literal" % name)
        body = raw[1:] if raw[:1] in "+-" else raw
        bindings[name] = int(raw) if body.isdigit() and body else raw
    return Context(bindings)
