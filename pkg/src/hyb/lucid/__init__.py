"""Front end for the stream-expression language: lexing, parsing, dialect
dispatch, desugaring, and resolution into runnable programs."""

from __future__ import annotations

from ..errors import CompileError
from ..program import FreeDims, HostEnv, Program
from . import ast
from .desugar import desugar_indexical
from .lexer import tokenize
from .parser import parse
from .resolve import Resolver

DIALECTS = ("GIPL", "INDEXICALLUCID", "JLUCID", "OBJECTIVELUCID", "LUCX")

# Tags accepted but compiled as OBJECTIVELUCID; full dialect support for
# them is out of scope, their example programs already fit the core.
_ALIASED = {"JLUCID": "OBJECTIVELUCID", "LUCX": "OBJECTIVELUCID"}


def parse_segment(tag: str, text: str, filename=None, line=1, col=1, warn=None):
    """Parse a dialect-tagged segment; returns (desugared AST, object_dialect).

    The empty tag defaults to GIPL.  JLUCID and LUCX parse as
    OBJECTIVELUCID with a warning.  Desugaring runs for every dialect; it
    is the identity on core-only input.
    """
    tag = tag or "GIPL"
    if tag not in DIALECTS:
        raise CompileError(
            "unknown Lucid variant tag '%s' (valid tags: %s)" % (tag, ", ".join(DIALECTS)),
            line,
            col,
            filename,
        )
    if tag in _ALIASED:
        if warn is not None:
            warn("dialect tag %s is compiled as %s" % (tag, _ALIASED[tag]))
        tag = _ALIASED[tag]
    root = parse(text, filename, line, col)
    root = desugar_indexical(root)
    return root, tag


def compile_expression(
    text: str,
    dialect: str = "GIPL",
    ambient_dims=(),
    label: str = "expr",
    alloc: ast.IdAlloc | None = None,
    filename=None,
    warn=None,
) -> Program:
    """Compile a standalone expression (no host environment)."""
    root, tag = parse_segment(dialect, text, filename=filename, warn=warn)
    env = HostEnv(ambient_dims=set(ambient_dims), object_dialect=tag != "GIPL")
    resolver = Resolver(env, label, alloc or ast.IdAlloc(), filename=filename)
    program = resolver.resolve(root, text, tag)
    FreeDims([program]).run()
    return program
