"""Printing terms back to source syntax.

Printing is operator-aware: declared infix/prefix operators are printed
with minimal parentheses, lists use [a,b|T] sugar, and unbound variables
can be given stable display names (_1, _2, ... in order of first
appearance) via a naming map.
"""

from __future__ import annotations

from . import terms
from .terms import Var, Int, Ctor, FunApp, Lambda, Eta, FunRef

_SYM_CHARS = set("+-*/\\<>=~^:&@#$?.")


def _is_symbolic(name: str) -> bool:
    return bool(name) and all(c in _SYM_CHARS for c in name)


_ATOM_OK = set("abcdefghijklmnopqrstuvwxyz")


def _atom_needs_quotes(name: str) -> bool:
    if _is_symbolic(name):
        return False
    if not name or name[0] not in _ATOM_OK:
        return True
    return not all(c.isalnum() or c == "_" for c in name)


class Namer:
    """Assigns _1, _2, ... to unbound variables in appearance order."""

    def __init__(self):
        self.names: dict = {}

    def name(self, v: Var) -> str:
        label = self.names.get(v.id)
        if label is None:
            label = f"_{len(self.names) + 1}"
            self.names[v.id] = label
        return label


def _join(parts):
    """Concatenate token strings, spacing only where re-lexing would
    otherwise glue adjacent tokens together."""
    out = []
    for p in parts:
        if out:
            a, b = out[-1][-1], p[0]
            if ((a in _SYM_CHARS and b in _SYM_CHARS)
                    or ((a.isalnum() or a == "_") and (b.isalnum() or b == "_"))):
                out.append(" ")
        out.append(p)
    return "".join(out)


def term_text(t, ops=None, state=None, namer=None) -> str:
    """Render a term.  `ops` is an OperatorTable (or None for canonical
    prefix form); `state` resolves bindings on the fly; `namer` controls
    unbound-variable display (defaults to the variable's own name)."""
    return _write(t, 1200, ops, state, namer)


def _resolve(t, state):
    return state.resolve(t) if state is not None else t


def _write(t, maxp, ops, state, namer) -> str:
    t = _resolve(t, state)
    ty = type(t)
    if ty is Var:
        if namer is not None:
            return namer.name(t)
        return t.name if t.name else f"_{t.id}"
    if ty is Int:
        return str(t.value)
    if ty is FunRef:
        return t.name
    if ty is Lambda:
        params = ",".join(_write(p, 999, ops, state, namer) for p in t.params)
        return f"lambda([{params}],{_write(t.body, 999, ops, state, namer)})"
    if ty is Eta:
        return (f"eta({_write(t.var, 999, ops, state, namer)},"
                f"{_write(t.goal, 999, ops, state, namer)})")
    # constructor or function application
    name, args = t.name, t.args
    if ty is Ctor:
        if name == terms.LIST_NIL and not args:
            return "[]"
        if name == terms.LIST_CONS and len(args) == 2:
            return _write_list(t, ops, state, namer)
    if not args:
        return f"'{name}'" if _atom_needs_quotes(name) else name
    if ops is not None and len(args) == 2:
        op = ops.infix.get(name)
        if op is not None:
            p = op.priority
            lmax = p if op.fixity == "yfx" else p - 1
            rmax = p if op.fixity == "xfy" else p - 1
            body = _join([
                _write(args[0], lmax, ops, state, namer),
                name,
                _write(args[1], rmax, ops, state, namer),
            ])
            return f"({body})" if p > maxp else body
    if ops is not None and len(args) == 1:
        op = ops.prefix.get(name)
        if op is not None:
            p = op.priority
            amax = p if op.fixity == "fy" else p - 1
            body = _join([name, _write(args[0], amax, ops, state, namer)])
            return f"({body})" if p > maxp else body
    inner = ",".join(_write(a, 999, ops, state, namer) for a in args)
    fname = f"'{name}'" if _atom_needs_quotes(name) else name
    return f"{fname}({inner})"


def _write_list(t, ops, state, namer) -> str:
    parts = []
    while True:
        parts.append(_write(t.args[0], 999, ops, state, namer))
        tail = _resolve(t.args[1], state)
        if type(tail) is Ctor and tail.name == terms.LIST_CONS and len(tail.args) == 2:
            t = tail
            continue
        if type(tail) is Ctor and tail.name == terms.LIST_NIL:
            return "[" + ",".join(parts) + "]"
        return "[" + ",".join(parts) + "|" + _write(tail, 999, ops, state, namer) + "]"
