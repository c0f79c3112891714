"""Term representation, bindings, and variable renaming.

Terms are the vocabulary of the whole interpreter.  All mutation during
solving goes through a BindingState: variable bindings and call-by-need
memo slots are recorded on a trail so that backtracking can restore any
earlier state exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

_var_counter = itertools.count(1)


def fresh_var_id() -> int:
    return next(_var_counter)


def current_var_fence() -> int:
    """Ids >= the fence belong to variables created after this call."""
    # peek without consuming
    fence = next(_var_counter)
    return fence


class Var:
    """A logic variable.  Ids are globally unique within a run."""

    __slots__ = ("id", "name")

    def __init__(self, name: Optional[str] = None, id: Optional[int] = None):
        self.id = fresh_var_id() if id is None else id
        self.name = name

    def __repr__(self):
        return f"Var({self.name or '_'}{self.id})"


class Int:
    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = value

    def __repr__(self):
        return f"Int({self.value})"


class Ctor:
    """Constructor application; includes 0-ary constants, true/false,
    list cells '.'/2 and '[]'."""

    __slots__ = ("name", "args")

    def __init__(self, name: str, args=()):
        self.name = name
        self.args = tuple(args)

    def __repr__(self):
        if not self.args:
            return f"Ctor({self.name})"
        return f"Ctor({self.name}, {list(self.args)})"


class FunApp:
    """Defined-function application with a call-by-need memo slot.

    The memo, once filled, holds the term this application was rewritten
    to; it is single-assignment per search branch and undone via the
    trail on backtracking.  eq applications carry the argument type the
    checker inferred (used to enumerate difference witnesses at runtime).
    """

    __slots__ = ("name", "args", "memo", "eq_type")

    def __init__(self, name: str, args=(), eq_type=None):
        self.name = name
        self.args = tuple(args)
        self.memo = None
        self.eq_type = eq_type

    def __repr__(self):
        m = " *memo" if self.memo is not None else ""
        return f"FunApp({self.name}, {list(self.args)}{m})"


class Lambda:
    __slots__ = ("params", "body")

    def __init__(self, params, body):
        self.params = tuple(params)  # Var objects
        self.body = body

    def __repr__(self):
        return f"Lambda({list(self.params)}, {self.body})"


class Eta:
    """Description term: some value of `var` making goal succeed."""

    __slots__ = ("var", "goal")

    def __init__(self, var: Var, goal):
        self.var = var
        self.goal = goal

    def __repr__(self):
        return f"Eta({self.var}, {self.goal})"


class FunRef:
    """A defined or builtin function used as a value (apply's first
    argument)."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return f"FunRef({self.name})"


LIST_NIL = "[]"
LIST_CONS = "."

TRUE = Ctor("true")
FALSE = Ctor("false")


def make_list(items, tail=None):
    t = tail if tail is not None else Ctor(LIST_NIL)
    for x in reversed(list(items)):
        t = Ctor(LIST_CONS, (x, t))
    return t


@dataclass(frozen=True)
class Clause:
    head: object  # Ctor-shaped predicate atom
    body: tuple   # ordered goal atoms


@dataclass(frozen=True)
class RewriteRule:
    lhs: object   # FunApp pattern
    rhs: object


class BindingState:
    """Backtrackable substitution with trail and depth accounting.

    The trail stores the Var objects that were bound and the FunApp
    objects whose memo was filled, in order; undoing to a checkpoint
    pops entries and restores both maps and depth_used exactly.
    """

    __slots__ = (
        "bindings", "trail", "depth_used", "depth_limit", "limit_hit",
        "normalizing", "rewrite_steps", "rewrite_cap",
    )

    def __init__(self, depth_limit: int = 10 ** 9, rewrite_cap: int = 100000):
        self.bindings: dict = {}
        self.trail: list = []
        self.depth_used = 0
        self.depth_limit = depth_limit
        self.limit_hit = False
        self.normalizing = False
        self.rewrite_steps = 0
        self.rewrite_cap = rewrite_cap

    def mark(self):
        return (len(self.trail), self.depth_used, self.rewrite_steps)

    def undo(self, mark):
        n, depth, steps = mark
        trail = self.trail
        bindings = self.bindings
        while len(trail) > n:
            e = trail.pop()
            if type(e) is Var:
                del bindings[e.id]
            else:
                e.memo = None
        self.depth_used = depth
        self.rewrite_steps = steps

    def bind(self, v: Var, t):
        self.bindings[v.id] = t
        self.trail.append(v)

    def set_memo(self, f: FunApp, t):
        # single assignment: never overwrite a live memo
        assert f.memo is None
        f.memo = t
        self.trail.append(f)

    def charge(self, n: int = 1) -> bool:
        """Consume n depth units; False (and limit_hit) when over limit.

        During answer normalization, consumption counts against the
        rewrite step cap instead of the search depth.
        """
        if self.normalizing:
            self.rewrite_steps += n
            if self.rewrite_steps > self.rewrite_cap:
                from .errors import RewriteLimitError
                raise RewriteLimitError(
                    f"normalization exceeded {self.rewrite_cap} rewrite steps")
            return True
        if self.depth_used + n > self.depth_limit:
            self.limit_hit = True
            return False
        self.depth_used += n
        return True

    def resolve(self, t):
        """Dereference bound variables and filled memo slots.

        Never rewrites; the result's head is an unbound Var, an Int, a
        Ctor, a Lambda, an Eta, a FunRef, or a FunApp with empty memo.
        """
        bindings = self.bindings
        while True:
            ty = type(t)
            if ty is Var:
                nxt = bindings.get(t.id)
                if nxt is None:
                    return t
                t = nxt
            elif ty is FunApp:
                if t.memo is None:
                    return t
                t = t.memo
            else:
                return t


def resolve(t, s: BindingState):
    return s.resolve(t)


def copy_term(t, mapping: dict):
    """Structural copy with fresh variables (shared Int/FunRef leaves)."""
    ty = type(t)
    if ty is Var:
        nv = mapping.get(t.id)
        if nv is None:
            nv = Var(t.name)
            mapping[t.id] = nv
        return nv
    if ty is Ctor:
        if not t.args:
            return t
        return Ctor(t.name, [copy_term(a, mapping) for a in t.args])
    if ty is FunApp:
        return FunApp(t.name, [copy_term(a, mapping) for a in t.args],
                      eq_type=t.eq_type)
    if ty is Lambda:
        return Lambda([copy_term(p, mapping) for p in t.params],
                      copy_term(t.body, mapping))
    if ty is Eta:
        return Eta(copy_term(t.var, mapping), copy_term(t.goal, mapping))
    return t  # Int, FunRef


def rename_apart(item):
    """Fresh-variable copy of a Clause, RewriteRule, or bare term."""
    mapping: dict = {}
    if isinstance(item, Clause):
        return Clause(copy_term(item.head, mapping),
                      tuple(copy_term(a, mapping) for a in item.body))
    if isinstance(item, RewriteRule):
        return RewriteRule(copy_term(item.lhs, mapping),
                           copy_term(item.rhs, mapping))
    return copy_term(item, mapping)


def _compile_node(t, index: dict, names: list):
    """Compile a term into a builder closure over a fresh-variable list."""
    ty = type(t)
    if ty is Var:
        slot = index.get(t.id)
        if slot is None:
            slot = len(names)
            index[t.id] = slot
            names.append(t.name)
        return lambda vs, slot=slot: vs[slot]
    if ty is Ctor:
        if not t.args:
            return lambda vs, t=t: t
        subs = tuple(_compile_node(a, index, names) for a in t.args)
        name = t.name
        return lambda vs: Ctor(name, [f(vs) for f in subs])
    if ty is FunApp:
        subs = tuple(_compile_node(a, index, names) for a in t.args)
        name = t.name
        eq_type = t.eq_type
        return lambda vs: FunApp(name, [f(vs) for f in subs], eq_type=eq_type)
    if ty is Lambda:
        psubs = tuple(_compile_node(p, index, names) for p in t.params)
        bsub = _compile_node(t.body, index, names)
        return lambda vs: Lambda([f(vs) for f in psubs], bsub(vs))
    if ty is Eta:
        vsub = _compile_node(t.var, index, names)
        gsub = _compile_node(t.goal, index, names)
        return lambda vs: Eta(vsub(vs), gsub(vs))
    return lambda vs, t=t: t  # Int, FunRef


class Template:
    """Precompiled renaming-apart of a family of terms that share
    variables; instantiate() is the hot-path equivalent of
    rename_apart."""

    __slots__ = ("builders", "names")

    def __init__(self, ts):
        index: dict = {}
        names: list = []
        self.builders = tuple(_compile_node(t, index, names) for t in ts)
        self.names = tuple(names)

    def instantiate(self):
        vs = [Var(n) for n in self.names]
        return [b(vs) for b in self.builders]


def index_guards(head_args):
    """Rigid root patterns of head arguments; a goal argument already
    resolved to a different constructor or integer can never match, so
    the clause or rule can be skipped without being applied."""
    guards = []
    for pos, a in enumerate(head_args):
        ta = type(a)
        if ta is Ctor:
            guards.append((pos, (a.name, len(a.args)), None))
        elif ta is Int:
            guards.append((pos, None, a.value))
    return tuple(guards)


def guards_admit(guards, goal_args, s) -> bool:
    for pos, ctor_key, int_val in guards:
        a = s.resolve(goal_args[pos])
        ta = type(a)
        if ta is Ctor:
            if ctor_key is None or (a.name, len(a.args)) != ctor_key:
                return False
        elif ta is Int:
            if int_val is None or a.value != int_val:
                return False
    return True


def term_vars(t, acc=None):
    """All Var objects occurring syntactically in t (no dereferencing)."""
    if acc is None:
        acc = []
    ty = type(t)
    if ty is Var:
        acc.append(t)
    elif ty is Ctor or ty is FunApp:
        for a in t.args:
            term_vars(a, acc)
    elif ty is Lambda:
        for p in t.params:
            term_vars(p, acc)
        term_vars(t.body, acc)
    elif ty is Eta:
        term_vars(t.var, acc)
        term_vars(t.goal, acc)
    return acc


def reify(t, s: BindingState):
    """Deep resolved copy: safe to keep after the state backtracks.

    Unbound variables stay as the live Var objects so that shared
    variables print consistently.
    """
    t = s.resolve(t)
    ty = type(t)
    if ty is Ctor:
        if not t.args:
            return t
        return Ctor(t.name, [reify(a, s) for a in t.args])
    if ty is FunApp:
        return FunApp(t.name, [reify(a, s) for a in t.args], eq_type=t.eq_type)
    if ty is Lambda:
        return Lambda(t.params, reify(t.body, s))
    if ty is Eta:
        return Eta(t.var, reify(t.goal, s))
    return t
