"""SLD resolution under depth-first iterative deepening, plus the
builtin functions (arithmetic, comparisons, eq, apply, eta).

Depth is consumed when rewrite rules or clauses are applied, so the
search is complete at both the function and the clause level.  Builtin
evaluation steps cost one depth unit each; enumeration of an infinite
rule family (unbound arithmetic arguments, eq difference witnesses)
charges cumulatively per candidate, which is what lets iterative
deepening enumerate infinite families fairly.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Optional

from .errors import EvalError
from . import terms
from .terms import (Var, Int, Ctor, FunApp, Lambda, Eta, FunRef,
                    BindingState, TRUE, FALSE)
from . import narrow
from .narrow import narrow_step, unify, unify_args
from . import typecheck as tc
from .typecheck import TyVar, TyApp, FunTy
from . import pretty
from . import reader as rd

# Deep derivations suspend one generator frame per inference step;
# resuming through them needs interpreter recursion headroom.
sys.setrecursionlimit(1_000_000)


@dataclass
class SearchConfig:
    depth_init: int = 5
    depth_step: int = 5
    max_depth: Optional[int] = None
    max_rewrites: int = 100000


@dataclass
class Answer:
    """Normalized bindings for the query variables, in query order."""
    bindings: list          # (name, term) pairs; terms contain no FunApp
    found_depth: int

    def text(self, ops=None) -> str:
        namer = pretty.Namer()
        return "\n".join(f"{name}={pretty.term_text(t, ops, namer=namer)}"
                         for name, t in self.bindings)


COMPLETE = "complete"
DEPTH_LIMIT = "depth_limit"


class AnswerStream:
    """Pull-driven answer iterator; `status` is set once exhausted."""

    def __init__(self):
        self.status = None
        self._gen = None

    def __iter__(self):
        return self._gen


# ---------------------------------------------------------------------------
# Goal solving

def solve_goal(goal, s: BindingState, db):
    """One SLD step: dispatch a builtin or resolve against clauses."""
    g = s.resolve(goal)
    if type(g) is not Ctor:
        raise EvalError(f"malformed goal `{pretty.term_text(g, state=s)}`")
    name = g.name
    args = g.args
    if name == "=" and len(args) == 2:
        yield from unify(args[0], args[1], s, db)
        return
    plan = db.clause_plan(name)
    if plan is not None:
        gargs = g.args
        for tpl, guards in plan:
            if guards and not terms.guards_admit(guards, gargs, s):
                continue
            mark = s.mark()
            if not s.charge(1):
                break
            parts = tpl.instantiate()  # [head, *body]
            for _ in unify_args(gargs, parts[0].args, 0, s, db):
                yield from _solve_body(parts, 1, s, db)
            s.undo(mark)
        return
    if name == "," and len(args) == 2:
        for _ in solve_goal(args[0], s, db):
            yield from solve_goal(args[1], s, db)
        return
    if name == "true" and not args:
        yield
        return
    if name == "fail" and not args:
        return
    if name == "write" and len(args) == 1:
        sys.stdout.write(pretty.term_text(args[0], db.ops, state=s))
        yield
        return
    if name == "nl" and not args:
        sys.stdout.write("\n")
        yield
        return
    raise EvalError(f"unknown predicate `{name}`")


def _solve_body(parts, i, s, db):
    if i == len(parts):
        yield
        return
    for _ in solve_goal(parts[i], s, db):
        yield from _solve_body(parts, i + 1, s, db)


# ---------------------------------------------------------------------------
# Builtin functions: arithmetic and comparisons behave like an infinite
# family of ground rewrite rules (0+0->>0, 0+1->>1, ...).

def head_values(t, s, db):
    """Head-normal forms of t: narrow at the root until the head is not
    a function application."""
    t = s.resolve(t)
    if type(t) is FunApp or type(t) is Eta:
        for r in narrow_step(t, s, db):
            yield from head_values(r, s, db)
        return
    yield t


def _int_candidates(t, s, db):
    """Integer values t can take: ground values directly, an unbound
    variable by fair enumeration 0,1,-1,2,-2,... with cumulative depth
    cost per candidate.  Yields (value, was_enumerated)."""
    for h in head_values(t, s, db):
        th = type(h)
        if th is Int:
            yield h.value, False
        elif th is Var:
            mark = s.mark()
            k = 0
            while s.charge(1):
                v = (k + 1) // 2 if k % 2 else -(k // 2)
                inner = s.mark()
                s.bind(h, Int(v))
                yield v, True
                s.undo(inner)
                k += 1
            s.undo(mark)
        else:
            return  # not an integer-valued head; no rule matches


def _arith_eval(name, op):
    checked = name in ("div", "mod")

    def ev(f, s, db):
        a = s.resolve(f.args[0])
        b = s.resolve(f.args[1])
        if type(a) is Int and type(b) is Int:
            if checked and b.value == 0:
                raise EvalError(
                    f"{name} by zero in "
                    f"`{pretty.term_text(f, db.ops, state=s)}`")
            if s.charge(1):
                yield Int(op(a.value, b.value))
            return
        for x, _xe in _int_candidates(a, s, db):
            for y, ye in _int_candidates(b, s, db):
                if checked and y == 0:
                    if ye:
                        continue  # the infinite family has no rule here
                    raise EvalError(
                        f"{name} by zero in "
                        f"`{pretty.term_text(f, db.ops, state=s)}`")
                if not s.charge(1):
                    continue
                yield Int(op(x, y))
    return ev


def _compare_eval(op):
    def ev(f, s, db):
        a = s.resolve(f.args[0])
        b = s.resolve(f.args[1])
        if type(a) is Int and type(b) is Int:
            if s.charge(1):
                yield TRUE if op(a.value, b.value) else FALSE
            return
        for x, _ in _int_candidates(a, s, db):
            for y, _ in _int_candidates(b, s, db):
                if not s.charge(1):
                    continue
                yield TRUE if op(x, y) else FALSE
    return ev


def _abs_eval(f, s, db):
    a = s.resolve(f.args[0])
    if type(a) is Int:
        if s.charge(1):
            yield Int(abs(a.value))
        return
    for x, _ in _int_candidates(a, s, db):
        if not s.charge(1):
            continue
        yield Int(abs(x))


# ---------------------------------------------------------------------------
# eq: semantic equality returning true/false.  The true alternative is
# plain unification; the false alternatives instantiate the arguments to
# every pair of provably different constructor shapes.

def eq_narrow(a, b, eq_type, s, db):
    mark = s.mark()
    if s.charge(1):
        for _ in unify(a, b, s, db):
            yield TRUE
    s.undo(mark)
    for _ in _eq_false(a, b, eq_type, s, db):
        yield FALSE


def _eq_eval(f, s, db):
    a = s.resolve(f.args[0])
    b = s.resolve(f.args[1])
    if type(a) is Int and type(b) is Int:
        if s.charge(1):
            yield TRUE if a.value == b.value else FALSE
        return
    yield from eq_narrow(a, b, f.eq_type, s, db)


def _value_type(t, s, db):
    """Best-effort runtime type of a value (None when undiscoverable)."""
    t = s.resolve(t)
    ty = type(t)
    if ty is Int:
        return tc.INT
    if ty is Ctor:
        sig = db.ctors.get(t.name)
        if sig is None:
            return None
        inst = tc.fresh_instance([TyApp("", tuple(sig.arg_types)), sig.result])
        arg_tys, res = inst[0].args, inst[1]
        subst: dict = {}
        for a, want in zip(t.args, arg_tys):
            got = _value_type(a, s, db)
            if got is not None:
                tc.unify_types(want, got, subst)
        return tc.resolve_ty(res, subst)
    return None


def _skeleton(sig, at_type, s, db):
    """Fresh-variable instance of a constructor (args unconstrained)."""
    return Ctor(sig.name, [Var() for _ in sig.arg_types])


def _ctor_arg_hints(sig, at_type):
    subst: dict = {}
    if at_type is not None and isinstance(at_type, TyApp):
        tc.unify_types(sig.result, at_type, subst)
    return [tc.resolve_ty(t, subst) for t in sig.arg_types]


def _eq_false(a, b, ty_hint, s, db):
    """States in which a and b are instantiated to different values."""
    for ha in head_values(a, s, db):
        for hb in head_values(b, s, db):
            yield from _eq_false_hnf(ha, hb, ty_hint, s, db)


def _eq_false_hnf(a, b, ty_hint, s, db):
    ta, tb = type(a), type(b)
    if ta is Int or tb is Int:
        yield from _eq_false_int(a, b, s, db)
        return
    if ta is Ctor and tb is Ctor:
        if a.name != b.name or len(a.args) != len(b.args):
            mark = s.mark()
            if s.charge(1):
                yield
            s.undo(mark)
            return
        sig = db.ctors.get(a.name)
        if sig is None:
            return
        at = _value_type(a, s, db) or _value_type(b, s, db)
        hints = _ctor_arg_hints(sig, at)
        yield from _eq_false_args(a.args, b.args, hints, 0, s, db)
        return
    if ta is Ctor and tb is Var:
        yield from _eq_false_var_ctor(b, a, s, db)
        return
    if ta is Var and tb is Ctor:
        yield from _eq_false_var_ctor(a, b, s, db)
        return
    if ta is Var and tb is Var:
        ty = ty_hint
        if isinstance(ty, TyApp) and ty.name == "int":
            yield from _eq_false_int(a, b, s, db)
            return
        if isinstance(ty, TyApp) and db.ctors_of(ty.name):
            sigs = db.ctors_of(ty.name)
            for si in sigs:
                for sj in sigs:
                    if si is sj:
                        continue
                    mark = s.mark()
                    if s.charge(1):
                        s.bind(a, _skeleton(si, ty, s, db))
                        s.bind(b, _skeleton(sj, ty, s, db))
                        yield
                    s.undo(mark)
            for si in sigs:
                mark = s.mark()
                if s.charge(1):
                    ka = _skeleton(si, ty, s, db)
                    kb = _skeleton(si, ty, s, db)
                    s.bind(a, ka)
                    s.bind(b, kb)
                    hints = _ctor_arg_hints(si, ty)
                    yield from _eq_false_args(ka.args, kb.args, hints, 0, s, db)
                s.undo(mark)
            return
        return  # element type not discoverable: no difference witnesses
    return  # Lambda/FunRef: eq over function types is a load-time error


def _eq_false_int(a, b, s, db):
    """a, b integer-valued heads (Int or Var): states where they differ."""
    for x, _ in _int_head_cands(a, s, db):
        for y, _ in _int_head_cands(b, s, db):
            if x == y:
                continue
            mark = s.mark()
            if s.charge(1):
                yield
            s.undo(mark)


def _int_head_cands(h, s, db):
    if type(h) is Int:
        yield h.value, False
        return
    if type(h) is Var:
        mark = s.mark()
        k = 0
        while s.charge(1):
            v = (k + 1) // 2 if k % 2 else -(k // 2)
            inner = s.mark()
            s.bind(h, Int(v))
            yield v, True
            s.undo(inner)
            k += 1
        s.undo(mark)


def _eq_false_var_ctor(v, c, s, db):
    """v unbound, c a constructor value: instantiate v to every shape
    different from c, then to c's shape with some argument different."""
    sig = db.ctors.get(c.name)
    if sig is None:
        return
    at = _value_type(c, s, db)
    for other in db.ctors_of(sig.type_name):
        if other.name == c.name:
            continue
        mark = s.mark()
        if s.charge(1):
            s.bind(v, _skeleton(other, at, s, db))
            yield
        s.undo(mark)
    mark = s.mark()
    if s.charge(1):
        kv = _skeleton(sig, at, s, db)
        s.bind(v, kv)
        hints = _ctor_arg_hints(sig, at)
        yield from _eq_false_args(kv.args, c.args, hints, 0, s, db)
    s.undo(mark)


def _eq_false_args(xs, ys, hints, i, s, db):
    """First-difference enumeration: position i differs, or position i
    is equal and some later position differs (the lazy `and` expansion
    of the listeq-style rules)."""
    if i == len(xs):
        return
    yield from _eq_false(xs[i], ys[i], hints[i] if i < len(hints) else None,
                         s, db)
    if i + 1 == len(xs):
        return
    mark = s.mark()
    for _ in unify(xs[i], ys[i], s, db):
        yield from _eq_false_args(xs, ys, hints, i + 1, s, db)
    s.undo(mark)


# ---------------------------------------------------------------------------
# apply and eta

def _concrete_list(t, s, db):
    """Element lists of a list-valued term, narrowing the spine as
    needed; the elements themselves stay lazy."""
    t = s.resolve(t)
    ty = type(t)
    if ty is Ctor and t.name == terms.LIST_NIL:
        yield []
        return
    if ty is Ctor and t.name == terms.LIST_CONS:
        head = t.args[0]
        for rest in _concrete_list(t.args[1], s, db):
            yield [head] + rest
        return
    if ty is FunApp or ty is Eta:
        for r in narrow_step(t, s, db):
            yield from _concrete_list(r, s, db)
        return
    raise EvalError("apply needs a concrete argument list")


def apply_eval(f, s, db):
    """apply(F, Args): F must be normalisable to a function or lambda."""
    fn_t, list_t = f.args
    mark = s.mark()
    if s.charge(1):
        for h in head_values(fn_t, s, db):
            th = type(h)
            if th is Lambda:
                for args in _concrete_list(list_t, s, db):
                    if len(args) != len(h.params):
                        raise EvalError(
                            f"lambda expects {len(h.params)} arguments, "
                            f"got {len(args)}")
                    fresh = terms.rename_apart(h)
                    inner = s.mark()
                    for p, a in zip(fresh.params, args):
                        s.bind(p, a)
                    yield fresh.body
                    s.undo(inner)
            elif th is FunRef:
                arity = db.function_arity(h.name)
                for args in _concrete_list(list_t, s, db):
                    if len(args) != arity:
                        raise EvalError(
                            f"function `{h.name}` expects {arity} "
                            f"arguments, got {len(args)}")
                    yield FunApp(h.name, args)
            else:
                raise EvalError(
                    "apply: first argument is not a function "
                    f"(`{pretty.term_text(h, db.ops, state=s)}`)")
    s.undo(mark)


def eta_eval(e, s, db):
    """eta(X, G): some X such that G succeeds; remaining values on
    backtracking.  The goal runs within the current depth budget."""
    for _ in solve_goal(e.goal, s, db):
        yield s.resolve(e.var)


def eval_builtin_fun(f, s, db):
    """Dispatch one builtin function application (for direct use and
    tests; narrow_step reaches the same evaluators via the registry)."""
    ev = narrow.BUILTIN_EVAL.get(f.name)
    if ev is None:
        raise EvalError(f"`{f.name}` is not a builtin function")
    return ev(f, s, db)


narrow.BUILTIN_EVAL.update({
    "+": _arith_eval("+", lambda a, b: a + b),
    "-": _arith_eval("-", lambda a, b: a - b),
    "*": _arith_eval("*", lambda a, b: a * b),
    "div": _arith_eval("div", lambda a, b: a // b),
    "mod": _arith_eval("mod", lambda a, b: a % b),
    "abs": _abs_eval,
    "<": _compare_eval(lambda a, b: a < b),
    ">": _compare_eval(lambda a, b: a > b),
    "=<": _compare_eval(lambda a, b: a <= b),
    ">=": _compare_eval(lambda a, b: a >= b),
    "eq": _eq_eval,
    "apply": apply_eval,
})
narrow.ETA_EVAL = eta_eval


# ---------------------------------------------------------------------------
# Iterative deepening driver

def query_vars_of(goal):
    """Named variables of a goal in order of first appearance."""
    seen = set()
    out = []
    for v in terms.term_vars(goal):
        if v.name and v.id not in seen:
            seen.add(v.id)
            out.append((v.name, v))
    return out


def solve(goal, db, cfg: SearchConfig = None, query_vars=None) -> AnswerStream:
    """Stream of Answers for a resolved goal.

    Iteration k searches the whole tree with limit init + k*step; a
    solution is emitted only when its depth falls inside the current
    iteration's window, which suppresses re-found solutions.  The stream
    ends with status `complete` when an iteration finishes without ever
    hitting the limit, or `depth_limit` when max_depth is exhausted with
    cutoffs still occurring.
    """
    cfg = cfg or SearchConfig()
    if query_vars is None:
        query_vars = query_vars_of(goal)
    stream = AnswerStream()

    def run():
        prev_limit = None
        limit = cfg.depth_init
        if cfg.max_depth is not None:
            limit = min(limit, cfg.max_depth)
        while True:
            s = BindingState(depth_limit=limit, rewrite_cap=cfg.max_rewrites)
            for _ in solve_goal(goal, s, db):
                fd = s.depth_used
                if prev_limit is None or fd > prev_limit:
                    names = [n for n, _ in query_vars]
                    vs = [v for _, v in query_vars]
                    for values in narrow.normalize_many(vs, s, db):
                        yield Answer(list(zip(names, values)), fd)
            if not s.limit_hit:
                stream.status = COMPLETE
                return
            if cfg.max_depth is not None and limit >= cfg.max_depth:
                stream.status = DEPTH_LIMIT
                return
            prev_limit = limit
            limit += cfg.depth_step
            if cfg.max_depth is not None:
                limit = min(limit, cfg.max_depth)

    stream._gen = run()
    return stream


def prepare_query(text: str, db):
    """Parse, resolve and type-check a query; returns (goal, query_vars)
    or (None, []) for an empty line."""
    raw, var_order = rd.parse_query(text, db.ops)
    if raw is None:
        return None, []
    goal = db.resolve_goal(raw)
    tc.check_query(goal, db)
    return goal, var_order


def solve_text(text: str, db, cfg: SearchConfig = None) -> AnswerStream:
    goal, qvars = prepare_query(text, db)
    if goal is None:
        raise EvalError("empty query")
    return solve(goal, db, cfg, qvars)
