"""Semantic unification and lazy outer narrowing.

Unification proceeds case by case: a variable side is instantiated
immediately (lazily: the other side is not rewritten), two constructor
terms decompose or clash, and otherwise one side is a function
application, which is rewritten by narrowing at its root and the result
unified with the other side.  Matching a redex against rule left sides
is itself semantic, which is what makes outermost selection complete.

Every generator in this module restores the binding state when it is
exhausted: alternatives are tried under a trail mark that is undone
before producing the next alternative and again before returning.
Callers must therefore drive these generators to exhaustion rather than
abandoning them mid-branch (the solver's answer stream may abandon a
whole search only because each query owns a private state).
"""

from __future__ import annotations

from .errors import EvalError
from . import terms
from .terms import (Var, Int, Ctor, FunApp, Lambda, Eta, FunRef,
                    BindingState, rename_apart, guards_admit)

# Builtin function evaluators; populated by the solver module (which
# also installs the eta hook) to keep the import graph acyclic.
BUILTIN_EVAL: dict = {}
ETA_EVAL = None

_OCCURS_FAIL = object()


def semantic_unify(a, b, s: BindingState, db):
    """Stream of states in which a and b have a common value."""
    return unify(a, b, s, db)


def unify(a, b, s, db):
    bindings = s.bindings
    while True:  # inlined resolve of a
        ta = type(a)
        if ta is Var:
            nxt = bindings.get(a.id)
            if nxt is None:
                break
            a = nxt
        elif ta is FunApp:
            if a.memo is None:
                break
            a = a.memo
        else:
            break
    while True:  # inlined resolve of b
        tb = type(b)
        if tb is Var:
            nxt = bindings.get(b.id)
            if nxt is None:
                break
            b = nxt
        elif tb is FunApp:
            if b.memo is None:
                break
            b = b.memo
        else:
            break
    if a is b:
        yield
        return
    if ta is Var:
        yield from _bind(a, b, s, db)
        return
    if tb is Var:
        yield from _bind(b, a, s, db)
        return
    if ta is FunApp or ta is Eta:
        yield from _narrow_unify(a, b, s, db)
        return
    if tb is FunApp or tb is Eta:
        yield from _narrow_unify(b, a, s, db)
        return
    if ta is Int:
        if tb is Int and a.value == b.value:
            yield
        return
    if ta is Ctor:
        if tb is Ctor and a.name == b.name and len(a.args) == len(b.args):
            yield from unify_args(a.args, b.args, 0, s, db)
        return
    if ta is FunRef:
        if tb is FunRef and a.name == b.name:
            yield
        return
    # Lambda: no unification beyond object identity (function positions
    # only; never reached by well-typed corpus programs)
    return


def unify_args(xs, ys, i, s, db):
    if i == len(xs):
        yield
        return
    for _ in unify(xs[i], ys[i], s, db):
        yield from unify_args(xs, ys, i + 1, s, db)


def _bind(v, t, s, db):
    """Case 1: instantiate variable v to t if the occurs check permits."""
    tt = type(t)
    if tt is Var or tt is Int or tt is FunRef or (tt is Ctor and not t.args):
        mark = s.mark()
        s.bind(v, t)
        yield
        s.undo(mark)
        return
    if tt is FunApp or tt is Eta:
        if _contains(v, t, s):
            # Excising here would only produce a fresh alias of v against
            # the same application; narrow the application instead so the
            # occurrence can rewrite away.
            yield from _narrow_unify(t, v, s, db)
            return
        mark = s.mark()
        s.bind(v, t)  # lazy: t is not rewritten now (maybe never)
        yield
        s.undo(mark)
        return
    pairs: list = []
    t2 = _excise(v, t, s, pairs)
    if t2 is _OCCURS_FAIL:
        return
    mark = s.mark()
    s.bind(v, t2)
    if pairs:
        yield from _solve_pairs(pairs, 0, s, db)
    else:
        yield
    s.undo(mark)


def _solve_pairs(pairs, i, s, db):
    if i == len(pairs):
        yield
        return
    v, t = pairs[i]
    for _ in unify(v, t, s, db):
        yield from _solve_pairs(pairs, i + 1, s, db)


def _contains(v, t, s):
    t = s.resolve(t)
    ty = type(t)
    if ty is Var:
        return t is v
    if ty is Ctor or ty is FunApp:
        return any(_contains(v, a, s) for a in t.args)
    if ty is Lambda:
        return _contains(v, t.body, s)
    if ty is Eta:
        return t.var is v or _contains(v, t.goal, s)
    return False


def _excise(v, t0, s, pairs):
    """Copy t0 without occurrences of v (single pass; returns t0 itself
    when nothing beneath it was excised).

    Each function application containing an occurrence is replaced by a
    fresh variable and queued as a new disagreement pair; an occurrence
    anywhere else fails the check.
    """
    t = s.resolve(t0)
    ty = type(t)
    if ty is Var:
        return _OCCURS_FAIL if t is v else t0
    if ty is Ctor:
        new_args = None
        for i, a in enumerate(t.args):
            a2 = _excise(v, a, s, pairs)
            if a2 is _OCCURS_FAIL:
                return _OCCURS_FAIL
            if a2 is not a and new_args is None:
                new_args = list(t.args[:i])
            if new_args is not None:
                new_args.append(a2)
        return t0 if new_args is None else Ctor(t.name, new_args)
    if ty is FunApp or ty is Eta:
        if _contains(v, t, s):
            fresh = Var()
            pairs.append((fresh, t))
            return fresh
        return t0
    if ty is Lambda:
        return _OCCURS_FAIL if _contains(v, t, s) else t0
    return t0  # Int, FunRef


def extended_occurs(v, t, s):
    """The occurs check extended to tolerate occurrences inside function
    applications.  Returns (t', pairs) on pass, None on failure."""
    pairs: list = []
    t2 = _excise(v, s.resolve(t), s, pairs)
    if t2 is _OCCURS_FAIL:
        return None
    return t2, pairs


def _narrow_unify(f, other, s, db):
    for result in narrow_step(f, s, db):
        yield from unify(result, other, s, db)


def narrow_step(f, s, db):
    """One narrowing step at the root of f; yields the replacing term.

    Alternatives follow rule order.  The result is memoized on f
    (call-by-need); the memo travels on the trail, so a rewrite chosen
    on one branch never leaks to another.
    """
    if type(f) is Eta:
        mark = s.mark()
        if s.charge(1):
            for value in ETA_EVAL(f, s, db):
                yield value
        s.undo(mark)
        return
    plan = db.rule_plan(f.name)
    if plan is not None:
        yield from _narrow_rules(f, plan, s, db)
        return
    ev = BUILTIN_EVAL.get(f.name)
    if ev is None:
        raise EvalError(f"no rules or builtin evaluator for `{f.name}`")
    mark = s.mark()
    for result in ev(f, s, db):
        memo_mark = s.mark()
        s.set_memo(f, result)
        yield result
        s.undo(memo_mark)
    s.undo(mark)


def _narrow_rules(f, plan, s, db):
    fence = terms.current_var_fence()
    for tpl, guards in plan:
        if guards and not guards_admit(guards, f.args, s):
            continue
        mark = s.mark()
        if not s.charge(1):
            return
        lhs, rhs = tpl.instantiate()
        committed = False
        for _ in unify_args(f.args, lhs.args, 0, s, db):
            if not _instantiated_since(s, mark[0], fence):
                # the rule applied without instantiating any variables of
                # the redex: non-overlapping rules mean no other rule can
                # apply, so remaining rules are cut after this one
                committed = True
            s.set_memo(f, rhs)
            yield rhs
        s.undo(mark)
        if committed:
            return


def _instantiated_since(s, trail_pos, fence):
    for e in s.trail[trail_pos:]:
        if type(e) is Var and e.id < fence:
            return True
    return False


# ---------------------------------------------------------------------------
# Answer normalization: repeatedly rewrite defined function terms using
# the same narrowing machinery, outside the depth accounting (rewrites
# count against the per-answer step cap instead).

def normalize(t, s, db):
    """Stream of fully rewritten copies of t (no FunApp/Eta anywhere)."""
    prev = s.normalizing
    s.normalizing = True
    try:
        yield from _norm(t, s, db)
    finally:
        s.normalizing = prev


def normalize_many(ts, s, db):
    """Joint normalization of several terms (shared variables stay
    consistent across them); yields lists."""
    prev = s.normalizing
    s.normalizing = True
    s.rewrite_steps = 0
    try:
        yield from _norm_list(list(ts), 0, [], s, db)
    finally:
        s.normalizing = prev


def _norm(t, s, db):
    t = s.resolve(t)
    ty = type(t)
    if ty is FunApp or ty is Eta:
        for r in narrow_step(t, s, db):
            yield from _norm(r, s, db)
        return
    if ty is Ctor and t.args:
        yield from _norm_ctor(t, 0, [], s, db)
        return
    # Var, Int, FunRef, 0-ary Ctor: already normal.  Lambda bodies are
    # kept as written: they are function values, not data.
    yield t


def _norm_ctor(t, i, acc, s, db):
    if i == len(t.args):
        yield Ctor(t.name, list(acc))
        return
    for na in _norm(t.args[i], s, db):
        acc.append(na)
        yield from _norm_ctor(t, i + 1, acc, s, db)
        acc.pop()


def _norm_list(ts, i, acc, s, db):
    if i == len(ts):
        yield list(acc)
        return
    for nt in _norm(ts[i], s, db):
        acc.append(nt)
        yield from _norm_list(ts, i + 1, acc, s, db)
        acc.pop()
