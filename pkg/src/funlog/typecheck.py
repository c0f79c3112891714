"""Polymorphic type checking of clauses and rewrite rules.

Declarations are mandatory, so this is checking rather than inference:
every predicate/constructor/function occurrence instantiates a fresh
copy of its declared scheme, clause variables get one monotype for the
whole clause, and the defining occurrence (clause head or rule left
side) is held at its generic type by instantiating its scheme with
rigid type constants.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .errors import TypeError_
from . import terms
from .terms import Var, Int, Ctor, FunApp, Lambda, Eta, FunRef


@dataclass(frozen=True)
class TyVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class TyApp:
    name: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class FunTy:
    args: tuple
    result: object

    def __str__(self):
        return f"[{','.join(str(a) for a in self.args)}]=>>{self.result}"


@dataclass(frozen=True)
class Rigid:
    """A skolem constant standing for a universally quantified type
    variable of the declaration being checked."""
    name: str

    def __str__(self):
        return "#" + self.name


INT = TyApp("int")
BOOL = TyApp("bool")

_ty_counter = itertools.count(1)


def fresh_tyvar(hint: str = "T") -> TyVar:
    return TyVar(f"{hint}%{next(_ty_counter)}")


def fresh_rigid(hint: str) -> Rigid:
    return Rigid(f"{hint}%{next(_ty_counter)}")


def ty_vars(ty, acc=None):
    if acc is None:
        acc = []
    if isinstance(ty, TyVar):
        if ty.name not in [v.name for v in acc]:
            acc.append(ty)
    elif isinstance(ty, TyApp):
        for a in ty.args:
            ty_vars(a, acc)
    elif isinstance(ty, FunTy):
        for a in ty.args:
            ty_vars(a, acc)
        ty_vars(ty.result, acc)
    return acc


def instantiate(ty, mapping: dict):
    """Replace TyVars via mapping (missing entries are kept)."""
    if isinstance(ty, TyVar):
        return mapping.get(ty.name, ty)
    if isinstance(ty, TyApp):
        if not ty.args:
            return ty
        return TyApp(ty.name, tuple(instantiate(a, mapping) for a in ty.args))
    if isinstance(ty, FunTy):
        return FunTy(tuple(instantiate(a, mapping) for a in ty.args),
                     instantiate(ty.result, mapping))
    return ty


def fresh_instance(tys, factory=fresh_tyvar):
    """One shared renaming of all TyVars across the given types."""
    mapping = {}
    for t in tys:
        for v in ty_vars(t):
            if v.name not in mapping:
                mapping[v.name] = factory(v.name.split("%")[0])
    return [instantiate(t, mapping) for t in tys]


def walk(ty, subst: dict):
    while isinstance(ty, TyVar):
        nxt = subst.get(ty.name)
        if nxt is None:
            return ty
        ty = nxt
    return ty


def resolve_ty(ty, subst: dict):
    ty = walk(ty, subst)
    if isinstance(ty, TyApp):
        if not ty.args:
            return ty
        return TyApp(ty.name, tuple(resolve_ty(a, subst) for a in ty.args))
    if isinstance(ty, FunTy):
        return FunTy(tuple(resolve_ty(a, subst) for a in ty.args),
                     resolve_ty(ty.result, subst))
    return ty


def occurs_in(name: str, ty, subst: dict) -> bool:
    ty = walk(ty, subst)
    if isinstance(ty, TyVar):
        return ty.name == name
    if isinstance(ty, TyApp):
        return any(occurs_in(name, a, subst) for a in ty.args)
    if isinstance(ty, FunTy):
        return (any(occurs_in(name, a, subst) for a in ty.args)
                or occurs_in(name, ty.result, subst))
    return False


def unify_types(t1, t2, subst: dict) -> Optional[dict]:
    """Most general unifier extending subst, or None on failure."""
    t1 = walk(t1, subst)
    t2 = walk(t2, subst)
    if isinstance(t1, TyVar):
        if isinstance(t2, TyVar) and t1.name == t2.name:
            return subst
        if occurs_in(t1.name, t2, subst):
            return None
        subst[t1.name] = t2
        return subst
    if isinstance(t2, TyVar):
        if occurs_in(t2.name, t1, subst):
            return None
        subst[t2.name] = t1
        return subst
    if isinstance(t1, Rigid) and isinstance(t2, Rigid):
        return subst if t1.name == t2.name else None
    if isinstance(t1, TyApp) and isinstance(t2, TyApp):
        if t1.name != t2.name or len(t1.args) != len(t2.args):
            return None
        for a, b in zip(t1.args, t2.args):
            if unify_types(a, b, subst) is None:
                return None
        return subst
    if isinstance(t1, FunTy) and isinstance(t2, FunTy):
        if len(t1.args) != len(t2.args):
            return None
        for a, b in zip(t1.args, t2.args):
            if unify_types(a, b, subst) is None:
                return None
        return unify_types(t1.result, t2.result, subst)
    return None


# Builtin function signatures.  eq and apply are handled specially.
ARITH_FUNS = ("+", "-", "*", "div", "mod")
COMPARE_FUNS = ("<", ">", "=<", ">=")
BUILTIN_FUN_SIGS = {}
for _f in ARITH_FUNS:
    BUILTIN_FUN_SIGS[_f] = ((INT, INT), INT)
BUILTIN_FUN_SIGS["abs"] = ((INT,), INT)
for _f in COMPARE_FUNS:
    BUILTIN_FUN_SIGS[_f] = ((INT, INT), BOOL)
BUILTIN_FUN_SIGS["and"] = ((BOOL, BOOL), BOOL)
BUILTIN_FUN_SIGS["or"] = ((BOOL, BOOL), BOOL)

BUILTIN_PREDS = {"true": 0, "fail": 0, "=": 2, "write": 1, "nl": 0}


class _Checker:
    """Shared machinery for checking one clause or rewrite rule."""

    def __init__(self, db):
        self.db = db
        self.subst: dict = {}
        self.env: dict = {}     # var id -> TypeExpr
        self.eq_sites: list = []

    def fail(self, message, term=None):
        from .pretty import term_text
        where = f" in `{term_text(term)}`" if term is not None else ""
        raise TypeError_(message + where)

    def mismatch(self, expected, actual, term):
        self.fail(
            f"type mismatch: expected {resolve_ty(expected, self.subst)}, "
            f"found {resolve_ty(actual, self.subst)}", term)

    def must_unify(self, expected, actual, term):
        if unify_types(expected, actual, self.subst) is None:
            self.mismatch(expected, actual, term)

    def var_type(self, v: Var):
        ty = self.env.get(v.id)
        if ty is None:
            ty = fresh_tyvar(v.name or "V")
            self.env[v.id] = ty
        return ty

    def type_of(self, t):
        ty = type(t)
        if ty is Var:
            return self.var_type(t)
        if ty is Int:
            return INT
        if ty is Ctor:
            return self.type_of_ctor(t)
        if ty is FunApp:
            return self.type_of_funapp(t)
        if ty is Lambda:
            params = []
            for p in t.params:
                params.append(self.var_type(p))
            return FunTy(tuple(params), self.type_of(t.body))
        if ty is Eta:
            self.check_goal(t.goal)
            return self.var_type(t.var)
        if ty is FunRef:
            return self.funref_type(t)
        raise AssertionError(f"unexpected term {t!r}")

    def type_of_ctor(self, t: Ctor):
        sig = self.db.ctors.get(t.name)
        if sig is None:
            self.fail(f"undeclared constructor `{t.name}`", t)
        arg_tys, res_ty = fresh_instance([TyApp("", tuple(sig.arg_types)),
                                          sig.result])
        arg_tys = arg_tys.args
        if len(arg_tys) != len(t.args):
            self.fail(f"constructor `{t.name}` expects {len(arg_tys)} "
                      f"arguments, found {len(t.args)}", t)
        for a, want in zip(t.args, arg_tys):
            self.must_unify(want, self.type_of(a), a)
        return res_ty

    def funref_type(self, t: FunRef):
        sig = self.db.funs.get(t.name)
        if sig is not None:
            args, res = sig
            inst = fresh_instance([FunTy(tuple(args), res)])[0]
            return inst
        sig = BUILTIN_FUN_SIGS.get(t.name)
        if sig is not None:
            return FunTy(sig[0], sig[1])
        if t.name == "eq":
            a = fresh_tyvar("A")
            return FunTy((a, a), BOOL)
        self.fail(f"`{t.name}` is not a function", t)

    def type_of_funapp(self, t: FunApp):
        name = t.name
        if name == "eq":
            a = fresh_tyvar("A")
            self.must_unify(a, self.type_of(t.args[0]), t.args[0])
            self.must_unify(a, self.type_of(t.args[1]), t.args[1])
            self.eq_sites.append((t, a))
            return BOOL
        if name == "apply":
            return self.type_of_apply(t)
        sig = self.db.funs.get(name)
        if sig is None:
            sig = BUILTIN_FUN_SIGS.get(name)
            if sig is None:
                self.fail(f"undeclared function `{name}`", t)
            arg_tys, res_ty = sig
        else:
            inst = fresh_instance([TyApp("", tuple(sig[0])), sig[1]])
            arg_tys, res_ty = inst[0].args, inst[1]
        if len(arg_tys) != len(t.args):
            self.fail(f"function `{name}` expects {len(arg_tys)} arguments, "
                      f"found {len(t.args)}", t)
        for a, want in zip(t.args, arg_tys):
            self.must_unify(want, self.type_of(a), a)
        return res_ty

    def type_of_apply(self, t: FunApp):
        fn, arglist = t.args
        elems = []
        rest = arglist
        while type(rest) is Ctor and rest.name == terms.LIST_CONS:
            elems.append(rest.args[0])
            rest = rest.args[1]
        if not (type(rest) is Ctor and rest.name == terms.LIST_NIL):
            self.fail("apply needs a literal argument list", t)
        elem_tys = tuple(self.type_of(e) for e in elems)
        res = fresh_tyvar("R")
        self.must_unify(FunTy(elem_tys, res), self.type_of(fn), fn)
        return res

    def check_goal(self, goal):
        if type(goal) is Var:
            self.fail("a goal may not be an unapplied variable", goal)
        if type(goal) is not Ctor:
            self.fail("malformed goal", goal)
        name = goal.name
        if name == "," and len(goal.args) == 2:
            self.check_goal(goal.args[0])
            self.check_goal(goal.args[1])
            return
        if name == "=" and len(goal.args) == 2:
            a = fresh_tyvar("E")
            self.must_unify(a, self.type_of(goal.args[0]), goal.args[0])
            self.must_unify(a, self.type_of(goal.args[1]), goal.args[1])
            return
        if name in ("true", "fail", "nl") and not goal.args:
            return
        if name == "write" and len(goal.args) == 1:
            self.type_of(goal.args[0])
            return
        sig = self.db.preds.get(name)
        if sig is None:
            self.fail(f"undeclared predicate `{name}`", goal)
        arg_tys = fresh_instance([TyApp("", tuple(sig))])[0].args
        if len(arg_tys) != len(goal.args):
            self.fail(f"predicate `{name}` expects {len(arg_tys)} arguments, "
                      f"found {len(goal.args)}", goal)
        for a, want in zip(goal.args, arg_tys):
            self.must_unify(want, self.type_of(a), a)

    def finish(self):
        """Resolve and store eq annotations; return the var typing."""
        for site, tv in self.eq_sites:
            site.eq_type = resolve_ty(tv, self.subst)
        return {vid: resolve_ty(ty, self.subst)
                for vid, ty in self.env.items()}


def check_clause(clause, db) -> dict:
    """Check one clause; returns the clause-variable typing.

    Raises TypeError_ naming the offending position on failure.
    """
    ck = _Checker(db)
    head = clause.head
    sig = db.preds.get(head.name)
    if sig is None:
        ck.fail(f"undeclared predicate `{head.name}`", head)
    rigid = {v.name: fresh_rigid(v.name.split("%")[0])
             for t in sig for v in ty_vars(t)}
    arg_tys = [instantiate(t, rigid) for t in sig]
    if len(arg_tys) != len(head.args):
        ck.fail(f"predicate `{head.name}` expects {len(arg_tys)} arguments, "
                f"found {len(head.args)}", head)
    for a, want in zip(head.args, arg_tys):
        ck.must_unify(want, ck.type_of(a), a)
    for atom in clause.body:
        ck.check_goal(atom)
    return ck.finish()


def check_rule(rule, db) -> dict:
    """Check one rewrite rule against its function declaration."""
    ck = _Checker(db)
    lhs = rule.lhs
    sig = db.funs.get(lhs.name)
    if sig is None:
        ck.fail(f"undeclared function `{lhs.name}`", lhs)
    arg_sig, res_sig = sig
    rigid = {v.name: fresh_rigid(v.name.split("%")[0])
             for t in list(arg_sig) + [res_sig] for v in ty_vars(t)}
    arg_tys = [instantiate(t, rigid) for t in arg_sig]
    res_ty = instantiate(res_sig, rigid)
    if len(arg_tys) != len(lhs.args):
        ck.fail(f"function `{lhs.name}` expects {len(arg_tys)} arguments, "
                f"found {len(lhs.args)}", lhs)
    for a, want in zip(lhs.args, arg_tys):
        ck.must_unify(want, ck.type_of(a), a)
    ck.must_unify(res_ty, ck.type_of(rule.rhs), rule.rhs)
    return ck.finish()


def check_query(goal, db) -> dict:
    """Type-check an interactive query goal; returns its var typing."""
    ck = _Checker(db)
    ck.check_goal(goal)
    return ck.finish()
