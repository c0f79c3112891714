"""Ground fixed-point semantics, used to cross-check the solver.

A loaded program in the oracle fragment (clause bodies made of plain
predicate atoms) is expanded into its finite set of ground rules up to a
term-depth bound, with defined functions replaced by their values, and
the inductively defined atom set is computed as the least fixed point of
the immediate-consequence operator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import RewriteLimitError, EvalError
from . import terms
from .terms import Var, Int, Ctor, FunApp, Lambda, Eta, BindingState
from . import typecheck as tc
from .typecheck import TyApp
from . import narrow
from . import pretty


@dataclass(frozen=True)
class GroundRule:
    premises: frozenset     # of atom strings
    conclusion: str


@dataclass(frozen=True)
class GroundRuleSet:
    rules: tuple
    universe: frozenset


def _has_funapp(t) -> bool:
    ty = type(t)
    if ty is FunApp or ty is Eta:
        return True
    if ty is Ctor:
        return any(_has_funapp(a) for a in t.args)
    return False


def _subst(t, env):
    ty = type(t)
    if ty is Var:
        return env[t.id]
    if ty is Ctor:
        if not t.args:
            return t
        return Ctor(t.name, [_subst(a, env) for a in t.args])
    if ty is FunApp:
        return FunApp(t.name, [_subst(a, env) for a in t.args],
                      eq_type=t.eq_type)
    return t


def ground_terms(ty, depth: int, db, int_range: int):
    """All ground constructor terms of a type up to the given depth
    (node count along the deepest path); integers range over
    [-int_range, int_range]."""
    if depth < 1:
        return []
    if isinstance(ty, TyApp) and ty.name == "int":
        return [Int(i) for i in range(-int_range, int_range + 1)]
    if not isinstance(ty, TyApp):
        return None  # type variables / function types are not enumerable
    decl = db.types.get(ty.name)
    if decl is None:
        return None
    out = []
    for cname in decl.ctor_names:
        sig = db.ctors[cname]
        subst: dict = {}
        if tc.unify_types(sig.result, ty, subst) is None:
            continue
        arg_tys = [tc.resolve_ty(t, subst) for t in sig.arg_types]
        arg_choices = []
        bad = False
        for at in arg_tys:
            choices = ground_terms(at, depth - 1, db, int_range)
            if choices is None:
                return None
            arg_choices.append(choices)
            if not choices:
                bad = True
        if bad and arg_tys:
            continue
        for combo in itertools.product(*arg_choices):
            out.append(Ctor(cname, combo))
    return out


def _atom_text(atom) -> str:
    return pretty.term_text(atom, None)


def _eval_atom(atom, db, cap: int):
    """Replace every defined-function call in a ground atom by its
    value; None when some call does not terminate or denote."""
    if not _has_funapp(atom):
        return _atom_text(atom)
    s = BindingState(rewrite_cap=cap)
    try:
        for value in narrow.normalize(atom, s, db):
            return _atom_text(value)
    except RewriteLimitError:
        return None
    except EvalError:
        return None
    return None


def ground_instances(db, depth: int = 3, int_range: int = 3,
                     rewrite_cap: int = 10000):
    """Expand the program's clauses into ground rules.

    Returns (GroundRuleSet, warnings).  Clauses outside the oracle
    fragment (non-atom goals in the body, or variables whose types
    cannot be enumerated) are dropped with a warning, as are ground
    instances whose function calls fail to terminate or denote.
    """
    warnings: list = []
    rules: list = []
    for pname, clauses in sorted(db.clauses.items()):
        for clause in clauses:
            text = db.text(clause.head)
            bad = None
            for atom in clause.body:
                if atom.name not in db.preds:
                    bad = f"non-atom goal `{db.text(atom)}`"
                    break
            if bad:
                warnings.append(f"dropped clause {text}: {bad}")
                continue
            var_types = tc.check_clause(clause, db)
            enums = {}
            for vid, vty in var_types.items():
                choices = ground_terms(vty, depth, db, int_range)
                if choices is None:
                    bad = f"type {vty} is not enumerable"
                    break
                enums[vid] = choices
            if bad:
                warnings.append(f"dropped clause {text}: {bad}")
                continue
            vids = list(enums)
            dropped = 0
            for combo in itertools.product(*(enums[v] for v in vids)):
                env = dict(zip(vids, combo))
                head = _eval_atom(_subst(clause.head, env), db, rewrite_cap)
                if head is None:
                    dropped += 1
                    continue
                premises = []
                for atom in clause.body:
                    p = _eval_atom(_subst(atom, env), db, rewrite_cap)
                    if p is None:
                        break
                    premises.append(p)
                else:
                    rules.append(GroundRule(frozenset(premises), head))
                    continue
                dropped += 1
            if dropped:
                warnings.append(
                    f"clause {text}: {dropped} instances dropped "
                    "(function call failed to terminate or denote)")
    universe = set()
    for r in rules:
        universe.add(r.conclusion)
        universe.update(r.premises)
    return GroundRuleSet(tuple(rules), frozenset(universe)), warnings


def phi_step(rs: GroundRuleSet, y: frozenset) -> frozenset:
    """Immediate consequences: conclusions of rules whose premises are
    all in y."""
    return frozenset(r.conclusion for r in rs.rules if r.premises <= y)


def lfp(rs: GroundRuleSet) -> frozenset:
    """Least fixed point of phi: the inductively defined atom set."""
    x: frozenset = frozenset()
    while True:
        nxt = x | phi_step(rs, x)
        if nxt == x:
            return x
        x = nxt


def is_closed(rs: GroundRuleSet, a: frozenset) -> bool:
    """Is a closed under every rule (premises in a imply conclusion)?"""
    return all(r.conclusion in a for r in rs.rules if r.premises <= a)
