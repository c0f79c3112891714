"""Assembling parsed items into an executable database.

Loading enforces declaration-before-use, reclassifies raw applications
into constructors / function applications / lambda / eta forms,
type-checks every clause and rule, and runs the rewrite-rule discipline
checks (constructor discipline, left linearity, term rewriting,
non-overlapping) plus the exhaustiveness check.  Discipline violations
are warnings and never block execution; type errors and undeclared
names abort loading.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import LoadError, TypeError_
from . import terms
from .terms import Var, Int, Ctor, FunApp, Lambda, Eta, FunRef, Clause, RewriteRule
from . import reader as rd
from . import typecheck as tc
from .typecheck import TyVar, TyApp, FunTy
from . import pretty


@dataclass
class Diagnostic:
    severity: str   # warning | error
    check: str
    text: str

    def __str__(self):
        return f"{self.severity}({self.check}): {self.text}"


@dataclass
class CtorSig:
    name: str
    type_name: str
    arg_types: tuple
    result: TyApp


@dataclass
class TypeDecl:
    name: str
    params: tuple
    ctor_names: tuple


BUILTIN_FUN_ARITY = {name: len(sig[0])
                     for name, sig in tc.BUILTIN_FUN_SIGS.items()}
BUILTIN_FUN_ARITY["eq"] = 2
BUILTIN_FUN_ARITY["apply"] = 2


RESERVED_NAMES = set(BUILTIN_FUN_ARITY) | set(tc.BUILTIN_PREDS) | {
    "lambda", "eta", "solve", ",", ":-", "->>",
}


class Database:
    """A loaded program: immutable once load() returns."""

    def __init__(self, ops=None):
        self.ops = ops if ops is not None else rd.default_ops()
        self.types: dict = {}
        self.ctors: dict = {}
        self.preds: dict = {}
        self.funs: dict = {}
        self.clauses: dict = {}
        self.rules: dict = {}
        self._rule_plans: dict = {}
        self._clause_plans: dict = {}
        self._seed_builtins()

    def rule_plan(self, name: str):
        """Precompiled instantiation templates for a function's rules,
        each with argument-index guards for quick mismatch skipping."""
        plan = self._rule_plans.get(name)
        if plan is None:
            rules = self.rules.get(name)
            if rules is None:
                return None
            plan = [(terms.Template([r.lhs, r.rhs]),
                     terms.index_guards(r.lhs.args))
                    for r in rules]
            self._rule_plans[name] = plan
        return plan

    def clause_plan(self, name: str):
        plan = self._clause_plans.get(name)
        if plan is None:
            clauses = self.clauses.get(name)
            if clauses is None:
                return None
            plan = [(terms.Template([c.head] + list(c.body)),
                     terms.index_guards(c.head.args)) for c in clauses]
            self._clause_plans[name] = plan
        return plan

    def _seed_builtins(self):
        self.types["int"] = TypeDecl("int", (), ())
        self.types["bool"] = TypeDecl("bool", (), ("true", "false"))
        for b in ("true", "false"):
            self.ctors[b] = CtorSig(b, "bool", (), tc.BOOL)
        # and/or run through the ordinary rewrite machinery; laziness in
        # the second argument and the non-overlap commit come for free
        w1, w2, w3, w4 = Var("W"), Var("W"), Var("W"), Var("W")
        self.rules["and"] = [
            RewriteRule(FunApp("and", (Ctor("true"), w1)), w1),
            RewriteRule(FunApp("and", (Ctor("false"), w2)), Ctor("false")),
        ]
        self.rules["or"] = [
            RewriteRule(FunApp("or", (Ctor("true"), w3)), Ctor("true")),
            RewriteRule(FunApp("or", (Ctor("false"), w4)), w4),
        ]

    def is_function_name(self, name: str) -> bool:
        return name in self.funs or name in BUILTIN_FUN_ARITY

    def function_arity(self, name: str) -> Optional[int]:
        if name in self.funs:
            return len(self.funs[name][0])
        return BUILTIN_FUN_ARITY.get(name)

    def ctors_of(self, type_name: str):
        decl = self.types.get(type_name)
        if decl is None:
            return None
        return [self.ctors[c] for c in decl.ctor_names]

    def text(self, term) -> str:
        return pretty.term_text(term, self.ops)

    # -- classification of raw parsed applications

    def resolve_term(self, t):
        """Reclassify a raw parse tree into the executable term kinds."""
        ty = type(t)
        if ty is not Ctor:
            return t
        name = t.name
        if name == "lambda" and len(t.args) == 2:
            params = []
            rest = t.args[0]
            while type(rest) is Ctor and rest.name == terms.LIST_CONS:
                if type(rest.args[0]) is not Var:
                    raise TypeError_("lambda parameters must be variables")
                params.append(rest.args[0])
                rest = rest.args[1]
            if not (type(rest) is Ctor and rest.name == terms.LIST_NIL):
                raise TypeError_("lambda needs a literal parameter list")
            return Lambda(params, self.resolve_term(t.args[1]))
        if name == "eta" and len(t.args) == 2:
            if type(t.args[0]) is not Var:
                raise TypeError_("eta's first argument must be a variable")
            return Eta(t.args[0], self.resolve_goal(t.args[1]))
        if self.is_function_name(name):
            arity = self.function_arity(name)
            if not t.args:
                return FunRef(name)
            if len(t.args) != arity:
                raise TypeError_(
                    f"function `{name}` expects {arity} arguments, "
                    f"found {len(t.args)}")
            return FunApp(name, [self.resolve_term(a) for a in t.args])
        sig = self.ctors.get(name)
        if sig is not None:
            if len(t.args) != len(sig.arg_types):
                raise TypeError_(
                    f"constructor `{name}` expects {len(sig.arg_types)} "
                    f"arguments, found {len(t.args)}")
            return Ctor(name, [self.resolve_term(a) for a in t.args])
        raise TypeError_(f"undeclared name `{name}`")

    def resolve_goal(self, g):
        if type(g) is Var:
            raise TypeError_("a goal may not be a bare variable")
        if type(g) is not Ctor:
            raise TypeError_(f"malformed goal `{pretty.term_text(g)}`")
        name = g.name
        if name == "," and len(g.args) == 2:
            return Ctor(",", (self.resolve_goal(g.args[0]),
                              self.resolve_goal(g.args[1])))
        if name == "=" and len(g.args) == 2:
            return Ctor("=", (self.resolve_term(g.args[0]),
                              self.resolve_term(g.args[1])))
        if name in ("true", "fail", "nl"):
            if g.args:
                raise TypeError_(f"`{name}` takes no arguments")
            return Ctor(name)
        if name == "write":
            if len(g.args) != 1:
                raise TypeError_("write takes one argument")
            return Ctor("write", (self.resolve_term(g.args[0]),))
        sig = self.preds.get(name)
        if sig is None:
            raise TypeError_(f"undeclared predicate `{name}`")
        if len(g.args) != len(sig):
            raise TypeError_(f"predicate `{name}` expects {len(sig)} "
                             f"arguments, found {len(g.args)}")
        return Ctor(name, [self.resolve_term(a) for a in g.args])


class _Loader:
    def __init__(self, ops):
        self.db = Database(ops)
        self.diags: list = []
        self.has_errors = False

    def warn(self, check, text):
        self.diags.append(Diagnostic("warning", check, text))

    def error(self, check, text):
        self.diags.append(Diagnostic("error", check, text))
        self.has_errors = True

    # -- declarations

    def check_type_expr(self, ty, owner: str, params=None):
        """Validate arity and known names inside a declared type."""
        if isinstance(ty, TyVar):
            if params is not None and ty.name not in params:
                self.error("declaration",
                           f"type variable {ty.name} not a parameter in {owner}")
            return
        if isinstance(ty, TyApp):
            decl = self.db.types.get(ty.name)
            if decl is None:
                self.error("declaration",
                           f"unknown type `{ty.name}` in {owner}")
                return
            if len(decl.params) != len(ty.args):
                self.error("declaration",
                           f"type `{ty.name}` expects {len(decl.params)} "
                           f"parameters in {owner}")
            for a in ty.args:
                self.check_type_expr(a, owner, params)
            return
        if isinstance(ty, FunTy):
            for a in ty.args:
                self.check_type_expr(a, owner, params)
            self.check_type_expr(ty.result, owner, params)

    def add_pred(self, item: rd.PredDecl):
        if item.name in self.db.preds or item.name in tc.BUILTIN_PREDS:
            self.error("declaration", f"predicate `{item.name}` already declared")
            return
        if item.name in RESERVED_NAMES:
            self.error("declaration", f"`{item.name}` is a reserved name")
            return
        for t in item.arg_types:
            self.check_type_expr(t, f"pred {item.name}")
        self.db.preds[item.name] = tuple(item.arg_types)
        self.db.clauses.setdefault(item.name, [])

    def add_fun(self, item: rd.FunDecl):
        if self.db.is_function_name(item.name):
            self.error("declaration", f"function `{item.name}` already declared")
            return
        if item.name in self.db.ctors:
            self.error("declaration",
                       f"`{item.name}` is already a constructor")
            return
        if item.name in RESERVED_NAMES:
            self.error("declaration", f"`{item.name}` is a reserved name")
            return
        for t in list(item.arg_types) + [item.result]:
            self.check_type_expr(t, f"function {item.name}")
        self.db.funs[item.name] = (tuple(item.arg_types), item.result)
        self.db.rules.setdefault(item.name, [])

    def add_ctors(self, item: rd.CtorDecl):
        if item.type_name in self.db.types:
            self.error("declaration", f"type `{item.type_name}` already declared")
            return
        params = item.params
        result = TyApp(item.type_name, tuple(TyVar(p) for p in params))
        self.db.types[item.type_name] = TypeDecl(
            item.type_name, params, tuple(name for name, _ in item.ctors))
        for name, arg_types in item.ctors:
            if name in self.db.ctors:
                self.error("declaration",
                           f"constructor `{name}` already belongs to type "
                           f"`{self.db.ctors[name].type_name}`")
                continue
            if self.db.is_function_name(name) or name in RESERVED_NAMES:
                self.error("declaration", f"`{name}` cannot be a constructor")
                continue
            for t in arg_types:
                self.check_type_expr(t, f"constructor {name}", set(params))
            self.db.ctors[name] = CtorSig(name, item.type_name,
                                          tuple(arg_types), result)

    # -- clauses and rules

    def add_clause(self, item: rd.ClauseItem):
        head = item.head
        if type(head) is not Ctor:
            self.error("clause", "malformed clause head")
            return
        if head.name in tc.BUILTIN_PREDS:
            self.error("clause", f"cannot redefine builtin `{head.name}`")
            return
        if head.name not in self.db.preds:
            self.error("clause", f"undeclared predicate `{head.name}` "
                                 "(declarations must precede use)")
            return
        try:
            rhead = Ctor(head.name,
                         [self.db.resolve_term(a) for a in head.args])
            rbody = tuple(self.db.resolve_goal(a) for a in item.body)
            clause = Clause(rhead, rbody)
            tc.check_clause(clause, self.db)
        except TypeError_ as e:
            self.error("type", f"{self.db.text(head)}: {e}")
            return
        self.db.clauses[head.name].append(clause)

    def add_rule(self, item: rd.RuleItem):
        lhs = item.lhs
        if type(lhs) is not Ctor or not lhs.args:
            self.error("rule", "malformed rule left side")
            return
        if lhs.name not in self.db.funs:
            self.error("rule", f"undeclared function `{lhs.name}` "
                               "(declarations must precede use)")
            return
        try:
            rlhs = self.db.resolve_term(lhs)
            if type(rlhs) is not FunApp:
                self.error("rule", f"`{lhs.name}` is not a defined function")
                return
            rule = RewriteRule(rlhs, self.db.resolve_term(item.rhs))
            tc.check_rule(rule, self.db)
        except TypeError_ as e:
            self.error("type", f"{self.db.text(lhs)}: {e}")
            return
        self.db.rules[lhs.name].append(rule)

    def run(self, items):
        for item in items:
            if isinstance(item, rd.PredDecl):
                self.add_pred(item)
            elif isinstance(item, rd.FunDecl):
                self.add_fun(item)
            elif isinstance(item, rd.CtorDecl):
                self.add_ctors(item)
            elif isinstance(item, rd.OpDecl):
                pass  # already in effect via the reader's table
            elif isinstance(item, rd.ClauseItem):
                self.add_clause(item)
            elif isinstance(item, rd.RuleItem):
                self.add_rule(item)
            else:
                self.error("load", f"unknown item {item!r}")
        for fname in self.db.funs:
            rules = self.db.rules[fname]
            for r in rules:
                self.diags.extend(check_constructor_discipline(r, self.db))
                self.diags.extend(check_left_linearity(r, self.db))
                self.diags.extend(check_term_rewriting(r, self.db))
            self.diags.extend(check_overlap(rules, self.db))
            ok, missing = check_exhaustive(fname, rules, self.db)
            if not ok:
                shown = "; ".join(missing[:4])
                self.warn("exhaustiveness",
                          f"function `{fname}` does not cover: {shown}")
        self.has_errors = self.has_errors or any(
            d.severity == "error" for d in self.diags)
        return self.db, self.diags


def load(items, ops=None, extra_warnings=()):
    """Build a Database from parsed items.

    Returns (db, diagnostics); warnings never block execution, but any
    error raises LoadError carrying the full diagnostic list.
    """
    loader = _Loader(ops)
    for w in extra_warnings:
        loader.warn("syntax", w)
    db, diags = loader.run(items)
    if loader.has_errors:
        raise LoadError(diags)
    return db, diags


def load_text(text: str):
    """Parse and load one program text."""
    items, warnings, ops = rd.parse_program(text)
    return load(items, ops, warnings)


def rule_text(rule: RewriteRule, db) -> str:
    return f"{db.text(rule.lhs)} ->> {db.text(rule.rhs)}"


# ---------------------------------------------------------------------------
# Syntactic unification over patterns (rule left sides); embedded
# function applications are treated like constructors.

def _syn_walk(t, subst):
    while type(t) is Var:
        nxt = subst.get(t.id)
        if nxt is None:
            return t
        t = nxt
    return t


def _syn_occurs(vid, t, subst):
    t = _syn_walk(t, subst)
    if type(t) is Var:
        return t.id == vid
    if type(t) in (Ctor, FunApp):
        return any(_syn_occurs(vid, a, subst) for a in t.args)
    return False


def syn_unify(a, b, subst) -> bool:
    """Purely syntactic unification with occurs check (patterns only)."""
    a = _syn_walk(a, subst)
    b = _syn_walk(b, subst)
    if a is b:
        return True
    if type(a) is Var:
        if _syn_occurs(a.id, b, subst):
            return False
        subst[a.id] = b
        return True
    if type(b) is Var:
        if _syn_occurs(b.id, a, subst):
            return False
        subst[b.id] = a
        return True
    if type(a) is Int and type(b) is Int:
        return a.value == b.value
    if type(a) in (Ctor, FunApp) and type(b) in (Ctor, FunApp):
        if a.name != b.name or len(a.args) != len(b.args):
            return False
        return all(syn_unify(x, y, subst) for x, y in zip(a.args, b.args))
    return False


# ---------------------------------------------------------------------------
# The four rewrite-rule discipline checks

def check_constructor_discipline(rule: RewriteRule, db):
    """No function may appear inside the arguments of a rule left side."""
    out = []

    def walk(t):
        if type(t) is FunApp:
            out.append(Diagnostic(
                "warning", "constructor_discipline",
                f"{rule_text(rule, db)} (function `{t.name}` in left side)"))
        if type(t) in (Ctor, FunApp):
            for a in t.args:
                walk(a)

    for a in rule.lhs.args:
        walk(a)
    return out


def check_left_linearity(rule: RewriteRule, db):
    seen = set()
    dup = set()
    for v in terms.term_vars(Ctor("", rule.lhs.args)):
        if v.id in seen:
            dup.add(v.name or f"_{v.id}")
        seen.add(v.id)
    if dup:
        return [Diagnostic("warning", "left_linearity",
                           f"{rule_text(rule, db)} (repeated: "
                           f"{', '.join(sorted(dup))})")]
    return []


def check_term_rewriting(rule: RewriteRule, db):
    lhs_ids = {v.id for v in terms.term_vars(Ctor("", rule.lhs.args))}
    extra = [v.name or f"_{v.id}" for v in terms.term_vars(rule.rhs)
             if v.id not in lhs_ids]
    if extra:
        return [Diagnostic("warning", "term_rewriting",
                           f"{rule_text(rule, db)} (unbound on right: "
                           f"{', '.join(sorted(set(extra)))})")]
    return []


def check_overlap(rules, db):
    """No two rule left sides may be unifiable with each other."""
    out = []
    for i in range(len(rules)):
        for j in range(i + 1, len(rules)):
            a = terms.rename_apart(rules[i]).lhs
            b = terms.rename_apart(rules[j]).lhs
            if syn_unify(Ctor("", a.args), Ctor("", b.args), {}):
                out.append(Diagnostic(
                    "warning", "non_overlapping",
                    f"{rule_text(rules[i], db)} overlaps "
                    f"{rule_text(rules[j], db)}"))
    return out


# ---------------------------------------------------------------------------
# Exhaustiveness: successively instantiate a tuple of typed variables so
# that it no longer unifies with each rule's argument tuple; whatever
# survives is a missing pattern.

class _Cand:
    __slots__ = ("args", "var_types")

    def __init__(self, args, var_types):
        self.args = args
        self.var_types = var_types


def _instantiate_sig(sig: CtorSig, at_type: TyApp):
    """Constructor argument types when the constructor builds at_type."""
    subst: dict = {}
    if tc.unify_types(sig.result, at_type, subst) is None:
        return None
    return [tc.resolve_ty(t, subst) for t in sig.arg_types]


def _replace_var(t, vid, repl):
    if type(t) is Var:
        return repl if t.id == vid else t
    if type(t) in (Ctor, FunApp):
        return Ctor(t.name, [_replace_var(a, vid, repl) for a in t.args])
    return t


def _find_split(c, r):
    """A candidate variable sitting opposite a rule constructor."""
    c_ty, r_ty = type(c), type(r)
    if c_ty is Var:
        if r_ty is Var:
            return None
        return c
    if r_ty is Var:
        return None
    if c_ty in (Ctor, FunApp) and r_ty in (Ctor, FunApp):
        if c.name != r.name or len(c.args) != len(r.args):
            return None
        for x, y in zip(c.args, r.args):
            hit = _find_split(x, y)
            if hit is not None:
                return hit
    return None


def _refine(cand: _Cand, rule_args, db, out):
    """Split cand until no piece unifies with rule_args; collect pieces."""
    if not syn_unify(Ctor("", tuple(cand.args)), Ctor("", tuple(rule_args)), {}):
        out.append(cand)
        return
    split = _find_split(Ctor("", tuple(cand.args)), Ctor("", tuple(rule_args)))
    if split is None:
        return  # covered entirely
    vty = cand.var_types.get(split.id)
    if not isinstance(vty, TyApp) or db.ctors_of(vty.name) is None \
            or not db.types[vty.name].ctor_names:
        # int, type variables, function types: only a variable pattern
        # can cover these, so the candidate survives as missing
        out.append(cand)
        return
    for sig in db.ctors_of(vty.name):
        arg_tys = _instantiate_sig(sig, vty)
        if arg_tys is None:
            continue
        fresh = [Var() for _ in arg_tys]
        var_types = dict(cand.var_types)
        for v, t in zip(fresh, arg_tys):
            var_types[v.id] = t
        skeleton = Ctor(sig.name, fresh)
        new_args = [_replace_var(a, split.id, skeleton) for a in cand.args]
        _refine(_Cand(new_args, var_types), rule_args, db, out)


def check_exhaustive(fun_name: str, rules, db):
    """Returns (exhaustive, missing-pattern texts) for one function."""
    sig = db.funs.get(fun_name)
    if sig is None:
        return True, []
    arg_sigs = tc.fresh_instance([TyApp("", tuple(sig[0]))])[0].args
    seed_vars = [Var() for _ in arg_sigs]
    cands = [_Cand(seed_vars, {v.id: t for v, t in zip(seed_vars, arg_sigs)})]
    for rule in rules:
        renamed = terms.rename_apart(rule)
        survivors: list = []
        for cand in cands:
            _refine(cand, renamed.lhs.args, db, survivors)
        cands = survivors
        if not cands:
            return True, []
    missing = ["(" + ",".join(db.text(a) for a in c.args) + ")"
               for c in cands]
    return False, missing
