"""Lexing and parsing of program files and queries.

The syntax is Edinburgh-PROLOG-style: items are terminated by `.`,
operators are declared dynamically with `op(Priority,Fixity,Name)`, and
lists use the standard [H|T] sugar.  Applications are parsed into
neutral Ctor nodes; the database later reclassifies names into
constructors, defined functions, lambda and eta forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import LexError, ParseError
from . import terms
from .terms import Var, Int, Ctor
from . import typecheck as ty
from .typecheck import TyVar, TyApp, FunTy

SYM_CHARS = set("+-*/\\<>=~^:&@#$?")
FIXITIES = ("xfx", "xfy", "yfx", "fy", "fx", "xf", "yf")
ITEM_KEYWORDS = ("pred", "constructors", "function", "op")


@dataclass
class OpDef:
    priority: int
    fixity: str


class OperatorTable:
    """Dynamic operator table: one entry per (symbol, fixity class)."""

    def __init__(self):
        self.infix: dict = {}
        self.prefix: dict = {}
        self.postfix: dict = {}

    def declare(self, priority: int, fixity: str, name: str):
        if fixity not in FIXITIES:
            raise ParseError(f"unknown fixity `{fixity}`", 0, 0)
        if not 0 < priority <= 1200:
            raise ParseError(f"operator priority {priority} out of range", 0, 0)
        entry = OpDef(priority, fixity)
        if fixity in ("xfx", "xfy", "yfx"):
            self.infix[name] = entry
        elif fixity in ("fy", "fx"):
            self.prefix[name] = entry
        else:
            self.postfix[name] = entry

    def copy(self) -> "OperatorTable":
        t = OperatorTable()
        t.infix = dict(self.infix)
        t.prefix = dict(self.prefix)
        t.postfix = dict(self.postfix)
        return t


def default_ops() -> OperatorTable:
    t = OperatorTable()
    for prio, fixity, names in (
        (1200, "xfx", (":-", "->>")),
        (1150, "xfx", ("=>>",)),
        (1000, "xfy", (",",)),
        (740, "xfy", ("or",)),
        (720, "xfy", ("and",)),
        (700, "xfx", ("=", "eq", "<", ">", "=<", ">=")),
        (500, "yfx", ("+", "-")),
        (400, "yfx", ("*", "div", "mod")),
        (200, "fy", ("-",)),
    ):
        for n in names:
            t.declare(prio, fixity, n)
    return t


# ---------------------------------------------------------------------------
# Lexer

@dataclass
class Token:
    kind: str       # int name var sym punct dot end
    value: object
    line: int
    col: int

    def __repr__(self):
        return f"{self.kind}:{self.value!r}"


def lex(text: str):
    tokens = []
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(k=1):
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance()
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                advance()
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "*":
            start_line, start_col = line, col
            advance(2)
            while i < n and not (text[i] == "*" and i + 1 < n and text[i + 1] == "/"):
                advance()
            if i >= n:
                raise LexError("unterminated /* comment", start_line, start_col)
            advance(2)
            continue
        start_line, start_col = line, col
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", int(text[i:j]), start_line, start_col))
            advance(j - i)
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "var" if (c == "_" or c.isupper()) else "name"
            tokens.append(Token(kind, word, start_line, start_col))
            advance(j - i)
            continue
        if c == ".":
            nxt = text[i + 1] if i + 1 < n else ""
            if nxt == "" or nxt in " \t\r\n%":
                tokens.append(Token("dot", ".", start_line, start_col))
                advance()
                continue
            raise LexError("`.` must be followed by whitespace", line, col)
        if c in "()[],|":
            tokens.append(Token("punct", c, start_line, start_col))
            advance()
            continue
        if c in SYM_CHARS:
            j = i
            while j < n and text[j] in SYM_CHARS:
                j += 1
            tokens.append(Token("sym", text[i:j], start_line, start_col))
            advance(j - i)
            continue
        raise LexError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("end", None, line, col))
    return tokens


# ---------------------------------------------------------------------------
# Program items

@dataclass
class ClauseItem:
    head: object
    body: tuple


@dataclass
class RuleItem:
    lhs: object
    rhs: object


@dataclass
class PredDecl:
    name: str
    arg_types: tuple


@dataclass
class CtorDecl:
    type_name: str
    params: tuple        # type variable names
    ctors: tuple         # (name, arg_types) pairs


@dataclass
class FunDecl:
    name: str
    arg_types: tuple
    result: object


@dataclass
class OpDecl:
    priority: int
    fixity: str
    name: str


class Reader:
    """Parses one source text; operator declarations take effect for
    the remainder of the text."""

    def __init__(self, text: str, ops: Optional[OperatorTable] = None):
        self.tokens = lex(text)
        self.pos = 0
        self.ops = ops if ops is not None else default_ops()
        self.warnings: list = []
        self.item_vars: dict = {}

    # -- token plumbing

    def peek(self, k=0) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "end":
            self.pos += 1
        return t

    def error(self, message, tok=None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "end" else repr(tok.value)
        raise ParseError(f"{message} (found {found})", tok.line, tok.col)

    def expect_dot(self):
        t = self.next()
        if t.kind != "dot":
            self.error("expected `.` at end of item", t)

    def expect_punct(self, ch):
        t = self.next()
        if not (t.kind == "punct" and t.value == ch):
            self.error(f"expected `{ch}`", t)

    # -- variables are scoped per item; each `_` is a distinct fresh var

    def begin_item(self):
        self.item_vars = {}
        self.var_order: list = []

    def lookup_var(self, name: str) -> Var:
        if name == "_":
            return Var()
        v = self.item_vars.get(name)
        if v is None:
            v = Var(name)
            self.item_vars[name] = v
            self.var_order.append((name, v))
        return v

    # -- term parsing (operator precedence, read-term style)

    def parse_term(self, maxp: int):
        left, lp = self.parse_primary(maxp)
        while True:
            t = self.peek()
            name = None
            if t.kind in ("name", "sym"):
                name = t.value
            elif t.kind == "punct" and t.value == ",":
                name = ","
            if name is None:
                return left
            op = self.ops.infix.get(name)
            if op is not None and op.priority <= maxp:
                left_max = op.priority if op.fixity == "yfx" else op.priority - 1
                if lp <= left_max:
                    self.next()
                    right_max = (op.priority if op.fixity == "xfy"
                                 else op.priority - 1)
                    right = self.parse_term(right_max)
                    left = Ctor(name, (left, right))
                    lp = op.priority
                    continue
            op = self.ops.postfix.get(name)
            if op is not None and op.priority <= maxp:
                left_max = op.priority if op.fixity == "yf" else op.priority - 1
                if lp <= left_max:
                    self.next()
                    left = Ctor(name, (left,))
                    lp = op.priority
                    continue
            return left

    def parse_primary(self, maxp: int):
        t = self.next()
        if t.kind == "int":
            return Int(t.value), 0
        if t.kind == "var":
            return self.lookup_var(t.value), 0
        if t.kind == "punct":
            if t.value == "(":
                inner = self.parse_term(1200)
                self.expect_punct(")")
                return inner, 0
            if t.value == "[":
                return self.parse_list(), 0
            self.error("unexpected token", t)
        if t.kind in ("name", "sym"):
            name = t.value
            nxt = self.peek()
            if nxt.kind == "punct" and nxt.value == "(":
                self.next()
                args = self.parse_args()
                return Ctor(name, tuple(args)), 0
            op = self.ops.prefix.get(name)
            if op is not None and op.priority <= maxp and self.starts_operand(nxt):
                arg_max = op.priority if op.fixity == "fy" else op.priority - 1
                arg = self.parse_term(arg_max)
                if name == "-":
                    if type(arg) is Int:
                        return Int(-arg.value), 0
                    self.error("unary - applies to integer literals only", t)
                return Ctor(name, (arg,)), op.priority
            return Ctor(name), 0
        self.error("expected a term", t)

    def starts_operand(self, t: Token) -> bool:
        if t.kind in ("int", "var"):
            return True
        if t.kind == "punct":
            return t.value in "(["
        if t.kind in ("name", "sym"):
            # an infix-only operator cannot begin an operand
            if t.value in self.ops.infix and t.value not in self.ops.prefix:
                nxt2 = self.peek(1)
                return nxt2.kind == "punct" and nxt2.value == "("
            return True
        return False

    def parse_args(self):
        args = [self.parse_term(999)]
        while True:
            t = self.peek()
            if t.kind == "punct" and t.value == ",":
                self.next()
                args.append(self.parse_term(999))
                continue
            self.expect_punct(")")
            return args

    def parse_list(self):
        t = self.peek()
        if t.kind == "punct" and t.value == "]":
            self.next()
            return Ctor(terms.LIST_NIL)
        items = [self.parse_term(999)]
        while True:
            t = self.next()
            if t.kind == "punct" and t.value == ",":
                items.append(self.parse_term(999))
                continue
            if t.kind == "punct" and t.value == "|":
                tail = self.parse_term(999)
                self.expect_punct("]")
                return terms.make_list(items, tail)
            if t.kind == "punct" and t.value == "]":
                return terms.make_list(items)
            self.error("expected `,`, `|` or `]` in list", t)

    # -- items

    def parse_items(self):
        items = []
        while self.peek().kind != "end":
            items.append(self.parse_item())
        return items

    def parse_item(self):
        self.begin_item()
        t = self.peek()
        if t.kind == "name" and t.value in ITEM_KEYWORDS:
            return {
                "pred": self.parse_pred_decl,
                "constructors": self.parse_ctor_decl,
                "function": self.parse_fun_decl,
                "op": self.parse_op_decl,
            }[t.value]()
        term = self.parse_term(1200)
        self.expect_dot()
        if type(term) is Ctor and term.name == ":-" and len(term.args) == 2:
            return ClauseItem(term.args[0], flatten_conj(term.args[1]))
        if type(term) is Ctor and term.name == "->>" and len(term.args) == 2:
            return RuleItem(term.args[0], term.args[1])
        if type(term) is Ctor:
            return ClauseItem(term, ())
        self.error("expected a clause, rule or declaration", t)

    def parse_pred_decl(self):
        self.next()
        tok = self.peek()
        term = self.parse_term(999)
        self.expect_dot()
        if type(term) is not Ctor:
            self.error("malformed pred declaration", tok)
        return PredDecl(term.name,
                        tuple(self.term_to_type(a) for a in term.args))

    def parse_fun_decl(self):
        self.next()
        tok = self.peek()
        lhs = self.parse_term(1149)
        arrow = self.next()
        if not (arrow.kind == "sym" and arrow.value in ("=>>", "==>")):
            self.error("expected `=>>` in function declaration", arrow)
        if arrow.value == "==>":
            self.warnings.append(
                f"{arrow.line}:{arrow.col}: `==>` accepted as alias for `=>>`")
        result = self.parse_term(999)
        self.expect_dot()
        if type(lhs) is not Ctor:
            self.error("malformed function declaration", tok)
        return FunDecl(lhs.name,
                       tuple(self.term_to_type(a) for a in lhs.args),
                       self.term_to_type(result))

    def parse_ctor_decl(self):
        self.next()
        tok = self.peek()
        pattern = self.parse_term(999)
        arrow = self.next()
        if not (arrow.kind == "sym" and arrow.value == "=>"):
            self.error("expected `=>` in constructors declaration", arrow)
        sigs = [self.parse_term(999)]
        while self.peek().kind == "punct" and self.peek().value == ",":
            self.next()
            sigs.append(self.parse_term(999))
        self.expect_dot()
        if type(pattern) is not Ctor:
            self.error("malformed type pattern", tok)
        params = []
        for a in pattern.args:
            if type(a) is not Var or a.name is None:
                self.error("type parameters must be variables", tok)
            params.append(a.name)
        if len(set(params)) != len(params):
            self.error("type parameters must be distinct", tok)
        ctors = []
        for sig in sigs:
            ctors.append(self.ctor_signature(sig, tok))
        return CtorDecl(pattern.name, tuple(params), tuple(ctors))

    def ctor_signature(self, sig, tok):
        if type(sig) is Ctor:
            return (sig.name, tuple(self.term_to_type(a) for a in sig.args))
        self.error("malformed constructor signature", tok)

    def parse_op_decl(self):
        tok = self.peek()
        term = self.parse_term(1200)
        self.expect_dot()
        ok = (type(term) is Ctor and term.name == "op" and len(term.args) == 3
              and type(term.args[0]) is Int
              and type(term.args[1]) is Ctor and not term.args[1].args
              and type(term.args[2]) is Ctor and not term.args[2].args)
        if not ok:
            self.error("malformed op declaration", tok)
        prio = term.args[0].value
        fixity = term.args[1].name
        name = term.args[2].name
        try:
            self.ops.declare(prio, fixity, name)
        except ParseError:
            self.error(f"bad operator declaration op({prio},{fixity},{name})",
                       tok)
        return OpDecl(prio, fixity, name)

    # -- type expressions

    def term_to_type(self, term):
        if type(term) is Var:
            return TyVar(term.name if term.name else f"_A{term.id}")
        if type(term) is Int:
            self.error("integers are not types")
        if type(term) is Ctor:
            if term.name == "=>>" and len(term.args) == 2:
                args = self.type_list(term.args[0])
                return FunTy(tuple(args), self.term_to_type(term.args[1]))
            if term.name in (terms.LIST_CONS, terms.LIST_NIL):
                self.error("list syntax is not a type; declare a list type")
            return TyApp(term.name,
                         tuple(self.term_to_type(a) for a in term.args))
        self.error("malformed type expression")

    def type_list(self, term):
        out = []
        while type(term) is Ctor and term.name == terms.LIST_CONS:
            out.append(self.term_to_type(term.args[0]))
            term = term.args[1]
        if not (type(term) is Ctor and term.name == terms.LIST_NIL):
            self.error("malformed function type argument list")
        return out


def flatten_conj(term) -> tuple:
    """Flatten a ','-tree into an ordered goal tuple."""
    if type(term) is Ctor and term.name == "," and len(term.args) == 2:
        return flatten_conj(term.args[0]) + flatten_conj(term.args[1])
    return (term,)


def parse_program(text: str, ops: Optional[OperatorTable] = None):
    """Parse a program text into items.  Returns (items, warnings, ops);
    the returned table includes any operators the program declared."""
    r = Reader(text, ops)
    items = r.parse_items()
    return items, r.warnings, r.ops


def parse_query(text: str, ops: OperatorTable):
    """Parse one interactive query.

    Accepts both `solve(Goal).` and bare `Goal.`; returns the goal and
    the named query variables in order of first appearance.
    """
    r = Reader(text, ops.copy())
    r.begin_item()
    if r.peek().kind == "end":
        return None, []
    goal = r.parse_term(1200)
    r.expect_dot()
    if r.peek().kind != "end":
        r.error("unexpected text after query")
    if type(goal) is Ctor and goal.name == "solve" and len(goal.args) == 1:
        goal = goal.args[0]
    return goal, list(r.var_order)
