"""funlog: a statically typed logic-programming language with defined
functions, solved by SLD resolution over lazy equational unification
(outer narrowing) under depth-first iterative deepening."""

from .errors import (FunlogError, LexError, ParseError, TypeError_,
                     LoadError, EvalError, RewriteLimitError)
from .terms import (Var, Int, Ctor, FunApp, Lambda, Eta, FunRef,
                    BindingState, Clause, RewriteRule, resolve,
                    rename_apart, make_list)
from .reader import parse_program, parse_query, OperatorTable, default_ops
from .database import Database, Diagnostic, load, load_text
from .narrow import (semantic_unify, narrow_step, extended_occurs,
                     normalize, normalize_many)
from .solver import (SearchConfig, Answer, AnswerStream, solve, solve_text,
                     solve_goal, prepare_query, eq_narrow, eval_builtin_fun,
                     apply_eval, eta_eval, COMPLETE, DEPTH_LIMIT)
from . import oracle

__all__ = [
    "FunlogError", "LexError", "ParseError", "TypeError_", "LoadError",
    "EvalError", "RewriteLimitError",
    "Var", "Int", "Ctor", "FunApp", "Lambda", "Eta", "FunRef",
    "BindingState", "Clause", "RewriteRule", "resolve", "rename_apart",
    "make_list",
    "parse_program", "parse_query", "OperatorTable", "default_ops",
    "Database", "Diagnostic", "load", "load_text",
    "semantic_unify", "narrow_step", "extended_occurs", "normalize",
    "normalize_many",
    "SearchConfig", "Answer", "AnswerStream", "solve", "solve_text",
    "solve_goal", "prepare_query", "eq_narrow", "eval_builtin_fun",
    "apply_eval", "eta_eval", "COMPLETE", "DEPTH_LIMIT",
    "oracle",
]
