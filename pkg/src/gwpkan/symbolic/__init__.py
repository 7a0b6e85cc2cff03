"""Symbolic expressions: AST with evaluation and parsing, the published GWP
formula, and distillation of trained networks into closed forms."""

from .expr import (
    Add, Const, EvalError, Exp, Expr, ExprSyntaxError, Log, Mul, Neg, Pow,
    UnboundVariableError, Var, count_nodes, eval_expr, expr_from_dict,
    expr_to_dict, fold_constants, free_variables, parse_expr, print_expr,
)
from .formula import GWP_SYMBOLS, MissingSymbolError, reference_gwp, reference_gwp_expr
from .distill import CandidateLibrary, DistillationResult, EdgeFit, distill

__all__ = [
    "Add", "Const", "EvalError", "Exp", "Expr", "ExprSyntaxError", "Log",
    "Mul", "Neg", "Pow", "UnboundVariableError", "Var", "count_nodes",
    "eval_expr", "expr_from_dict", "expr_to_dict", "fold_constants",
    "free_variables", "parse_expr", "print_expr", "GWP_SYMBOLS",
    "MissingSymbolError", "reference_gwp", "reference_gwp_expr",
    "CandidateLibrary", "DistillationResult", "EdgeFit", "distill",
]
