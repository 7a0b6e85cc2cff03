"""The published closed-form GWP expression over eleven molecular
descriptors, built once as an AST and evaluated through the generic
evaluator (no separate arithmetic path).

Coefficients are integer numerators over fixed denominators, divided once
in double precision at construction, so the all-zero evaluation returns
exactly -0.094409. Callers decide whether the output is read on the raw or
the log10 scale; the evaluator applies no transform.
"""

from __future__ import annotations

import math

from .expr import Add, Const, Exp, Mul, Var, eval_expr

__all__ = ["GWP_SYMBOLS", "MissingSymbolError", "reference_gwp_expr", "reference_gwp"]

GWP_SYMBOLS = (
    "SpMax_A", "nAromAtom", "nAromBond", "nC",
    "ATS5dv", "ATS6dv", "SpAD_A", "SpAbs_A",
    "VE3_A", "nAtom", "nBase",
)


class MissingSymbolError(ValueError):
    def __init__(self, names: list[str]):
        super().__init__(f"missing descriptor symbols: {names}")
        self.names = names


def _coeff(numerator: int, denominator: int, symbol: str):
    return Mul((Const(numerator / denominator), Var(symbol)))


_MILLION = 1_000_000


def reference_gwp_expr():
    """Weighted descriptor sum minus a scaled exponential of an affine form."""
    exponent = Add((
        _coeff(-1141, _MILLION, "VE3_A"),
        _coeff(1, 240, "nAtom"),
        _coeff(-1777, 500_000, "nBase"),
    ))
    return Add((
        _coeff(4919, _MILLION, "SpMax_A"),
        _coeff(105_597, _MILLION, "nAromAtom"),
        _coeff(-19_339, _MILLION, "nAromBond"),
        _coeff(112_143, _MILLION, "nC"),
        _coeff(4713, _MILLION, "ATS5dv"),
        _coeff(12_171, _MILLION, "ATS6dv"),
        _coeff(24_773, _MILLION, "SpAD_A"),
        _coeff(-39_567, _MILLION, "SpAbs_A"),
        Mul((Const(-94_409 / _MILLION), Exp(exponent))),
    ))


_EXPR = None


def reference_gwp(descriptors: dict[str, float]) -> float:
    """Evaluate the published formula; all eleven symbols must be bound."""
    global _EXPR
    if _EXPR is None:
        _EXPR = reference_gwp_expr()
    missing = [s for s in GWP_SYMBOLS if s not in descriptors]
    if missing:
        raise MissingSymbolError(missing)
    bad = [s for s in GWP_SYMBOLS if not math.isfinite(descriptors[s])]
    if bad:
        raise ValueError(f"non-finite descriptor values for: {bad}")
    return eval_expr(_EXPR, {s: float(descriptors[s]) for s in GWP_SYMBOLS})
