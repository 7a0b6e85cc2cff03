"""Symbolic expression trees: constants, variables, sums, products, integer
powers, exp/log, and negation, with exact evaluation and a round-tripping
text form.

The printer emits a canonical text form that the parser maps back to the
identical tree (nested sums/products are parenthesized, constants carry
full repr precision, a negation always parenthesizes its child so that
"-2.5" stays a constant and "-(2.5)" stays a negation).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

__all__ = [
    "Expr", "Const", "Var", "Add", "Mul", "Pow", "Exp", "Log", "Neg",
    "EvalError", "UnboundVariableError", "ExprSyntaxError",
    "eval_expr", "print_expr", "parse_expr", "count_nodes", "free_variables",
    "fold_constants", "expr_to_dict", "expr_from_dict",
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_RESERVED = {"exp", "log"}


class EvalError(ArithmeticError):
    """Evaluation failure: domain violation or overflow to non-finite."""


class UnboundVariableError(EvalError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"constants must be finite, got {self.value}")


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not _IDENT.fullmatch(self.name) or self.name in _RESERVED:
            raise ValueError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True)
class Add:
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Add needs at least two children")


@dataclass(frozen=True)
class Mul:
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Mul needs at least two children")


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or isinstance(self.exponent, bool):
            raise ValueError(f"exponent must be an integer, got {self.exponent!r}")


@dataclass(frozen=True)
class Exp:
    child: object


@dataclass(frozen=True)
class Log:
    child: object


@dataclass(frozen=True)
class Neg:
    child: object


Expr = (Const, Var, Add, Mul, Pow, Exp, Log, Neg)


def eval_expr(e, bindings: dict[str, float]) -> float:
    """Recursive double-precision evaluation under the given bindings."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        if e.name not in bindings:
            raise UnboundVariableError(e.name)
        return float(bindings[e.name])
    if isinstance(e, Add):
        return _sum(e.children, bindings)
    if isinstance(e, Mul):
        out = 1.0
        for c in e.children:
            out *= eval_expr(c, bindings)
        return out
    if isinstance(e, Pow):
        base = eval_expr(e.base, bindings)
        try:
            out = base ** e.exponent
        except OverflowError as exc:
            raise EvalError(f"power {base!r}^{e.exponent} overflowed") from exc
        except ZeroDivisionError as exc:
            raise EvalError(f"power {base!r}^{e.exponent} failed: {exc}") from exc
        if not math.isfinite(out):
            raise EvalError(f"power {base!r}^{e.exponent} overflowed to {out}")
        return out
    if isinstance(e, Exp):
        arg = eval_expr(e.child, bindings)
        try:
            out = math.exp(arg)
        except OverflowError as exc:
            raise EvalError(f"exp({arg!r}) overflowed") from exc
        return out
    if isinstance(e, Log):
        arg = eval_expr(e.child, bindings)
        if arg <= 0.0:
            raise EvalError(f"log of non-positive value {arg!r}")
        return math.log(arg)
    if isinstance(e, Neg):
        return -eval_expr(e.child, bindings)
    raise TypeError(f"not an expression node: {e!r}")


def _sum(children, bindings) -> float:
    out = 0.0
    for c in children:
        out += eval_expr(c, bindings)
    return out


def count_nodes(e) -> int:
    if isinstance(e, (Const, Var)):
        return 1
    if isinstance(e, (Add, Mul)):
        return 1 + sum(count_nodes(c) for c in e.children)
    if isinstance(e, Pow):
        return 1 + count_nodes(e.base)
    return 1 + count_nodes(e.child)


def free_variables(e) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, (Add, Mul)):
        out: set[str] = set()
        for c in e.children:
            out |= free_variables(c)
        return out
    if isinstance(e, Pow):
        return free_variables(e.base)
    return free_variables(e.child)


def fold_constants(e):
    """Collapse any subtree whose leaves are all constants into one Const."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, (Add, Mul)):
        children = tuple(fold_constants(c) for c in e.children)
        node = type(e)(children)
        if all(isinstance(c, Const) for c in children):
            return Const(eval_expr(node, {}))
        return node
    if isinstance(e, Pow):
        base = fold_constants(e.base)
        node = Pow(base, e.exponent)
        if isinstance(base, Const):
            return Const(eval_expr(node, {}))
        return node
    child = fold_constants(e.child)
    node = type(e)(child)
    if isinstance(child, Const) and not (isinstance(node, Log) and child.value <= 0):
        return Const(eval_expr(node, {}))
    return node


# -- printing ----------------------------------------------------------------

def _print_atom(e) -> str:
    text = print_expr(e)
    if isinstance(e, (Var, Exp, Log)) or (isinstance(e, Const) and e.value >= 0):
        return text
    return f"({text})"


def print_expr(e) -> str:
    """Canonical text form; parse_expr maps it back to the same tree."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        parts = [f"({print_expr(c)})" if isinstance(c, Add) else print_expr(c)
                 for c in e.children]
        return " + ".join(parts)
    if isinstance(e, Mul):
        parts = [f"({print_expr(c)})" if isinstance(c, (Add, Mul)) else print_expr(c)
                 for c in e.children]
        return " * ".join(parts)
    if isinstance(e, Pow):
        return f"{_print_atom(e.base)}^{e.exponent}"
    if isinstance(e, Exp):
        return f"exp({print_expr(e.child)})"
    if isinstance(e, Log):
        return f"log({print_expr(e.child)})"
    if isinstance(e, Neg):
        return f"-({print_expr(e.child)})"
    raise TypeError(f"not an expression node: {e!r}")


# -- parsing -------------------------------------------------------------------

_NUMBER = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise ExprSyntaxError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.take(ch):
            self.error(f"expected {ch!r}")

    def parse(self):
        e = self.parse_expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error(f"unexpected trailing input {self.text[self.pos:]!r}")
        return e

    def parse_expr(self):
        children = [self.parse_term()]
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                children.append(self.parse_term())
            elif c == "-":
                self.pos += 1
                children.append(Neg(self.parse_term()))
            else:
                break
        return children[0] if len(children) == 1 else Add(tuple(children))

    def parse_term(self):
        children = [self.parse_factor()]
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                children.append(self.parse_factor())
            elif c == "/":
                self.pos += 1
                children.append(Pow(self.parse_factor(), -1))
            else:
                break
        return children[0] if len(children) == 1 else Mul(tuple(children))

    def parse_factor(self):
        if self.peek() == "-":
            self.pos += 1
            # a minus fused to a numeric literal is a negative constant;
            # anything else is a structural negation
            self.skip_ws()
            m = _NUMBER.match(self.text, self.pos)
            if m:
                self.pos = m.end()
                return self.maybe_pow(Const(-float(m.group())))
            return self.maybe_pow(Neg(self.parse_factor()))
        return self.maybe_pow(self.parse_atom())

    def maybe_pow(self, base):
        if self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            sign = 1
            if self.take("-"):
                sign = -1
            m = re.compile(r"\d+").match(self.text, self.pos)
            if not m:
                self.error("expected an integer exponent")
            self.pos = m.end()
            return Pow(base, sign * int(m.group()))
        return base

    def parse_atom(self):
        self.skip_ws()
        if self.pos >= len(self.text):
            self.error("unexpected end of input")
        c = self.text[self.pos]
        if c == "(":
            self.pos += 1
            e = self.parse_expr()
            self.expect(")")
            return e
        m = _NUMBER.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return Const(float(m.group()))
        m = _IDENT.match(self.text, self.pos)
        if m:
            name = m.group()
            self.pos = m.end()
            if name in _RESERVED:
                self.expect("(")
                e = self.parse_expr()
                self.expect(")")
                return Exp(e) if name == "exp" else Log(e)
            return Var(name)
        self.error(f"unexpected character {c!r}")


def parse_expr(text: str):
    """Parse the documented grammar (infix + - * /, ^ for integer powers,
    exp(...) and log(...) applications)."""
    return _Parser(text).parse()


# -- JSON AST -------------------------------------------------------------------

def expr_to_dict(e) -> dict:
    if isinstance(e, Const):
        return {"type": "const", "value": e.value}
    if isinstance(e, Var):
        return {"type": "var", "name": e.name}
    if isinstance(e, (Add, Mul)):
        kind = "add" if isinstance(e, Add) else "mul"
        return {"type": kind, "children": [expr_to_dict(c) for c in e.children]}
    if isinstance(e, Pow):
        return {"type": "pow", "base": expr_to_dict(e.base), "exponent": e.exponent}
    if isinstance(e, Exp):
        return {"type": "exp", "child": expr_to_dict(e.child)}
    if isinstance(e, Log):
        return {"type": "log", "child": expr_to_dict(e.child)}
    if isinstance(e, Neg):
        return {"type": "neg", "child": expr_to_dict(e.child)}
    raise TypeError(f"not an expression node: {e!r}")


def expr_from_dict(obj: dict):
    kind = obj["type"]
    if kind == "const":
        return Const(float(obj["value"]))
    if kind == "var":
        return Var(obj["name"])
    if kind in ("add", "mul"):
        children = tuple(expr_from_dict(c) for c in obj["children"])
        return Add(children) if kind == "add" else Mul(children)
    if kind == "pow":
        return Pow(expr_from_dict(obj["base"]), int(obj["exponent"]))
    if kind == "exp":
        return Exp(expr_from_dict(obj["child"]))
    if kind == "log":
        return Log(expr_from_dict(obj["child"]))
    if kind == "neg":
        return Neg(expr_from_dict(obj["child"]))
    raise ValueError(f"unknown AST node type {kind!r}")
