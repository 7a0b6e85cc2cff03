"""Distillation of trained spline-edge networks into closed-form expressions.

Every surviving edge carries a learned 1-D function; each is sampled on a
dense grid over its observed input range and fitted against a library of
shapes c * f(a*t + b) + d. The affine inner parameters (a, b) come from a
deterministic coarse grid search with local refinement; (c, d) are solved in
closed form at every (a, b). The chosen shapes compose through the network's
additive structure into one expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..estimators import r2_score
from ..kan.network import KanNetwork
from .expr import Add, Const, Exp, Log, Mul, Pow, Var

__all__ = ["ShapeSpec", "CandidateLibrary", "EdgeFit", "DistillationResult", "distill"]

_CONST_EPS = 1e-12


@dataclass(frozen=True)
class ShapeSpec:
    """One unary candidate: numeric form for fitting, AST builder for output."""

    name: str
    func: callable            # numpy array -> numpy array on the valid domain
    domain: callable          # numpy array -> bool mask of valid points
    build: callable           # inner Expr -> Expr for f(inner)
    ast_cost: int             # nodes f adds beyond its argument; tie-breaker


def _always(u: np.ndarray) -> np.ndarray:
    return np.ones_like(u, dtype=bool)


_SHAPES = {
    "identity": ShapeSpec("identity", lambda u: u, _always, lambda t: t, 0),
    "square": ShapeSpec("square", lambda u: u * u, _always,
                        lambda t: Pow(t, 2), 1),
    "cube": ShapeSpec("cube", lambda u: u ** 3, _always,
                      lambda t: Pow(t, 3), 1),
    "exp": ShapeSpec("exp", np.exp, lambda u: u < 700.0,
                     lambda t: Exp(t), 1),
    "log": ShapeSpec("log", lambda u: np.log(u), lambda u: u > 1e-12,
                     lambda t: Log(t), 1),
    "reciprocal": ShapeSpec("reciprocal", lambda u: 1.0 / u,
                            lambda u: np.abs(u) > 1e-9,
                            lambda t: Pow(t, -1), 1),
    # sqrt(t) written as exp(log(t)/2): integer powers only in the AST
    "sqrt_shifted": ShapeSpec("sqrt_shifted", np.sqrt, lambda u: u > 1e-12,
                              lambda t: Exp(Mul((Const(0.5), Log(t)))), 4),
}


@dataclass(frozen=True)
class CandidateLibrary:
    shape_names: tuple[str, ...] = tuple(_SHAPES)

    def __post_init__(self):
        unknown = [n for n in self.shape_names if n not in _SHAPES]
        if unknown:
            raise ValueError(f"unknown shapes {unknown}; "
                             f"available: {sorted(_SHAPES)}")

    def shapes(self) -> list[ShapeSpec]:
        return [_SHAPES[n] for n in self.shape_names]


@dataclass
class EdgeFit:
    layer: int
    out_idx: int
    in_idx: int
    shape: str
    r2: float
    params: tuple[float, float, float, float]  # (a, b, c, d)
    low_fit: bool = False


@dataclass
class DistillationResult:
    expr: object
    edge_fits: list[EdgeFit] = field(default_factory=list)
    global_r2: float | None = None
    zero_variance: bool = False
    low_fit_edges: list[tuple[int, int, int]] = field(default_factory=list)


def _solve_cd(u: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
    """Least-squares (c, d) for c*u + d ~ ys; returns (c, d, sse)."""
    um = u.mean()
    ym = ys.mean()
    du = u - um
    var = float(du @ du)
    if var < _CONST_EPS:
        resid = ys - ym
        return 0.0, float(ym), float(resid @ resid)
    c = float(du @ (ys - ym)) / var
    d = float(ym - c * um)
    resid = ys - (c * u + d)
    return c, d, float(resid @ resid)


def _fit_shape(shape: ShapeSpec, ts: np.ndarray, ys: np.ndarray):
    """Best (a, b, c, d) for c*f(a*t+b)+d via grid search + refinement.

    Coarse pass: 41x41 over [-5, 5]^2 (step 0.25). Three local passes then
    shrink the step 10x each, searching +-1 previous step around the best.
    """
    best = None  # (sse, a, b, c, d)
    step = 0.25
    center_a = center_b = 0.0
    for round_idx in range(4):
        if round_idx == 0:
            a_grid = np.linspace(-5.0, 5.0, 41)
            b_grid = np.linspace(-5.0, 5.0, 41)
        else:
            a_grid = np.linspace(center_a - step, center_a + step, 21)
            b_grid = np.linspace(center_b - step, center_b + step, 21)
            step /= 10.0
        for a in a_grid:
            arg = a * ts
            for b in b_grid:
                u = arg + b
                if not np.all(shape.domain(u)):
                    continue
                fu = shape.func(u)
                if not np.all(np.isfinite(fu)):
                    continue
                c, d, sse = _solve_cd(fu, ys)
                if best is None or sse < best[0]:
                    best = (sse, float(a), float(b), c, d)
        if best is None:
            return None
        center_a, center_b = best[1], best[2]
    sse, a, b, c, d = best
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - sse / ss_tot if ss_tot > 0 else 1.0
    return r2, (a, b, c, d)


def _affine_expr(slope: float, offset: float, inner):
    if slope == 0.0:
        return Const(offset)
    scaled = inner if slope == 1.0 else Mul((Const(slope), inner))
    if offset == 0.0:
        return scaled
    return Add((scaled, Const(offset)))


def _shape_expr(shape: ShapeSpec, params, inner):
    a, b, c, d = params
    return _affine_expr(c, d, shape.build(_affine_expr(a, b, inner)))


def distill(net: KanNetwork, lib: CandidateLibrary, x: np.ndarray,
            samples_per_edge: int = 201, r2_floor: float = 0.5,
            feature_names: list[str] | None = None) -> DistillationResult:
    """Replace every edge function with its best-fitting library shape.

    Edges whose sampled output is constant become constants directly. An
    edge whose best fit falls below ``r2_floor`` is flagged and contributes
    only its mean output to the closed form (a spline-lookup warning).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError(f"need a non-empty 2-D sample array, got shape {x.shape}")
    n_in = net.layer_widths[0]
    if feature_names is None:
        feature_names = [f"x{i}" for i in range(n_in)]
    if len(feature_names) != n_in:
        raise ValueError(f"{len(feature_names)} names for {n_in} input features")
    node_vals = net.node_values(x)

    result = DistillationResult(expr=None)
    # symbolic value of each node in the current layer, starting from the
    # normalized inputs
    current: list = []
    for i in range(n_in):
        current.append(_affine_expr(float(net.norm_slope[i]),
                                    float(net.norm_offset[i]), Var(feature_names[i])))

    for li, layer in enumerate(net.layers):
        incoming = node_vals[li]
        next_exprs = []
        for o in range(layer.n_out):
            terms = []
            for j in range(layer.n_in):
                vals = incoming[:, j]
                lo, hi = float(vals.min()), float(vals.max())
                if hi - lo < 1e-9:
                    lo, hi = lo - 0.5, hi + 0.5
                ts = np.linspace(lo, hi, samples_per_edge)
                edge = net.edge(li, o, j)
                ys = edge.evaluate(layer.grid, ts)
                if float(ys.std()) < 1e-9:
                    mean = float(ys.mean())
                    result.edge_fits.append(EdgeFit(li, o, j, "const", 1.0,
                                                    (0.0, 0.0, 0.0, mean)))
                    if mean != 0.0:
                        terms.append(Const(mean))
                    continue
                fits = []
                for shape in lib.shapes():
                    out = _fit_shape(shape, ts, ys)
                    if out is not None:
                        fits.append((out[0], shape, out[1]))
                if not fits:
                    r2, shape, params = -math.inf, None, None
                else:
                    # near-ties go to the simpler shape: a spline edge that is
                    # essentially affine should come out as identity, not as
                    # an exp with a microscopic argument
                    best_r2 = max(f[0] for f in fits)
                    contenders = [f for f in fits if f[0] >= best_r2 - 1e-6]
                    contenders.sort(key=lambda f: (f[1].ast_cost, -f[0]))
                    r2, shape, params = contenders[0]
                if shape is None or r2 < r2_floor:
                    mean = float(ys.mean())
                    name = shape.name if shape is not None else "none"
                    result.edge_fits.append(
                        EdgeFit(li, o, j, name, r2, params or (0, 0, 0, mean),
                                low_fit=True))
                    result.low_fit_edges.append((li, o, j))
                    if mean != 0.0:
                        terms.append(Const(mean))
                    continue
                result.edge_fits.append(EdgeFit(li, o, j, shape.name, r2, params))
                terms.append(_shape_expr(shape, params, current[j]))
            if not terms:
                next_exprs.append(Const(0.0))
            elif len(terms) == 1:
                next_exprs.append(terms[0])
            else:
                next_exprs.append(Add(tuple(terms)))
        current = next_exprs

    result.expr = current[0]
    net_out = net.predict(x)
    if float(np.std(net_out)) < _CONST_EPS:
        result.zero_variance = True
        result.global_r2 = None
    else:
        expr_out = _eval_rows(result.expr, x, feature_names)
        result.global_r2 = float(r2_score(net_out, expr_out))
    return result


def _eval_rows(expr, x: np.ndarray, feature_names: list[str]) -> np.ndarray:
    from .expr import eval_expr

    out = np.empty(x.shape[0])
    for r in range(x.shape[0]):
        bindings = {feature_names[i]: float(x[r, i]) for i in range(x.shape[1])}
        out[r] = eval_expr(expr, bindings)
    return out
