"""Expression trees for monotone additively homogeneous operators.

Every coordinate ``T_i`` of an operator ``T: R^n -> R^n`` is an immutable
tree built from the node classes below. Besides plain evaluation, the module
provides two exact oracles used by the game constructions:

* :func:`eval_ext` computes ``lim T_i(alpha * e_J)`` as ``alpha -> +-inf``,
  returning an extended real (a Python float, possibly ``+-inf``).
* :func:`locally_constant` decides whether ``T_i(u +- alpha * e_J) == T_i(u)``
  on some interval ``alpha in [0, eps]``.

Node sets are passed around as bitmasks internally (bit ``j`` set means
coordinate ``j`` belongs to the set); the public helpers accept any iterable
of 0-based indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence, Union

import numpy as np

INF = math.inf
WEIGHT_TOL = 1e-12
TIE_TOL = 1e-12

# Extended reals are represented by Python floats; +-inf are the two
# infinite elements.
ExtValue = float


class ExprError(ValueError):
    """Raised for malformed expressions or operators."""


def h(z: float) -> float:
    """``sup_{0<p<=1} log p + p z`` in closed form."""
    if z >= -1.0:
        return z
    return -1.0 - math.log(-z)


def _h_array(z: np.ndarray) -> np.ndarray:
    return np.where(z >= -1.0, z, -1.0 - np.log(np.maximum(-z, 1.0)))


def _check_weights(weights: Sequence[float], children: Sequence) -> tuple[tuple, tuple]:
    if len(weights) != len(children):
        raise ExprError("weights and children differ in length")
    if not children:
        raise ExprError("weighted node needs at least one child")
    ws = tuple(float(w) for w in weights)
    if any(not math.isfinite(w) or w < 0 for w in ws):
        raise ExprError(f"negative or non-finite weight in {ws}")
    total = math.fsum(ws)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise ExprError(f"weights sum to {total!r}, expected 1")
    # zero weights are pruned so that 0 * inf never shows up in the oracles
    kept = [(w, c) for w, c in zip(ws, children) if w > 0]
    if not kept:
        raise ExprError("all weights are zero")
    return tuple(w for w, _ in kept), tuple(c for _, c in kept)


@dataclass(frozen=True)
class Var:
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ExprError(f"negative variable index {self.index}")


@dataclass(frozen=True)
class Shift:
    const: float
    child: "Expr"

    def __post_init__(self):
        if not math.isfinite(self.const):
            raise ExprError("shift constant must be finite")
        object.__setattr__(self, "const", float(self.const))


@dataclass(frozen=True)
class Min:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ExprError("min() needs at least one argument")


@dataclass(frozen=True)
class Max:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ExprError("max() needs at least one argument")


@dataclass(frozen=True)
class Avg:
    weights: tuple
    children: tuple

    def __post_init__(self):
        ws, cs = _check_weights(self.weights, tuple(self.children))
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "children", cs)


@dataclass(frozen=True)
class Mean:
    """Log-conjugated power mean ``(1/r) log sum_k w_k exp(r c_k)``.

    ``r == 0`` is the weighted average, ``r == +inf`` / ``-inf`` the max / min
    over the children carrying positive weight.
    """

    r: float
    weights: tuple
    children: tuple

    def __post_init__(self):
        r = float(self.r)
        if math.isnan(r):
            raise ExprError("mean parameter is NaN")
        object.__setattr__(self, "r", r)
        ws, cs = _check_weights(self.weights, tuple(self.children))
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "children", cs)


@dataclass(frozen=True)
class SupMix:
    """``a + h(b - a)``: value of choosing an exit probability against ``b``."""

    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class InfMix:
    """``a - h(a - b)``, the dual of :class:`SupMix`."""

    a: "Expr"
    b: "Expr"


Expr = Union[Var, Shift, Min, Max, Avg, Mean, SupMix, InfMix]


def children(node: Expr) -> tuple:
    if isinstance(node, Var):
        return ()
    if isinstance(node, Shift):
        return (node.child,)
    if isinstance(node, (SupMix, InfMix)):
        return (node.a, node.b)
    return node.children


def walk(node: Expr):
    """Yield every node of the tree, parents before children."""
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(children(cur)))


def max_var(node: Expr) -> int:
    return max((n.index for n in walk(node) if isinstance(n, Var)), default=-1)


def _is_convex(node: Expr) -> bool:
    for sub in walk(node):
        if isinstance(sub, (Min, InfMix)):
            return False
        if isinstance(sub, Mean) and sub.r < 0:
            return False
    return True


@dataclass(frozen=True)
class Operator:
    """A map ``R^n -> R^n`` given coordinate-wise by expressions."""

    n: int
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if self.n < 1:
            raise ExprError("operator dimension must be positive")
        if len(self.coords) != self.n:
            raise ExprError(f"expected {self.n} coordinates, got {len(self.coords)}")
        for i, c in enumerate(self.coords):
            if max_var(c) >= self.n:
                raise ExprError(
                    f"coordinate {i + 1} uses x{max_var(c) + 1} but n={self.n}")

    @cached_property
    def convex(self) -> bool:
        """Syntactic convexity: no min, no negative-order mean, no infmix."""
        return all(_is_convex(c) for c in self.coords)

    @property
    def convexity(self) -> str:
        return "Convex" if self.convex else "Unknown"

    @cached_property
    def _compiled(self) -> Callable:
        return _compile(self)

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)

    def __str__(self) -> str:
        return format_operator(self)


# ---------------------------------------------------------------------------
# evaluation over the reals


def _lme(r: float, ws: Sequence[float], cs: Sequence[float]) -> float:
    # (1/r) log sum w exp(r c), shifted for stability
    m = max(r * c for c in cs)
    s = math.fsum(w * math.exp(r * c - m) for w, c in zip(ws, cs))
    return (m + math.log(s)) / r


def _supmix(a: float, b: float) -> float:
    return a + h(b - a)


def _infmix(a: float, b: float) -> float:
    return a - h(a - b)


def _src(node: Expr) -> str:
    if isinstance(node, Var):
        return f"x[{node.index}]"
    if isinstance(node, Shift):
        return f"({node.const!r} + {_src(node.child)})"
    if isinstance(node, (Min, Max)):
        parts = [_src(c) for c in node.children]
        if len(parts) == 1:
            return parts[0]
        return f"{'min' if isinstance(node, Min) else 'max'}({', '.join(parts)})"
    if isinstance(node, Avg) or (isinstance(node, Mean) and node.r == 0):
        return "(" + " + ".join(f"{w!r}*{_src(c)}" for w, c in zip(node.weights, node.children)) + ")"
    if isinstance(node, Mean):
        parts = [_src(c) for c in node.children]
        if math.isinf(node.r):
            if len(parts) == 1:
                return parts[0]
            return f"{'max' if node.r > 0 else 'min'}({', '.join(parts)})"
        return f"_lme({node.r!r}, {tuple(node.weights)!r}, ({', '.join(parts)},))"
    if isinstance(node, SupMix):
        return f"_supmix({_src(node.a)}, {_src(node.b)})"
    if isinstance(node, InfMix):
        return f"_infmix({_src(node.a)}, {_src(node.b)})"
    raise TypeError(f"unknown node {node!r}")


def _compile(op: Operator) -> Callable:
    body = ", ".join(_src(c) for c in op.coords)
    env = {"_lme": _lme, "_supmix": _supmix, "_infmix": _infmix,
           "min": min, "max": max, "__builtins__": {}}
    return eval(f"lambda x: ({body},)", env)  # noqa: S307 - generated from a validated AST


def evaluate(op: Operator, x) -> np.ndarray:
    """Evaluate ``T(x)`` for a finite vector ``x`` of length ``n``."""
    arr = np.asarray(x, dtype=float)
    if arr.shape != (op.n,):
        raise ExprError(f"expected a vector of length {op.n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ExprError("evaluation point must be finite")
    return np.array(op._compiled(arr.tolist()))


def evaluate_batch(op: Operator, X) -> np.ndarray:
    """Vectorized evaluation on an array of points of shape ``(..., n)``."""
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != op.n:
        raise ExprError(f"last axis must have length {op.n}")
    return np.stack([_eval_np(c, X) for c in op.coords], axis=-1)


def _eval_np(node: Expr, X: np.ndarray) -> np.ndarray:
    if isinstance(node, Var):
        return X[..., node.index]
    if isinstance(node, Shift):
        return node.const + _eval_np(node.child, X)
    if isinstance(node, Min):
        return np.minimum.reduce([_eval_np(c, X) for c in node.children])
    if isinstance(node, Max):
        return np.maximum.reduce([_eval_np(c, X) for c in node.children])
    if isinstance(node, SupMix):
        a, b = _eval_np(node.a, X), _eval_np(node.b, X)
        return a + _h_array(b - a)
    if isinstance(node, InfMix):
        a, b = _eval_np(node.a, X), _eval_np(node.b, X)
        return a - _h_array(a - b)
    vals = np.stack([_eval_np(c, X) for c in node.children])
    w = np.asarray(node.weights).reshape((-1,) + (1,) * (vals.ndim - 1))
    r = 0.0 if isinstance(node, Avg) else node.r
    if r == 0:
        return (w * vals).sum(axis=0)
    if r == INF:
        return vals.max(axis=0)
    if r == -INF:
        return vals.min(axis=0)
    m = (r * vals).max(axis=0)
    return (m + np.log((w * np.exp(r * vals - m)).sum(axis=0))) / r


# ---------------------------------------------------------------------------
# limit oracle


def as_mask(nodes: Iterable[int] | int) -> int:
    if isinstance(nodes, (int, np.integer)):
        return int(nodes)
    mask = 0
    for j in nodes:
        mask |= 1 << int(j)
    return mask


def _ext(node: Expr, jmask: int, sign: int) -> float:
    inf = sign * INF
    if isinstance(node, Var):
        v = inf if (jmask >> node.index) & 1 else 0.0
    elif isinstance(node, Shift):
        c = _ext(node.child, jmask, sign)
        v = c if math.isinf(c) else node.const + c
    elif isinstance(node, Min):
        v = min(_ext(c, jmask, sign) for c in node.children)
    elif isinstance(node, Max):
        v = max(_ext(c, jmask, sign) for c in node.children)
    elif isinstance(node, SupMix):
        a, b = _ext(node.a, jmask, sign), _ext(node.b, jmask, sign)
        if a == INF or b == INF:
            v = INF
        elif a == -INF:
            v = b
        elif b == -INF:
            v = -INF
        else:
            v = a + h(b - a)
    elif isinstance(node, InfMix):
        a, b = _ext(node.a, jmask, sign), _ext(node.b, jmask, sign)
        if a == -INF or b == -INF:
            v = -INF
        elif a == INF:
            v = b
        elif b == INF:
            v = INF
        else:
            v = a - h(a - b)
    else:
        vals = [_ext(c, jmask, sign) for c in node.children]
        r = 0.0 if isinstance(node, Avg) else node.r
        if r == 0:
            v = inf if any(math.isinf(x) for x in vals) else math.fsum(
                w * x for w, x in zip(node.weights, vals))
        else:
            # positive order: dominated by +inf children, -inf children drop out
            top = INF if r > 0 else -INF
            if top in vals:
                v = top
            else:
                finite = [(w, x) for w, x in zip(node.weights, vals) if math.isfinite(x)]
                if not finite:
                    v = -top
                elif math.isinf(r):
                    v = (max if r > 0 else min)(x for _, x in finite)
                else:
                    v = _lme(r, [w for w, _ in finite], [x for _, x in finite])
    if v == -inf:
        raise AssertionError(f"limit oracle produced {v} under sign {sign:+d} at {node!r}")
    return v


def eval_ext(op: Operator, i: int, J: Iterable[int] | int, sign: int) -> ExtValue:
    """Exact ``lim T_i(alpha e_J)`` as ``alpha -> sign * inf``.

    ``J`` is a nonempty set of 0-based coordinates (or a bitmask) and ``sign``
    is ``+1`` or ``-1``.
    """
    mask = as_mask(J)
    if mask == 0:
        raise ExprError("sign pattern needs a nonempty support")
    if sign not in (1, -1):
        raise ExprError("sign must be +1 or -1")
    return _ext(op.coords[i], mask, sign)


def ext_tag(v: ExtValue) -> str:
    if v == INF:
        return "PosInf"
    if v == -INF:
        return "NegInf"
    return "Finite"


# ---------------------------------------------------------------------------
# local constancy oracle


def _tie(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _const(node: Expr, x: Sequence[float], jmask: int, orient: int, tol: float) -> tuple[float, bool]:
    if isinstance(node, Var):
        return x[node.index], not (jmask >> node.index) & 1
    if isinstance(node, Shift):
        v, c = _const(node.child, x, jmask, orient, tol)
        return node.const + v, c
    if isinstance(node, (SupMix, InfMix)):
        va, ca = _const(node.a, x, jmask, orient, tol)
        vb, cb = _const(node.b, x, jmask, orient, tol)
        if isinstance(node, SupMix):
            z, value, free_dir = vb - va, _supmix(va, vb), -1
        else:
            z, value, free_dir = va - vb, _infmix(va, vb), 1
        # on the side z > -1 the node equals b; elsewhere it is strictly
        # increasing in both arguments
        if _tie(z, -1.0, tol):
            return value, cb and (ca or orient == free_dir)
        if z > -1.0:
            return value, cb
        return value, ca and cb
    sub = [_const(c, x, jmask, orient, tol) for c in node.children]
    vals = [v for v, _ in sub]
    consts = [c for _, c in sub]
    kind = _extremum_kind(node)
    if kind is None:
        # weighted means are strictly increasing in every child
        if isinstance(node, Avg) or node.r == 0:
            value = math.fsum(w * v for w, v in zip(node.weights, vals))
        else:
            value = _lme(node.r, node.weights, vals)
        return value, all(consts)
    m = min(vals) if kind < 0 else max(vals)
    attaining = [c for v, c in zip(vals, consts) if _tie(v, m, tol)]
    # a min moving up stays put if one attaining branch stays put; a min
    # moving down needs all of them (dually for max)
    if kind * orient < 0:
        return m, any(attaining)
    return m, all(attaining)


def _extremum_kind(node: Expr) -> int | None:
    if isinstance(node, Min):
        return -1
    if isinstance(node, Max):
        return 1
    if isinstance(node, Mean) and math.isinf(node.r):
        return 1 if node.r > 0 else -1
    return None


def locally_constant(op: Operator, i: int, u, J: Iterable[int] | int, orientation: int,
                     tol: float = TIE_TOL) -> bool:
    """Whether ``T_i(u + orientation * alpha * e_J) == T_i(u)`` for all small ``alpha >= 0``.

    ``orientation`` is ``+1`` (increase) or ``-1`` (decrease). Values of
    children that agree up to ``tol`` (relative) are treated as ties.
    """
    if orientation not in (1, -1):
        raise ExprError("orientation must be +1 or -1")
    mask = as_mask(J)
    if mask == 0:
        raise ExprError("direction needs a nonempty support")
    x = [float(t) for t in u]
    return _const(op.coords[i], x, mask, orientation, tol)[1]


def breakpoint_radius(op: Operator, u, coords: Iterable[int] | None = None,
                      tol: float = TIE_TOL) -> float:
    """Radius on which the constancy verdicts of :func:`locally_constant` hold.

    Every node is 1-Lipschitz for the sup-norm, so moving ``u`` by ``alpha``
    along any ``e_J`` changes the difference of two sibling values by at most
    ``alpha``. The smallest nonzero gap between an extremum and a competing
    branch (or between ``z`` and the kink of ``h``) bounds the interval on
    which no branch switch can happen. Returns ``inf`` for smooth trees.
    """
    x = [float(t) for t in u]
    best = INF
    idx = range(op.n) if coords is None else coords

    def visit(node: Expr) -> float:
        nonlocal best
        if isinstance(node, Var):
            return x[node.index]
        if isinstance(node, Shift):
            return node.const + visit(node.child)
        if isinstance(node, (SupMix, InfMix)):
            va, vb = visit(node.a), visit(node.b)
            z = vb - va if isinstance(node, SupMix) else va - vb
            if not _tie(z, -1.0, tol):
                best = min(best, abs(z + 1.0))
            return _supmix(va, vb) if isinstance(node, SupMix) else _infmix(va, vb)
        vals = [visit(c) for c in node.children]
        kind = _extremum_kind(node)
        if kind is None:
            if isinstance(node, Avg) or node.r == 0:
                return math.fsum(w * v for w, v in zip(node.weights, vals))
            return _lme(node.r, node.weights, vals)
        m = min(vals) if kind < 0 else max(vals)
        for v in vals:
            if not _tie(v, m, tol):
                best = min(best, abs(v - m))
        return m

    for i in idx:
        visit(op.coords[i])
    return best


# ---------------------------------------------------------------------------
# structural transforms


def support(op: Operator, i: int) -> frozenset[int]:
    """Coordinates the convex map ``T_i`` effectively depends on."""
    if not op.convex:
        raise ExprError("support via the limit oracle needs a convex operator")
    return frozenset(j for j in range(op.n) if _ext(op.coords[i], 1 << j, 1) == INF)


def _uniform(k: int) -> tuple:
    return (1.0 / k,) * k if k > 1 else (1.0,)


def _signature(node: Expr) -> Expr:
    if isinstance(node, Var):
        return node
    if isinstance(node, Shift):
        return _signature(node.child)
    if isinstance(node, (SupMix, InfMix)):
        raise ExprError("signature is only defined for mean expressions")
    kids = tuple(_signature(c) for c in node.children)
    if isinstance(node, Min):
        return Min(kids)
    if isinstance(node, Max):
        return Max(kids)
    if isinstance(node, Avg) or node.r == 0:
        return Avg(_uniform(len(kids)), kids)
    return Mean(INF if node.r > 0 else -INF, _uniform(len(kids)), kids)


def signature(op: Operator) -> Operator:
    """Drop constants and collapse every mean to max, min or uniform average."""
    return Operator(op.n, tuple(_signature(c) for c in op.coords))


def _recession(node: Expr) -> Expr:
    if isinstance(node, Var):
        return node
    if isinstance(node, Shift):
        return _recession(node.child)
    if isinstance(node, SupMix):
        return Max((_recession(node.a), _recession(node.b)))
    if isinstance(node, InfMix):
        return Min((_recession(node.a), _recession(node.b)))
    kids = tuple(_recession(c) for c in node.children)
    if isinstance(node, Min):
        return Min(kids)
    if isinstance(node, Max):
        return Max(kids)
    if isinstance(node, Avg) or node.r == 0:
        return Avg(node.weights, kids)
    return Max(kids) if node.r > 0 else Min(kids)


def recession(op: Operator) -> Operator:
    """The operator ``x -> lim_k T(k x) / k``."""
    return Operator(op.n, tuple(_recession(c) for c in op.coords))


def shift_coords(op: Operator, g) -> Operator:
    """``g + T``, wrapping coordinate ``i`` in ``Shift(g_i)`` when ``g_i != 0``."""
    g = [float(t) for t in g]
    if len(g) != op.n:
        raise ExprError(f"expected {op.n} shifts")
    return Operator(op.n, tuple(c if gi == 0 else Shift(gi, c) for gi, c in zip(g, op.coords)))


def _rename(node: Expr, perm: Sequence[int]) -> Expr:
    if isinstance(node, Var):
        return Var(perm[node.index])
    if isinstance(node, Shift):
        return Shift(node.const, _rename(node.child, perm))
    if isinstance(node, SupMix):
        return SupMix(_rename(node.a, perm), _rename(node.b, perm))
    if isinstance(node, InfMix):
        return InfMix(_rename(node.a, perm), _rename(node.b, perm))
    kids = tuple(_rename(c, perm) for c in node.children)
    if isinstance(node, Min):
        return Min(kids)
    if isinstance(node, Max):
        return Max(kids)
    if isinstance(node, Avg):
        return Avg(node.weights, kids)
    return Mean(node.r, node.weights, kids)


def relabel(op: Operator, perm: Sequence[int]) -> Operator:
    """Rename coordinate ``j`` to ``perm[j]`` in both inputs and outputs."""
    perm = list(perm)
    if sorted(perm) != list(range(op.n)):
        raise ExprError("not a permutation")
    coords = [None] * op.n
    for i, c in enumerate(op.coords):
        coords[perm[i]] = _rename(c, perm)
    return Operator(op.n, tuple(coords))


# ---------------------------------------------------------------------------
# printing (inverse of the DSL parser)


def _fmt_real(v: float) -> str:
    if v == INF:
        return "+inf"
    if v == -INF:
        return "-inf"
    return repr(float(v))


def format_expr(node: Expr) -> str:
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Shift):
        return f"{_fmt_real(node.const)} + {format_expr(node.child)}"
    if isinstance(node, SupMix):
        return f"supmix({format_expr(node.a)}, {format_expr(node.b)})"
    if isinstance(node, InfMix):
        return f"infmix({format_expr(node.a)}, {format_expr(node.b)})"
    if isinstance(node, (Min, Max)):
        name = "min" if isinstance(node, Min) else "max"
        return f"{name}({', '.join(format_expr(c) for c in node.children)})"
    wl = ", ".join(f"{_fmt_real(w)}:{format_expr(c)}" for w, c in zip(node.weights, node.children))
    if isinstance(node, Avg):
        return f"avg({wl})"
    return f"mean({_fmt_real(node.r) if node.r else '0'}; {wl})"


def format_operator(op: Operator) -> str:
    lines = [f"operator n={op.n}"]
    lines += [f"T{i + 1} := {format_expr(c)}" for i, c in enumerate(op.coords)]
    return "\n".join(lines) + "\n"
