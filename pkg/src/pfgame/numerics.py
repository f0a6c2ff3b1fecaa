"""Numerical side: ergodic eigenvectors, mean payoffs, slice spaces, tensor eigenpairs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expr import Operator, evaluate, shift_coords
from .tensor import Tensor, tensor_to_operator

RESIDUAL_TOL = 1e-8


class NonConvergence(RuntimeError):
    """The iteration hit its cap. This does not refute existence of an eigenvector."""

    def __init__(self, message: str, iterations: int = 0, last=None, residual: float = math.inf):
        super().__init__(message)
        self.iterations = iterations
        self.last = last
        self.residual = residual


@dataclass(frozen=True)
class SolveConfig:
    tol: float = 1e-10
    max_iters: int = 100_000
    damping: float = 0.5

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class EigWitness:
    u: np.ndarray
    eigenvalue: float
    residual: float
    iterations: int

    def to_dict(self) -> dict:
        return {"u": [float(t) for t in self.u], "eigenvalue": float(self.eigenvalue),
                "residual": float(self.residual), "iterations": int(self.iterations)}


@dataclass
class TensorEigenpair:
    eigenvalue: float
    u: np.ndarray
    residual: float
    iterations: int = field(default=0)

    def to_dict(self) -> dict:
        return {"eigenvalue": float(self.eigenvalue), "u": [float(t) for t in self.u],
                "residual": float(self.residual), "iterations": int(self.iterations)}


def hilbert_seminorm(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x.max() - x.min())


def best_eigenvalue(op: Operator, u) -> tuple[float, float]:
    """Eigenvalue minimizing ``||T(u) - lam e - u||_inf``, with that residual."""
    d = evaluate(op, u) - np.asarray(u, dtype=float)
    lam = 0.5 * (d.max() + d.min())
    return float(lam), float(0.5 * (d.max() - d.min()))


def ergodic_residual(op: Operator, u, lam: float) -> float:
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(evaluate(op, u) - lam - u)))


def solve_ergodic(op: Operator, x0=None, cfg: SolveConfig | None = None) -> EigWitness:
    """Damped relative value iteration for ``T(u) = lam e + u``.

    ``y = (1 - theta) x + theta T(x)`` followed by ``y -= y[-1]``. A fixed point
    of this map is an eigenvector, and the drift ``y[-1]`` tends to
    ``theta * lam``.
    """
    cfg = cfg or SolveConfig()
    n = op.n
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (n,) or not np.all(np.isfinite(x)):
        raise ValueError(f"initial point must be a finite vector of length {n}")
    x = x - x[-1]
    theta = cfg.damping
    drifts: list[float] = []
    f = op._compiled
    for it in range(1, cfg.max_iters + 1):
        y = (1 - theta) * x + theta * np.array(f(x.tolist()))
        drift = y[-1]
        y -= drift
        drifts.append(drift)
        if len(drifts) > 10:
            drifts.pop(0)
        step = hilbert_seminorm(y - x)
        x = y
        if step < cfg.tol:
            lam = math.fsum(drifts) / len(drifts) / theta
            res = ergodic_residual(op, x, lam)
            if res >= RESIDUAL_TOL:
                # transient drifts can bias the average; fall back on the point itself
                lam, res = best_eigenvalue(op, x)
            if res < RESIDUAL_TOL:
                return EigWitness(x, lam, res, it)
    lam, res = best_eigenvalue(op, x)
    raise NonConvergence(f"no eigenvector found within {cfg.max_iters} iterations "
                         f"(residual {res:.3g})", cfg.max_iters, x, res)


def mean_payoff(op: Operator, k: int, x0=None) -> np.ndarray:
    """``T^k(x0) / k`` (``x0 = 0`` by default)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    x = np.zeros(op.n) if x0 is None else np.array(x0, dtype=float)
    start = x.copy()
    f = op._compiled
    bound = float(np.max(np.abs(evaluate(op, start) - start))) + 1.0
    for step in range(1, k + 1):
        x = np.array(f(x.tolist()))
        # nonexpansiveness: ||T^k(x0) - x0|| <= k ||T(x0) - x0||
        if np.max(np.abs(x - start)) > step * bound * (1 + 1e-9):
            raise ArithmeticError("iterates grew faster than a nonexpansive map allows")
    return x / k


def slice_membership(op: Operator, x, alpha: float, beta: float, tol: float = 0.0) -> bool:
    """``alpha e + x <= T(x) <= beta e + x`` componentwise (up to ``tol``)."""
    x = np.asarray(x, dtype=float)
    d = evaluate(op, x) - x
    return bool(np.all(d >= alpha - tol) and np.all(d <= beta + tol))


def perturb_diagonal(op: Operator, g) -> Operator:
    """``g + T``; multiplicatively this is ``D f`` with ``D`` positive diagonal."""
    g = np.asarray(g, dtype=float)
    if g.shape != (op.n,) or not np.all(np.isfinite(g)):
        raise ValueError(f"perturbation must be a finite vector of length {op.n}")
    return shift_coords(op, g)


def tensor_eigenpair(F: Tensor, cfg: SolveConfig | None = None) -> TensorEigenpair:
    """Positive eigenpair ``F u^(d-1) = lam u^[d-1]`` via the log-conjugated operator."""
    op = tensor_to_operator(F)
    cfg = cfg or SolveConfig()
    # the multiplicative residual scales with lam, so converge further than usual
    w = solve_ergodic(op, None, SolveConfig(min(cfg.tol, 1e-13), cfg.max_iters, cfg.damping))
    r = F.d - 1
    lam = math.exp(w.eigenvalue * r)
    v = w.u - w.u.max()
    u = np.exp(v)
    lhs = F.apply(u)
    rhs = lam * u ** r
    residual = float(np.max(np.abs(lhs - rhs)) / np.max(u ** r))
    return TensorEigenpair(lam, u, residual, w.iterations)
