"""Decision procedures for existence and uniqueness of eigenvectors, with witnesses."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .expr import Operator, breakpoint_radius, eval_ext, evaluate
from .games import (AT_INFINITY, GameKind, LocalAt, Player, build_digraph, head_oracle,
                    is_dominion, tensor_digraph, tensor_hypergraph)
from .hypergraph import HeadOracle, final_classes, from_mask, full_mask, reach_mask, to_mask
from .numerics import NonConvergence, best_eigenvalue
from .tensor import TensorPattern

NO_DISJOINT = "NoDisjointDominions"
DISJOINT = "DisjointDominions"
GENERAL = "General"
CONVEX_FAST = "ConvexFast"

UNIQUENESS_RESIDUAL = 1e-8


@dataclass(frozen=True)
class DecisionReport:
    """Verdict plus, for :data:`DISJOINT`, a Min dominion ``I`` and a Max dominion ``J``."""

    verdict: str
    I: frozenset | None
    J: frozenset | None
    game: GameKind
    oracle_calls: int
    path: str

    @property
    def disjoint(self) -> bool:
        return self.verdict == DISJOINT

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "I": sorted(i + 1 for i in self.I) if self.I is not None else None,
            "J": sorted(j + 1 for j in self.J) if self.J is not None else None,
            "game": "LocalAt" if isinstance(self.game, LocalAt) else "AtInfinity",
            "oracle_calls": self.oracle_calls,
            "path": self.path,
        }
        if isinstance(self.game, LocalAt):
            out["at"] = list(self.game.u)
        return out


def _report(I, J, game, calls, path) -> DecisionReport:
    if I is None:
        return DecisionReport(NO_DISJOINT, None, None, game, calls, path)
    return DecisionReport(DISJOINT, from_mask(I), from_mask(J), game, calls, path)


# ---------------------------------------------------------------------------
# search


def _general_search(n: int, hplus: HeadOracle, hminus: HeadOracle, threads: int = 1):
    """First ``I`` (by size, then lexicographically) that is a Min dominion whose
    ``H^-`` closure is not everything. Returns ``(I, J)`` masks or ``None``."""
    full = full_mask(n)

    def probe(I: int):
        comp = full & ~I
        if reach_mask(hplus, comp) != comp:
            return None
        R = reach_mask(hminus, I)
        return None if R == full else (I, full & ~R)

    for k in range(1, n):
        masks = (to_mask(c) for c in itertools.combinations(range(n), k))
        if threads <= 1:
            for I in masks:
                hit = probe(I)
                if hit:
                    return hit
            continue
        masks = list(masks)
        size = max(1, math.ceil(len(masks) / threads))
        chunks = [masks[s:s + size] for s in range(0, len(masks), size)]

        def scan(chunk):
            for I in chunk:
                hit = probe(I)
                if hit:
                    return hit
            return None

        with ThreadPoolExecutor(max_workers=threads) as pool:
            # chunks are contiguous in the global order, so the first chunk
            # with a hit holds the globally first witness
            for hit in pool.map(scan, chunks):
                if hit:
                    return hit
    return None


def _convex_search(n: int, arcs_fn, hminus: HeadOracle):
    finals = final_classes(arcs_fn())
    if len(finals) >= 2:
        return to_mask(finals[0]), to_mask(finals[1])
    C = to_mask(finals[0])
    R = reach_mask(hminus, C)
    full = full_mask(n)
    return None if R == full else (C, full & ~R)


def _decide(op: Operator, game: GameKind, path: str, threads: int) -> DecisionReport:
    if path not in ("auto", "general", "convex"):
        raise ValueError(f"unknown path {path!r}")
    if path == "convex" and not op.convex:
        raise ValueError("the convex fast path needs a convex operator")
    hplus = head_oracle(op, game, 1)
    hminus = head_oracle(op, game, -1)
    if path == "convex" or (path == "auto" and op.convex):
        digraph_calls = op.n * op.n
        hit = _convex_search(op.n, lambda: build_digraph(op, game), hminus)
        calls = digraph_calls + hplus.calls + hminus.calls
        return _report(*(hit or (None, None)), game, calls, CONVEX_FAST)
    hit = _general_search(op.n, hplus, hminus, threads)
    return _report(*(hit or (None, None)), game, hplus.calls + hminus.calls, GENERAL)


def decide_existence(op: Operator, path: str = "auto", threads: int = 1) -> DecisionReport:
    """Whether the two players have disjoint dominions in the game at infinity.

    ``NoDisjointDominions`` means every slice space is bounded, so ``g + T``
    has an eigenvector for every ``g``.
    """
    return _decide(op, AT_INFINITY, path, threads)


def decide_uniqueness(op: Operator, u, path: str = "auto", threads: int = 1,
                      tol: float | None = None) -> DecisionReport:
    """Whether the eigenvector ``u`` is unique up to an additive constant.

    ``NoDisjointDominions`` in the local game at ``u`` means unique.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (op.n,):
        raise ValueError(f"expected a vector of length {op.n}")
    _, res = best_eigenvalue(op, u)
    if res > UNIQUENESS_RESIDUAL:
        raise ValueError(f"u is not an eigenvector (residual {res:.3g} > {UNIQUENESS_RESIDUAL})")
    if tol is None:
        tol = max(1e-12, 100 * res)
    return _decide(op, LocalAt(tuple(u.tolist()), tol), path, threads)


def decide_tensor_pattern(pattern: TensorPattern) -> DecisionReport:
    """Existence of a positive eigenvector for every tensor with this pattern."""
    hyper = tensor_hypergraph(pattern)
    hit = _convex_search(pattern.n, lambda: tensor_digraph(pattern), hyper)
    return _report(*(hit or (None, None)), AT_INFINITY, hyper.calls, CONVEX_FAST)


def brute_force_existence(op: Operator, game: GameKind = AT_INFINITY) -> DecisionReport:
    """Test every pair of disjoint nonempty sets directly against the dominion definition."""
    n = op.n
    if n > 5:
        raise ValueError("brute force is limited to n <= 5")
    order = [to_mask(c) for k in range(1, n + 1) for c in itertools.combinations(range(n), k)]
    mins = [D for D in order if is_dominion(op, game, Player.MIN, D)]
    maxs = [D for D in order if is_dominion(op, game, Player.MAX, D)]
    for I in mins:
        for J in maxs:
            if I & J == 0:
                return _report(I, J, game, 0, "BruteForce")
    return _report(None, None, game, 0, "BruteForce")


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Certificate:
    alpha: float
    beta: float
    s: float
    K: int
    verified: bool
    gap: float  # min over J minus max over I of S^K(0) / K

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "s": self.s, "K": self.K,
                "verified": self.verified, "gap": self.gap}


class CertificateError(RuntimeError):
    pass


def certify_disjoint_dominions(op: Operator, report: DecisionReport, K: int = 50,
                               rtol: float = 1e-9) -> Certificate:
    """Check ``k (s e_J + alpha e) <= S^k(0) <= k (s e_Ibar + beta e)`` for ``k <= K``.

    ``S = s e_J + T``. The sandwich forces the ``J`` and ``I`` rows of
    ``S^k(0) / k`` at least ``s - (beta - alpha) >= 1`` apart, so the mean
    payoff of the perturbed map is not constant.
    """
    if not report.disjoint:
        raise ValueError("certificates exist only for disjoint dominions")
    if isinstance(report.game, LocalAt):
        raise ValueError("the sandwich certificate applies to dominions of the game at infinity")
    I, J = to_mask(report.I), to_mask(report.J)
    if I & J or not is_dominion(op, AT_INFINITY, Player.MIN, I) \
            or not is_dominion(op, AT_INFINITY, Player.MAX, J):
        raise CertificateError("report does not hold a pair of disjoint dominions")
    n = op.n
    full = full_mask(n)
    Ibar, Jbar = full & ~I, full & ~J
    t0 = evaluate(op, np.zeros(n))
    # T_j(k e_J) >= k + alpha for j in J; T_i(k e_Ibar) <= beta for i in I
    lows = [eval_ext(op, j, Jbar, -1) for j in from_mask(J)] if Jbar else []
    highs = [eval_ext(op, i, Ibar, 1) for i in from_mask(I)] if Ibar else []
    if any(math.isinf(v) for v in lows + highs):
        raise CertificateError("dominion limits are infinite")
    alpha = float(min([t0.min()] + lows))
    beta = float(max([t0.max()] + highs))
    s = float(math.ceil(beta - alpha) + 1)
    eJ = np.array([(J >> k) & 1 for k in range(n)], dtype=float)
    eIbar = np.array([(Ibar >> k) & 1 for k in range(n)], dtype=float)
    f = op._compiled
    x = np.zeros(n)
    ok = True
    for k in range(1, K + 1):
        x = s * eJ + np.array(f(x.tolist()))
        slack = rtol * k * (1 + abs(s) + abs(alpha) + abs(beta))
        if np.any(k * (s * eJ + alpha) > x + slack) or np.any(x > k * (s * eIbar + beta) + slack):
            ok = False
            break
    mp = x / K
    gap = float(min(mp[j] for j in from_mask(J)) - max(mp[i] for i in from_mask(I)))
    if not ok:
        raise CertificateError(f"sandwich inequality failed at k={k}")
    return Certificate(alpha, beta, s, K, ok, gap)


def _axis(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> k) & 1 for k in range(n)], dtype=float)


def second_eigenvector(op: Operator, u, I, J, lam: float | None = None,
                       max_iters: int = 100_000, step_tol: float = 1e-12,
                       residual_tol: float = 1e-9, tol: float | None = None) -> np.ndarray:
    """An eigenvector ``v`` with ``v - u`` nonconstant, from disjoint local dominions.

    With ``Tt(x) = T(u + x) - lam e - u`` and a small ``eps``, the vector
    ``G(x)`` equal to ``0`` on ``I``, ``eps`` on ``J`` and ``x`` on the rest is a
    fixed point of ``Tt`` once ``x`` is a fixed point of ``x -> Tt(G(x))`` on
    the rest. That map is monotone on ``[0, eps]^L``, so iterating it from the
    top corner decreases to a fixed point.
    """
    n = op.n
    u = np.asarray(u, dtype=float)
    I, J = to_mask(I), to_mask(J)
    if not I or not J or I & J:
        raise ValueError("I and J must be disjoint and nonempty")
    best, res = best_eigenvalue(op, u)
    lam = best if lam is None else lam
    if tol is None:
        tol = max(1e-12, 100 * res)
    full = full_mask(n)
    L = full & ~(I | J)
    eI, eJ, eL = _axis(I, n), _axis(J, n), _axis(L, n)
    eIbar, eJbar = 1 - eI, 1 - eJ
    f = op._compiled

    def Tt(x):
        return np.array(f((u + x).tolist())) - lam - u

    eps = breakpoint_radius(op, u, tol=tol) / 2
    if not math.isfinite(eps) or eps <= 0:
        eps = 1.0
    for _ in range(60):
        # the equalities that make I and J stay put on the box
        a = Tt(eps * eIbar)[eI > 0]
        b = Tt(-eps * eJbar)[eJ > 0]
        if np.all(np.abs(a) <= residual_tol) and np.all(np.abs(b) <= residual_tol):
            break
        eps /= 2
    else:
        raise NonConvergence("no admissible radius for the local dominions")

    def G(xL):
        return eps * eJ + xL * eL

    x = eps * eL
    if L:
        for it in range(max_iters):
            nxt = np.clip(Tt(G(x)), 0.0, eps) * eL
            step = float(np.max(np.abs(nxt - x)))
            x = nxt
            if step < step_tol:
                break
        else:
            raise NonConvergence(f"monotone iteration did not settle in {max_iters} steps",
                                 max_iters, u + G(x))
    v = u + G(x)
    res = float(np.max(np.abs(evaluate(op, v) - lam - v)))
    if res > residual_tol:
        raise NonConvergence(f"second eigenvector residual {res:.3g} exceeds {residual_tol}",
                             0, v, res)
    return v
