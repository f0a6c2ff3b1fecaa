"""The two abstract games attached to an operator and their hypergraphs.

In state ``i`` a player chooses a set ``S`` of states. For the game at
infinity, Min may choose ``S`` when ``T_i`` stays bounded above as the
coordinates outside ``S`` go to ``+inf``; Max dually with ``-inf``. The local
game at ``u`` replaces boundedness by exact one-sided constancy near ``u``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .expr import INF, ExprError, Operator, eval_ext, locally_constant
from .hypergraph import Digraph, HeadOracle, Hypergraph, full_mask, to_mask
from .tensor import TensorPattern


class Player(enum.Enum):
    MIN = "Min"
    MAX = "Max"

    @property
    def sign(self) -> int:
        """Direction in which the opponent pushes the complement of an action."""
        return 1 if self is Player.MIN else -1


@dataclass(frozen=True)
class AtInfinity:
    def __str__(self) -> str:
        return "AtInfinity"


AT_INFINITY = AtInfinity()


@dataclass(frozen=True, eq=False)
class LocalAt:
    u: tuple
    tol: float = 1e-12

    def __post_init__(self):
        u = tuple(float(t) for t in self.u)
        if not all(math.isfinite(t) for t in u):
            raise ValueError("local game needs a finite point")
        object.__setattr__(self, "u", u)

    def __eq__(self, other):
        return isinstance(other, LocalAt) and self.u == other.u and self.tol == other.tol

    def __hash__(self):
        return hash((self.u, self.tol))

    def __str__(self) -> str:
        return "LocalAt(" + ",".join(repr(t) for t in self.u) + ")"


GameKind = Union[AtInfinity, LocalAt]


def _pushed(op: Operator, game: GameKind, i: int, jmask: int, sign: int) -> bool:
    """Whether pushing the coordinates in ``jmask`` in direction ``sign`` moves ``T_i``.

    This is the hyperarc test ``(J, {i})`` of the hypergraph with that sign.
    """
    if isinstance(game, AtInfinity):
        return eval_ext(op, i, jmask, sign) == sign * INF
    if len(game.u) != op.n:
        raise ExprError(f"local point has length {len(game.u)}, expected {op.n}")
    return not locally_constant(op, i, game.u, jmask, sign, game.tol)


def action_ok(op: Operator, game: GameKind, player: Player, i: int, S: Iterable[int] | int) -> bool:
    """Whether ``S`` is an admissible action of ``player`` in state ``i``."""
    smask = to_mask(S)
    if smask == 0:
        raise ValueError("actions are nonempty sets of states")
    comp = full_mask(op.n) & ~smask
    if comp == 0:
        return True
    return not _pushed(op, game, i, comp, player.sign)


def is_dominion(op: Operator, game: GameKind, player: Player, D: Iterable[int] | int) -> bool:
    mask = to_mask(D)
    if mask == 0:
        raise ValueError("dominions are nonempty")
    return all(action_ok(op, game, player, i, mask) for i in range(op.n) if (mask >> i) & 1)


def actions(op: Operator, game: GameKind, player: Player, i: int) -> list[frozenset[int]]:
    """All admissible actions in state ``i`` (exponential; for small ``n``)."""
    from .hypergraph import from_mask

    out = [from_mask(S) for S in range(1, 1 << op.n) if action_ok(op, game, player, i, S)]
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def dominions(op: Operator, game: GameKind, player: Player) -> list[frozenset[int]]:
    from .hypergraph import from_mask

    out = [from_mask(D) for D in range(1, 1 << op.n) if is_dominion(op, game, player, D)]
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def head_oracle(op: Operator, game: GameKind, sign: int) -> HeadOracle:
    """Lazy ``H^+`` (``sign=+1``) or ``H^-`` (``sign=-1``) hypergraph of ``op``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if isinstance(game, LocalAt) and len(game.u) != op.n:
        raise ExprError(f"local point has length {len(game.u)}, expected {op.n}")
    return HeadOracle(op.n, lambda J, i: _pushed(op, game, i, J, sign))


def build_hypergraph(op: Operator, game: GameKind, sign: int, materialize: bool = False,
                     max_n: int = 20) -> HeadOracle | Hypergraph:
    oracle = head_oracle(op, game, sign)
    return oracle.materialize(max_n) if materialize else oracle


def build_digraph(op: Operator, game: GameKind) -> Digraph:
    """``G_inf`` or ``G_u``: arc ``i -> j`` when pushing ``x_j`` up moves ``T_i`` up.

    Self-loops are kept; they do not affect final classes.
    """
    if not op.convex:
        raise ExprError("the digraph reduction needs a convex operator")
    arcs = [(i, j) for i in range(op.n) for j in range(op.n) if _pushed(op, game, i, 1 << j, 1)]
    return Digraph(op.n, tuple(arcs))


def tensor_hypergraph(pattern: TensorPattern) -> HeadOracle:
    """``(J, {i})`` is a hyperarc iff every entry of row ``i`` has a later index in ``J``."""
    rows = [[to_mask(tail) for tail in pattern.rows(i)] for i in range(pattern.n)]
    return HeadOracle(pattern.n, lambda J, i: all(t & J for t in rows[i]))


def tensor_digraph(pattern: TensorPattern) -> Digraph:
    """Arc ``i -> j`` iff ``j`` occurs as a later index of some entry in row ``i``."""
    arcs = {(e[0], j) for e in pattern.entries for j in e[1:]}
    return Digraph(pattern.n, tuple(arcs))


def local_point(u) -> LocalAt:
    return LocalAt(tuple(np.asarray(u, dtype=float).tolist()))
