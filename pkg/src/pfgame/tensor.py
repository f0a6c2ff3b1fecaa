"""Nonnegative tensors and their log-conjugated operators."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .expr import Avg, Mean, Operator, Shift, Var


@dataclass(frozen=True)
class TensorPattern:
    """Multi-indices ``(i1, ..., id)`` (0-based) carrying a positive coefficient."""

    d: int
    n: int
    entries: frozenset

    def __post_init__(self):
        object.__setattr__(self, "entries", frozenset(tuple(e) for e in self.entries))
        if self.d < 2:
            raise ValueError("tensor order must be at least 2")
        for e in self.entries:
            if len(e) != self.d or any(not 0 <= k < self.n for k in e):
                raise ValueError(f"bad multi-index {e}")
        rows = {e[0] for e in self.entries}
        missing = [i + 1 for i in range(self.n) if i not in rows]
        if missing:
            raise ValueError(f"coordinates {missing} have no positive entry")

    def rows(self, i: int) -> list[tuple]:
        """Trailing indices ``(i2, ..., id)`` of the entries in row ``i``."""
        return sorted(e[1:] for e in self.entries if e[0] == i)


@dataclass(frozen=True)
class Tensor:
    d: int
    n: int
    entries: dict = field(hash=False)

    def __post_init__(self):
        if any(not (v > 0 and math.isfinite(v)) for v in self.entries.values()):
            raise ValueError("stored tensor entries must be positive")
        # validates shape and that every row is populated
        object.__setattr__(self, "pattern", TensorPattern(self.d, self.n, frozenset(self.entries)))

    def apply(self, u) -> np.ndarray:
        """``F u^(d-1)``: ``sum a_{i i2..id} u_i2 ... u_id`` for each ``i``."""
        u = np.asarray(u, dtype=float)
        out = np.zeros(self.n)
        for idx, a in self.entries.items():
            out[idx[0]] += a * np.prod(u[list(idx[1:])])
        return out

    def with_weights(self, weights: dict) -> "Tensor":
        return Tensor(self.d, self.n, dict(weights))

    def to_text(self) -> str:
        lines = [f"tensor {self.d} {self.n}"]
        for idx in sorted(self.entries):
            lines.append(" ".join(str(k + 1) for k in idx) + f"  {self.entries[idx]!r}")
        return "\n".join(lines) + "\n"


def tensor_to_operator(F: Tensor) -> Operator:
    """``T = (d-1)^-1 log o F o exp`` as an expression tree.

    Row ``i`` becomes ``c_i + mean(d-1; a/A : avg(x_i2, ..., x_id))`` with
    ``A = sum a`` and ``c_i = log(A) / (d-1)``.
    """
    r = F.d - 1
    rows: dict[int, list] = {i: [] for i in range(F.n)}
    for idx in sorted(F.entries):
        rows[idx[0]].append((F.entries[idx], idx[1:]))
    coords = []
    for i in range(F.n):
        total = math.fsum(a for a, _ in rows[i])
        weights, kids = [], []
        for a, tail in rows[i]:
            counts = sorted(Counter(tail).items())
            kids.append(Avg(tuple(c / r for _, c in counts), tuple(Var(j) for j, _ in counts)))
            weights.append(a / total)
        # renormalize so the weights pass the exact-sum check after division
        s = math.fsum(weights)
        weights = [w / s for w in weights]
        node = Mean(float(r), tuple(weights), tuple(kids))
        c = math.log(total) / r
        coords.append(Shift(c, node) if c != 0 else node)
    return Operator(F.n, tuple(coords))
