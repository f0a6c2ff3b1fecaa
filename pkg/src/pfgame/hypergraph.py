"""Directed hypergraphs with single-node heads, reachability and final classes.

Node sets are bitmasks internally (``n <= 64``); public functions accept any
iterable of 0-based node indices and return ``frozenset``.
"""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Union

MAX_NODES = 64


def to_mask(nodes: Iterable[int] | int) -> int:
    if isinstance(nodes, int):
        return nodes
    mask = 0
    for j in nodes:
        mask |= 1 << int(j)
    return mask


def from_mask(mask: int) -> frozenset[int]:
    out, j = [], 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return frozenset(out)


def full_mask(n: int) -> int:
    return (1 << n) - 1


def _check_n(n: int) -> None:
    if n > MAX_NODES:
        raise ValueError(f"node sets are limited to {MAX_NODES} nodes, got n={n}")
    if n < 0:
        raise ValueError("negative node count")


@dataclass(frozen=True)
class Hypergraph:
    """Nodes ``0..n-1`` and hyperarcs ``(tail, head)`` with ``head not in tail``."""

    n: int
    hyperarcs: tuple  # of (tail mask, head)

    def __post_init__(self):
        _check_n(self.n)
        arcs = []
        for tail, head in self.hyperarcs:
            t = to_mask(tail)
            if t == 0:
                raise ValueError("hyperarc tails must be nonempty")
            if not 0 <= head < self.n or t >> self.n:
                raise ValueError(f"hyperarc ({sorted(from_mask(t))}, {head}) out of range")
            if (t >> head) & 1:
                raise ValueError(f"head {head} lies in its own tail")
            arcs.append((t, int(head)))
        object.__setattr__(self, "hyperarcs", tuple(sorted(set(arcs), key=_arc_key)))

    def oracle(self) -> "HeadOracle":
        by_head: dict[int, list[int]] = {}
        for t, hd in self.hyperarcs:
            by_head.setdefault(hd, []).append(t)
        return HeadOracle(self.n, lambda J, i: any(t & ~J == 0 for t in by_head.get(i, ())))

    def minimal(self) -> "Hypergraph":
        """Keep, for each head, only the inclusion-minimal tails."""
        keep = []
        for t, hd in self.hyperarcs:
            if not any(t2 != t and hd2 == hd and t2 & ~t == 0 for t2, hd2 in self.hyperarcs):
                keep.append((t, hd))
        return Hypergraph(self.n, tuple(keep))

    def to_json(self) -> dict:
        return {"n": self.n,
                "hyperarcs": [{"tail": sorted(j + 1 for j in from_mask(t)), "head": hd + 1}
                              for t, hd in self.hyperarcs]}

    @classmethod
    def from_json(cls, data: dict | str) -> "Hypergraph":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["n"]), tuple((to_mask(j - 1 for j in a["tail"]), int(a["head"]) - 1)
                                         for a in data["hyperarcs"]))

    def arc_set(self) -> set[tuple[frozenset, int]]:
        return {(from_mask(t), hd) for t, hd in self.hyperarcs}


def _arc_key(arc):
    t, hd = arc
    return (hd, bin(t).count("1"), sorted(from_mask(t)))


@dataclass(frozen=True)
class Digraph:
    n: int
    arcs: tuple  # of (i, j)

    def __post_init__(self):
        _check_n(self.n)
        arcs = sorted({(int(i), int(j)) for i, j in self.arcs})
        for i, j in arcs:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"arc ({i}, {j}) out of range")
        object.__setattr__(self, "arcs", tuple(arcs))

    def successors(self, i: int) -> list[int]:
        return [j for a, j in self.arcs if a == i]

    def as_hypergraph(self) -> Hypergraph:
        """Arc-only hypergraph view (self-loops are dropped)."""
        return Hypergraph(self.n, tuple((1 << i, j) for i, j in self.arcs if i != j))

    @classmethod
    def from_hypergraph(cls, h: Hypergraph) -> "Digraph":
        arcs = []
        for t, hd in h.hyperarcs:
            if t & (t - 1):
                raise ValueError("hypergraph has a tail with more than one node")
            arcs.append((t.bit_length() - 1, hd))
        return cls(h.n, tuple(arcs))


class HeadOracle:
    """Lazy hypergraph: ``oracle(J, i)`` says whether ``(J, {i})`` is a hyperarc.

    ``J`` is a bitmask. The oracle must be monotone in ``J``. Every query is
    counted in :attr:`calls`.
    """

    def __init__(self, n: int, test: Callable[[int, int], bool]):
        _check_n(n)
        self.n = n
        self._test = test
        self._lock = threading.Lock()
        self.calls = 0

    def __call__(self, J: int, i: int) -> bool:
        with self._lock:
            self.calls += 1
        if (J >> i) & 1 or J == 0:
            return False
        return bool(self._test(J, i))

    def materialize(self, max_n: int = 20) -> Hypergraph:
        if self.n > max_n:
            raise ValueError(f"materializing needs 2^n tails; n={self.n} exceeds {max_n}")
        arcs = []
        for J in range(1, 1 << self.n):
            for i in range(self.n):
                if not (J >> i) & 1 and self(J, i):
                    arcs.append((J, i))
        return Hypergraph(self.n, tuple(arcs))


HypergraphLike = Union[Hypergraph, HeadOracle]


def reach_mask(h: HypergraphLike, J: int) -> int:
    """Forward-chaining closure of the bitmask ``J``.

    Each round tests every node outside the current set against that set, so
    at most ``n + (n-1) + ... <= n^2`` oracle queries are issued.
    """
    oracle = h.oracle() if isinstance(h, Hypergraph) else h
    full = full_mask(oracle.n)
    R = J
    while True:
        grown = R
        for i in range(oracle.n):
            if not (R >> i) & 1 and oracle(R, i):
                grown |= 1 << i
        if grown == R or grown == full:
            return grown
        R = grown


def reach(h: HypergraphLike, J: Iterable[int] | int) -> frozenset[int]:
    """Smallest invariant set of ``h`` containing the nonempty set ``J``."""
    mask = to_mask(J)
    if mask == 0:
        raise ValueError("reach is undefined for the empty set")
    n = h.n
    if mask >> n:
        raise ValueError("node set out of range")
    return from_mask(reach_mask(h, mask))


def is_invariant(h: HypergraphLike, J: Iterable[int] | int) -> bool:
    mask = to_mask(J)
    return reach_mask(h, mask) == mask if mask else True


def strongly_connected_components(g: Digraph) -> list[frozenset[int]]:
    """Tarjan's algorithm, iterative, visiting nodes in ascending order."""
    succ = [[] for _ in range(g.n)]
    for i, j in g.arcs:
        succ[i].append(j)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack = [False] * g.n
    stack: list[int] = []
    counter = itertools.count()
    comps = []
    for root in range(g.n):
        if root in index:
            continue
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack[root] = True
        work = [(root, iter(succ[root]))]
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = next(counter)
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(frozenset(comp))
    return comps


def final_classes(g: Digraph) -> list[frozenset[int]]:
    """Strongly connected components without outgoing arcs, sorted by smallest member."""
    comps = strongly_connected_components(g)
    owner = {}
    for k, c in enumerate(comps):
        for v in c:
            owner[v] = k
    leaving = {owner[i] for i, j in g.arcs if owner[i] != owner[j]}
    finals = [c for k, c in enumerate(comps) if k not in leaving]
    return sorted(finals, key=min)


# ---------------------------------------------------------------------------
# GraphViz export


def to_dot(h: Hypergraph | Digraph, minimal: bool = False, name: str = "H") -> str:
    """DOT text with 1-based node labels.

    Hyperarcs with two or more tail nodes are drawn through an auxiliary point
    node. With ``minimal=True`` only the inclusion-minimal tails per head are kept.
    """
    lines = [f'digraph "{name}" {{', "  node [shape=circle];"]
    lines += [f"  {v + 1};" for v in range(h.n)]
    if isinstance(h, Digraph):
        lines += [f"  {i + 1} -> {j + 1};" for i, j in h.arcs]
        lines.append("}")
        return "\n".join(lines) + "\n"
    if minimal:
        h = h.minimal()
    aux = 0
    for t, hd in h.hyperarcs:
        tail = sorted(from_mask(t))
        if len(tail) == 1:
            lines.append(f"  {tail[0] + 1} -> {hd + 1};")
            continue
        node = f"a{aux}"
        aux += 1
        lines.append(f'  {node} [shape=point, label=""];')
        lines += [f"  {j + 1} -> {node} [dir=none];" for j in tail]
        lines.append(f"  {node} -> {hd + 1};")
    lines.append("}")
    return "\n".join(lines) + "\n"
