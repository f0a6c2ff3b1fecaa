"""Random and exhaustive operator generators used by the test suites."""

from __future__ import annotations

import itertools
import math
from typing import Iterator

import numpy as np

from .expr import Avg, Max, Mean, Min, Operator, Shift, Var
from .tensor import Tensor

R_CHOICES = (-math.inf, -3.0, -1.0, 0.0, 0.5, 2.0, math.inf)


def _weights(rng: np.random.Generator, k: int) -> tuple:
    w = rng.dirichlet(np.ones(k))
    w = np.round(w, 6)
    w[-1] = 1.0 - w[:-1].sum()
    if w[-1] <= 0:
        return (1.0 / k,) * k
    return tuple(float(t) for t in w)


def _affine(rng: np.random.Generator, n: int, support=None, const: float | None = None):
    pool = list(range(n)) if support is None else sorted(support)
    k = int(rng.integers(1, min(3, len(pool)) + 1))
    idx = sorted(rng.choice(pool, size=k, replace=False).tolist())
    node = Var(idx[0]) if k == 1 else Avg(_weights(rng, k), tuple(Var(j) for j in idx))
    c = float(rng.integers(-3, 4)) if const is None else const
    return node if c == 0 else Shift(c, node)


def random_minmax_affine(n: int, rng: np.random.Generator, max_terms: int = 3) -> Operator:
    """Each coordinate is a min or max of a few shifted averages, or a min of maxes."""
    coords = []
    for _ in range(n):
        kind = rng.integers(0, 4)
        terms = tuple(_affine(rng, n) for _ in range(int(rng.integers(1, max_terms + 1))))
        if kind == 0:
            coords.append(Min(terms))
        elif kind == 1:
            coords.append(Max(terms))
        elif kind == 2:
            coords.append(Min((Max(terms), _affine(rng, n))))
        else:
            coords.append(Max((Min(terms), _affine(rng, n))))
    return Operator(n, tuple(coords))


def _mbar(rng: np.random.Generator, n: int, depth: int):
    if depth == 0 or rng.random() < 0.3:
        node = Var(int(rng.integers(n)))
    else:
        k = int(rng.integers(1, 4))
        kids = tuple(_mbar(rng, n, depth - 1) for _ in range(k))
        r = R_CHOICES[int(rng.integers(len(R_CHOICES)))]
        node = Avg(_weights(rng, k), kids) if r == 0 and rng.random() < 0.5 \
            else Mean(r, _weights(rng, k), kids)
    if rng.random() < 0.3:
        node = Shift(float(np.round(rng.normal(), 3)), node)
    return node


def random_mbar(n: int, rng: np.random.Generator, depth: int = 3) -> Operator:
    """Operators built from shifted generalized means only."""
    return Operator(n, tuple(_mbar(rng, n, depth) for _ in range(n)))


def random_tensor(n: int, d: int, rng: np.random.Generator, density: float = 0.2,
                  pattern=None) -> Tensor:
    """Random positive tensor; with ``pattern`` given, only the weights are random."""
    if pattern is not None:
        return Tensor(d, n, {idx: float(rng.uniform(0.1, 5.0)) for idx in sorted(pattern)})
    entries = {}
    for idx in itertools.product(range(n), repeat=d):
        if rng.random() < density:
            entries[idx] = float(rng.uniform(0.1, 5.0))
    for i in range(n):
        if not any(k[0] == i for k in entries):
            idx = (i,) + tuple(int(t) for t in rng.integers(0, n, size=d - 1))
            entries[idx] = float(rng.uniform(0.1, 5.0))
    return Tensor(d, n, entries)


def planted_dominions(n: int, rng: np.random.Generator, lam: float | None = None):
    """Operator with eigenvector ``u0`` and disjoint dominions at ``u0`` and at infinity.

    Returns ``(op, u0, lam, I, J)``. Rows in ``I`` are a min whose strictly
    attaining branch only reads ``I``; rows in ``J`` are a max reading only
    ``J``; remaining rows are arbitrary min/max of averages vanishing at 0.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    perm = rng.permutation(n).tolist()
    a = int(rng.integers(1, n))
    b = int(rng.integers(1, n - a + 1))
    I, J = sorted(perm[:a]), sorted(perm[a:a + b])
    coords = []
    for i in range(n):
        if i in I:
            coords.append(Min((_affine(rng, n, I, 0.0), _affine(rng, n, None, float(rng.integers(1, 4))))))
        elif i in J:
            coords.append(Max((_affine(rng, n, J, 0.0), _affine(rng, n, None, -float(rng.integers(1, 4))))))
        else:
            t1, c = _affine(rng, n, None, 0.0), float(rng.integers(0, 3))
            if rng.random() < 0.5:
                coords.append(Min((t1, _affine(rng, n, None, c))))
            else:
                coords.append(Max((t1, _affine(rng, n, None, -c))))
    base = Operator(n, tuple(coords))
    u0 = np.round(rng.normal(size=n), 3)
    lam = float(np.round(rng.normal(), 3)) if lam is None else lam
    return conjugate(base, u0, lam), u0, lam, frozenset(I), frozenset(J)


def _substitute(node, u0):
    from .expr import InfMix, SupMix

    if isinstance(node, Var):
        c = -float(u0[node.index])
        return node if c == 0 else Shift(c, node)
    if isinstance(node, Shift):
        return Shift(node.const, _substitute(node.child, u0))
    if isinstance(node, SupMix):
        return SupMix(_substitute(node.a, u0), _substitute(node.b, u0))
    if isinstance(node, InfMix):
        return InfMix(_substitute(node.a, u0), _substitute(node.b, u0))
    kids = tuple(_substitute(c, u0) for c in node.children)
    if isinstance(node, Min):
        return Min(kids)
    if isinstance(node, Max):
        return Max(kids)
    if isinstance(node, Avg):
        return Avg(node.weights, kids)
    return Mean(node.r, node.weights, kids)


def conjugate(op: Operator, u0, lam: float = 0.0) -> Operator:
    """``x -> u0 + lam e + T(x - u0)``: moves a fixed point 0 of ``T`` to ``u0``."""
    coords = []
    for i, c in enumerate(op.coords):
        shift = float(u0[i]) + lam
        body = _substitute(c, u0)
        coords.append(body if shift == 0 else Shift(shift, body))
    return Operator(op.n, tuple(coords))


def grammar_atoms(n: int) -> list:
    atoms = [Var(j) for j in range(n)]
    atoms += [Avg((0.5, 0.5), (Var(a), Var(b))) for a, b in itertools.combinations(range(n), 2)]
    return atoms


def grammar_forms(n: int) -> list:
    atoms = grammar_atoms(n)
    forms = list(atoms)
    for a, b in itertools.combinations(atoms, 2):
        forms.append(Min((a, b)))
        forms.append(Max((a, b)))
    return forms


def exhaustive_grammar(n: int) -> Iterator[Operator]:
    """Every operator whose coordinates are an atom, or a min or max of two atoms.

    Atoms are the variables and the uniform averages of two variables.
    """
    forms = grammar_forms(n)
    for combo in itertools.product(forms, repeat=n):
        yield Operator(n, combo)
