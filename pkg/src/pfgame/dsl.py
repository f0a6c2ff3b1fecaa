"""Text formats: the operator DSL and sparse tensor files.

Operator files look like::

    operator n=3
    T1 := min(avg(0.5:x1, 0.5:x2), -1 + avg(0.5:x1, 0.5:x3))
    T2 := ...

Grammar of a coordinate expression::

    expr  := "x" INT | REAL "+" expr | "min(" list ")" | "max(" list ")"
           | "avg(" wlist ")" | "mean(" RPARAM ";" wlist ")"
           | "supmix(" expr "," expr ")" | "infmix(" expr "," expr ")"
    wlist := REAL ":" expr ("," REAL ":" expr)*
    RPARAM := REAL | "+inf" | "-inf" | "0"

Variables are 1-based (``x1`` is coordinate 0). ``#`` starts a comment.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

from .expr import Avg, Expr, ExprError, InfMix, Max, Mean, Min, Operator, Shift, SupMix, Var


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 1, source: str | None = None):
        self.message, self.line, self.col, self.source = message, line, col, source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{col}: {message}")


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<inf>inf\b)
  | (?P<var>x(?P<vidx>\d+))
  | (?P<name>min|max|avg|mean|supmix|infmix)\b
  | (?P<punct>[(),:;+\-])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str, line: int, col0: int, source: str | None) -> list[_Tok]:
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col0 + pos, source)
        kind = m.lastgroup if m.lastgroup != "vidx" else "var"
        if m.group("var"):
            kind = "var"
        if kind != "ws":
            toks.append(_Tok(kind, m.group(0), col0 + pos))
        pos = m.end()
    toks.append(_Tok("eof", "", col0 + len(text)))
    return toks


class _ExprParser:
    def __init__(self, toks: list[_Tok], n: int | None, line: int, source: str | None):
        self.toks, self.pos, self.n, self.line, self.source = toks, 0, n, line, source

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, self.line, tok.col, self.source)

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.take()
        if tok.text != text:
            self.error(f"expected {text!r}, found {tok.text or 'end of line'!r}", tok)
        return tok

    def real(self, allow_inf: bool = False) -> float:
        sign = 1.0
        tok = self.take()
        if tok.text in "+-" and tok.kind == "punct":
            sign = -1.0 if tok.text == "-" else 1.0
            tok = self.take()
        if tok.kind == "num":
            return sign * float(tok.text)
        if tok.kind == "inf" and allow_inf:
            return sign * math.inf
        self.error(f"expected a number, found {tok.text or 'end of line'!r}", tok)

    def expr(self) -> Expr:
        tok = self.peek()
        if tok.kind == "var":
            self.take()
            idx = int(tok.text[1:])
            if idx < 1 or (self.n is not None and idx > self.n):
                self.error(f"variable {tok.text} out of range 1..{self.n}", tok)
            return Var(idx - 1)
        if tok.kind == "num" or tok.text in ("+", "-"):
            c = self.real()
            self.expect("+")
            return Shift(c, self.expr())
        if tok.kind == "name":
            self.take()
            self.expect("(")
            node = self._call(tok)
            self.expect(")")
            return node
        self.error(f"unexpected {tok.text or 'end of line'!r}")

    def _call(self, tok: _Tok) -> Expr:
        name = tok.text
        try:
            if name in ("min", "max"):
                items = [self.expr()]
                while self.peek().text == ",":
                    self.take()
                    items.append(self.expr())
                return (Min if name == "min" else Max)(tuple(items))
            if name in ("supmix", "infmix"):
                a = self.expr()
                self.expect(",")
                b = self.expr()
                return (SupMix if name == "supmix" else InfMix)(a, b)
            if name == "mean":
                r = self.real(allow_inf=True)
                self.expect(";")
                ws, cs = self._wlist()
                return Mean(r, ws, cs)
            ws, cs = self._wlist()
            return Avg(ws, cs)
        except ExprError as exc:
            self.error(str(exc), tok)

    def _wlist(self) -> tuple[list, list]:
        ws, cs = [], []
        while True:
            ws.append(self.real())
            self.expect(":")
            cs.append(self.expr())
            if self.peek().text != ",":
                return ws, cs
            self.take()


def parse_expr(text: str, n: int | None = None, *, line: int = 1, col: int = 1,
               source: str | None = None) -> Expr:
    """Parse a single coordinate expression."""
    p = _ExprParser(_tokenize(text, line, col, source), n, line, source)
    node = p.expr()
    if p.peek().kind != "eof":
        p.error(f"trailing input {p.peek().text!r}")
    return node


_HEADER = re.compile(r"operator\s+n\s*=\s*(\d+)\s*$")
_COORD = re.compile(r"T(\d+)\s*:=\s*")


def _strip_comment(raw: str) -> str:
    return raw.split("#", 1)[0].rstrip()


def parse_operator(text: str, source: str | None = None) -> Operator:
    """Parse an operator file (header ``operator n=<int>`` then ``Ti := expr`` lines).

    The header may be omitted; ``n`` is then the number of coordinate lines.
    """
    n = None
    coords: dict[int, Expr] = {}
    pending = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw)
        if not body.strip():
            continue
        lead = len(body) - len(body.lstrip())
        stripped = body.strip()
        hm = _HEADER.match(stripped)
        if hm:
            if n is not None or coords or pending:
                raise ParseError("header must come first and only once", lineno, lead + 1, source)
            n = int(hm.group(1))
            if n < 1:
                raise ParseError("dimension must be positive", lineno, lead + 1, source)
            continue
        cm = _COORD.match(stripped)
        if not cm:
            raise ParseError("expected 'Ti := <expr>'", lineno, lead + 1, source)
        pending.append((lineno, int(cm.group(1)), stripped[cm.end():], lead + cm.end() + 1))
    if n is None:
        n = len(pending)
    for lineno, idx, expr_text, col in pending:
        if not 1 <= idx <= n:
            raise ParseError(f"coordinate T{idx} out of range 1..{n}", lineno, 1, source)
        if idx in coords:
            raise ParseError(f"coordinate T{idx} defined twice", lineno, 1, source)
        coords[idx] = parse_expr(expr_text, n, line=lineno, col=col, source=source)
    missing = [i for i in range(1, n + 1) if i not in coords]
    if missing:
        raise ParseError(f"dimension mismatch: missing coordinates {missing}", 1, 1, source)
    return Operator(n, tuple(coords[i] for i in range(1, n + 1)))


def load_operator(path: str | Path) -> Operator:
    path = Path(path)
    return parse_operator(path.read_text(encoding="utf-8"), source=str(path))


# ---------------------------------------------------------------------------
# tensors


def parse_tensor(text: str, source: str | None = None):
    """Parse ``tensor d n`` followed by ``i1 ... id value`` lines (1-based)."""
    from .tensor import Tensor

    d = n = None
    entries: dict[tuple, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw).strip()
        if not body:
            continue
        fields = body.split()
        if d is None:
            if fields[0] != "tensor" or len(fields) != 3:
                raise ParseError("expected header 'tensor d n'", lineno, 1, source)
            try:
                d, n = int(fields[1]), int(fields[2])
            except ValueError:
                raise ParseError("tensor order and dimension must be integers", lineno, 1, source)
            if d < 2 or n < 1:
                raise ParseError("need order d >= 2 and dimension n >= 1", lineno, 1, source)
            continue
        if len(fields) != d + 1:
            raise ParseError(f"expected {d} indices and a value", lineno, 1, source)
        try:
            idx = tuple(int(f) - 1 for f in fields[:d])
            value = float(fields[d])
        except ValueError:
            raise ParseError("malformed entry", lineno, 1, source)
        if any(not 0 <= k < n for k in idx):
            raise ParseError(f"index out of range 1..{n}", lineno, 1, source)
        if not value > 0 or not math.isfinite(value):
            raise ParseError(f"stored entries must be positive and finite, got {value}", lineno, 1, source)
        if idx in entries:
            raise ParseError("duplicate entry", lineno, 1, source)
        entries[idx] = value
    if d is None:
        raise ParseError("empty tensor file", 1, 1, source)
    try:
        return Tensor(d, n, entries)
    except ValueError as exc:
        raise ParseError(str(exc), 1, 1, source)


def load_tensor(path: str | Path):
    path = Path(path)
    return parse_tensor(path.read_text(encoding="utf-8"), source=str(path))
