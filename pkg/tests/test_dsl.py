import math

import numpy as np
import pytest

from pfgame import (Avg, Max, Mean, Min, ParseError, Shift, Var, format_operator, parse_expr,
                    parse_operator, parse_tensor)
from pfgame.testing import random_mbar, random_minmax_affine


def test_running_coordinate_parses_to_expected_tree():
    node = parse_expr("min(avg(0.5:x1, 0.5:x2), -1 + avg(0.5:x1, 0.5:x3))", 3)
    assert node == Min((Avg((0.5, 0.5), (Var(0), Var(1))),
                        Shift(-1.0, Avg((0.5, 0.5), (Var(0), Var(2))))))


def test_variable_is_zero_based():
    assert parse_expr("x1") == Var(0)


def test_mean_parameters():
    assert parse_expr("mean(+inf; 1:x1)").r == math.inf
    assert parse_expr("mean(-inf; 1:x1)").r == -math.inf
    assert parse_expr("mean(0; 0.5:x1, 0.5:x2)").r == 0
    assert parse_expr("mean(-3; 0.5:x1, 0.5:x2)").r == -3


def test_weight_sum_error_has_position():
    with pytest.raises(ParseError) as exc:
        parse_operator("operator n=2\nT1 := avg(0.6:x1, 0.6:x2)\nT2 := x2\n")
    assert exc.value.line == 2
    assert "sum" in str(exc.value)


def test_negative_weight():
    with pytest.raises(ParseError):
        parse_expr("avg(-0.5:x1, 1.5:x2)")


@pytest.mark.parametrize("text,msg", [
    ("operator n=2\nT1 := x1\n", "dimension mismatch"),
    ("operator n=2\nT1 := x3\nT2 := x1\n", "out of range"),
    ("operator n=1\nT1 := x1\nT1 := x1\n", "twice"),
    ("operator n=1\nT1 := min(x1\n", "expected"),
    ("operator n=1\nT1 := x1 x1\n", "trailing"),
    ("operator n=1\nT1 := foo(x1)\n", "unexpected"),
    ("operator n=1\nT1 = x1\n", "Ti :="),
])
def test_syntax_errors(text, msg):
    with pytest.raises(ParseError) as exc:
        parse_operator(text)
    assert msg in str(exc.value)


def test_column_points_at_problem():
    with pytest.raises(ParseError) as exc:
        parse_operator("T1 := max(x1, y)")
    assert exc.value.col == 15


def test_header_optional_and_comments():
    op = parse_operator("# c\nT1 := x2  # swap\nT2 := x1\n")
    assert op.n == 2 and op.coords == (Var(1), Var(0))


@pytest.mark.parametrize("seed", range(20))
def test_print_parse_roundtrip(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    op = random_mbar(n, rng) if seed % 2 else random_minmax_affine(n, rng)
    again = parse_operator(format_operator(op))
    assert again == op


def test_roundtrip_data_files(running, blackmailer, e_expr):
    for op in (running, blackmailer, e_expr):
        assert parse_operator(format_operator(op)) == op


def test_tensor_parse(tensor53):
    assert tensor53.d == 3 and tensor53.n == 4
    assert len(tensor53.entries) == 10
    assert (3, 0, 3) in tensor53.entries


@pytest.mark.parametrize("text", [
    "tensor 3 2\n1 1 1 1\n",             # row 2 empty
    "tensor 3 2\n1 1 1 0\n2 2 2 1\n",    # zero entry
    "tensor 3 2\n1 1 3 1\n2 2 2 1\n",    # index out of range
    "tensor 3 2\n1 1 1 1\n1 1 1 2\n2 2 2 1\n",  # duplicate
    "tensor 1 2\n",
    "matrix 2 2\n",
])
def test_tensor_errors(text):
    with pytest.raises(ParseError):
        parse_tensor(text)


def test_tensor_text_roundtrip(tensor53):
    again = parse_tensor(tensor53.to_text())
    assert again.entries == tensor53.entries
