"""Existence and uniqueness of eigenvectors of monotone additively homogeneous maps."""

from .dsl import ParseError, load_operator, load_tensor, parse_expr, parse_operator, parse_tensor
from .expr import (INF, Avg, ExprError, InfMix, Max, Mean, Min, Operator, Shift, SupMix, Var,
                   breakpoint_radius, eval_ext, evaluate, ext_tag, format_operator,
                   locally_constant, recession, relabel, shift_coords, signature, support)
from .tensor import Tensor, TensorPattern, tensor_to_operator

__version__ = "0.1.0"
