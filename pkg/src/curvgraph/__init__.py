"""Colored trivalent graphs as stable curvature invariants."""

from .algebra import GraphPoly, expand_tetravalent, format_poly, parse_poly
from .curvature import (
    CurvModel, constant_model, direct_sum, make_einstein, model_from_json,
    random_model,
)
from .graphs import ColoredGraph, build_graph, canonical_form, enumerate_degree, parse_graph
from .ihx import build_quotient, normal_form, reduce_poly, stable_dims
from .invariants import (
    const_value, delta_m, einstein_identity, einstein_reduce, eval_graph,
    eval_poly, moment_poly, moment_value, pfaffian_poly, theta3_poly,
)

__version__ = "0.1.0"
