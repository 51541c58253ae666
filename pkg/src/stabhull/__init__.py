"""Smallest convex polygons that meet every object of a planar set.

Solvers: a (1+ε) perimeter DP, a (1+ε) area search, an exact perimeter
algorithm for segments, rays, lines and points, a touring-path solver for
ordered half-planes, and independent brute-force oracles.
"""

from .geom_core import ConvexObject, ConvexPolygon, convex_hull, intersects
from .fptas_perimeter import Solution, solve_perimeter
from .fptas_area import area_lower_bound, constant_size_area, line_stab, solve_area
from .exact_segments import solve_exact
from .tpp_halfplanes import HalfPlane, order_halfplanes, order_witness, tour
from .oracle import oracle_area, oracle_perimeter, oracle_tour
from .io import Instance, ParseError, parse_instance

__version__ = "0.1.0"

__all__ = [
    "ConvexObject", "ConvexPolygon", "HalfPlane", "convex_hull", "intersects",
    "Solution", "solve_perimeter", "solve_area", "constant_size_area", "line_stab",
    "area_lower_bound", "solve_exact", "tour", "order_halfplanes", "order_witness",
    "oracle_perimeter", "oracle_area", "oracle_tour", "Instance", "ParseError", "parse_instance",
]
