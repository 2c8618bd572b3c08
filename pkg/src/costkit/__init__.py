"""Design and analysis of corner-sharing triangle and tetrahedron microstructures."""

from .core import (CostError, CostGraph, Embedding, RegularGraph, Triangulation, balance_check,
                   cost_to_regular, cost_to_triangulation, regular_to_cost, triangulation_to_cost,
                   two_color, unit_distance_check, validate_cost)
from .generators import FoliationSpec, apply_map, foliate, kagome_2d, kagome_3d

__version__ = "0.1.0"
