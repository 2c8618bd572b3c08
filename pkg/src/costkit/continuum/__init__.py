from .beams import PatchSet, beam_surface, beam_volume, mesh_volume, seam_tangent_gap, square_tube
from .boxspline import (BoxSplineField, FieldSamples, boxspline_field, kagome_field, kagome_field_2d,
                        lattice_basis)
from .levelset import level_set, polylines_text
from .slicing import polyline_length, slice_plane
