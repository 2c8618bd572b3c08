"""Iso-contours and iso-surfaces of sampled fields (scikit-image marching
squares and marching cubes), mapped back to space."""

from __future__ import annotations

import numpy as np
from skimage import measure

from ..core import CostError
from .boxspline import FieldSamples


def level_set(samples: FieldSamples, iso: float = 0.0):
    """Polylines (2D) or a triangle mesh ``(verts, faces)`` (3D) at ``iso``.

    Vertices are linearly interpolated along grid edges; an empty result is
    returned when the field does not cross ``iso``.
    """
    v = samples.values
    lo, hi = float(v.min()), float(v.max())
    if v.ndim == 2:
        if not lo < iso < hi:
            return []
        return [samples.to_space(c) for c in measure.find_contours(v, iso)]
    if v.ndim == 3:
        if not lo < iso < hi:
            return np.zeros((0, 3)), np.zeros((0, 3), dtype=int)
        verts, faces, _, _ = measure.marching_cubes(v, iso, allow_degenerate=False)
        pts = samples.to_space(verts)
        # marching cubes orients faces for a right-handed index grid; keep the
        # outward sense when the lattice basis flips handedness
        if np.linalg.det(samples.step) < 0:
            faces = faces[:, ::-1]
        return pts, faces.astype(int)
    raise CostError("samples must be 2D or 3D")


def polylines_text(lines: list[np.ndarray]) -> str:
    """Plain text: one ``polyline N`` header per line followed by N points."""
    out = []
    for pl in lines:
        out.append(f"polyline {len(pl)}")
        out.extend(" ".join(repr(float(c)) for c in p) for p in pl)
    return "\n".join(out) + ("\n" if out else "")


def sign_change_cells(samples: FieldSamples, iso: float = 0.0) -> np.ndarray:
    """Boolean grid of cells whose corner values straddle ``iso``."""
    v = samples.values - iso
    d = v.ndim
    corners = [v[tuple(slice(o, v.shape[a] - 1 + o) for a, o in enumerate(off))]
               for off in np.ndindex(*(2,) * d)]
    c = np.stack(corners)
    return (c.min(axis=0) <= 0) & (c.max(axis=0) >= 0)
