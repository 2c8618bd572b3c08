import numpy as np
import pytest

from costkit import CostError, Embedding, kagome_2d
from costkit.core import CostGraph
from costkit.editing.realize import rerealize_local


def test_already_realized(patch):
    g, e = patch
    r = rerealize_local(g, e, [4, 5])
    assert r.iterations == 0 and r.converged and not r.diverged
    assert np.array_equal(r.embedding.positions, e.positions)


def test_recovers_displaced_vertex(patch):
    g, e = patch
    v = next(x for x in range(g.n) if x not in g.boundary)
    moved = e.copy()
    moved.positions[v] += [0.03, -0.02]
    targets = {x: 0.5 for x in g.edges}
    r = rerealize_local(g, moved, [v], targets)
    assert r.converged and r.residual < 1e-10
    assert np.allclose(r.embedding.positions[v], e.positions[v], atol=1e-9)


def test_only_region_moves(patch):
    g, e = patch
    v = next(x for x in range(g.n) if x not in g.boundary)
    targets = {x: 0.52 for x in g.edges if v in x}
    r = rerealize_local(g, e, [v], targets)
    others = [x for x in range(g.n) if x != v]
    assert np.array_equal(r.embedding.positions[others], e.positions[others])


def test_infeasible_reports_divergence():
    g = CostGraph.from_witness(2, 3, [(0, 1, 2)])
    e = Embedding(np.array([[0, 0], [1, 0], [0.5, 0.8]]))
    # 0-1 is fixed at length 1; 0-2 and 1-2 cannot both be 0.2
    r = rerealize_local(g, e, [2], {(0, 2): 0.2, (1, 2): 0.2})
    assert not r.converged
    assert r.diverged or r.iterations == 100
    assert r.residual == pytest.approx(0.3, abs=1e-3)


def test_bad_region(patch):
    g, e = patch
    with pytest.raises(CostError):
        rerealize_local(g, e, [])
    with pytest.raises(CostError):
        rerealize_local(g, e, [g.n + 3])
