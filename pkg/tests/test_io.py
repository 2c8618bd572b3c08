import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costkit import kagome_2d, kagome_3d
from costkit.editing.flips import random_flips
from costkit.editing.stiffen import stiffen
from costkit.io import (CostDocument, DocumentIntegrityError, DocumentSyntaxError, DocumentVersionError, load,
                        matrix_csv, matrix_triplets, mesh_obj, parse_obj, polylines_obj, read, save,
                        wireframe_obj, write)


def docs():
    g, e = kagome_2d(2, 2)
    yield CostDocument.of(g, e)
    yield CostDocument.of(*kagome_2d(2, 2, topology="toroidal"))
    for v in ("edges", "pins", "sliders"):
        yield CostDocument.of(stiffen(g, e, v), e)
    yield CostDocument.of(*kagome_3d(2, 2, 3))
    yield CostDocument.of(*kagome_3d(2, 2, 2, keep_skin=True))
    yield CostDocument.of(kagome_2d(1, 1)[0])


@pytest.mark.parametrize("doc", list(docs()))
def test_round_trip_byte_identical(doc):
    text = save(doc)
    back = load(text)
    assert save(back) == text
    assert back.graph.edges == doc.graph.edges
    assert back.graph.witness == doc.graph.witness
    assert back.graph.boundary == doc.graph.boundary
    assert back.graph.tags == doc.graph.tags
    assert back.graph.layers == doc.graph.layers
    if doc.embedding is not None:
        assert np.array_equal(back.embedding.positions, doc.embedding.positions)
    assert back.variant == doc.variant


def test_stiffened_view(patch):
    g, e = patch
    s = stiffen(g, e, "pins")
    back = load(save(CostDocument.of(s, e))).stiffened
    assert back.variant == "pins"
    assert sorted(back.pins) == sorted(s.pins)
    for v in s.pins:
        assert np.array_equal(back.pins[v], s.pins[v])


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_after_flips(seed):
    g, e = kagome_2d(3, 3)
    h, f, _ = random_flips(g, e, "poisson", 5, seed=seed)
    text = save(CostDocument.of(h, f))
    assert save(load(text)) == text
    assert np.array_equal(load(text).embedding.positions, f.positions)


def test_bytes_input(bowtie):
    text = save(CostDocument.of(*bowtie))
    assert save(load(text.encode())) == text


def test_file_helpers(tmp_path, bowtie):
    p = tmp_path / "b.cost"
    write(str(p), CostDocument.of(*bowtie))
    assert read(str(p)).graph.counts() == (5, 6, 2)


def test_truncated(bowtie):
    text = save(CostDocument.of(*bowtie))
    with pytest.raises(DocumentSyntaxError):
        load(text.replace("end\n", ""))


def test_bad_version(bowtie):
    text = save(CostDocument.of(*bowtie))
    with pytest.raises(DocumentVersionError):
        load(text.replace("cost-document 1", "cost-document 9", 1))
    with pytest.raises(DocumentSyntaxError):
        load("hello\n")


def test_dangling_reference(bowtie):
    text = save(CostDocument.of(*bowtie))
    with pytest.raises(DocumentIntegrityError):
        load(text.replace("edge 3 4 witness", "edge 3 7 witness"))


def test_bad_token(bowtie):
    text = save(CostDocument.of(*bowtie))
    with pytest.raises(DocumentSyntaxError) as exc:
        load(text.replace("vertex 2 interior 0.75", "vertex 2 interior zz"))
    assert exc.value.line == 7


def test_obj_exports(bowtie):
    g, e = bowtie
    V, F, L = parse_obj(wireframe_obj(g, e))
    assert V.shape == (5, 3) and len(L) == 6 and not F
    assert np.allclose(V[:, :2], e.positions)
    V, F, L = parse_obj(mesh_obj(np.eye(3), np.array([[0, 1, 2]])))
    assert F == [[0, 1, 2]]
    V, F, L = parse_obj(polylines_obj([np.zeros((3, 3)), np.ones((2, 3))]))
    assert L == [[0, 1, 2], [3, 4]]


def test_matrix_dumps():
    M = np.array([[1.0, 0.0], [0.0, -2.5]])
    assert matrix_csv(M).splitlines() == ["1.0,0.0", "0.0,-2.5"]
    trip = matrix_triplets(M).splitlines()
    assert trip == ["# 2 2", "0 0 1.0", "1 1 -2.5"]
