import itertools

import pytest
from hypothesis import given, strategies as st

from isinglab.lattice import (
    Box,
    BoxDims,
    CellRef,
    FaceRef,
    adjacency_class,
    cell,
    cell_ok,
    cell_vertices,
    face_key,
    face_ok,
    face_vertices,
    faces_between,
    l0_face,
    project,
)


def test_cell_layer_roundtrip():
    v = cell(0, 0, 0)
    assert v == CellRef(1, 1, 1)
    assert v.layers == (0, 0, 0)
    assert cell_ok(v)


def test_adjacent_vertical_neighbors():
    # midpoints (1/2,1/2,1/2) and (1/2,1/2,3/2)
    assert adjacency_class(cell(0, 0, 0), cell(0, 0, 1)) == "adjacent"


def test_star_adjacent_diagonal():
    assert adjacency_class(cell(0, 0, 0), cell(1, 1, 0)) == "star_adjacent"


def test_faces_one_apart_disjoint():
    # horizontal faces at z=0 and z=1 over the same square: derived by
    # intersecting the two 4-vertex bounding sets, which are disjoint.
    f0 = FaceRef(3, 1, 1, 0)
    f1 = FaceRef(3, 1, 1, 2)
    assert not (face_vertices(f0) & face_vertices(f1))
    assert adjacency_class(f0, f1) == "disjoint"


def test_adjacency_errors():
    with pytest.raises(ValueError):
        adjacency_class(cell(0, 0, 0), cell(0, 0, 0))
    with pytest.raises(ValueError):
        adjacency_class(cell(0, 0, 0), FaceRef(3, 1, 1, 0))


def test_project():
    assert project(FaceRef(3, 1, 1, 6)) == ("face", 1, 1)
    assert project(FaceRef(1, 2, 1, 5)) == ("edge", 2, 1)
    assert project(cell(0, 0, 3)) == ("face", 1, 1)


def test_faces_between():
    f = faces_between(cell(0, 0, 0), cell(0, 0, 1))
    assert f == FaceRef(3, 1, 1, 2)
    f = faces_between(cell(0, 0, 0), cell(1, 0, 0))
    assert f == FaceRef(1, 2, 1, 1)
    with pytest.raises(ValueError):
        faces_between(cell(0, 0, 0), cell(0, 0, 2))


def _brute_class(va, vb):
    sa, sb = cell_vertices(va), cell_vertices(vb)
    shared = sa & sb
    if len(shared) == 4:
        return "adjacent"
    return "star_adjacent" if shared else "disjoint"


def test_exhaustive_3x3x3_cells():
    cells = [cell(a, b, c) for a, b, c in itertools.product(range(3), repeat=3)]
    for va, vb in itertools.combinations(cells, 2):
        assert adjacency_class(va, vb) == _brute_class(va, vb)
        assert adjacency_class(vb, va) == adjacency_class(va, vb)


def _all_faces_3x3x3():
    faces = set()
    cells = [cell(a, b, c) for a, b, c in itertools.product(range(3), repeat=3)]
    for va, vb in itertools.combinations(cells, 2):
        if adjacency_class(va, vb) == "adjacent":
            faces.add(faces_between(va, vb))
    return sorted(faces, key=face_key)


def test_exhaustive_face_adjacency_vs_vertex_sets():
    faces = _all_faces_3x3x3()
    for fa, fb in itertools.combinations(faces, 2):
        shared = face_vertices(fa) & face_vertices(fb)
        want = "adjacent" if len(shared) >= 2 else (
            "star_adjacent" if shared else "disjoint")
        got = adjacency_class(fa, fb)
        assert got == want
        if got == "adjacent":
            assert adjacency_class(fa, fb) != "disjoint"


@given(
    st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5),
    st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5),
)
def test_adjacency_symmetric(a1, b1, c1, a2, b2, c2):
    va, vb = cell(a1, b1, c1), cell(a2, b2, c2)
    if va == vb:
        return
    assert adjacency_class(va, vb) == adjacency_class(vb, va)
    if adjacency_class(va, vb) == "adjacent":
        assert _brute_class(va, vb) == "adjacent"


def test_face_projection_kind():
    for axis in (1, 2, 3):
        mid = [1, 1, 1]
        mid[axis - 1] = 0
        f = FaceRef(axis, *mid)
        assert face_ok(f)
        assert (project(f).kind == "face") == (axis == 3)


def test_box_shape_and_order():
    box = BoxDims(2, 2, 3)
    assert box.nx == 5 and box.ny == 5 and box.nz == 6
    assert box.ncells == 150
    idx = [box.flat_index(a, b, c) for a, b, c in box.iter_cells()]
    assert idx == list(range(box.ncells))
    assert box.contains(2, -2, -3) and not box.contains(3, 0, 0)
    assert box.contains(0, 0, 2) and not box.contains(0, 0, 3)


def test_box_boundary_spin():
    assert Box.boundary_spin(0) == -1
    assert Box.boundary_spin(5) == -1
    assert Box.boundary_spin(-1) == 1


def test_face_in_box():
    box = Box.general(2, 2, 5)
    assert box.face_in_box(l0_face(0, 0))
    # outside face: square beyond the footprint
    assert not box.face_in_box(l0_face(5, 0))
    # top cap face of the box is still "in" (bounding vertices on closure)
    top = FaceRef(3, 1, 1, 2 * box.c_hi)
    assert box.face_in_box(top)
    above = FaceRef(3, 1, 1, 2 * box.c_hi + 2)
    assert not box.face_in_box(above)
