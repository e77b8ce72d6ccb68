import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homogenize.exceptions import ConfigurationError
from homogenize.mesh import (StructuredMesh, boundary_mask, build_periodic_map,
                             build_unit_square_mesh, write_vtk)


def shoelace_total(coords, triangles):
    total = 0.0
    for a, b, c in triangles:
        (x1, y1), (x2, y2), (x3, y3) = coords[a], coords[b], coords[c]
        total += 0.5 * ((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1))
    return total


@pytest.mark.parametrize("n, nodes, tris", [(1, 4, 2), (4, 25, 32), (64, 4225, 8192)])
def test_counts(n, nodes, tris):
    mesh = build_unit_square_mesh(n)
    assert mesh.n_nodes == nodes
    assert mesh.n_triangles == tris
    assert mesh.h == 1.0 / n


def test_total_area_n64_matches_loop_oracle():
    mesh = build_unit_square_mesh(64)
    assert shoelace_total(mesh.node_coords, mesh.triangles) == pytest.approx(1.0, abs=1e-12)
    assert mesh.areas().sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [0, -3, 2.0, True])
def test_rejects_invalid_n(n):
    with pytest.raises(ConfigurationError):
        build_unit_square_mesh(n)


def test_row_major_and_diagonal_split():
    mesh = build_unit_square_mesh(2)
    np.testing.assert_allclose(mesh.node_coords[:3], [[0, 0], [0.5, 0], [1, 0]])
    np.testing.assert_allclose(mesh.node_coords[3], [0, 0.5])
    # square (0, 0) split along (0,0)-(0.5,0.5)
    assert set(mesh.triangles[0]) & set(mesh.triangles[1]) == {0, 4}


def test_mesh_is_read_only():
    mesh = build_unit_square_mesh(3)
    with pytest.raises(ValueError):
        mesh.node_coords[0, 0] = 1.0


@pytest.mark.parametrize("n", list(range(1, 65)))
def test_invariants_all_small_n(n):
    mesh = build_unit_square_mesh(n)
    np.testing.assert_allclose(mesh.signed_areas(), 0.5 * mesh.h ** 2, rtol=1e-12)
    assert mesh.triangles.min() == 0 and mesh.triangles.max() == mesh.n_nodes - 1
    pm = build_periodic_map(mesh)
    assert pm.free_count == n * n
    assert np.array_equal(pm.representative[pm.representative], pm.representative)
    assert np.array_equal(np.unique(pm.dof), np.arange(n * n))
    assert boundary_mask(mesh).count == 4 * n


@pytest.mark.parametrize("n, free", [(1, 1), (2, 4), (5, 25)])
def test_periodic_free_count(n, free):
    assert build_periodic_map(build_unit_square_mesh(n)).free_count == free


def test_periodic_corners_collapse():
    mesh = build_unit_square_mesh(4)
    pm = build_periodic_map(mesh)
    corners = [0, 4, 20, 24]
    assert len({pm.representative[c] for c in corners}) == 1


def test_periodic_map_coordinate_oracle():
    mesh = build_unit_square_mesh(8)
    pm = build_periodic_map(mesh)
    x = mesh.node_coords
    for k in range(mesh.n_nodes):
        if x[k, 0] == 1.0:
            partners = [j for j in range(mesh.n_nodes) if x[j, 0] == 0.0 and x[j, 1] == x[k, 1]]
            assert len(partners) == 1
            assert pm.dof[k] == pm.dof[partners[0]]
        if x[k, 1] == 1.0 and x[k, 0] < 1.0:
            j = [j for j in range(mesh.n_nodes) if x[j, 1] == 0.0 and x[j, 0] == x[k, 0]][0]
            assert pm.representative[k] == j


@pytest.mark.parametrize("n, flagged", [(1, 4), (2, 8), (16, 64)])
def test_boundary_mask(n, flagged):
    mesh = build_unit_square_mesh(n)
    mask = boundary_mask(mesh).is_boundary
    assert mask.sum() == flagged
    on_edge = np.any((mesh.node_coords == 0) | (mesh.node_coords == 1), axis=1)
    assert np.array_equal(mask, on_edge)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 20), c=st.tuples(*[st.floats(-5, 5)] * 3), seed=st.integers(0, 2 ** 16))
def test_interpolation_reproduces_affine(n, c, seed):
    mesh = build_unit_square_mesh(n)
    affine = lambda p: c[0] + c[1] * p[:, 0] + c[2] * p[:, 1]
    pts = np.random.default_rng(seed).uniform(0, 1, size=(20, 2))
    np.testing.assert_allclose(mesh.interpolate(affine(mesh.node_coords), pts), affine(pts),
                               atol=1e-13 * (1 + sum(map(abs, c))))


def test_locate_returns_containing_triangle():
    mesh = build_unit_square_mesh(5)
    pts = np.random.default_rng(0).uniform(0, 1, size=(200, 2))
    tri, bary = mesh.locate(pts)
    assert np.all(bary >= -1e-14)
    np.testing.assert_allclose(np.einsum("pk,pka->pa", bary, mesh.node_coords[mesh.triangles[tri]]),
                               pts, atol=1e-14)


def test_write_vtk(tmp_path):
    mesh = build_unit_square_mesh(2)
    path = tmp_path / "m.vtk"
    write_vtk(mesh, path, point_data={"u": np.arange(9.0)}, cell_data={"a": np.ones(8)})
    text = path.read_text()
    assert "POINTS 9 double" in text
    assert "CELLS 8 32" in text
    assert "CELL_TYPES 8" in text
    assert "POINT_DATA 9" in text and "CELL_DATA 8" in text
