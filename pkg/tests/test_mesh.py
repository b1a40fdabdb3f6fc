"""Mesh generation, topology construction, and file round-trips."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidpend.errors import (
    InvalidParameterError,
    MeshFormatError,
    NonManifoldError,
    OrientationError,
)
from fluidpend.mesh import (
    build_topology,
    generate_disk_mesh,
    generate_rect_mesh,
    load_mesh,
    save_mesh,
)


@pytest.fixture(scope="module")
def disk():
    return generate_disk_mesh(center=(0.4, 0.0), radius=0.1, target_h=0.02)


def test_disk_area_close_to_circle(disk):
    exact = math.pi * 0.1**2
    assert abs(disk.total_area - exact) / exact < 0.02


def test_disk_area_matches_inscribed_polygon(disk):
    # the deficit is exactly the polygonal-boundary error: the mesh covers
    # the inscribed regular polygon with 6n boundary vertices
    n_bnd = len(disk.boundary_faces)
    poly_area = 0.5 * n_bnd * 0.1**2 * math.sin(2.0 * math.pi / n_bnd)
    assert abs(disk.total_area - poly_area) < 1e-13


def test_euler_formula(disk):
    assert disk.n_vertices - disk.n_faces + disk.n_triangles == 1


def test_boundary_vertices_on_circle(disk):
    bnd_verts = np.unique(disk.face_vertices[disk.boundary_faces])
    r = np.hypot(*(disk.vertices[bnd_verts] - np.array([0.4, 0.0])).T)
    assert np.abs(r - 0.1).max() < 1e-14


def test_h_max_bounded(disk):
    assert disk.h_max <= 2.0 * 0.02


def test_all_areas_positive(disk):
    assert disk.element_areas.min() > 0.0


def test_face_adjacency_counts(disk):
    assert np.all(disk.face_tris[:, 0] >= 0)
    interior = disk.face_tris[~disk.is_boundary_face]
    assert np.all(interior[:, 1] >= 0)
    boundary = disk.face_tris[disk.is_boundary_face]
    assert np.all(boundary[:, 1] == -1)


def test_face_normals_unit(disk):
    norms = np.hypot(disk.face_normals[:, 0], disk.face_normals[:, 1])
    assert np.abs(norms - 1.0).max() < 1e-14


def test_boundary_normals_outward(disk):
    bnd = disk.boundary_faces
    outward = disk.face_midpoints[bnd] - np.array([0.4, 0.0])
    dots = np.einsum("fc,fc->f", outward, disk.face_normals[bnd])
    assert np.all(dots > 0.0)


def test_closed_polygon_identity(disk):
    # per triangle, the sum of signed outward edge normals times lengths is 0
    n = disk.face_normals[disk.tri_faces] * disk.tri_face_sign[:, :, None]
    total = (n * disk.face_lengths[disk.tri_faces][:, :, None]).sum(axis=1)
    assert np.abs(total).max() < 1e-13


def test_normal_orientation_first_to_second(disk):
    # normal points from the first adjacent triangle toward the second
    interior = disk.interior_faces
    c1 = disk.vertices[disk.triangles[disk.face_tris[interior, 0]]].mean(axis=1)
    c2 = disk.vertices[disk.triangles[disk.face_tris[interior, 1]]].mean(axis=1)
    dots = np.einsum("fc,fc->f", c2 - c1, disk.face_normals[interior])
    assert np.all(dots > 0.0)


def test_topology_deterministic(disk):
    again = build_topology(disk.vertices, disk.triangles)
    assert np.array_equal(again.face_vertices, disk.face_vertices)
    assert np.array_equal(again.face_tris, disk.face_tris)
    assert np.array_equal(again.tri_faces, disk.tri_faces)


def test_reject_degenerate_target_h():
    with pytest.raises(InvalidParameterError):
        generate_disk_mesh(center=(0.0, 0.0), radius=0.1, target_h=0.5)


@pytest.mark.parametrize("radius,target_h", [(-1.0, 0.1), (0.1, -0.1), (0.1, 0.0)])
def test_reject_invalid_parameters(radius, target_h):
    with pytest.raises(InvalidParameterError):
        generate_disk_mesh(center=(0.0, 0.0), radius=radius, target_h=target_h)


@settings(max_examples=20, deadline=None)
@given(
    radius=st.floats(0.05, 2.0),
    ratio=st.floats(0.05, 0.6),
)
def test_disk_invariants_hold_for_random_parameters(radius, ratio):
    mesh = generate_disk_mesh(center=(0.0, 0.0), radius=radius, target_h=ratio * radius)
    assert mesh.element_areas.min() > 0.0
    assert mesh.n_vertices - mesh.n_faces + mesh.n_triangles == 1
    assert mesh.total_area < math.pi * radius**2


def test_save_load_round_trip(disk, tmp_path):
    path = tmp_path / "disk.mesh"
    save_mesh(disk, path)
    again = load_mesh(path)
    assert np.array_equal(again.triangles, disk.triangles)
    assert np.abs(again.vertices - disk.vertices).max() < 1e-15
    assert np.array_equal(again.face_vertices, disk.face_vertices)


def test_load_supports_comments(tmp_path):
    path = tmp_path / "tiny.mesh"
    path.write_text(
        "# a hand-written mesh\n3 1\n0 0\n1 0\n# interjection\n0 1\n0 1 2\n"
    )
    mesh = load_mesh(path)
    assert mesh.n_triangles == 1
    assert abs(mesh.total_area - 0.5) < 1e-15


def test_clockwise_triangle_names_index(tmp_path):
    path = tmp_path / "cw.mesh"
    path.write_text("4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n")
    good = load_mesh(path)
    assert good.n_triangles == 2
    bad = tmp_path / "bad.mesh"
    bad.write_text("4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 3 2\n")
    with pytest.raises(OrientationError, match="triangle 1"):
        load_mesh(bad)


def test_three_triangle_fan_is_non_manifold():
    # three triangles sharing the edge (0, 1)
    verts = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.5], [-1.0, 0.4], [-1.0, 0.6]])
    tris = np.array([[0, 2, 1], [0, 1, 3], [0, 1, 4]])
    areas = []
    for t in tris:
        p = verts[t]
        e1, e2 = p[1] - p[0], p[2] - p[0]
        areas.append(0.5 * (e1[0] * e2[1] - e1[1] * e2[0]))
    assert min(areas) > 0  # orientation is fine; failure must be manifoldness
    with pytest.raises(NonManifoldError):
        build_topology(verts, tris)


@pytest.mark.parametrize(
    "content",
    [
        "",
        "2 1\n0 0\n1 0\n0 1 2\n",          # triangle index out of range
        "3 1\n0 0\n1 0\n0 1\nnot numbers\n",
        "3 2\n0 0\n1 0\n0 1\n0 1 2\n",     # wrong line count
    ],
)
def test_malformed_files_rejected(tmp_path, content):
    path = tmp_path / "bad.mesh"
    path.write_text(content)
    with pytest.raises(MeshFormatError):
        load_mesh(path)


def test_rect_mesh_area_and_euler():
    mesh = generate_rect_mesh([(0.0, 2.0), (-1.0, 1.0)], 4, 5)
    assert abs(mesh.total_area - 4.0) < 1e-13
    assert mesh.n_vertices - mesh.n_faces + mesh.n_triangles == 1
