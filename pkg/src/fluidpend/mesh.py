"""Triangulations of the circular cavity with full edge topology.

The mesh lives in the body frame: the pivot is at the origin and the cavity
is a disk centered on the positive x1-axis.  Faces (edges) carry the
adjacency, midpoint, length and unit-normal data needed by the upwind flux
and by the Crouzeix-Raviart degrees of freedom.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, MeshFormatError, NonManifoldError, OrientationError


@dataclass(frozen=True)
class Mesh:
    """Conforming triangulation of a simply connected planar domain.

    Faces are oriented: the unit normal points from the first adjacent
    triangle (the one with the lower index) to the second, and outward on
    the boundary.  ``tri_faces[t, i]`` is the face opposite local vertex
    ``i`` of triangle ``t``; ``tri_face_sign[t, i]`` is +1 when the stored
    normal is outward for that triangle.
    """

    vertices: np.ndarray        # (nv, 2) float
    triangles: np.ndarray       # (nt, 3) int, CCW
    face_vertices: np.ndarray   # (nf, 2) int
    face_tris: np.ndarray       # (nf, 2) int, second entry -1 on the boundary
    face_midpoints: np.ndarray  # (nf, 2) float
    face_lengths: np.ndarray    # (nf,) float
    face_normals: np.ndarray    # (nf, 2) float, unit
    is_boundary_face: np.ndarray  # (nf,) bool
    tri_faces: np.ndarray       # (nt, 3) int
    tri_face_sign: np.ndarray   # (nt, 3) float, +1 / -1
    element_areas: np.ndarray   # (nt,) float
    h_max: float

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_faces(self) -> int:
        return len(self.face_vertices)

    @property
    def interior_faces(self) -> np.ndarray:
        return np.flatnonzero(~self.is_boundary_face)

    @property
    def boundary_faces(self) -> np.ndarray:
        return np.flatnonzero(self.is_boundary_face)

    @property
    def total_area(self) -> float:
        return float(self.element_areas.sum())

    def centroids(self) -> np.ndarray:
        """Element centroids, shape (nt, 2)."""
        return self.vertices[self.triangles].mean(axis=1)


def build_topology(vertices: np.ndarray, triangles: np.ndarray) -> Mesh:
    """Construct the face topology for given vertex/triangle data.

    Deterministic: faces are numbered in order of first encounter while
    scanning triangles (and their local edges) in storage order.

    Raises
    ------
    OrientationError
        If a triangle has non-positive signed area (clockwise listing).
    NonManifoldError
        If an edge is shared by more than two triangles.
    """
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=int)
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    e1, e2 = p1 - p0, p2 - p0
    signed = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    bad = np.flatnonzero(signed <= 0.0)
    if bad.size:
        raise OrientationError(
            f"triangle {bad[0]} is not counter-clockwise (signed area {signed[bad[0]]:g})"
        )
    areas = signed

    face_index: dict[tuple[int, int], int] = {}
    face_vertices: list[tuple[int, int]] = []
    face_tris: list[list[int]] = []
    nt = len(triangles)
    tri_faces = np.empty((nt, 3), dtype=int)
    tri_face_sign = np.empty((nt, 3), dtype=float)
    for t in range(nt):
        tri = triangles[t]
        for i in range(3):
            # local face i is the edge opposite vertex i
            a, b = int(tri[(i + 1) % 3]), int(tri[(i + 2) % 3])
            key = (a, b) if a < b else (b, a)
            f = face_index.get(key)
            if f is None:
                f = len(face_vertices)
                face_index[key] = f
                face_vertices.append((a, b))  # CCW order of the first triangle
                face_tris.append([t, -1])
                tri_face_sign[t, i] = 1.0
            else:
                if face_tris[f][1] != -1:
                    raise NonManifoldError(
                        f"edge {key} is shared by more than two triangles"
                    )
                face_tris[f][1] = t
                tri_face_sign[t, i] = -1.0
            tri_faces[t, i] = f

    fv = np.array(face_vertices, dtype=int)
    ft = np.array(face_tris, dtype=int)
    va, vb = vertices[fv[:, 0]], vertices[fv[:, 1]]
    edge = vb - va
    lengths = np.hypot(edge[:, 0], edge[:, 1])
    # edge stored in CCW order of the first triangle: rotating it by -90
    # degrees gives that triangle's outward normal
    normals = np.column_stack([edge[:, 1], -edge[:, 0]]) / lengths[:, None]
    midpoints = 0.5 * (va + vb)
    is_boundary = ft[:, 1] == -1

    h_max = float(lengths[tri_faces].max()) if nt else 0.0

    return Mesh(
        vertices=vertices,
        triangles=triangles,
        face_vertices=fv,
        face_tris=ft,
        face_midpoints=midpoints,
        face_lengths=lengths,
        face_normals=normals,
        is_boundary_face=is_boundary,
        tri_faces=tri_faces,
        tri_face_sign=tri_face_sign,
        element_areas=areas,
        h_max=h_max,
    )


def generate_disk_mesh(center, radius: float, target_h: float) -> Mesh:
    """Concentric-ring triangulation of a disk.

    Ring ``i`` of ``n`` carries ``6 i`` vertices at radius ``radius * i / n``;
    boundary vertices lie exactly on the circle.  The construction is fully
    deterministic and quasi-uniform with ``h_max <= 2 * target_h``.
    """
    center = np.asarray(center, dtype=float)
    if radius <= 0.0:
        raise InvalidParameterError(f"radius must be positive, got {radius}")
    if target_h <= 0.0:
        raise InvalidParameterError(f"target_h must be positive, got {target_h}")
    if target_h >= radius:
        raise InvalidParameterError(
            f"target_h {target_h} must be smaller than radius {radius}; "
            "a coarser mesh would not resolve the cavity"
        )

    n = int(np.ceil(radius / target_h))
    verts = [center.copy()]
    ring_start = [0, 1]  # first vertex index of each ring
    for i in range(1, n + 1):
        r = radius * i / n
        ang = 2.0 * np.pi * np.arange(6 * i) / (6 * i)
        ring = center + r * np.column_stack([np.cos(ang), np.sin(ang)])
        verts.extend(ring)
        ring_start.append(ring_start[-1] + 6 * i)

    tris: list[tuple[int, int, int]] = []
    # innermost fan
    first = ring_start[1]
    for j in range(6):
        tris.append((0, first + j, first + (j + 1) % 6))
    # strips between ring i-1 and ring i
    for i in range(2, n + 1):
        inner0, outer0 = ring_start[i - 1], ring_start[i]
        n_in, n_out = 6 * (i - 1), 6 * i
        for s in range(6):
            for t in range(i):
                o0 = outer0 + (s * i + t) % n_out
                o1 = outer0 + (s * i + t + 1) % n_out
                k0 = inner0 + (s * (i - 1) + t) % n_in
                tris.append((k0, o0, o1))
                if t < i - 1:
                    k1 = inner0 + (s * (i - 1) + t + 1) % n_in
                    tris.append((k0, o1, k1))

    return build_topology(np.array(verts), np.array(tris, dtype=int))


def generate_rect_mesh(bounds, nx: int, ny: int) -> Mesh:
    """Structured triangulation of an axis-aligned rectangle.

    Splits an nx-by-ny grid of cells along the same diagonal; used to
    cross-check quadrature integrals against closed forms on box domains.
    """
    (x0, x1), (y0, y1) = bounds
    if not (x0 < x1 and y0 < y1):
        raise InvalidParameterError(f"rectangle bounds must be ordered, got {bounds}")
    if nx < 1 or ny < 1:
        raise InvalidParameterError(f"need at least one cell per direction, got {nx}x{ny}")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i * (ny + 1) + j

    tris = []
    for i in range(nx):
        for j in range(ny):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    return build_topology(verts, np.array(tris, dtype=int))


def save_mesh(mesh: Mesh, path) -> None:
    """Write the plain-text mesh format (vertices to 17 significant digits)."""
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")


def load_mesh(path) -> Mesh:
    """Read the plain-text mesh format and rebuild the face topology."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise MeshFormatError(f"{path}: empty mesh file")
    try:
        nv, nt = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise MeshFormatError(f"{path}: bad header line {lines[0]!r}") from exc
    if len(lines) != 1 + nv + nt:
        raise MeshFormatError(
            f"{path}: expected {1 + nv + nt} data lines, found {len(lines)}"
        )
    try:
        vertices = np.array(
            [[float(tok) for tok in ln.split()] for ln in lines[1 : 1 + nv]]
        )
        triangles = np.array(
            [[int(tok) for tok in ln.split()] for ln in lines[1 + nv :]], dtype=int
        )
    except ValueError as exc:
        raise MeshFormatError(f"{path}: malformed vertex or triangle line") from exc
    if vertices.shape != (nv, 2) or triangles.shape != (nt, 3):
        raise MeshFormatError(f"{path}: wrong column count in vertex or triangle block")
    if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
        raise MeshFormatError(f"{path}: triangle vertex index out of range")
    return build_topology(vertices, triangles)
