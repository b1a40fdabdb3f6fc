"""Discrete function spaces and element-level kernels.

Piecewise constants per element (densities, pressures) and Crouzeix-Raviart
fields with one degree of freedom per face midpoint (velocities, test
functions).  Quadrature is the edge-midpoint 3-point rule throughout: it is
exact for polynomials of degree <= 2 and collocated with the CR degrees of
freedom, so mass-type terms are diagonal in the local basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError
from .mesh import Mesh


@dataclass
class P0Field:
    """One scalar per triangle."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    @classmethod
    def constant(cls, mesh: Mesh, value: float) -> "P0Field":
        return cls(np.full(mesh.n_triangles, float(value)))


@dataclass
class CRField:
    """One face-mean value per face; scalar shape (nf,) or vector (nf, 2)."""

    dof: np.ndarray

    def __post_init__(self):
        self.dof = np.asarray(self.dof, dtype=float)

    @property
    def is_vector(self) -> bool:
        return self.dof.ndim == 2

    @classmethod
    def zero_vector(cls, mesh: Mesh) -> "CRField":
        return cls(np.zeros((mesh.n_faces, 2)))


@dataclass
class SparseSystem:
    """Square sparse matrix with its right-hand side."""

    matrix: sp.spmatrix
    rhs: np.ndarray


def cr_basis_gradients(mesh: Mesh) -> np.ndarray:
    """Gradients of the three local CR basis functions per element.

    Returns shape (nt, 3, 2); row i is the (constant) gradient of the basis
    function associated with the face opposite local vertex i.
    """
    v = mesh.vertices[mesh.triangles]  # (nt, 3, 2)
    areas = mesh.element_areas
    grads = np.empty((mesh.n_triangles, 3, 2))
    for i in range(3):
        e = v[:, (i + 2) % 3] - v[:, (i + 1) % 3]
        # grad(lambda_i) = rot90(e) / (2A); CR basis is 1 - 2 lambda_i
        grads[:, i, 0] = -2.0 * (-e[:, 1]) / (2.0 * areas)
        grads[:, i, 1] = -2.0 * (e[:, 0]) / (2.0 * areas)
    return grads


def cr_interpolate(f, mesh: Mesh) -> CRField:
    """Interpolate a pointwise function by its face-midpoint values.

    The midpoint value equals the face mean for affine f, so the interpolant
    reproduces affine fields exactly.
    """
    m = mesh.face_midpoints
    sample = np.asarray(f(m[0]), dtype=float)
    if sample.ndim == 0:
        dof = np.array([float(f(x)) for x in m])
    else:
        dof = np.array([np.asarray(f(x), dtype=float) for x in m])
    return CRField(dof)


def elem_gradient(u: CRField, mesh: Mesh) -> np.ndarray:
    """Per-element gradient of the affine representative.

    Vector fields give shape (nt, 2, 2) with ``grad[t, a, b] = d_a u_b``;
    scalar fields give shape (nt, 2).
    """
    grads = cr_basis_gradients(mesh)
    dof_loc = u.dof[mesh.tri_faces]  # (nt, 3) or (nt, 3, 2)
    if u.is_vector:
        return np.einsum("tia,tib->tab", grads, dof_loc)
    return np.einsum("tia,ti->ta", grads, dof_loc)


def assemble_viscous(mesh: Mesh, mu: float, lam: float) -> sp.csr_matrix:
    """Stiffness matrix of the viscous stress 2 mu D(u) + (lam - 2mu/3) I div u.

    Acts on vector CR fields with dof index ``2 * face + component``; for
    fields a, b it realizes a^T M b = sum_K |K| S(a) : grad(b).
    """
    grads = cr_basis_gradients(mesh)  # (nt, 3, 2)
    areas = mesh.element_areas
    nt = mesh.n_triangles
    bulk = lam - 2.0 * mu / 3.0

    # local matrix entries for dof pairs (i, b), (j, c):
    #   2 mu * sym-grad contraction + bulk * g_j[c] g_i[b]
    g = grads
    gg = np.einsum("tia,tja->tij", g, g)  # grad(phi_i) . grad(phi_j)
    local = np.empty((nt, 3, 2, 3, 2))
    for b in range(2):
        for c in range(2):
            # D(e_c phi_j) : D(e_b phi_i) = 0.5 * (delta_bc gg_ij + g_j[b] g_i[c])
            sym = 0.5 * ((b == c) * gg + np.einsum("tj,ti->tij", g[:, :, b], g[:, :, c]))
            local[:, :, b, :, c] = (
                2.0 * mu * sym + bulk * np.einsum("tj,ti->tij", g[:, :, c], g[:, :, b])
            ) * areas[:, None, None]

    faces = mesh.tri_faces  # (nt, 3)
    dof = (2 * faces[:, :, None] + np.arange(2)[None, None, :]).reshape(nt, 6)
    rows = np.repeat(dof, 6, axis=1).ravel()
    cols = np.tile(dof, (1, 6)).ravel()
    # local is indexed [t, i, b, j, c] -> flatten test (i,b) major, trial (j,c)
    data = local.transpose(0, 1, 2, 3, 4).reshape(nt, 6, 6).ravel()
    n = 2 * mesh.n_faces
    return sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def element_quadrature(mesh: Mesh, f) -> np.ndarray:
    """Per-element integrals of f by the edge-midpoint rule (degree-2 exact)."""
    mids = mesh.face_midpoints[mesh.tri_faces]  # (nt, 3, 2)
    vals = np.array([[float(f(p)) for p in tri] for tri in mids])
    return mesh.element_areas / 3.0 * vals.sum(axis=1)


def integrate_mass_dot(mesh: Mesh, rho: P0Field, a: CRField, b: CRField) -> float:
    """sum_K int_K rho a . b by the midpoint rule (collocated, diagonal)."""
    ad = a.dof[mesh.tri_faces]
    bd = b.dof[mesh.tri_faces]
    if a.is_vector:
        prod = np.einsum("tic,tic->t", ad, bd)
    else:
        prod = np.einsum("ti,ti->t", ad, bd)
    return float(np.sum(rho.values * mesh.element_areas / 3.0 * prod))


def integrate_p_div(mesh: Mesh, p: P0Field, b: CRField) -> float:
    """sum_K p_K int_K div b for a vector CR field."""
    grad = elem_gradient(b, mesh)  # (nt, 2, 2)
    div = grad[:, 0, 0] + grad[:, 1, 1]
    return float(np.sum(p.values * mesh.element_areas * div))


def face_fluxes(mesh: Mesh, w: CRField) -> np.ndarray:
    """int_sigma w . n per face (midpoint value times length), shape (nf,)."""
    return np.einsum("fc,fc->f", w.dof, mesh.face_normals) * mesh.face_lengths


def solve_sparse(system: SparseSystem) -> np.ndarray:
    """Direct sparse solve with a residual check.

    Raises SolverError when the factorization fails or the relative residual
    exceeds 1e-8.
    """
    mat = system.matrix.tocsc()
    try:
        x = spla.spsolve(mat, system.rhs)
    except Exception as exc:  # pragma: no cover - SuperLU failure path
        raise SolverError(f"sparse factorization failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("sparse solve returned non-finite values")
    scale = np.linalg.norm(system.rhs)
    if scale > 0:
        res = np.linalg.norm(mat @ x - system.rhs) / scale
        if res > 1e-8:
            raise SolverError(f"sparse solve residual too large: {res:g}")
    return x
