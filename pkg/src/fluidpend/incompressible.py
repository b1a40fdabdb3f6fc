"""Incompressible comparison solver at constant density.

Same gravity update and rigid coupling as the compressible solver, with the
Navier-Stokes core replaced by a CR/P0 saddle-point system: elementwise
divergence constraints, a zero-mean pressure enforced through a Lagrange
multiplier row/column, and the angular-momentum row with rho = rho_C.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidParameterError
from .fem import CRField, P0Field, SparseSystem, assemble_viscous, cr_basis_gradients, solve_sparse
from .mesh import Mesh
from .rigid import BodyGeometry, BodyState, gravity_step, theta_from_g
from .compressible import relative_velocity_dof, rotational_dof


@dataclass
class IncompressibleState:
    u: CRField
    p: P0Field
    rho_C: float


class IncompressibleSolver:
    """Precomputed saddle-point machinery for the incompressible step.

    Unknown ordering: interior velocity dofs, element pressures, the
    pressure-mean multiplier, then omega.
    """

    def __init__(self, mesh: Mesh, geometry: BodyGeometry, rho_C: float,
                 mu: float, lam: float, dt: float):
        if dt <= 0.0:
            raise InvalidParameterError(f"dt must be positive, got {dt}")
        if rho_C <= 0.0:
            raise InvalidParameterError(f"fluid density must be positive, got {rho_C}")
        self.mesh = mesh
        self.geometry = geometry
        self.rho_C = rho_C
        self.dt = dt
        self.inertia = geometry.inertia

        nt, nf = mesh.n_triangles, mesh.n_faces
        self.grads = cr_basis_gradients(mesh)
        self.w = mesh.element_areas / 3.0
        self.rot_dof = rotational_dof(mesh)
        self.centroids = mesh.centroids()

        interior = mesh.interior_faces
        boundary = mesh.boundary_faces
        self.interior, self.boundary = interior, boundary
        self.n_u = 2 * len(interior)
        self.i_p = self.n_u                      # pressure block offset
        self.i_mean = self.n_u + nt              # multiplier index
        self.i_omega = self.n_u + nt + 1
        self.n = self.i_omega + 1

        dof_map = np.full(2 * nf, -1, dtype=int)
        dof_map[2 * interior] = 2 * np.arange(len(interior))
        dof_map[2 * interior + 1] = 2 * np.arange(len(interior)) + 1
        self.row_map = dof_map
        self.col_map = np.where(dof_map >= 0, dof_map, self.i_omega)
        scale = np.ones(2 * nf)
        scale[2 * boundary] = self.rot_dof[boundary, 0]
        scale[2 * boundary + 1] = self.rot_dof[boundary, 1]
        self.col_scale = scale

        # face incidence for the lumped mass pattern (constant density)
        s = np.zeros(nf)
        np.add.at(s, mesh.tri_faces.ravel(), np.repeat(self.w, 3))
        self.face_lump = s

        # static parts: viscous matrix and divergence coupling, reduced
        entries_r: list[np.ndarray] = []
        entries_c: list[np.ndarray] = []
        entries_d: list[np.ndarray] = []

        visc = assemble_viscous(mesh, mu, lam).tocoo()
        keep = self.row_map[visc.row] >= 0
        entries_r.append(self.row_map[visc.row[keep]])
        entries_c.append(self.col_map[visc.col[keep]])
        entries_d.append(visc.data[keep] * self.col_scale[visc.col[keep]])

        # D[K, (j,c)] = int_K div(e_c phi_j) = |K| g_j[c]
        faces = mesh.tri_faces
        div_rows = np.repeat(np.arange(nt), 6)
        div_cols = np.stack(
            [2 * faces[:, 0], 2 * faces[:, 0] + 1,
             2 * faces[:, 1], 2 * faces[:, 1] + 1,
             2 * faces[:, 2], 2 * faces[:, 2] + 1], axis=1
        ).ravel()
        div_data = (
            mesh.element_areas[:, None]
            * np.stack(
                [self.grads[:, 0, 0], self.grads[:, 0, 1],
                 self.grads[:, 1, 0], self.grads[:, 1, 1],
                 self.grads[:, 2, 0], self.grads[:, 2, 1]], axis=1
            )
        ).ravel()
        self._div = (div_rows, div_cols, div_data)

        # momentum rows: -p_K * D entries (transpose placement)
        r_keep = self.row_map[div_cols] >= 0
        entries_r.append(self.row_map[div_cols[r_keep]])
        entries_c.append(self.i_p + div_rows[r_keep])
        entries_d.append(-div_data[r_keep])

        # constraint rows: -D u = 0 (boundary part folds into the omega column)
        entries_r.append(self.i_p + div_rows)
        entries_c.append(self.col_map[div_cols])
        entries_d.append(-div_data * self.col_scale[div_cols])

        # zero-mean pressure: multiplier column in constraint rows + mean row
        entries_r.append(self.i_p + np.arange(nt))
        entries_c.append(np.full(nt, self.i_mean))
        entries_d.append(mesh.element_areas.copy())
        entries_r.append(np.full(nt, self.i_mean))
        entries_c.append(self.i_p + np.arange(nt))
        entries_d.append(mesh.element_areas.copy())

        # angular row: I/dt omega + (rho_C/dt) sum w (m x u)
        mid = mesh.face_midpoints
        ang = np.empty(2 * nf)
        ang[0::2] = -rho_C * self.face_lump * mid[:, 1] / dt
        ang[1::2] = rho_C * self.face_lump * mid[:, 0] / dt
        entries_r.append(np.full(2 * nf, self.i_omega))
        entries_c.append(self.col_map)
        entries_d.append(ang * self.col_scale)
        entries_r.append(np.array([self.i_omega]))
        entries_c.append(np.array([self.i_omega]))
        entries_d.append(np.array([self.inertia / dt]))

        # time-derivative diagonal (constant in time)
        all_f = np.arange(nf)
        diag = np.concatenate([2 * all_f, 2 * all_f + 1])
        diag_data = rho_C / dt * np.concatenate([self.face_lump, self.face_lump])
        keep = self.row_map[diag] >= 0
        entries_r.append(self.row_map[diag[keep]])
        entries_c.append(self.col_map[diag[keep]])
        entries_d.append(diag_data[keep] * self.col_scale[diag[keep]])

        self.static_rows = np.concatenate(entries_r)
        self.static_cols = np.concatenate(entries_c)
        self.static_data = np.concatenate(entries_d)

        fi = np.repeat(faces[:, :, None], 3, axis=2)
        fj = np.repeat(faces[:, None, :], 3, axis=1)
        self.conv_rows = np.concatenate([(2 * fi).ravel(), (2 * fi + 1).ravel()])
        self.conv_cols = np.concatenate([(2 * fj).ravel(), (2 * fj + 1).ravel()])
        self.ang_mid = mid

        self.body_and_fluid_moment = geometry.first_moment + rho_C * (
            mesh.element_areas @ self.centroids
        )

    # ------------------------------------------------------------------
    def saddle_step(
        self, u_prev: np.ndarray, omega_prev: float, g_half: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, float]:
        """Solve one saddle system; returns (u_next, p_next, omega_next)."""
        mesh, dt, rho_C = self.mesh, self.dt, self.rho_C
        nf = mesh.n_faces
        faces = mesh.tri_faces

        v_dof = relative_velocity_dof(mesh, u_prev, omega_prev)
        vloc = v_dof[faces]
        vg = np.einsum("tic,tjc->tij", vloc, self.grads)
        conv = 0.5 * rho_C * self.w[:, None, None] * (vg - vg.transpose(0, 2, 1))
        conv_data = np.concatenate([conv.ravel(), conv.ravel()])

        all_f = np.arange(nf)
        rot_rows = np.concatenate([2 * all_f, 2 * all_f + 1])
        rot_cols = np.concatenate([2 * all_f + 1, 2 * all_f])
        rot_data = rho_C * omega_prev * np.concatenate([-self.face_lump, self.face_lump])

        rows = np.concatenate([self.conv_rows, rot_rows])
        cols = np.concatenate([self.conv_cols, rot_cols])
        data = np.concatenate([conv_data, rot_data])
        keep = self.row_map[rows] >= 0
        dyn_rows = self.row_map[rows[keep]]
        dyn_cols = self.col_map[cols[keep]]
        dyn_data = data[keep] * self.col_scale[cols[keep]]

        mat = sp.coo_matrix(
            (
                np.concatenate([self.static_data, dyn_data]),
                (
                    np.concatenate([self.static_rows, dyn_rows]),
                    np.concatenate([self.static_cols, dyn_cols]),
                ),
            ),
            shape=(self.n, self.n),
        )

        rhs_full = np.zeros(2 * nf)
        rhs_full[0::2] = rho_C / dt * self.face_lump * u_prev[:, 0]
        rhs_full[1::2] = rho_C / dt * self.face_lump * u_prev[:, 1]
        rhs_full[0::2] += rho_C * self.face_lump * g_half[0]
        rhs_full[1::2] += rho_C * self.face_lump * g_half[1]

        rhs = np.zeros(self.n)
        rhs[self.row_map[self.row_map >= 0]] = rhs_full[self.row_map >= 0]
        mid = self.ang_mid
        cross_prev = rho_C * self.face_lump * (
            mid[:, 0] * u_prev[:, 1] - mid[:, 1] * u_prev[:, 0]
        )
        rhs[self.i_omega] = (
            self.inertia * omega_prev / dt
            + cross_prev.sum() / dt
            + self.body_and_fluid_moment[0] * g_half[1]
            - self.body_and_fluid_moment[1] * g_half[0]
        )

        x = solve_sparse(SparseSystem(mat, rhs))
        omega_next = float(x[self.i_omega])
        u_next = np.empty((nf, 2))
        u_next[self.interior, 0] = x[self.row_map[2 * self.interior]]
        u_next[self.interior, 1] = x[self.row_map[2 * self.interior + 1]]
        u_next[self.boundary] = omega_next * self.rot_dof[self.boundary]
        p_next = x[self.i_p : self.i_p + mesh.n_triangles]
        return u_next, p_next, omega_next

    # ------------------------------------------------------------------
    def step(
        self, state: IncompressibleState, body: BodyState
    ) -> tuple[IncompressibleState, BodyState]:
        g_next = gravity_step(body.g, body.omega, self.dt)
        g_half = 0.5 * (body.g + g_next)
        u_next, p_next, omega_next = self.saddle_step(state.u.dof, body.omega, g_half)
        theta_next = theta_from_g(g_next, body.theta)
        return (
            IncompressibleState(u=CRField(u_next), p=P0Field(p_next), rho_C=state.rho_C),
            BodyState(omega=omega_next, g=g_next, theta=theta_next),
        )


def incompressible_step(
    state: IncompressibleState,
    body: BodyState,
    geometry: BodyGeometry,
    mu: float,
    lam: float,
    mesh: Mesh,
    dt: float,
) -> tuple[IncompressibleState, BodyState]:
    """One full incompressible step (gravity update included)."""
    solver = IncompressibleSolver(mesh, geometry, state.rho_C, mu, lam, dt)
    return solver.step(state, body)


def elementwise_divergence(u: CRField, mesh: Mesh) -> np.ndarray:
    grads = cr_basis_gradients(mesh)
    uloc = u.dof[mesh.tri_faces]
    return np.einsum("tic,tic->t", grads, uloc)
