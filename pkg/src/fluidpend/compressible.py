"""One full time step of the compressible solver.

Sub-step order: gravity rotation, implicit-upwind continuity (linear in the
new density given the old relative velocity), then one coupled sparse solve
for the new velocity and angular velocity.  No nonlinear iteration is
needed.  The boundary faces are eliminated through the rigid coupling
u = omega e3 x x, so the coupled unknowns are the interior velocity degrees
of freedom plus omega.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidParameterError, SolverError
from .fem import CRField, P0Field, SparseSystem, assemble_viscous, cr_basis_gradients, solve_sparse
from .mesh import Mesh
from .rigid import BodyGeometry, BodyState, gravity_step, theta_from_g

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GasParams:
    """Barotropic constitutive constants: p = a rho^gamma, viscosities mu, lam."""

    a: float
    gamma: float
    mu: float
    lam: float = 0.0

    def __post_init__(self):
        if self.a <= 0.0:
            raise InvalidParameterError(f"gas parameter a must be positive, got {self.a}")
        if self.gamma <= 1.0:
            raise InvalidParameterError(f"adiabatic exponent must exceed 1, got {self.gamma}")
        if self.mu <= 0.0:
            raise InvalidParameterError(f"shear viscosity must be positive, got {self.mu}")
        if self.lam < 0.0:
            raise InvalidParameterError(f"bulk viscosity must be nonnegative, got {self.lam}")

    def pressure(self, rho):
        return self.a * np.asarray(rho) ** self.gamma

    def pressure_potential(self, rho):
        """P(rho) = a rho^gamma / (gamma - 1)."""
        return self.a / (self.gamma - 1.0) * np.asarray(rho) ** self.gamma

    def pressure_potential_prime(self, rho):
        return self.a * self.gamma / (self.gamma - 1.0) * np.asarray(rho) ** (self.gamma - 1.0)


@dataclass
class FluidState:
    rho: P0Field
    u: CRField


@dataclass
class CoupledStateSnapshot:
    mesh: Mesh
    fluid: FluidState
    body: BodyState
    t: float = 0.0
    k: int = 0


def rotational_dof(mesh: Mesh) -> np.ndarray:
    """Face-mean values of e3 x x, shape (nf, 2); exact for this affine field."""
    m = mesh.face_midpoints
    return np.column_stack([-m[:, 1], m[:, 0]])


def relative_velocity_dof(mesh: Mesh, u_dof: np.ndarray, omega: float) -> np.ndarray:
    """v = u - omega e3 x x at the face midpoints; zero on boundary faces."""
    return u_dof - omega * rotational_dof(mesh)


class CompressibleSolver:
    """Per-mesh precomputed kernels for the time-stepping loop."""

    def __init__(self, mesh: Mesh, geometry: BodyGeometry, gas: GasParams, dt: float):
        if dt <= 0.0:
            raise InvalidParameterError(f"dt must be positive, got {dt}")
        self.mesh = mesh
        self.geometry = geometry
        self.gas = gas
        self.dt = dt
        self.inertia = geometry.inertia

        nt, nf = mesh.n_triangles, mesh.n_faces
        self.grads = cr_basis_gradients(mesh)            # (nt, 3, 2)
        self.w = mesh.element_areas / 3.0                # midpoint-rule weight
        self.centroids = mesh.centroids()
        self.rot_dof = rotational_dof(mesh)

        # face <- element incidence weighted by |K|/3 (lumped CR mass pattern)
        rows = mesh.tri_faces.ravel()
        cols = np.repeat(np.arange(nt), 3)
        data = np.repeat(self.w, 3)
        self.face_mass = sp.coo_matrix((data, (rows, cols)), shape=(nf, nt)).tocsr()

        # reduced dof bookkeeping: interior velocity dofs then omega
        interior = mesh.interior_faces
        self.n_u = 2 * len(interior)
        dof_map = np.full(2 * nf, -1, dtype=int)
        dof_map[2 * interior] = 2 * np.arange(len(interior))
        dof_map[2 * interior + 1] = 2 * np.arange(len(interior)) + 1
        self.row_map = dof_map
        self.col_map = np.where(dof_map >= 0, dof_map, self.n_u)
        bscale = np.ones(2 * nf)
        bd = mesh.boundary_faces
        bscale[2 * bd] = self.rot_dof[bd, 0]
        bscale[2 * bd + 1] = self.rot_dof[bd, 1]
        self.col_scale = bscale
        self.boundary_dof_values = self.rot_dof.copy()   # per unit omega
        self.interior = interior
        self.boundary = bd

        # static viscous matrix, already mapped to reduced coordinates
        visc = assemble_viscous(mesh, gas.mu, gas.lam).tocoo()
        keep = self.row_map[visc.row] >= 0
        self.visc_rows = self.row_map[visc.row[keep]]
        self.visc_cols = self.col_map[visc.col[keep]]
        self.visc_data = visc.data[keep] * self.col_scale[visc.col[keep]]

        # scatter indices for per-element 3x3 blocks (convection), per component
        faces = mesh.tri_faces
        fi = np.repeat(faces[:, :, None], 3, axis=2)     # (nt, 3, 3) test index i
        fj = np.repeat(faces[:, None, :], 3, axis=1)     # (nt, 3, 3) trial index j
        self.conv_rows = np.concatenate([(2 * fi).ravel(), (2 * fi + 1).ravel()])
        self.conv_cols = np.concatenate([(2 * fj).ravel(), (2 * fj + 1).ravel()])
        self.dof_flat0 = (2 * faces).ravel()             # component-0 dofs, (nt*3,)
        self.dof_flat1 = (2 * faces + 1).ravel()

        # continuity bookkeeping
        int_f = interior
        self.cont_faces = int_f
        self.cont_K1 = mesh.face_tris[int_f, 0]
        self.cont_K2 = mesh.face_tris[int_f, 1]
        self.cont_normals = mesh.face_normals[int_f]
        self.cont_lengths = mesh.face_lengths[int_f]

    # ------------------------------------------------------------------
    def continuity_step(self, rho_prev: np.ndarray, v_dof: np.ndarray) -> np.ndarray:
        """Implicit upwind transport of the density; conserves mass exactly."""
        mesh, dt = self.mesh, self.dt
        nt = mesh.n_triangles
        flux = (
            np.einsum("fc,fc->f", v_dof[self.cont_faces], self.cont_normals)
            * self.cont_lengths
        )  # oriented K1 -> K2
        up = np.where(flux >= 0.0, self.cont_K1, self.cont_K2)
        rows = np.concatenate([np.arange(nt), self.cont_K1, self.cont_K2])
        cols = np.concatenate([np.arange(nt), up, up])
        data = np.concatenate([mesh.element_areas / dt, flux, -flux])
        mat = sp.coo_matrix((data, (rows, cols)), shape=(nt, nt))
        rho = solve_sparse(SparseSystem(mat, mesh.element_areas / dt * rho_prev))
        if rho.min() <= 0.0:
            raise SolverError(
                f"density positivity violated: min rho = {rho.min():g}"
            )
        return rho

    # ------------------------------------------------------------------
    def assemble_momentum_system(
        self,
        rho_next: np.ndarray,
        rho_prev: np.ndarray,
        u_prev: np.ndarray,
        omega_prev: float,
        g_half: np.ndarray,
    ) -> SparseSystem:
        """The coupled sparse system in (interior velocity dofs, omega)."""
        mesh, dt, gas = self.mesh, self.dt, self.gas
        nf = mesh.n_faces
        faces = mesh.tri_faces
        w = self.w

        s_next = self.face_mass @ rho_next               # per-face sum of rho_K |K|/3
        s_prev = self.face_mass @ rho_prev
        s_half = self.face_mass @ (0.5 * (rho_next + rho_prev))

        # time term diagonal and rotation blocks (per face)
        all_f = np.arange(nf)
        diag_rows = np.concatenate([2 * all_f, 2 * all_f + 1])
        diag_data = np.concatenate([s_half, s_half]) / dt
        rot_rows = np.concatenate([2 * all_f, 2 * all_f + 1])
        rot_cols = np.concatenate([2 * all_f + 1, 2 * all_f])
        rot_data = omega_prev * np.concatenate([-s_next, s_next])

        # skew convection blocks, identical for both components
        v_dof = relative_velocity_dof(mesh, u_prev, omega_prev)
        vloc = v_dof[faces]                              # (nt, 3, 2)
        vg = np.einsum("tic,tjc->tij", vloc, self.grads)
        conv = 0.5 * (rho_next * w)[:, None, None] * (vg - vg.transpose(0, 2, 1))
        conv_data = np.concatenate([conv.ravel(), conv.ravel()])

        rows = np.concatenate([diag_rows, rot_rows, self.conv_rows])
        cols = np.concatenate([diag_rows, rot_cols, self.conv_cols])
        data = np.concatenate([diag_data, rot_data, conv_data])

        # map to reduced coordinates (interior dofs + omega column)
        keep = self.row_map[rows] >= 0
        red_rows = self.row_map[rows[keep]]
        red_cols = self.col_map[cols[keep]]
        red_data = data[keep] * self.col_scale[cols[keep]]

        # angular momentum row: I/dt omega + (1/dt) sum rho w (m x u)
        mid = mesh.face_midpoints
        ang_row = np.empty(2 * nf)
        ang_row[0::2] = -s_next * mid[:, 1] / dt
        ang_row[1::2] = s_next * mid[:, 0] / dt
        ang_rows = np.full(2 * nf, self.n_u)
        ang_entry_rows = np.concatenate([ang_rows, [self.n_u]])
        ang_entry_cols = np.concatenate([self.col_map, [self.n_u]])
        ang_entry_data = np.concatenate(
            [ang_row * self.col_scale, [self.inertia / dt]]
        )

        n = self.n_u + 1
        mat = sp.coo_matrix(
            (
                np.concatenate([red_data, self.visc_data, ang_entry_data]),
                (
                    np.concatenate([red_rows, self.visc_rows, ang_entry_rows]),
                    np.concatenate([red_cols, self.visc_cols, ang_entry_cols]),
                ),
            ),
            shape=(n, n),
        )

        # right-hand side
        rhs_full = np.zeros(2 * nf)
        rhs_full[0::2] = s_prev / dt * u_prev[:, 0]
        rhs_full[1::2] = s_prev / dt * u_prev[:, 1]
        p_elem = gas.pressure(rho_next) * mesh.element_areas   # p_K |K|
        np.add.at(rhs_full, self.dof_flat0, (p_elem[:, None] * self.grads[:, :, 0]).ravel())
        np.add.at(rhs_full, self.dof_flat1, (p_elem[:, None] * self.grads[:, :, 1]).ravel())
        grav = rho_next * w
        np.add.at(rhs_full, self.dof_flat0, np.repeat(grav * g_half[0], 3))
        np.add.at(rhs_full, self.dof_flat1, np.repeat(grav * g_half[1], 3))

        rhs = np.zeros(n)
        rhs[self.row_map[self.row_map >= 0]] = rhs_full[self.row_map >= 0]
        cross_prev = s_prev * (mid[:, 0] * u_prev[:, 1] - mid[:, 1] * u_prev[:, 0])
        sys_moment = self.geometry.first_moment + (
            rho_next * mesh.element_areas
        ) @ self.centroids
        rhs[self.n_u] = (
            self.inertia * omega_prev / dt
            + cross_prev.sum() / dt
            + sys_moment[0] * g_half[1]
            - sys_moment[1] * g_half[0]
        )
        return SparseSystem(mat, rhs)

    def momentum_angular_step(
        self,
        rho_next: np.ndarray,
        rho_prev: np.ndarray,
        u_prev: np.ndarray,
        omega_prev: float,
        g_half: np.ndarray,
    ) -> tuple[np.ndarray, float]:
        """Coupled solve for the new velocity field and angular velocity."""
        mesh = self.mesh
        nf = mesh.n_faces
        x = solve_sparse(
            self.assemble_momentum_system(rho_next, rho_prev, u_prev, omega_prev, g_half)
        )
        omega_next = float(x[self.n_u])
        u_next = np.empty((nf, 2))
        u_next[self.interior, 0] = x[self.row_map[2 * self.interior]]
        u_next[self.interior, 1] = x[self.row_map[2 * self.interior + 1]]
        u_next[self.boundary] = omega_next * self.boundary_dof_values[self.boundary]
        return u_next, omega_next

    # ------------------------------------------------------------------
    def step(self, snapshot: CoupledStateSnapshot) -> CoupledStateSnapshot:
        mesh, dt = self.mesh, self.dt
        body = snapshot.body
        g_next = gravity_step(body.g, body.omega, dt)
        g_half = 0.5 * (body.g + g_next)
        u_prev = snapshot.fluid.u.dof
        v_dof = relative_velocity_dof(mesh, u_prev, body.omega)
        cfl = np.abs(v_dof).max() * dt / mesh.h_max if mesh.h_max > 0 else 0.0
        if cfl > 0.5:
            log.warning("advective CFL number %.3g exceeds 0.5 at step %d", cfl, snapshot.k)
        rho_next = self.continuity_step(snapshot.fluid.rho.values, v_dof)
        u_next, omega_next = self.momentum_angular_step(
            rho_next, snapshot.fluid.rho.values, u_prev, body.omega, g_half
        )
        theta_next = theta_from_g(g_next, body.theta)
        return CoupledStateSnapshot(
            mesh=mesh,
            fluid=FluidState(rho=P0Field(rho_next), u=CRField(u_next)),
            body=BodyState(omega=omega_next, g=g_next, theta=theta_next),
            t=snapshot.t + dt,
            k=snapshot.k + 1,
        )


# ----------------------------------------------------------------------
# free-function surface


def continuity_step(rho_prev: P0Field, v_prev: CRField, mesh: Mesh, dt: float) -> P0Field:
    """Implicit-upwind continuity update; see CompressibleSolver.continuity_step."""
    if dt <= 0.0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    nt = mesh.n_triangles
    int_f = mesh.interior_faces
    flux = (
        np.einsum("fc,fc->f", v_prev.dof[int_f], mesh.face_normals[int_f])
        * mesh.face_lengths[int_f]
    )
    K1 = mesh.face_tris[int_f, 0]
    K2 = mesh.face_tris[int_f, 1]
    up = np.where(flux >= 0.0, K1, K2)
    rows = np.concatenate([np.arange(nt), K1, K2])
    cols = np.concatenate([np.arange(nt), up, up])
    data = np.concatenate([mesh.element_areas / dt, flux, -flux])
    mat = sp.coo_matrix((data, (rows, cols)), shape=(nt, nt))
    rho = solve_sparse(SparseSystem(mat, mesh.element_areas / dt * rho_prev.values))
    if rho.min() <= 0.0:
        raise SolverError(f"density positivity violated: min rho = {rho.min():g}")
    return P0Field(rho)


def momentum_angular_step(
    rho_next: P0Field,
    rho_prev: P0Field,
    u_prev: CRField,
    omega_prev: float,
    g_half: np.ndarray,
    geometry: BodyGeometry,
    gas: GasParams,
    mesh: Mesh,
    dt: float,
) -> tuple[CRField, float]:
    solver = CompressibleSolver(mesh, geometry, gas, dt)
    u, omega = solver.momentum_angular_step(
        rho_next.values, rho_prev.values, u_prev.dof, omega_prev, np.asarray(g_half, float)
    )
    return CRField(u), omega


def step(
    snapshot: CoupledStateSnapshot,
    geometry: BodyGeometry,
    gas: GasParams,
    dt: float,
) -> CoupledStateSnapshot:
    solver = CompressibleSolver(snapshot.mesh, geometry, gas, dt)
    return solver.step(snapshot)


def total_mass(snapshot: CoupledStateSnapshot) -> float:
    return float(snapshot.fluid.rho.values @ snapshot.mesh.element_areas)


def discrete_energy(
    snapshot: CoupledStateSnapshot, geometry: BodyGeometry, gas: GasParams
) -> float:
    """Total discrete energy: kinetic + pressure potential - gravity potential."""
    mesh = snapshot.mesh
    rho = snapshot.fluid.rho.values
    u = snapshot.fluid.u.dof
    body = snapshot.body
    areas = mesh.element_areas
    w = areas / 3.0

    kinetic_body = 0.5 * geometry.inertia * body.omega**2
    uloc = u[mesh.tri_faces]                             # (nt, 3, 2)
    kinetic_fluid = 0.5 * float(
        (rho * w) @ np.einsum("tic,tic->t", uloc, uloc)
    )

    rho_bar = float(rho @ areas) / float(areas.sum())
    press = float(
        areas
        @ (
            gas.pressure_potential(rho)
            - gas.pressure_potential_prime(rho_bar) * (rho - rho_bar)
            - gas.pressure_potential(rho_bar)
        )
    )
    sys_moment = geometry.first_moment + (rho * areas) @ mesh.centroids()
    potential = -float(sys_moment @ body.g)
    return kinetic_body + kinetic_fluid + press + potential
