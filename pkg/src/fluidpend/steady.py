"""Steady-state analysis: hydrostatic profiles, equilibria, energies.

An equilibrium is a fluid at rest in the body frame with a hydrostatic
density depending only on the coordinate along gravity, and an orientation
for which the center of mass of the coupled system lies in the vertical
plane through the pivot.  Because |g| is fixed, the orientation is a single
angle; equilibria are found by scanning that angle and bisecting sign
changes of the torque-balance residual.

Cavities are described either by a triangulation (quadrature integrals) or
by an axis-aligned box in 2 or 3 dimensions; the box path clips the domain
at the vacuum line so the integrand is smooth on each integration cell, and
is exact for integer 1/(gamma-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .compressible import GasParams
from .errors import InvalidParameterError, SolverError
from .mesh import Mesh
from .rigid import BodyGeometry

_GL_POINTS = 12


def _duffy_rule(n: int = _GL_POINTS):
    """Collapsed tensor Gauss-Legendre rule on the reference triangle.

    Returns barycentric-style coefficients (c0, c1, c2, w) with
    x = c0 P0 + c1 P1 + c2 P2 and weights summing to 1/2.
    """
    xs, ws = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (xs + 1.0)
    w = 0.5 * ws
    S, T = np.meshgrid(s, s, indexing="ij")
    WS, WT = np.meshgrid(w, w, indexing="ij")
    c1 = (S * (1.0 - T)).ravel()
    c2 = (S * T).ravel()
    c0 = 1.0 - c1 - c2
    weights = (WS * WT * S).ravel()  # Jacobian factor 2A applied by the caller
    return c0, c1, c2, weights


_RULE = _duffy_rule()


def _triangle_quadrature(p0, p1, p2):
    """Quadrature points and weights for one or many triangles.

    Inputs have shape (..., 2); returns points (..., npts, 2) and weights
    (..., npts) integrating exactly high-degree polynomials.
    """
    c0, c1, c2, w = _RULE
    pts = (
        p0[..., None, :] * c0[:, None]
        + p1[..., None, :] * c1[:, None]
        + p2[..., None, :] * c2[:, None]
    )
    e1, e2 = p1 - p0, p2 - p0
    area2 = e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0]  # signed, = 2A
    weights = np.abs(area2)[..., None] * w
    return pts, weights


def _clip_polygon(poly: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon to {a . x + b >= 0}."""
    out = []
    n = len(poly)
    vals = poly @ a + b
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        vp, vq = vals[i], vals[(i + 1) % n]
        if vp >= 0.0:
            out.append(p)
        if (vp > 0.0) != (vq > 0.0) and vp != vq:
            t = vp / (vp - vq)
            out.append(p + t * (q - p))
    return np.array(out) if out else np.empty((0, 2))


def density_profile(g: np.ndarray, c: float, gas: GasParams, x: np.ndarray) -> np.ndarray:
    """Hydrostatic density rho(x) = [((gamma-1)/(a gamma)) x.g + c]_+^{1/(gamma-1)}."""
    g = np.asarray(g, dtype=float)[:2]
    x = np.asarray(x, dtype=float)
    coef = (gas.gamma - 1.0) / (gas.a * gas.gamma)
    bracket = coef * (x[..., :2] @ g) + c
    return np.maximum(bracket, 0.0) ** (1.0 / (gas.gamma - 1.0))


@dataclass
class CavityDescriptor:
    """Fluid domain plus total mass; either a mesh or an axis-aligned box."""

    total_mass: float
    mesh: Optional[Mesh] = None
    box: Optional[np.ndarray] = None  # (dim, 2) ordered bounds
    _qpts: Optional[np.ndarray] = field(default=None, repr=False)
    _qw: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.total_mass <= 0.0:
            raise InvalidParameterError(f"total mass must be positive, got {self.total_mass}")
        if (self.mesh is None) == (self.box is None):
            raise InvalidParameterError("provide exactly one of mesh or box")
        if self.box is not None:
            self.box = np.asarray(self.box, dtype=float)
            if self.box.ndim != 2 or self.box.shape[1] != 2 or self.box.shape[0] not in (2, 3):
                raise InvalidParameterError("box must have shape (2, 2) or (3, 2)")
            if np.any(self.box[:, 0] >= self.box[:, 1]):
                raise InvalidParameterError("box bounds must be strictly ordered")
        if self.mesh is not None:
            v = self.mesh.vertices[self.mesh.triangles]
            pts, w = _triangle_quadrature(v[:, 0], v[:, 1], v[:, 2])
            self._qpts = pts.reshape(-1, 2)
            self._qw = w.ravel()

    @classmethod
    def from_mesh(cls, mesh: Mesh, total_mass: float) -> "CavityDescriptor":
        return cls(total_mass=total_mass, mesh=mesh)

    @classmethod
    def from_box(cls, bounds, total_mass: float) -> "CavityDescriptor":
        return cls(total_mass=total_mass, box=np.asarray(bounds, dtype=float))

    # ------------------------------------------------------------------
    @property
    def volume(self) -> float:
        if self.mesh is not None:
            return self.mesh.total_area
        return float(np.prod(self.box[:, 1] - self.box[:, 0]))

    @property
    def mean_density(self) -> float:
        return self.total_mass / self.volume

    @property
    def _depth(self) -> float:
        """Extent of the out-of-plane direction for 3D boxes, else 1."""
        if self.box is not None and self.box.shape[0] == 3:
            return float(self.box[2, 1] - self.box[2, 0])
        return 1.0

    def _planar_rect(self) -> np.ndarray:
        (x0, x1), (y0, y1) = self.box[0], self.box[1]
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])

    def max_projection(self, g: np.ndarray) -> float:
        """max over the cavity of x . g (planar)."""
        g = np.asarray(g, dtype=float)[:2]
        if self.mesh is not None:
            return float((self.mesh.vertices @ g).max())
        return float((self._planar_rect() @ g).max())

    # ------------------------------------------------------------------
    def _box_quadrature(self, g: np.ndarray, c: float, gas: GasParams):
        """Points/weights over the part of the box where the profile is positive."""
        coef = (gas.gamma - 1.0) / (gas.a * gas.gamma)
        poly = _clip_polygon(self._planar_rect(), coef * np.asarray(g, float)[:2], c)
        if len(poly) < 3:
            return np.empty((0, 2)), np.empty(0)
        centroid = poly.mean(axis=0)
        pts_list, w_list = [], []
        for i in range(len(poly)):
            p1, p2 = poly[i], poly[(i + 1) % len(poly)]
            pts, w = _triangle_quadrature(centroid, p1, p2)
            pts_list.append(pts)
            w_list.append(w)
        return np.concatenate(pts_list), np.concatenate(w_list) * self._depth

    def _profile_integrals(self, g: np.ndarray, c: float, gas: GasParams):
        """(mass, planar first moment, integral of P(rho)) of the profile."""
        if self.mesh is not None:
            pts, w = self._qpts, self._qw
        else:
            pts, w = self._box_quadrature(g, c, gas)
        if len(w) == 0:
            return 0.0, np.zeros(2), 0.0
        rho = density_profile(g, c, gas, pts)
        mass = float(w @ rho)
        moment = (w * rho) @ pts
        press = float(w @ gas.pressure_potential(rho))
        return mass, moment, press

    def profile_mass(self, g: np.ndarray, c: float, gas: GasParams) -> float:
        return self._profile_integrals(g, c, gas)[0]


def solve_mass_constant(
    g: np.ndarray, total_mass: float, cavity: CavityDescriptor, gas: GasParams
) -> float:
    """The unique constant c with int_C density_profile = total_mass.

    Bisection on the (continuous, increasing) mass map to 1e-12 relative
    mass error.
    """
    if total_mass <= 0.0:
        raise InvalidParameterError(f"total mass must be positive, got {total_mass}")
    coef = (gas.gamma - 1.0) / (gas.a * gas.gamma)
    lo = -coef * cavity.max_projection(g)   # mass is exactly zero here
    span = max(1.0, abs(lo))
    hi = lo + span
    while cavity.profile_mass(g, hi, gas) < total_mass:
        span *= 2.0
        hi = lo + span
        if span > 1e18:  # pragma: no cover - cannot occur for M > 0
            raise SolverError("failed to bracket the mass constant")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        m = cavity.profile_mass(g, mid, gas)
        if abs(m - total_mass) <= 1e-12 * total_mass:
            return mid
        if m < total_mass:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def steady_first_moment(
    g: np.ndarray, c: float, cavity: CavityDescriptor, gas: GasParams
) -> np.ndarray:
    """Planar first moment of the hydrostatic density, int_C rho x dx."""
    return cavity._profile_integrals(g, c, gas)[1]


def _body_moment(body) -> np.ndarray:
    if isinstance(body, BodyGeometry):
        return body.first_moment
    return np.asarray(body, dtype=float)[:2]


def equilibrium_residual(
    alpha: float,
    cavity: CavityDescriptor,
    body,
    gas: GasParams,
    total_mass: float,
    g_mag: float = 1.0,
) -> float:
    """Torque-balance residual: e3 component of g x (moment(g) + l).

    Vanishes exactly at equilibrium orientations; sign changes bracket them.
    """
    g = g_mag * np.array([math.cos(alpha), math.sin(alpha)])
    c = solve_mass_constant(g, total_mass, cavity, gas)
    total = steady_first_moment(g, c, cavity, gas) + _body_moment(body)
    return float(g[0] * total[1] - g[1] * total[0])


@dataclass
class SteadyState:
    """One equilibrium configuration."""

    gravity: np.ndarray          # body-frame g_s
    profile_constant: float      # c
    alignment: float             # d, with d g = moment + l
    alpha: float
    energy: float
    mass_residual: float
    is_minimizer: bool = False


@dataclass
class EquilibriumScan:
    states: list
    degenerate: bool = False


def _make_state(alpha, cavity, body, gas, total_mass, g_mag) -> SteadyState:
    g = g_mag * np.array([math.cos(alpha), math.sin(alpha)])
    c = solve_mass_constant(g, total_mass, cavity, gas)
    mass, moment, press = cavity._profile_integrals(g, c, gas)
    l = _body_moment(body)
    total = moment + l
    d = float(total @ g) / float(g @ g)
    rho_bar = cavity.mean_density
    press_rel = press - float(gas.pressure_potential(rho_bar)) * cavity.volume
    energy = press_rel - float(total @ g)
    return SteadyState(
        gravity=g,
        profile_constant=c,
        alignment=d,
        alpha=float(alpha) % (2.0 * math.pi),
        energy=energy,
        mass_residual=abs(mass - total_mass) / total_mass,
    )


def find_equilibria(
    cavity: CavityDescriptor,
    body,
    gas: GasParams,
    total_mass: float,
    g_mag: float = 1.0,
    n_scan: int = 64,
) -> EquilibriumScan:
    """All equilibrium orientations by uniform scan plus bisection.

    Roots are refined until |residual| <= 1e-11 and deduplicated within
    1e-8 rad.  If the residual vanishes on the whole grid the configuration
    is degenerate (a continuum of equilibria) and no roots are reported.
    """
    if n_scan < 8:
        raise InvalidParameterError(f"n_scan must be at least 8, got {n_scan}")

    def res(a):
        return equilibrium_residual(a, cavity, body, gas, total_mass, g_mag)

    alphas = np.linspace(0.0, 2.0 * math.pi, n_scan, endpoint=False)
    values = np.array([res(a) for a in alphas])
    scale = (
        total_mass * g_mag * (np.abs(cavity.max_projection([1, 0])) + np.abs(cavity.max_projection([0, 1])))
        + np.linalg.norm(_body_moment(body)) * g_mag
    )
    if np.all(np.abs(values) <= 1e-10 * max(scale, 1e-300)):
        return EquilibriumScan(states=[], degenerate=True)

    roots: list[float] = []
    grid_zero = 1e-11
    for i in range(n_scan):
        a0, a1 = alphas[i], alphas[(i + 1) % n_scan] + (2.0 * math.pi if i == n_scan - 1 else 0.0)
        v0, v1 = values[i], values[(i + 1) % n_scan]
        if abs(v0) <= grid_zero:
            roots.append(a0)
            continue
        if abs(v1) <= grid_zero or v0 * v1 > 0.0:
            continue
        lo, hi, vlo = a0, a1, v0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            vm = res(mid)
            if abs(vm) <= 1e-11:
                break
            if vlo * vm < 0.0:
                hi = mid
            else:
                lo, vlo = mid, vm
        roots.append(0.5 * (lo + hi) if abs(vm) > 1e-11 else mid)

    # deduplicate modulo 2 pi
    uniq: list[float] = []
    for r in sorted(a % (2.0 * math.pi) for a in roots):
        if not uniq or (r - uniq[-1] > 1e-8 and (2.0 * math.pi - r + uniq[0]) > 1e-8):
            uniq.append(r)
    if not uniq:
        raise SolverError("equilibrium scan found no roots on a non-degenerate system")

    states = [_make_state(a, cavity, body, gas, total_mass, g_mag) for a in uniq]
    mn, _ = select_minimizer(states)
    for s in states:
        s.is_minimizer = s is mn
    return EquilibriumScan(states=states, degenerate=False)


def steady_energy(
    state: SteadyState, cavity: CavityDescriptor, body, gas: GasParams
) -> float:
    """Total energy of a steady state (zero kinetic terms)."""
    mass, moment, press = cavity._profile_integrals(
        state.gravity, state.profile_constant, gas
    )
    rho_bar = cavity.mean_density
    # int [P(rho) - P'(rho_bar)(rho - rho_bar) - P(rho_bar)] collapses because
    # the mass constraint makes the linear term vanish
    press_rel = (
        press
        - float(gas.pressure_potential_prime(rho_bar)) * (mass - cavity.total_mass)
        - float(gas.pressure_potential(rho_bar)) * cavity.volume
    )
    total = moment + _body_moment(body)
    return press_rel - float(total @ state.gravity)


def energy_of_p0_density(
    mesh: Mesh, rho: np.ndarray, g: np.ndarray, body, gas: GasParams
) -> float:
    """Rest-state energy of a piecewise-constant density on a mesh.

    Independent counterpart of the solver's energy diagnostic for states
    with zero velocity.
    """
    rho = np.asarray(rho, dtype=float)
    areas = mesh.element_areas
    rho_bar = float(rho @ areas) / float(areas.sum())
    press = float(
        areas
        @ (
            gas.pressure_potential(rho)
            - gas.pressure_potential_prime(rho_bar) * (rho - rho_bar)
            - gas.pressure_potential(rho_bar)
        )
    )
    total = (rho * areas) @ mesh.centroids() + _body_moment(body)
    return press - float(total @ np.asarray(g, dtype=float)[:2])


def select_minimizer(states: list) -> tuple[SteadyState, list]:
    """Minimal-energy state plus any states tied with it within 1e-12.

    Ties are returned, never broken silently.
    """
    if not states:
        raise InvalidParameterError("cannot select a minimizer from an empty list")
    best = min(states, key=lambda s: s.energy)
    ties = [s for s in states if s is not best and abs(s.energy - best.energy) < 1e-12]
    return best, ties


def contraction_diagnostic(
    cavity: CavityDescriptor,
    body,
    gas: GasParams,
    total_mass: float,
    g_mag: float = 1.0,
    n_grid: int = 16,
) -> dict:
    """Numeric estimate of the moment's Lipschitz constant versus |d|.

    Samples |moment(g1) - moment(g2)| / |g1 - g2| over grid pairs on the
    gravity circle and reports it next to the smallest |d| over the
    equilibrium states; the two-solution bound holds when that |d| exceeds
    2 * lipschitz.  A degenerate configuration reports alignment 0 and a
    failed bound.
    """
    alphas = np.linspace(0.0, 2.0 * math.pi, n_grid, endpoint=False)
    gs, moments = [], []
    for a in alphas:
        g = g_mag * np.array([math.cos(a), math.sin(a)])
        c = solve_mass_constant(g, total_mass, cavity, gas)
        gs.append(g)
        moments.append(steady_first_moment(g, c, cavity, gas))
    lip = 0.0
    for i in range(n_grid):
        for j in range(i + 1, n_grid):
            dg = np.linalg.norm(gs[i] - gs[j])
            if dg > 1e-12:
                lip = max(lip, float(np.linalg.norm(moments[i] - moments[j])) / dg)
    scan = find_equilibria(cavity, body, gas, total_mass, g_mag)
    min_d = 0.0 if scan.degenerate else min(abs(s.alignment) for s in scan.states)
    return {
        "lipschitz_estimate": lip,
        "min_abs_alignment": min_d,
        "two_solution_bound_holds": bool(min_d > 2.0 * lip),
    }
