"""Hydrostatic profiles, the mass constant, equilibria, and energies."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidpend.compressible import GasParams
from fluidpend.errors import InvalidParameterError
from fluidpend.mesh import generate_disk_mesh, generate_rect_mesh
from fluidpend.rigid import BodyGeometry
from fluidpend.steady import (
    CavityDescriptor,
    SteadyState,
    contraction_diagnostic,
    density_profile,
    equilibrium_residual,
    find_equilibria,
    select_minimizer,
    solve_mass_constant,
    steady_energy,
    steady_first_moment,
)

# gas with unit profile coefficient: (gamma-1)/(a*gamma) = 1
GAS_UNIT = GasParams(a=0.5, gamma=2.0, mu=1.0, lam=0.0)
GAS_RUN = GasParams(a=10.0, gamma=5.0 / 3.0, mu=100.0, lam=0.0)
GEO = BodyGeometry(L=0.4, R0=0.1, R1=0.2, rho_B=1.0)

CUBE = CavityDescriptor.from_box([(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], total_mass=8.0)
CUBE_L = np.array([1.0, 0.0])


@pytest.fixture(scope="module")
def disk_cavity():
    mesh = generate_disk_mesh(center=(0.4, 0.0), radius=0.1, target_h=0.01)
    return CavityDescriptor.from_mesh(mesh, total_mass=1.0 * mesh.total_area)


# ----------------------------------------------------------------------
# density profile


def test_profile_unit_coefficient_is_affine():
    g = np.array([1.0, 0.0])
    for x, expect in [((0.3, 0.7), 1.3), ((-2.0, 0.0), 0.0), ((0.0, 5.0), 1.0)]:
        assert abs(density_profile(g, 1.0, GAS_UNIT, np.array(x)) - expect) < 1e-15


def test_profile_vanishes_below_cutoff():
    g = np.array([0.0, 1.0])
    pts = np.array([[0.0, -1.0], [0.5, 0.2], [0.0, 0.9]])
    vals = density_profile(g, -1.0, GAS_UNIT, pts)
    assert np.array_equal(vals, [0.0, 0.0, 0.0])


def test_profile_zero_gravity_constant():
    vals = density_profile(
        np.zeros(2), 2.0, GAS_RUN, np.array([[0.0, 0.0], [3.0, -1.0]])
    )
    expect = 2.0 ** (1.0 / (GAS_RUN.gamma - 1.0))
    assert np.abs(vals - expect).max() < 1e-14


# ----------------------------------------------------------------------
# mass constant


def test_cube_mass_constant_is_one():
    c = solve_mass_constant(np.array([1.0, 0.0]), 8.0, CUBE, GAS_UNIT)
    assert abs(c - 1.0) < 1e-10


def test_vanishing_mass_limit():
    g = np.array([1.0, 0.0])
    lo = -CUBE.max_projection(g)  # unit profile coefficient
    c = solve_mass_constant(g, 1e-8, CUBE, GAS_UNIT)
    assert c > lo
    assert c - lo < 1e-2


def test_mass_constant_rejects_nonpositive_mass():
    with pytest.raises(InvalidParameterError):
        solve_mass_constant(np.array([1.0, 0.0]), 0.0, CUBE, GAS_UNIT)


@settings(max_examples=25, deadline=None)
@given(
    m1=st.floats(0.1, 5.0),
    dm=st.floats(0.1, 5.0),
    angle=st.floats(0.0, 2.0 * math.pi),
)
def test_mass_constant_monotone(m1, dm, angle):
    g = np.array([math.cos(angle), math.sin(angle)])
    box = CavityDescriptor.from_box([(0.0, 1.5), (-0.5, 0.5)], total_mass=1.0)
    c1 = solve_mass_constant(g, m1, box, GAS_RUN)
    c2 = solve_mass_constant(g, m1 + dm, box, GAS_RUN)
    assert c1 < c2


# ----------------------------------------------------------------------
# first moment


def test_cube_moment_matches_hand_values():
    g = np.array([1.0, 0.0])
    pi = steady_first_moment(g, 1.0, CUBE, GAS_UNIT)
    assert np.abs(pi - np.array([8.0 / 3.0, 0.0])).max() < 1e-10
    assert np.abs(pi + CUBE_L - np.array([11.0 / 3.0, 0.0])).max() < 1e-10


def test_cube_moment_reversed_gravity():
    g = np.array([-1.0, 0.0])
    c = solve_mass_constant(g, 8.0, CUBE, GAS_UNIT)
    pi = steady_first_moment(g, c, CUBE, GAS_UNIT)
    assert np.abs(pi + CUBE_L - np.array([-5.0 / 3.0, 0.0])).max() < 1e-10


def test_moment_parallel_to_gravity_on_symmetric_cavity(disk_cavity):
    g = np.array([1.0, 0.0])
    c = solve_mass_constant(g, disk_cavity.total_mass, disk_cavity, GAS_RUN)
    pi = steady_first_moment(g, c, disk_cavity, GAS_RUN)
    assert abs(pi[1]) <= 1e-12  # perpendicular component


# ----------------------------------------------------------------------
# equilibrium residual


def test_residual_zero_on_axis(disk_cavity):
    r = equilibrium_residual(0.0, disk_cavity, GEO, GAS_RUN, disk_cavity.total_mass)
    assert abs(r) < 1e-12


def test_residual_sign_off_axis(disk_cavity):
    # residual = -(M R + m_B l) sin(alpha) + higher-order profile shift: the
    # restoring torque pushes back toward alpha = 0
    r = equilibrium_residual(
        math.pi / 4.0, disk_cavity, GEO, GAS_RUN, disk_cavity.total_mass
    )
    assert r < -1e-3


def test_residual_odd_symmetry(disk_cavity):
    for alpha in (0.3, 1.1, 2.9):
        plus = equilibrium_residual(alpha, disk_cavity, GEO, GAS_RUN, disk_cavity.total_mass)
        minus = equilibrium_residual(-alpha, disk_cavity, GEO, GAS_RUN, disk_cavity.total_mass)
        assert abs(plus + minus) < 1e-11


# ----------------------------------------------------------------------
# equilibrium enumeration


@pytest.fixture(scope="module")
def disk_scan(disk_cavity):
    return find_equilibria(disk_cavity, GEO, GAS_RUN, disk_cavity.total_mass)


def test_disk_has_exactly_two_equilibria(disk_scan):
    assert not disk_scan.degenerate
    alphas = sorted(s.alpha for s in disk_scan.states)
    assert len(alphas) == 2
    assert abs(alphas[0] - 0.0) < 1e-6
    assert abs(alphas[1] - math.pi) < 1e-6


def test_disk_minimizer_is_straight_down(disk_scan):
    down = min(disk_scan.states, key=lambda s: abs(s.alpha))
    assert down.is_minimizer
    assert sum(s.is_minimizer for s in disk_scan.states) == 1


def test_every_root_satisfies_contracts(disk_scan, disk_cavity):
    for s in disk_scan.states:
        assert s.mass_residual <= 1e-10
        total = abs(s.alignment) * np.linalg.norm(s.gravity) + np.linalg.norm(GEO.first_moment)
        recon = s.alignment * s.gravity
        # alignment identity checked against a fresh moment evaluation
        pi = steady_first_moment(s.gravity, s.profile_constant, disk_cavity, GAS_RUN)
        assert np.linalg.norm(recon - pi - GEO.first_moment) <= 1e-8 * total


def test_alignment_sign_tracks_center_of_mass(disk_scan, disk_cavity):
    # d > 0 exactly when the whole-system center of mass sits on the g side
    # of the pivot
    for s in disk_scan.states:
        pi = steady_first_moment(s.gravity, s.profile_constant, disk_cavity, GAS_RUN)
        com_proj = float((pi + GEO.first_moment) @ s.gravity)
        assert (s.alignment > 0) == (com_proj > 0)
    downs = [s for s in disk_scan.states if abs(s.alpha) < 1e-6]
    ups = [s for s in disk_scan.states if abs(s.alpha - math.pi) < 1e-6]
    assert downs[0].alignment > 0
    assert ups[0].alignment < 0


def test_cube_equilibria_alignments():
    scan = find_equilibria(CUBE, CUBE_L, GAS_UNIT, 8.0)
    assert not scan.degenerate
    ds = sorted(s.alignment for s in scan.states)
    assert len(ds) == 2
    assert abs(ds[0] - 5.0 / 3.0) < 1e-8
    assert abs(ds[1] - 11.0 / 3.0) < 1e-8
    assert all(d > 0 for d in ds)  # two distinct states with d > 0


def test_centered_disk_is_degenerate():
    mesh = generate_disk_mesh(center=(0.0, 0.0), radius=0.1, target_h=0.02)
    cavity = CavityDescriptor.from_mesh(mesh, total_mass=mesh.total_area)
    scan = find_equilibria(cavity, np.zeros(2), GAS_RUN, cavity.total_mass)
    assert scan.degenerate
    assert scan.states == []


def test_scan_rejects_tiny_grid(disk_cavity):
    with pytest.raises(InvalidParameterError):
        find_equilibria(disk_cavity, GEO, GAS_RUN, disk_cavity.total_mass, n_scan=4)


# ----------------------------------------------------------------------
# energies


def test_straight_down_has_lower_energy(disk_scan):
    down = min(disk_scan.states, key=lambda s: abs(s.alpha))
    up = max(disk_scan.states, key=lambda s: abs(s.alpha))
    assert down.energy < up.energy


def test_energy_difference_matches_center_of_mass_drop(disk_scan, disk_cavity):
    # E(down) - E(up) = -|g| M_total (sigma_+ + sigma_-), with the sigmas the
    # center-of-mass offsets along the hinge axis, computed independently
    # from the first moments.  The profile pressure terms cancel by mirror
    # symmetry of the two hydrostatic profiles.
    down = min(disk_scan.states, key=lambda s: abs(s.alpha))
    up = max(disk_scan.states, key=lambda s: abs(s.alpha))
    m_total = disk_cavity.total_mass + GEO.m_B
    sig = []
    for s in (down, up):
        pi = steady_first_moment(s.gravity, s.profile_constant, disk_cavity, GAS_RUN)
        com = (pi + GEO.first_moment) / m_total
        sig.append(abs(float(com @ np.array([1.0, 0.0]))))
    e_down = steady_energy(down, disk_cavity, GEO, GAS_RUN)
    e_up = steady_energy(up, disk_cavity, GEO, GAS_RUN)
    assert abs((e_down - e_up) - (-1.0 * m_total * (sig[0] + sig[1]))) < 1e-9


def test_energy_pressure_term_zero_for_uniform_profile():
    rho_bar = CUBE.mean_density
    state = SteadyState(
        gravity=np.zeros(2),
        profile_constant=rho_bar ** (GAS_UNIT.gamma - 1.0),
        alignment=0.0,
        alpha=0.0,
        energy=0.0,
        mass_residual=0.0,
    )
    assert abs(steady_energy(state, CUBE, np.zeros(2), GAS_UNIT)) < 1e-12


def test_steady_energy_matches_state_attribute(disk_scan, disk_cavity):
    for s in disk_scan.states:
        assert abs(steady_energy(s, disk_cavity, GEO, GAS_RUN) - s.energy) < 1e-12


# ----------------------------------------------------------------------
# minimizer selection


def test_select_minimizer_single():
    s = SteadyState(np.array([1.0, 0.0]), 1.0, 1.0, 0.0, -3.0, 0.0)
    best, ties = select_minimizer([s])
    assert best is s and ties == []


def test_select_minimizer_tie_flag():
    a = SteadyState(np.array([1.0, 0.0]), 1.0, 1.0, 0.0, -3.0, 0.0)
    b = SteadyState(np.array([-1.0, 0.0]), 1.0, 1.0, math.pi, -3.0 + 1e-13, 0.0)
    best, ties = select_minimizer([a, b])
    assert best is a
    assert ties == [b]


def test_select_minimizer_empty_rejected():
    with pytest.raises(InvalidParameterError):
        select_minimizer([])


# ----------------------------------------------------------------------
# quadrature versus closed form


def _square_mesh_cavity(n):
    mesh = generate_rect_mesh([(0.0, 1.0), (0.0, 1.0)], n, n)
    return CavityDescriptor.from_mesh(mesh, total_mass=1.0)


def test_box_quadrature_matches_closed_form_smooth():
    # profile rho = (x + 0.5) on the unit square: mass 1, moment (7/12, 1/2)
    g = np.array([1.0, 0.0])
    box = CavityDescriptor.from_box([(0.0, 1.0), (0.0, 1.0)], total_mass=1.0)
    assert abs(box.profile_mass(g, 0.5, GAS_UNIT) - 1.0) < 1e-13
    pi = steady_first_moment(g, 0.5, box, GAS_UNIT)
    assert np.abs(pi - np.array([7.0 / 12.0, 0.5])).max() < 1e-13
    mesh_cav = _square_mesh_cavity(20)
    assert abs(mesh_cav.profile_mass(g, 0.5, GAS_UNIT) - 1.0) < 1e-12
    pim = steady_first_moment(g, 0.5, mesh_cav, GAS_UNIT)
    assert np.abs(pim - np.array([7.0 / 12.0, 0.5])).max() < 1e-12


def test_box_quadrature_matches_closed_form_with_vacuum_line():
    # rho = (x - 0.26)_+ : the kink crosses the square away from any grid
    # line, so the mesh rule is only approximate; h = side/20 agrees within
    # 1e-3 and refining improves
    g = np.array([1.0, 0.0])
    c = -0.26
    exact_mass = 0.74**2 / 2.0
    box = CavityDescriptor.from_box([(0.0, 1.0), (0.0, 1.0)], total_mass=exact_mass)
    assert abs(box.profile_mass(g, c, GAS_UNIT) - exact_mass) < 1e-13
    err = []
    for n in (20, 40):
        cav = _square_mesh_cavity(n)
        err.append(abs(cav.profile_mass(g, c, GAS_UNIT) - exact_mass))
    assert err[0] < 1e-3
    assert err[1] < err[0]


# ----------------------------------------------------------------------
# uniqueness diagnostic


def test_contraction_diagnostic_disk(disk_cavity):
    diag = contraction_diagnostic(disk_cavity, GEO, GAS_RUN, disk_cavity.total_mass)
    assert set(diag) == {
        "lipschitz_estimate", "min_abs_alignment", "two_solution_bound_holds"
    }
    assert diag["lipschitz_estimate"] >= 0.0
    assert diag["min_abs_alignment"] > 0.0
    # moment variation over orientations is tiny next to |d| ~ 0.05
    assert diag["two_solution_bound_holds"]
