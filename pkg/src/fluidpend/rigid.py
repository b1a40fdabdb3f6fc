"""Rigid-body side of the coupling: geometry, inertia, gravity rotation.

The body is an annulus centered at (L, 0) in the body frame; the pivot sits
at the origin.  Gravity is tracked as a body-frame 2-vector whose norm is
conserved exactly by the Cayley-type rotation update, and the swing angle is
recovered from it by continuous unwrapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class BodyGeometry:
    """Annular pendulum body: pivot-to-center distance L, radii R0 < R1."""

    L: float
    R0: float
    R1: float
    rho_B: float

    def __post_init__(self):
        if not (0.0 < self.R0 < self.R1):
            raise InvalidParameterError(f"need 0 < R0 < R1, got R0={self.R0}, R1={self.R1}")
        if self.rho_B <= 0.0:
            raise InvalidParameterError(f"body density must be positive, got {self.rho_B}")

    @property
    def m_B(self) -> float:
        return self.rho_B * math.pi * (self.R1**2 - self.R0**2)

    @property
    def inertia(self) -> float:
        return body_inertia(self)

    @property
    def first_moment(self) -> np.ndarray:
        """int_B rho_B x dx = m_B (L, 0)."""
        return np.array([self.m_B * self.L, 0.0])

    @property
    def cavity_center(self) -> np.ndarray:
        return np.array([self.L, 0.0])


def body_inertia(geometry: BodyGeometry) -> float:
    """Moment of inertia of the annulus about the pivot axis.

    Parallel-axis value m_B (L^2 + (R0^2 + R1^2) / 2), exact.
    """
    g = geometry
    return g.m_B * (g.L**2 + 0.5 * (g.R0**2 + g.R1**2))


@dataclass
class BodyState:
    """Angular velocity, body-frame gravity, and unwrapped swing angle."""

    omega: float
    g: np.ndarray
    theta: float = 0.0

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)

    @classmethod
    def released_from_rest(cls, theta0: float, g_mag: float = 1.0) -> "BodyState":
        g = g_mag * np.array([math.cos(theta0), math.sin(theta0)])
        return cls(omega=0.0, g=g, theta=theta0)


def gravity_step(g_prev: np.ndarray, omega_prev: float, dt: float) -> np.ndarray:
    """Advance gravity: (g' - g)/dt + omega e3 x (g + g')/2 = 0.

    The 2x2 system is a Cayley rotation by -2 atan(omega dt / 2); it
    conserves |g| exactly and is always solvable.
    """
    if dt <= 0.0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    b = 0.5 * omega_prev * dt
    g1, g2 = float(g_prev[0]), float(g_prev[1])
    # (I + b J) g' = (I - b J) g  with  J = e3 x .
    det = 1.0 + b * b
    r1 = g1 + b * g2
    r2 = g2 - b * g1
    return np.array([(r1 + b * r2) / det, (r2 - b * r1) / det])


def theta_from_g(g: np.ndarray, theta_prev: float) -> float:
    """Continuous swing angle with cos(theta) = g1/|g|, unwrapped.

    The result is the representative of atan2(g2, g1) closest to theta_prev,
    so sequences crossing the +-pi cut stay continuous.
    """
    norm = math.hypot(float(g[0]), float(g[1]))
    if norm == 0.0:
        raise InvalidParameterError("cannot recover an angle from a zero gravity vector")
    raw = math.atan2(float(g[1]), float(g[0]))
    k = round((theta_prev - raw) / (2.0 * math.pi))
    return raw + 2.0 * math.pi * k
