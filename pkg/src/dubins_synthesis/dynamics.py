"""Exact flows of the reduced systems, the adjoint flow and the PMP quantities.

The reduced backward system (P2) reads

    x~' = -v - u y~,    y~' = u x~,

and the forward system (P1) is its negation. For u != 0 both systems rotate
the plane about (0, -v/u); for u = 0 they translate along the x~ axis.
"""
from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple

import numpy as np

from .core import InvalidParameterError, ReducedPoint

TIE_TOL = 1e-11

__all__ = [
    "Direction",
    "Covector",
    "ControlChoice",
    "Loci",
    "TIE_TOL",
    "bang_flow",
    "bang_flow_array",
    "adjoint_flow",
    "adjoint_flow_array",
    "switching_values",
    "hamiltonian",
    "maximized_control",
    "control_from_switching",
    "fundamental_loci",
    "rk4_flow",
    "reduced_rhs",
]


class Direction(Enum):
    """Time direction: P1 steers toward the target, P2 flows away from it."""

    P1 = -1
    P2 = 1

    @property
    def sign(self) -> int:
        return self.value


class Covector(NamedTuple):
    px: float
    py: float


class ControlChoice(NamedTuple):
    """Maximizing control. A tied component is reported as ``None``."""

    u: float | None
    v: float | None
    u_tie: bool
    v_tie: bool


class Loci(NamedTuple):
    """Fundamental loci at a point; ``f`` and ``g`` are ``None`` on x~ = 0."""

    dA: float
    dBu: float
    dBv: float
    f: float | None
    g: float | None

    @property
    def defined(self) -> bool:
        return self.f is not None


def bang_flow(q, u: float, v: float, dt: float, direction: Direction = Direction.P2) -> ReducedPoint:
    """Flow the reduced dynamics for ``dt`` under the constant control (u, v).

    Exact: a rotation by sigma*u*dt about (0, -v/u), or a translation by
    (-sigma*v*dt, 0) when u = 0, with sigma = +1 for P2 and -1 for P1.
    """
    if dt < 0.0:
        raise InvalidParameterError(f"dt must be non-negative, got {dt}")
    x, y = float(q[0]), float(q[1])
    sigma = direction.sign
    if u == 0.0:
        return ReducedPoint(x - sigma * v * dt, y)
    cy = -v / u
    ang = sigma * u * dt
    c, s = math.cos(ang), math.sin(ang)
    dy = y - cy
    return ReducedPoint(c * x - s * dy, cy + s * x + c * dy)


def bang_flow_array(x, y, u, v, dt, sign: int = 1):
    """Vectorized :func:`bang_flow`; ``u`` must be a scalar (all entries share one letter)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if u == 0.0:
        return x - sign * v * np.asarray(dt, dtype=float), y + 0.0 * x
    cy = -v / u
    ang = sign * u * np.asarray(dt, dtype=float)
    c, s = np.cos(ang), np.sin(ang)
    dy = y - cy
    return c * x - s * dy, cy + s * x + c * dy


def adjoint_flow(p, u: float, dt: float) -> Covector:
    """Flow of p' = (-u p_y, u p_x): rotation of p by the angle u*dt."""
    px, py = float(p[0]), float(p[1])
    if px == 0.0 and py == 0.0:
        raise InvalidParameterError("the covector never vanishes")
    if u == 0.0:
        return Covector(px, py)
    c, s = math.cos(u * dt), math.sin(u * dt)
    return Covector(c * px - s * py, s * px + c * py)


def adjoint_flow_array(px, py, u: float, dt):
    if u == 0.0:
        return np.asarray(px, dtype=float) + 0.0, np.asarray(py, dtype=float) + 0.0
    ang = u * np.asarray(dt, dtype=float)
    c, s = np.cos(ang), np.sin(ang)
    return c * px - s * py, s * px + c * py


def switching_values(q, p) -> tuple[float, float]:
    """Return (phi_u, phi_v) = (p_y x~ - p_x y~, -p_x)."""
    return p[1] * q[0] - p[0] * q[1], -p[0]


def hamiltonian(q, p, u: float, v: float) -> float:
    phi_u, phi_v = switching_values(q, p)
    return v * phi_v + u * phi_u


def control_from_switching(phi_u: float, phi_v: float, eta: float, tol: float = TIE_TOL) -> ControlChoice:
    """Pointwise maximizer of u*phi_u + v*phi_v over the normalized box."""
    u_tie = abs(phi_u) < tol
    v_tie = abs(phi_v) < tol
    u = None if u_tie else math.copysign(1.0, phi_u)
    v = None if v_tie else (eta if phi_v > 0.0 else 1.0)
    return ControlChoice(u, v, u_tie, v_tie)


def maximized_control(q, p, eta: float, tol: float = TIE_TOL) -> ControlChoice:
    phi_u, phi_v = switching_values(q, p)
    return control_from_switching(phi_u, phi_v, eta, tol)


def fundamental_loci(q) -> Loci:
    """Return (Delta_A, Delta_Bu, Delta_Bv, f, g).

    The determinants are those of the backward fields F = (-1, 0) and
    G = (-y~, x~); f = -y~/x~ and g = 1/x~ are the ratios used by the
    switch-direction rules along forward (P1) trajectories.
    """
    xt, yt = float(q[0]), float(q[1])
    if xt == 0.0:
        return Loci(-xt + 0.0, yt, 1.0, None, None)
    return Loci(-xt, yt, 1.0, -yt / xt, 1.0 / xt)


def reduced_rhs(q, u: float, v: float, direction: Direction = Direction.P2) -> tuple[float, float]:
    s = direction.sign
    return s * (-v - u * q[1]), s * (u * q[0])


def rk4_flow(q, u: float, v: float, dt: float, steps: int, direction: Direction = Direction.P2) -> ReducedPoint:
    """Fixed-step classical RK4 on the reduced dynamics (test oracle)."""
    if steps < 1:
        raise InvalidParameterError("steps must be >= 1")
    h = dt / steps
    x, y = float(q[0]), float(q[1])
    for _ in range(steps):
        k1 = reduced_rhs((x, y), u, v, direction)
        k2 = reduced_rhs((x + 0.5 * h * k1[0], y + 0.5 * h * k1[1]), u, v, direction)
        k3 = reduced_rhs((x + 0.5 * h * k2[0], y + 0.5 * h * k2[1]), u, v, direction)
        k4 = reduced_rhs((x + h * k3[0], y + h * k3[1]), u, v, direction)
        x += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return ReducedPoint(x, y)
