"""Problem parameters, normalization, SO(2) reduction and shared vocabulary.

Internally every length and time is expressed in normalized units where
the slow speed and the turn-rate bound are both 1, so the control box is
``[-1, 1] x [1, eta]`` and the minimum turning radius is 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

TWO_PI = 2.0 * math.pi

__all__ = [
    "SynthesisError",
    "InvalidParameterError",
    "UnsupportedParameterError",
    "OutOfWindowError",
    "DomainError",
    "CoverageError",
    "SolverFailure",
    "StructuralCheckError",
    "SchemaError",
    "PhysicalParams",
    "NormalizedParams",
    "FullState",
    "ReducedPoint",
    "ControlLetter",
    "TARGET",
    "normalize",
    "reduce",
    "unreduce",
    "wrap_angle",
]


class SynthesisError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(SynthesisError, ValueError):
    """A parameter violates its basic invariants (sign, ordering, finiteness)."""


class UnsupportedParameterError(SynthesisError, ValueError):
    """The parameter is valid but outside what the construction supports (eta = 1)."""


class OutOfWindowError(SynthesisError, ValueError):
    """A branch parameter lies outside the branch window."""


class DomainError(SynthesisError, ValueError):
    """An inverse trigonometric argument left [-1, 1]."""


class CoverageError(SynthesisError):
    """No branch of the synthesis reaches the query point."""


class SolverFailure(SynthesisError):
    """A nonlinear solve did not converge.

    ``residual`` holds the best residual seen and ``partial`` any partial
    result (for instance the polyline traced before the failure).
    """

    def __init__(self, message: str, residual: float = math.nan, partial=None):
        super().__init__(message)
        self.residual = residual
        self.partial = partial


class StructuralCheckError(SynthesisError):
    """A structural assertion of the construction failed for this eta."""

    def __init__(self, check: str, detail: str = ""):
        super().__init__(f"structural check failed: {check}" + (f" ({detail})" if detail else ""))
        self.check = check


class SchemaError(SynthesisError, ValueError):
    """A serialized synthesis document is malformed or inconsistent."""


def wrap_angle(theta: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    w = math.fmod(theta, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    return 0.0 if w >= TWO_PI else w


def _require_finite(**values: float) -> None:
    for name, val in values.items():
        if not math.isfinite(val):
            raise InvalidParameterError(f"{name} must be finite, got {val!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Physical control bounds: turn rate in [-u_max, u_max], speed in [v_min, v_max]."""

    u_max: float
    v_min: float
    v_max: float

    def __post_init__(self) -> None:
        _require_finite(u_max=self.u_max, v_min=self.v_min, v_max=self.v_max)
        if self.u_max <= 0.0:
            raise InvalidParameterError(f"u_max must be positive, got {self.u_max}")
        if self.v_min <= 0.0:
            raise InvalidParameterError(f"v_min must be positive, got {self.v_min}")
        if self.v_max < self.v_min:
            raise InvalidParameterError(
                f"v_max must be >= v_min, got v_min={self.v_min}, v_max={self.v_max}"
            )

    @property
    def r_min(self) -> float:
        """Minimum turning radius v_min / u_max."""
        return self.v_min / self.u_max


@dataclass(frozen=True)
class NormalizedParams:
    """Speed ratio and the scale factors from physical to normalized units.

    A physical length ``l`` becomes ``l * space_scale`` and a physical time
    ``t`` becomes ``t * time_scale``.
    """

    eta: float
    space_scale: float = 1.0
    time_scale: float = 1.0

    def __post_init__(self) -> None:
        _require_finite(eta=self.eta, space_scale=self.space_scale, time_scale=self.time_scale)
        if self.eta < 1.0:
            raise InvalidParameterError(f"eta must be >= 1, got {self.eta}")
        if self.space_scale <= 0.0 or self.time_scale <= 0.0:
            raise InvalidParameterError("scale factors must be positive")

    @property
    def control_box(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (-1.0, 1.0), (1.0, self.eta)

    def length_to_normalized(self, length: float) -> float:
        return length * self.space_scale

    def length_to_physical(self, length: float) -> float:
        return length / self.space_scale

    def time_to_normalized(self, t: float) -> float:
        return t * self.time_scale

    def time_to_physical(self, t: float) -> float:
        return t / self.time_scale

    def control_to_physical(self, u: float, v: float) -> tuple[float, float]:
        """Map a normalized control (u, v) to physical (turn rate, speed)."""
        return u * self.time_scale, v * self.time_scale / self.space_scale

    def state_to_normalized(self, state: "FullState") -> "FullState":
        return FullState(state.x * self.space_scale, state.y * self.space_scale, state.theta)

    def state_to_physical(self, state: "FullState") -> "FullState":
        return FullState(state.x / self.space_scale, state.y / self.space_scale, state.theta)


def normalize(params: PhysicalParams) -> NormalizedParams:
    """Dilate space and time so that v_min = 1 and u_max = 1."""
    if not isinstance(params, PhysicalParams):
        raise InvalidParameterError("normalize expects PhysicalParams")
    return NormalizedParams(
        eta=params.v_max / params.v_min,
        space_scale=params.u_max / params.v_min,
        time_scale=params.u_max,
    )


@dataclass(frozen=True)
class FullState:
    """Pose (x, y, theta); theta is stored wrapped to [0, 2*pi)."""

    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        _require_finite(x=self.x, y=self.y, theta=self.theta)
        object.__setattr__(self, "theta", wrap_angle(self.theta))


class ReducedPoint(NamedTuple):
    """Point (x~, y~) of the reduced plane, i.e. the position seen from the vehicle frame."""

    xt: float
    yt: float


TARGET = ReducedPoint(0.0, -1.0)
"""Image X0 of the whole target circle in normalized reduced coordinates."""


class ControlLetter(str, Enum):
    """The five controls that occur along optimal trajectories."""

    m = "m"
    p = "p"
    M = "M"
    P = "P"
    s = "s"

    @property
    def u(self) -> float:
        return {"m": -1.0, "p": 1.0, "M": -1.0, "P": 1.0, "s": 0.0}[self.value]

    @property
    def fast(self) -> bool:
        """True when the speed sits at its upper bound."""
        return self.value in ("M", "P", "s")

    def control(self, eta: float) -> tuple[float, float]:
        """Normalized (u, v) for this letter."""
        return self.u, (eta if self.fast else 1.0)


def reduce(state: FullState, r_min: float = 1.0) -> ReducedPoint:
    """Express the position in the vehicle frame: (x~, y~) = R(theta) (x, y).

    Every target pose (r_min sin(theta), -r_min cos(theta), theta) maps to
    (0, -r_min). ``r_min`` only enters through that target image, so it is
    accepted for symmetry with the physical formulation and validated.
    """
    if not (r_min > 0.0):
        raise InvalidParameterError(f"r_min must be positive, got {r_min}")
    c, s = math.cos(state.theta), math.sin(state.theta)
    return ReducedPoint(c * state.x + s * state.y, -s * state.x + c * state.y)


def unreduce(point: ReducedPoint, theta: float) -> FullState:
    """Inverse of :func:`reduce` for a given heading."""
    c, s = math.cos(theta), math.sin(theta)
    xt, yt = point
    return FullState(c * xt - s * yt, s * xt + c * yt, theta)
