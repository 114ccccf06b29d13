"""Reduced-order model parameters and planar dynamic states.

Two pendulum-family models are parameterized here: the robot, a cart-pole
(wheel base of mass ``m_base`` carrying a point-mass body ``m_body`` at
height ``h_com``), and the human, a fixed-base inverted pendulum actuated
through the ankle.  Derived quantities (natural frequency, the mass-ratio
scaled divergence rate, the force scale gamma) are recomputed on access so
they can never go stale when a profile is edited.

Sign conventions: x forward, z up, pitch angles positive leaning forward.
A center of pressure ahead of the ankle brakes a forward fall.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path


class ParameterError(ValueError):
    """Raised for physically inconsistent model parameters."""


class InvalidStateError(ValueError):
    """Raised when a state or command contains non-finite values."""


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidStateError(f"{name} contains non-finite value {v!r}")


@dataclass(frozen=True)
class RobotParams:
    """Cart-pole constants for the wheeled robot."""

    m_body: float  # kg, pendulum body mass
    m_base: float  # kg, wheel/base mass
    h_com: float   # m, body CoM height above the axle
    g: float = 9.81
    wheel_radius: float = 0.05  # m, used only to report wheel torque

    def __post_init__(self) -> None:
        if self.m_body <= 0 or self.m_base <= 0:
            raise ParameterError("masses must be positive")
        if self.h_com <= 0 or self.g <= 0:
            raise ParameterError("h_com and g must be positive")
        if self.wheel_radius <= 0:
            raise ParameterError("wheel_radius must be positive")

    @property
    def omega(self) -> float:
        """Pendulum natural frequency sqrt(g/h), 1/s."""
        return math.sqrt(self.g / self.h_com)

    @property
    def alpha(self) -> float:
        """Body/base mass ratio sqrt(m_body/m_base), dimensionless."""
        return math.sqrt(self.m_body / self.m_base)

    @property
    def omega_circ(self) -> float:
        """Divergence rate of the pitch subsystem, alpha * omega, 1/s."""
        return self.alpha * self.omega

    @property
    def gamma(self) -> float:
        """Force scale m * omega^2 * h (= m * g), N."""
        return self.m_body * self.omega ** 2 * self.h_com


@dataclass(frozen=True)
class HumanParams:
    """Ankle-actuated inverted pendulum constants for the pilot."""

    m_body: float   # kg
    h_com: float    # m, CoM height above ground
    h_ankle: float = 0.0  # m, ankle pivot height
    g: float = 9.81

    def __post_init__(self) -> None:
        if self.m_body <= 0:
            raise ParameterError("m_body must be positive")
        if not 0 <= self.h_ankle < self.h_com:
            raise ParameterError("need 0 <= h_ankle < h_com")
        if self.g <= 0:
            raise ParameterError("g must be positive")

    @property
    def h_tilde(self) -> float:
        """Pivot-to-CoM length h_com - h_ankle, m."""
        return self.h_com - self.h_ankle

    @property
    def omega(self) -> float:
        return math.sqrt(self.g / self.h_com)

    @property
    def gamma(self) -> float:
        return self.m_body * self.omega ** 2 * self.h_com


@dataclass(frozen=True)
class SupportPolygon:
    """Sagittal center-of-pressure range of the feet, ankle-relative."""

    p_min: float  # m, heel-side bound (negative)
    p_max: float  # m, toe-side bound (positive)

    def __post_init__(self) -> None:
        if not self.p_min < 0 < self.p_max:
            raise ParameterError("support polygon must straddle the ankle")

    def clamp(self, cop: float) -> float:
        return min(max(cop, self.p_min), self.p_max)


@dataclass(frozen=True)
class CartPoleState:
    """Planar robot state: wheel position/velocity, body pitch/rate."""

    x_w: float = 0.0
    x_w_dot: float = 0.0
    theta: float = 0.0
    theta_dot: float = 0.0

    def __post_init__(self) -> None:
        _require_finite("CartPoleState", self.x_w, self.x_w_dot, self.theta, self.theta_dot)

    @property
    def linear_regime(self) -> bool:
        """False once the pitch leaves the small-angle validity range."""
        return abs(self.theta) < math.pi / 2


@dataclass(frozen=True)
class AipState:
    """Human pendulum state: pitch and pitch rate."""

    theta: float = 0.0
    theta_dot: float = 0.0

    def __post_init__(self) -> None:
        _require_finite("AipState", self.theta, self.theta_dot)


@dataclass(frozen=True)
class HumanCommand:
    """One sampled pilot actuation.

    ``ankle_torque`` is reported in the torque convention tau = cop * m * g
    (torque magnitude commanded through the feet); in the forward-positive
    pitch convention used by the integrator this torque acts to *restore*
    the pendulum, so dynamics consume it with the opposite sign.
    """

    cop: float            # m, center of pressure ahead of the ankle
    com_disp: float = 0.0  # m, CoM horizontal displacement (spring input)

    def __post_init__(self) -> None:
        _require_finite("HumanCommand", self.cop, self.com_disp)

    def ankle_torque(self, human: HumanParams) -> float:
        """N*m, equivalent ankle torque for this CoP."""
        return self.cop * human.m_body * human.g

    def within_support(self, poly: SupportPolygon) -> bool:
        return poly.p_min <= self.cop <= poly.p_max


# Default parameter profile shipped with the package.
SATYRR_PROFILE = {
    "human": {"m_body": 52.0, "h_com": 1.10, "h_ankle": 0.0, "g": 9.81},
    "robot": {"m_body": 12.6, "m_base": 1.61, "h_com": 0.37, "g": 9.81,
              "wheel_radius": 0.05},
    "support_polygon": {"p_min": -0.05, "p_max": 0.15},
}


def profile_from_dict(data: dict) -> tuple[HumanParams, RobotParams, SupportPolygon]:
    """Build a (human, robot, support) triple from a profile mapping."""
    human = HumanParams(**data.get("human", SATYRR_PROFILE["human"]))
    robot = RobotParams(**data.get("robot", SATYRR_PROFILE["robot"]))
    poly = SupportPolygon(**data.get("support_polygon", SATYRR_PROFILE["support_polygon"]))
    return human, robot, poly


def load_profile(path: str | Path | None = None) -> tuple[HumanParams, RobotParams, SupportPolygon]:
    """Load a JSON parameter profile; None gives the built-in default."""
    if path is None:
        return profile_from_dict(SATYRR_PROFILE)
    data = json.loads(Path(path).read_text())
    return profile_from_dict(data)
