"""Curvature-steered swimming paths in the plane.

The heading angle phi is the tangent direction: t = (cos phi, sin phi) and
n = (-sin phi, cos phi), so positive curvature turns the path counter-
clockwise and the instantaneous turning circle sits at r + n / kappa.

One step of self-propulsion is applied as the exact chord of that circle:
a displacement of length (2 / kappa) sin(v kappa dt / 2) along the direction
phi + v kappa dt / 2.  This is exact for constant curvature, so circles close
to rounding error at any step size.  A background flow advects the position
by explicit Euler (u_e dt) and adds its rotation rate omega0 to the heading
rate only; the chord still uses the self-propulsion angle v kappa dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .environment import FlowSample
from .errors import ConfigurationError


@dataclass(frozen=True, slots=True)
class SwimmerState:
    """Pose and motion parameters of one swimmer at one instant."""

    x: float
    y: float
    heading: float  # tangent angle, radians
    kappa: float    # current path curvature, > 0
    speed: float
    time: float

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def tangent(self) -> tuple[float, float]:
        return (math.cos(self.heading), math.sin(self.heading))

    @property
    def normal(self) -> tuple[float, float]:
        return (-math.sin(self.heading), math.cos(self.heading))


@dataclass(frozen=True, slots=True)
class ActionSet:
    """The two legal path curvatures and their paired swimming speeds.

    With adaptive_speed off the speed is constant, so v1 and v2 must agree.
    Action indices map 0 -> kappa1, 1 -> kappa2.
    """

    kappa1: float
    kappa2: float
    v1: float
    v2: float
    adaptive_speed: bool = False

    def __post_init__(self):
        if not 0.0 < self.kappa1 < self.kappa2:
            raise ConfigurationError(
                f"curvatures must satisfy 0 < kappa1 < kappa2, got {self.kappa1}, {self.kappa2}")
        if self.v1 <= 0.0 or self.v2 <= 0.0:
            raise ConfigurationError("swimming speeds must be positive")
        if not self.adaptive_speed and self.v1 != self.v2:
            raise ConfigurationError("constant-speed action set requires v1 == v2")

    @classmethod
    def constant_speed(cls, kappa1: float, kappa2: float, v: float) -> "ActionSet":
        return cls(kappa1, kappa2, v, v, adaptive_speed=False)

    @property
    def kappa_bar(self) -> float:
        return 0.5 * (self.kappa1 + self.kappa2)

    def kappa_for_action(self, index: int) -> float:
        if index == 0:
            return self.kappa1
        if index == 1:
            return self.kappa2
        raise ValueError(f"action index {index} out of range for two actions")

    def action_for_kappa(self, kappa: float) -> int:
        if kappa == self.kappa1:
            return 0
        if kappa == self.kappa2:
            return 1
        raise ValueError(f"curvature {kappa!r} is not one of the legal values")


def step_swimmer(state: SwimmerState, flow: FlowSample, dt: float) -> SwimmerState:
    """Advance one integration step of size dt.

    The heading advances by (v kappa + omega0) dt; the position advances by
    the arc chord of the self-propulsion plus Euler advection u_e dt.  The
    flow sample must be evaluated at the pre-step position.
    """
    half = 0.5 * state.speed * state.kappa * dt
    chord = (2.0 / state.kappa) * math.sin(half)
    direction = state.heading + half
    return SwimmerState(
        x=state.x + chord * math.cos(direction) + flow.u_x * dt,
        y=state.y + chord * math.sin(direction) + flow.u_y * dt,
        heading=state.heading + (state.speed * state.kappa + flow.omega0) * dt,
        kappa=state.kappa,
        speed=state.speed,
        time=state.time + dt,
    )


def curvature_center(state: SwimmerState) -> tuple[float, float]:
    """Center of the current turning circle, r + n / kappa."""
    return (state.x - math.sin(state.heading) / state.kappa,
            state.y + math.cos(state.heading) / state.kappa)


def speed_for_curvature(actions: ActionSet, kappa: float) -> float:
    """Speed paired with a legal curvature (v1 for kappa1, v2 for kappa2)."""
    if kappa == actions.kappa1:
        return actions.v1
    if kappa == actions.kappa2:
        return actions.v2
    raise ValueError(f"curvature {kappa!r} is not one of the legal values")
