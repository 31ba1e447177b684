"""Chemoattractant concentration fields and the Taylor-Green background flow.

The linear field rises along +y, the radial field falls with distance from
the origin.  Neither is clamped: concentrations may go negative far from the
source, which is harmless because rewards use differences only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError


@dataclass(frozen=True, slots=True)
class ConcentrationField:
    """c = gradient * y + offset (linear) or offset - gradient * |r| (radial)."""

    kind: str  # "linear" | "radial"
    gradient: float
    offset: float

    def __post_init__(self):
        if self.kind not in ("linear", "radial"):
            raise ConfigurationError(f"unknown concentration field kind {self.kind!r}")
        if self.gradient <= 0.0:
            raise ConfigurationError("concentration gradient must be positive")


@dataclass(frozen=True, slots=True)
class FlowFieldSpec:
    """Background flow description; kind "none" means quiescent fluid."""

    kind: str = "none"  # "none" | "taylor_green"
    u0: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "taylor_green"):
            raise ConfigurationError(f"unknown flow kind {self.kind!r}")
        if self.kind == "taylor_green":
            if self.u0 < 0.0:
                raise ConfigurationError("flow amplitude u0 must be non-negative")
            if self.k <= 0.0:
                raise ConfigurationError("flow wavenumber k must be positive")


@dataclass(frozen=True, slots=True)
class FlowSample:
    """Local flow velocity and the solid-body rotation rate (half the curl)."""

    u_x: float
    u_y: float
    omega0: float


ZERO_FLOW = FlowSample(0.0, 0.0, 0.0)
NO_FLOW = FlowFieldSpec()


def concentration_at(field: ConcentrationField, x: float, y: float) -> float:
    """Exact field value at (x, y); may be negative, no clamping."""
    if field.kind == "linear":
        return field.gradient * y + field.offset
    return field.offset - field.gradient * math.hypot(x, y)


def flow_at(spec: FlowFieldSpec, x: float, y: float) -> FlowSample:
    """Taylor-Green velocity u = u0 (cos kx sin ky, -sin kx cos ky) and the
    rotation rate omega0 = -u0 k cos kx cos ky; all zero for kind "none"."""
    if spec.kind == "none":
        return ZERO_FLOW
    kx = spec.k * x
    ky = spec.k * y
    return FlowSample(
        u_x=spec.u0 * math.cos(kx) * math.sin(ky),
        u_y=-spec.u0 * math.sin(kx) * math.cos(ky),
        omega0=-spec.u0 * spec.k * math.cos(kx) * math.cos(ky),
    )
