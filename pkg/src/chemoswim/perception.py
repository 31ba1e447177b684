"""Sensed history, normalized network inputs, action cadence, and reward.

The agent perceives (concentration, curvature[, flow]) once per action
interval and keeps the last N_T samples, newest first.  Concentration inputs
are window-mean-centered and scaled by kappa_bar / c_k; curvature inputs map
to -1 (kappa1) and +1 (kappa2); flow inputs are scaled by the flow amplitude.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .environment import FlowFieldSpec
from .errors import ConfigurationError


@dataclass(frozen=True, slots=True)
class PerceptionRecord:
    """One sensed sample; flow entries stay zero in flow-blind runs."""

    c: float
    kappa: float
    u_x: float = 0.0
    u_y: float = 0.0
    omega0: float = 0.0


class PerceptionHistory:
    """Ring of the last n_t sensed records, newest first.

    The ring is always full: at spawn time every slot holds the initial
    perception, so the first normalized input is well defined (all
    concentration entries zero after mean-centering).
    """

    __slots__ = ("n_t", "_records")

    def __init__(self, records: Iterable[PerceptionRecord]):
        records = tuple(records)
        if not records:
            raise ConfigurationError("history needs at least one record")
        self.n_t = len(records)
        self._records = deque(records, maxlen=self.n_t)

    @classmethod
    def bootstrap(cls, record: PerceptionRecord, n_t: int) -> "PerceptionHistory":
        if n_t < 1:
            raise ConfigurationError("n_t must be at least 1")
        return cls((record,) * n_t)

    def push(self, record: PerceptionRecord) -> None:
        # maxlen evicts the oldest record from the right
        self._records.appendleft(record)

    @property
    def records(self) -> tuple[PerceptionRecord, ...]:
        return tuple(self._records)

    @property
    def newest(self) -> PerceptionRecord:
        return self._records[0]

    @property
    def oldest(self) -> PerceptionRecord:
        return self._records[-1]

    def concentrations(self) -> list[float]:
        return [r.c for r in self._records]

    def __len__(self) -> int:
        return self.n_t


def average_period(actions, v: float) -> float:
    """Duration of one sweep at the mean curvature: 2 pi / (kappa_bar v)."""
    if v <= 0.0:
        raise ConfigurationError("speed must be positive")
    kappa_bar = 0.5 * (actions.kappa1 + actions.kappa2)
    return 2.0 * math.pi / (kappa_bar * v)


def action_interval_steps(period: float, n_t: int, dt: float) -> int:
    """Integration steps per action interval, floor(T / (n_t dt)), >= 1."""
    if period <= 0.0 or dt <= 0.0:
        raise ConfigurationError("period and dt must be positive")
    if n_t < 1:
        raise ConfigurationError("n_t must be at least 1")
    steps = int(period / (n_t * dt))
    if steps < 1:
        raise ConfigurationError(
            f"dt={dt} too coarse: period {period} leaves no whole step per action")
    return steps


def action_interval(period: float, n_t: int, dt: float) -> float:
    """Action interval as a time; an exact integer multiple of dt."""
    return action_interval_steps(period, n_t, dt) * dt


def normalize_input(history: PerceptionHistory, actions, c_k: float,
                    flow_spec: FlowFieldSpec | None = None) -> np.ndarray:
    """Build the network input vector from a full history, newest slice first.

    Flow-blind: 2 n_t entries (c*, kappa*) per slice.  With flow_spec given,
    5 n_t entries (c*, kappa*, u_x/u0, u_y/u0, omega0/(u0 k)) per slice.
    """
    if c_k <= 0.0:
        raise ConfigurationError("normalization gradient c_k must be positive")
    recs = history.records
    mean_c = sum(r.c for r in recs) / len(recs)
    kappa_bar = 0.5 * (actions.kappa1 + actions.kappa2)
    dkappa = abs(actions.kappa1 - actions.kappa2)
    c_scale = kappa_bar / c_k
    if flow_spec is None:
        out = []
        for r in recs:
            out.append((r.c - mean_c) * c_scale)
            out.append(2.0 * (r.kappa - kappa_bar) / dkappa)
        return np.asarray(out)
    if flow_spec.kind != "taylor_green" or flow_spec.u0 <= 0.0:
        raise ConfigurationError("flow-aware input needs a taylor_green flow with u0 > 0")
    u0 = flow_spec.u0
    w0 = flow_spec.u0 * flow_spec.k
    out = []
    for r in recs:
        out.append((r.c - mean_c) * c_scale)
        out.append(2.0 * (r.kappa - kappa_bar) / dkappa)
        out.append(r.u_x / u0)
        out.append(r.u_y / u0)
        out.append(r.omega0 / w0)
    return np.asarray(out)


def compute_reward(c_new: float, history: PerceptionHistory, actions, c_k: float) -> float:
    """Concentration gained over the history window, normalized by the
    curvature-switch center displacement: (c_new - oldest c) / (n_t c_k
    |1/kappa1 - 1/kappa2|)."""
    if c_k <= 0.0:
        raise ConfigurationError("reward gradient c_k must be positive")
    if actions.kappa1 == actions.kappa2:
        raise ConfigurationError("reward undefined for kappa1 == kappa2")
    switch = abs(1.0 / actions.kappa1 - 1.0 / actions.kappa2)
    return (c_new - history.oldest.c) / (history.n_t * c_k * switch)
