"""Action selection: epsilon-greedy over Q-values plus two analytic baselines.

The greedy baseline switches to kappa2 when the newest concentration tops its
window and to kappa1 when it bottoms it; the swinging baseline alternates
curvature every n_t/2 actions, which closes the centerline into a circle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .perception import PerceptionHistory


@dataclass(frozen=True, slots=True)
class PolicyDecision:
    """Chosen action index (0 -> kappa1, 1 -> kappa2) and how it was picked."""

    action_index: int
    was_exploratory: bool
    q_values: tuple[float, ...] | None = None


def epsilon_greedy(q_values, epsilon: float, rng: np.random.Generator | None) -> PolicyDecision:
    """Pick uniformly among all actions with probability epsilon, otherwise
    the argmax (ties broken toward the lower index)."""
    q = np.asarray(q_values, dtype=float)
    if q.ndim != 1 or q.shape[0] < 2:
        raise ValueError("need at least two q-values")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    logged = tuple(float(v) for v in q)
    if epsilon > 0.0 and rng.random() < epsilon:
        return PolicyDecision(int(rng.integers(q.shape[0])), True, logged)
    return PolicyDecision(int(np.argmax(q)), False, logged)


def greedy_strategy(history: PerceptionHistory, current_kappa: float, actions) -> float:
    """kappa2 if the newest concentration is the window maximum, kappa1 if it
    is the minimum, otherwise the current curvature.  Comparisons are exact;
    when all window values are equal the maximum clause wins."""
    cs = history.concentrations()
    newest = cs[0]
    if newest == max(cs):
        return actions.kappa2
    if newest == min(cs):
        return actions.kappa1
    return current_kappa


def swinging_pattern(action_counter: int, n_t: int, actions) -> float:
    """Open-loop alternation: kappa1 for the first n_t/2 actions of each
    period of n_t actions, kappa2 for the rest."""
    if n_t % 2 != 0:
        raise ConfigurationError(f"swinging pattern needs an even n_t, got {n_t}")
    if action_counter < 0:
        raise ValueError("action counter must be non-negative")
    return actions.kappa1 if action_counter % n_t < n_t // 2 else actions.kappa2
