"""Curvature-steered 2D microswimmer chemotaxis learned with a deep Q-network.

A swimmer steers by switching between two path curvatures while sensing a
chemoattractant concentration along its way.  This package provides the path
integrator, concentration and Taylor-Green flow fields, the perception and
reward pipeline, a from-scratch Q-network with experience replay, analytic
baseline policies, and training/evaluation harnesses with a CLI.
"""

from .environment import (ConcentrationField, FlowFieldSpec, FlowSample,
                          NO_FLOW, ZERO_FLOW, concentration_at, flow_at)
from .errors import ConfigurationError, TrainingFault
from .episodes import (CircleSpawn, CohortResult, EpisodeConfig, EpisodeResult,
                       EpochStats, LIFESPAN_END, REACHED_SOURCE, RectSpawn,
                       TrainingSchedule, evaluate_cohort, run_episode,
                       substream, train_agent)
from .geometry import (ActionSet, SwimmerState, curvature_center,
                       speed_for_curvature, step_swimmer)
from .perception import (PerceptionHistory, PerceptionRecord, action_interval,
                         action_interval_steps, average_period, compute_reward,
                         normalize_input)
from .policies import PolicyDecision, epsilon_greedy, greedy_strategy, swinging_pattern
from .qnet import (AdamOptimizer, Experience, QNetwork, ReplayBuffer,
                   WeightFormatError, load_weights, q_target, save_weights,
                   train_minibatch)

__version__ = "0.1.0"

__all__ = [
    "ActionSet", "AdamOptimizer", "CircleSpawn", "CohortResult",
    "ConcentrationField", "ConfigurationError", "EpisodeConfig",
    "EpisodeResult", "EpochStats", "Experience", "FlowFieldSpec", "FlowSample",
    "LIFESPAN_END", "NO_FLOW", "PerceptionHistory", "PerceptionRecord",
    "PolicyDecision", "QNetwork", "REACHED_SOURCE", "RectSpawn",
    "ReplayBuffer", "SwimmerState", "TrainingFault", "TrainingSchedule",
    "WeightFormatError", "ZERO_FLOW", "action_interval",
    "action_interval_steps", "average_period", "compute_reward",
    "concentration_at", "curvature_center", "epsilon_greedy",
    "evaluate_cohort", "flow_at", "greedy_strategy", "load_weights",
    "normalize_input", "q_target", "run_episode", "save_weights",
    "speed_for_curvature", "step_swimmer", "substream", "swinging_pattern",
    "train_agent", "train_minibatch",
]
