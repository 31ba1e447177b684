"""Episode orchestration: spawning, the perceive-decide-act loop, training
epochs with end-of-life replay, and evaluation cohorts.

Time is kept as an integer count of dt steps so trajectory timestamps and
action boundaries are exact.  Every action interval spans a whole number of
steps, floor(T / (n_t dt)), recomputed from the current speed after each
action when the speed adapts to the curvature.

All randomness flows from one seed through named sub-streams (spawn,
exploration, weight init, replay sampling), so cohorts evaluated from the
same seed share spawns across policies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .environment import (ConcentrationField, FlowFieldSpec, concentration_at,
                          flow_at)
from .errors import ConfigurationError, TrainingFault
from .geometry import (ActionSet, SwimmerState, curvature_center,
                       speed_for_curvature)
from .perception import (PerceptionHistory, PerceptionRecord,
                         action_interval_steps, average_period, compute_reward,
                         normalize_input)
from .policies import PolicyDecision, epsilon_greedy, greedy_strategy, swinging_pattern
from .qnet import (AdamOptimizer, Experience, QNetwork, ReplayBuffer,
                   train_step_arrays)

# named randomness sub-streams, combined with the run seed
STREAM_SPAWN = 1
STREAM_EXPLORE = 2
STREAM_INIT = 3
STREAM_SAMPLE = 4

LIFESPAN_END = "lifespan_end"
REACHED_SOURCE = "reached_source"

POLICIES = ("qnet", "greedy", "swinging")


def substream(seed: int, stream: int, *extra: int) -> np.random.Generator:
    """Independent generator for one named sub-stream of a run seed."""
    return np.random.default_rng(np.random.SeedSequence([seed, stream, *extra]))


@dataclass(frozen=True, slots=True)
class RectSpawn:
    """Uniform spawn positions over an axis-aligned rectangle."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def draw(self, rng: np.random.Generator) -> tuple[float, float]:
        return (float(rng.uniform(self.xmin, self.xmax)),
                float(rng.uniform(self.ymin, self.ymax)))


@dataclass(frozen=True, slots=True)
class CircleSpawn:
    """Uniform spawn positions on a circle of fixed radius about the origin."""

    radius: float

    def draw(self, rng: np.random.Generator) -> tuple[float, float]:
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        return (self.radius * math.cos(theta), self.radius * math.sin(theta))


@dataclass(frozen=True)
class EpisodeConfig:
    """Everything one episode needs apart from the policy and its randomness.

    c_k_norm is the gradient used for input normalization and reward scaling;
    it stays the training field's gradient even when testing on another field.
    """

    n_t: int
    dt: float
    t_life: float
    field: ConcentrationField
    flow: FlowFieldSpec
    flow_aware: bool
    actions: ActionSet
    spawn: RectSpawn | CircleSpawn
    seed: int = 0
    c_k_norm: float = 1.0
    source_radius: float = 0.5  # radial-field termination distance

    def __post_init__(self):
        if self.n_t < 1:
            raise ConfigurationError("n_t must be at least 1")
        if self.dt <= 0.0 or self.t_life <= 0.0:
            raise ConfigurationError("dt and t_life must be positive")
        if self.c_k_norm <= 0.0:
            raise ConfigurationError("c_k_norm must be positive")
        if self.source_radius <= 0.0:
            raise ConfigurationError("source_radius must be positive")
        if self.flow_aware and self.flow.kind != "taylor_green":
            raise ConfigurationError("flow_aware requires a taylor_green flow")
        v0 = speed_for_curvature(self.actions, self.actions.kappa1)
        first_interval = action_interval_steps(
            average_period(self.actions, v0), self.n_t, self.dt) * self.dt
        if self.t_life <= first_interval:
            raise ConfigurationError(
                f"t_life {self.t_life} must exceed the action interval {first_interval}")

    @property
    def input_dim(self) -> int:
        return (5 if self.flow_aware else 2) * self.n_t


@dataclass
class EpisodeResult:
    """Outcome of one episode; trajectory rows are (t, x, y, kappa, v, c, action)."""

    gain: float
    terminated: str
    c_first: float
    c_last: float
    centerline: np.ndarray
    action_log: list[PolicyDecision]
    action_steps: list[int]
    trajectory: np.ndarray | None
    final_state: SwimmerState


def _advance_interval(x, y, heading, kappa, speed, n_steps, dt, flow, field,
                      stop_r2, traj, step_offset, action_index):
    """Tight integration loop for one action interval.

    Reproduces flow_at() + step_swimmer() arithmetic exactly (covered by a
    bit-equality test) but avoids per-step object construction.  Returns
    (x, y, heading, steps_done, hit_source).
    """
    taylor_green = flow.kind == "taylor_green"
    u0 = flow.u0
    k = flow.k
    sin = math.sin
    cos = math.cos
    half = 0.5 * speed * kappa * dt
    chord = (2.0 / kappa) * sin(half)
    turn = (speed * kappa) * dt
    done = 0
    hit = False
    for _ in range(n_steps):
        if taylor_green:
            kx = k * x
            ky = k * y
            u_x = u0 * cos(kx) * sin(ky)
            u_y = -u0 * sin(kx) * cos(ky)
            omega0 = -u0 * k * cos(kx) * cos(ky)
            direction = heading + half
            x = x + chord * cos(direction) + u_x * dt
            y = y + chord * sin(direction) + u_y * dt
            heading = heading + (speed * kappa + omega0) * dt
        else:
            direction = heading + half
            x = x + chord * cos(direction)
            y = y + chord * sin(direction)
            heading = heading + turn
        done += 1
        if traj is not None:
            traj.append(((step_offset + done) * dt, x, y, kappa, speed,
                         concentration_at(field, x, y), action_index))
        if stop_r2 is not None and x * x + y * y < stop_r2:
            hit = True
            break
    return x, y, heading, done, hit


def run_episode(config: EpisodeConfig, policy: str, *, net: QNetwork | None = None,
                buffer: ReplayBuffer | None = None, epsilon: float = 0.0,
                spawn_rng: np.random.Generator,
                explore_rng: np.random.Generator | None = None,
                record_trajectory: bool = False) -> EpisodeResult:
    """Run one swimmer for one lifespan.

    The swimmer spawns uniformly in the configured region with a uniform
    heading, acts every action interval, and terminates at t_life or, on the
    radial field, as soon as it comes within source_radius of the origin.
    Experiences (s, a, r, s') are stored in the buffer when one is given.
    """
    if policy not in POLICIES:
        raise ConfigurationError(f"unknown policy {policy!r}")
    if policy == "qnet" and net is None:
        raise ConfigurationError("policy 'qnet' needs a network")

    actions = config.actions
    dt = config.dt
    n_t = config.n_t
    field_ = config.field
    flow = config.flow
    total_steps = round(config.t_life / dt)
    stop_r2 = config.source_radius ** 2 if field_.kind == "radial" else None
    flow_for_input = flow if config.flow_aware else None

    x, y = config.spawn.draw(spawn_rng)
    heading = float(spawn_rng.uniform(0.0, 2.0 * math.pi))
    kappa = actions.kappa1
    v = speed_for_curvature(actions, kappa)

    c = concentration_at(field_, x, y)
    c_first = c
    fs = flow_at(flow, x, y)
    history = PerceptionHistory.bootstrap(
        PerceptionRecord(c, kappa, fs.u_x, fs.u_y, fs.omega0), n_t)
    state_vec = normalize_input(history, actions, config.c_k_norm, flow_for_input)

    traj: list | None = [] if record_trajectory else None
    centerline: list[tuple[float, float]] = []
    action_log: list[PolicyDecision] = []
    action_steps: list[int] = []
    step = 0
    action_counter = 0
    terminated = LIFESPAN_END

    def decide(current_kappa: float) -> PolicyDecision:
        if policy == "qnet":
            return epsilon_greedy(net.forward(state_vec), epsilon, explore_rng)
        if policy == "greedy":
            next_kappa = greedy_strategy(history, current_kappa, actions)
        else:
            next_kappa = swinging_pattern(action_counter, n_t, actions)
        return PolicyDecision(actions.action_for_kappa(next_kappa), False)

    def apply(decision: PolicyDecision) -> None:
        nonlocal kappa, v, action_counter
        kappa = actions.kappa_for_action(decision.action_index)
        v = speed_for_curvature(actions, kappa)
        action_counter += 1
        action_log.append(decision)
        action_steps.append(step)
        centerline.append(curvature_center(
            SwimmerState(x, y, heading, kappa, v, step * dt)))

    decision = decide(kappa)
    apply(decision)
    pending_state = state_vec
    pending_action = decision.action_index
    if traj is not None:
        traj.append((0.0, x, y, kappa, v, c, decision.action_index))

    while step < total_steps:
        interval = action_interval_steps(average_period(actions, v), n_t, dt)
        n_run = min(interval, total_steps - step)
        x, y, heading, done, hit = _advance_interval(
            x, y, heading, kappa, v, n_run, dt, flow, field_, stop_r2,
            traj, step, decision.action_index)
        step += done
        if hit:
            terminated = REACHED_SOURCE
            break
        if done < interval:
            break  # lifespan ended inside the interval; no further action
        # action boundary: sense, learn, decide
        c_new = concentration_at(field_, x, y)
        fs = flow_at(flow, x, y)
        if buffer is not None:
            reward = compute_reward(c_new, history, actions, config.c_k_norm)
        history.push(PerceptionRecord(c_new, kappa, fs.u_x, fs.u_y, fs.omega0))
        state_vec = normalize_input(history, actions, config.c_k_norm, flow_for_input)
        if buffer is not None:
            buffer.push(Experience(pending_state, pending_action, reward, state_vec))
        if step >= total_steps:
            break
        decision = decide(kappa)
        apply(decision)
        pending_state = state_vec
        pending_action = decision.action_index

    c_last = concentration_at(field_, x, y)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(heading)):
        raise TrainingFault(f"non-finite swimmer state at step {step}")
    trajectory = np.asarray(traj) if traj is not None else None
    return EpisodeResult(
        gain=c_last - c_first,
        terminated=terminated,
        c_first=c_first,
        c_last=c_last,
        centerline=np.asarray(centerline),
        action_log=action_log,
        action_steps=action_steps,
        trajectory=trajectory,
        final_state=SwimmerState(x, y, heading, kappa, v, step * dt),
    )


@dataclass(frozen=True)
class TrainingSchedule:
    """Epoch count plus exploration, learning-rate, and replay settings.

    The learning rate drops once, by lr_decay_factor, at lr_drop_epoch
    (defaults to the midpoint).  Exploration decays geometrically per epoch
    down to epsilon_floor.
    """

    epochs: int
    epsilon_start: float = 1.0
    epsilon_floor: float = 0.1
    epsilon_decay: float = 0.998
    lr_base: float = 0.01
    lr_decay_factor: float = 0.1
    lr_drop_epoch: int | None = None
    gamma: float = 0.98
    hidden_layers: int = 3
    hidden_nodes: int = 24
    updates_per_epoch: int = 64
    minibatch_size: int = 32
    buffer_capacity: int = 50_000

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError("nothing to train: epochs must be at least 1")
        if not 0.0 <= self.epsilon_floor <= self.epsilon_start <= 1.0:
            raise ConfigurationError("need 0 <= epsilon_floor <= epsilon_start <= 1")
        if not 0.0 < self.epsilon_decay < 1.0:
            raise ConfigurationError("epsilon_decay must lie in (0, 1)")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigurationError("gamma must lie in [0, 1)")
        if self.lr_base <= 0.0 or not 0.0 < self.lr_decay_factor <= 1.0:
            raise ConfigurationError("bad learning-rate schedule")
        if min(self.hidden_layers, self.hidden_nodes, self.updates_per_epoch,
               self.minibatch_size, self.buffer_capacity) < 1:
            raise ConfigurationError("schedule counts must be at least 1")

    def epsilon_for_epoch(self, epoch: int) -> float:
        return max(self.epsilon_floor, self.epsilon_start * self.epsilon_decay ** epoch)

    def lr_for_epoch(self, epoch: int) -> float:
        drop = self.lr_drop_epoch if self.lr_drop_epoch is not None else self.epochs // 2
        return self.lr_base * (self.lr_decay_factor if epoch >= drop else 1.0)


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    gain: float
    mean_loss: float
    epsilon: float


def train_agent(schedule: TrainingSchedule, config: EpisodeConfig,
                seed: int | None = None) -> tuple[QNetwork, list[EpochStats]]:
    """Train a fresh network: one episode per epoch, then replay updates.

    Returns the trained network and the per-epoch (gain, mean loss, epsilon)
    curve.  Deterministic for a fixed seed.
    """
    if seed is None:
        seed = config.seed
    init_rng = substream(seed, STREAM_INIT)
    spawn_rng = substream(seed, STREAM_SPAWN)
    explore_rng = substream(seed, STREAM_EXPLORE)
    sample_rng = substream(seed, STREAM_SAMPLE)

    layer_sizes = [config.input_dim] + \
        [schedule.hidden_nodes] * schedule.hidden_layers + [2]
    net = QNetwork(layer_sizes, rng=init_rng)
    optimizer = AdamOptimizer(net)
    buffer = ReplayBuffer(schedule.buffer_capacity)

    curve: list[EpochStats] = []
    for epoch in range(schedule.epochs):
        eps = schedule.epsilon_for_epoch(epoch)
        lr = schedule.lr_for_epoch(epoch)
        try:
            result = run_episode(config, "qnet", net=net, buffer=buffer, epsilon=eps,
                                 spawn_rng=spawn_rng, explore_rng=explore_rng)
            losses = []
            for _ in range(schedule.updates_per_epoch):
                batch = buffer.sample_arrays(schedule.minibatch_size, sample_rng)
                if batch is None:
                    break  # not enough experience yet
                losses.append(train_step_arrays(net, optimizer, *batch,
                                                schedule.gamma, lr))
        except TrainingFault as fault:
            raise TrainingFault(f"epoch {epoch}: {fault}") from fault
        if not net.all_finite():
            raise TrainingFault(f"epoch {epoch}: non-finite network parameter")
        mean_loss = sum(losses) / len(losses) if losses else math.nan
        curve.append(EpochStats(epoch, result.gain, mean_loss, eps))
    return net, curve


@dataclass
class CohortResult:
    """Per-cell gains of independent evaluation episodes plus summary stats."""

    gains: np.ndarray
    mean: float
    variance: float
    results: list[EpisodeResult]


def evaluate_cohort(config: EpisodeConfig, policy: str, n_cells: int, *,
                    net: QNetwork | None = None, seed: int | None = None,
                    record: bool = True) -> CohortResult:
    """Evaluate a policy over n_cells independent spawns at epsilon = 0.

    No experience is stored and the network is only read.  Cell i draws its
    spawn from the sub-stream (seed, spawn, i), so cohorts with equal seeds
    are paired across policies.
    """
    if n_cells < 1:
        raise ConfigurationError("n_cells must be at least 1")
    if seed is None:
        seed = config.seed
    results = []
    for cell in range(n_cells):
        spawn_rng = substream(seed, STREAM_SPAWN, cell)
        results.append(run_episode(config, policy, net=net, buffer=None, epsilon=0.0,
                                   spawn_rng=spawn_rng, record_trajectory=record))
    gains = np.array([r.gain for r in results])
    return CohortResult(gains=gains, mean=float(gains.mean()),
                        variance=float(gains.var()), results=results)
