"""Dense Q-network with hand-rolled backpropagation, Adam updates, the replay
buffer, and a plain-text weight file format.

Network shape: input -> n_hidden tanh layers -> linear output, one output per
action.  The squared loss is taken on the taken-action outputs only, so the
other outputs receive zero gradient, and the Bellman targets are computed
with the current parameters before the update (no separate target network)
and treated as constants.

The weight file is line-oriented text.  Every number is printed with 17
significant digits, which round-trips float64 exactly, so loading reproduces
forward outputs bit for bit on the same platform.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import TrainingFault

WEIGHT_FORMAT = "chemoswim-qnet"
WEIGHT_FORMAT_VERSION = 1


class Experience(NamedTuple):
    """One stored transition (s, a, r, s')."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray


def format_float(x: float) -> str:
    """17 significant digits: parses back to the identical float64."""
    return f"{float(x):.17g}"


class QNetwork:
    """Fully connected tanh network with a linear output layer.

    layer_sizes lists every layer width, input first and output last.  With
    an rng the weights start Glorot-uniform and the biases zero; without one
    everything starts zero (useful for tests).
    """

    def __init__(self, layer_sizes: Sequence[int], rng: np.random.Generator | None = None):
        sizes = [int(n) for n in layer_sizes]
        if len(sizes) < 2 or any(n < 1 for n in sizes):
            raise ValueError(f"bad layer sizes {sizes}")
        self.layer_sizes = sizes
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            if rng is None:
                w = np.zeros((n_in, n_out))
            else:
                limit = math.sqrt(6.0 / (n_in + n_out))  # Glorot uniform
                w = rng.uniform(-limit, limit, size=(n_in, n_out))
            self.weights.append(w)
            self.biases.append(np.zeros(n_out))

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_actions(self) -> int:
        return self.layer_sizes[-1]

    @property
    def activations(self) -> list[str]:
        return ["tanh"] * (len(self.layer_sizes) - 2) + ["identity"]

    def forward(self, x) -> np.ndarray:
        """Q-values for one input vector or a batch of row vectors."""
        a = np.asarray(x, dtype=float)
        if a.shape[-1] != self.input_dim:
            raise ValueError(
                f"input dimension {a.shape[-1]} does not match network input {self.input_dim}")
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w + b
            if i < last:
                a = np.tanh(a)
        return a

    def copy(self) -> "QNetwork":
        clone = QNetwork(self.layer_sizes)
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    def all_finite(self) -> bool:
        return all(np.isfinite(w).all() for w in self.weights) and \
            all(np.isfinite(b).all() for b in self.biases)


def q_target(reward: float, next_q, gamma: float) -> float:
    """Bellman target r + gamma * max_a Q(s', a)."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    return float(reward) + gamma * float(np.max(next_q))


def loss_and_gradients(net: QNetwork, states: np.ndarray, actions: np.ndarray,
                       targets: np.ndarray):
    """Mean squared error on the taken-action outputs and its exact gradient.

    Returns (loss, (grads_w, grads_b)) with gradients shaped like the
    network's weights and biases.
    """
    activations = [np.asarray(states, dtype=float)]
    last = len(net.weights) - 1
    a = activations[0]
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        a = np.tanh(z) if i < last else z
        activations.append(a)
    q = activations[-1]
    rows = np.arange(q.shape[0])
    residual = q[rows, actions] - targets
    loss = float(np.mean(residual ** 2))

    delta = np.zeros_like(q)
    delta[rows, actions] = 2.0 * residual / q.shape[0]
    grads_w = [np.empty(0)] * len(net.weights)
    grads_b = [np.empty(0)] * len(net.biases)
    for i in range(last, -1, -1):
        grads_w[i] = activations[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ net.weights[i].T) * (1.0 - activations[i] ** 2)
    return loss, (grads_w, grads_b)


class AdamOptimizer:
    """Adam moments for one network; state persists across steps."""

    def __init__(self, net: QNetwork, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m_w = [np.zeros_like(w) for w in net.weights]
        self.v_w = [np.zeros_like(w) for w in net.weights]
        self.m_b = [np.zeros_like(b) for b in net.biases]
        self.v_b = [np.zeros_like(b) for b in net.biases]

    def step(self, net: QNetwork, grads, lr: float) -> None:
        grads_w, grads_b = grads
        self.t += 1
        corr1 = 1.0 - self.beta1 ** self.t
        corr2 = 1.0 - self.beta2 ** self.t
        params = zip(net.weights + net.biases,
                     grads_w + grads_b,
                     self.m_w + self.m_b,
                     self.v_w + self.v_b)
        for p, g, m, v in params:
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= lr * (m / corr1) / (np.sqrt(v / corr2) + self.eps)


def train_step_arrays(net: QNetwork, optimizer: AdamOptimizer, states: np.ndarray,
                      actions: np.ndarray, rewards: np.ndarray,
                      next_states: np.ndarray, gamma: float, lr: float) -> float:
    """One Q-learning step on pre-assembled batch arrays; pre-step loss.

    Per-sample targets r + gamma max_a Q(s', a) are evaluated with the
    current network before the update and treated as constants.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    next_q = net.forward(next_states)
    targets = rewards + gamma * next_q.max(axis=1)
    loss, grads = loss_and_gradients(net, states, actions, targets)
    if not math.isfinite(loss):
        raise TrainingFault(f"non-finite minibatch loss {loss!r}")
    optimizer.step(net, grads, lr)
    return loss


def train_minibatch(net: QNetwork, optimizer: AdamOptimizer, batch: Sequence[Experience],
                    gamma: float, lr: float) -> float:
    """One Q-learning step on a minibatch of experiences; pre-step loss."""
    if not batch:
        raise ValueError("empty minibatch")
    states = np.stack([e.state for e in batch])
    actions = np.fromiter((e.action for e in batch), dtype=np.intp, count=len(batch))
    rewards = np.fromiter((e.reward for e in batch), dtype=float, count=len(batch))
    next_states = np.stack([e.next_state for e in batch])
    return train_step_arrays(net, optimizer, states, actions, rewards, next_states,
                             gamma, lr)


class ReplayBuffer:
    """Bounded experience store with oldest-first eviction.

    Storage is columnar (one row per experience) so minibatches can be
    gathered without restacking; sample() still hands out Experience tuples.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.capacity = capacity
        self._states: np.ndarray | None = None
        self._next_states: np.ndarray | None = None
        self._actions = np.empty(capacity, dtype=np.intp)
        self._rewards = np.empty(capacity)
        self._size = 0
        self._next = 0  # overwrite position once full

    def push(self, experience: Experience) -> None:
        state = np.asarray(experience.state, dtype=float)
        if self._states is None:
            dim = state.shape[-1]
            self._states = np.empty((self.capacity, dim))
            self._next_states = np.empty((self.capacity, dim))
        if self._size < self.capacity:
            pos = self._size
            self._size += 1
        else:
            pos = self._next
            self._next = (self._next + 1) % self.capacity
        self._states[pos] = state
        self._actions[pos] = experience.action
        self._rewards[pos] = experience.reward
        self._next_states[pos] = experience.next_state

    def _draw(self, size: int, rng: np.random.Generator) -> np.ndarray | None:
        if size < 1:
            raise ValueError("sample size must be at least 1")
        if size > self._size:
            return None
        return rng.choice(self._size, size=size, replace=False, shuffle=False)

    def sample(self, size: int, rng: np.random.Generator) -> list[Experience] | None:
        """Uniform sample without replacement; None when not enough stored."""
        idx = self._draw(size, rng)
        if idx is None:
            return None
        return [Experience(self._states[i].copy(), int(self._actions[i]),
                           float(self._rewards[i]), self._next_states[i].copy())
                for i in idx]

    def sample_arrays(self, size: int, rng: np.random.Generator):
        """Like sample(), but returns (states, actions, rewards, next_states)
        batch arrays directly; draws from the same random stream."""
        idx = self._draw(size, rng)
        if idx is None:
            return None
        return (self._states[idx], self._actions[idx], self._rewards[idx],
                self._next_states[idx])

    def __len__(self) -> int:
        return self._size

    def __iter__(self):
        for i in range(self._size):
            yield Experience(self._states[i].copy(), int(self._actions[i]),
                             float(self._rewards[i]), self._next_states[i].copy())


class WeightFormatError(Exception):
    """Weight file does not conform to the documented format."""


def save_weights(net: QNetwork, path) -> None:
    """Write the versioned plain-text weight file."""
    lines = [
        f"{WEIGHT_FORMAT} {WEIGHT_FORMAT_VERSION}",
        "layer_sizes " + " ".join(str(n) for n in net.layer_sizes),
        "activations " + " ".join(net.activations),
    ]
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        lines.append(f"layer {i} {w.shape[0]} {w.shape[1]}")
        for row in w:
            lines.append(" ".join(format_float(v) for v in row))
        lines.append(" ".join(format_float(v) for v in b))
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n")


def load_weights(path) -> QNetwork:
    """Read a weight file back; strict about structure and counts."""
    lines = Path(path).read_text().splitlines()
    pos = 0

    def next_line() -> str:
        nonlocal pos
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        if pos >= len(lines):
            raise WeightFormatError("unexpected end of weight file")
        line = lines[pos].strip()
        pos += 1
        return line

    header = next_line().split()
    if header[:1] != [WEIGHT_FORMAT] or len(header) != 2:
        raise WeightFormatError(f"not a {WEIGHT_FORMAT} file")
    if header[1] != str(WEIGHT_FORMAT_VERSION):
        raise WeightFormatError(f"unsupported format version {header[1]}")

    sizes_line = next_line().split()
    if sizes_line[0] != "layer_sizes":
        raise WeightFormatError("missing layer_sizes line")
    try:
        sizes = [int(tok) for tok in sizes_line[1:]]
    except ValueError as exc:
        raise WeightFormatError(f"bad layer size: {exc}") from exc
    if len(sizes) < 2:
        raise WeightFormatError("need at least input and output layer sizes")

    acts_line = next_line().split()
    if acts_line[0] != "activations":
        raise WeightFormatError("missing activations line")
    expected_acts = ["tanh"] * (len(sizes) - 2) + ["identity"]
    if acts_line[1:] != expected_acts:
        raise WeightFormatError(f"unsupported activations {acts_line[1:]}")

    net = QNetwork(sizes)

    def parse_row(n: int) -> np.ndarray:
        tokens = next_line().split()
        if len(tokens) != n:
            raise WeightFormatError(f"expected {n} numbers, found {len(tokens)}")
        try:
            return np.array([float(tok) for tok in tokens])
        except ValueError as exc:
            raise WeightFormatError(f"bad number: {exc}") from exc

    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        marker = next_line().split()
        if marker != ["layer", str(i), str(n_in), str(n_out)]:
            raise WeightFormatError(f"bad layer marker {' '.join(marker)!r}")
        for r in range(n_in):
            net.weights[i][r] = parse_row(n_out)
        net.biases[i] = parse_row(n_out)
    if next_line() != "end":
        raise WeightFormatError("missing end marker")
    return net
