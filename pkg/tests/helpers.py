"""Independent oracles and shared builders for the test suite.

Everything here is deliberately written on a different code path than the
package (plain Python loops, math.tanh, algebraic circle fit) so the tests
check the implementation against independent arithmetic.
"""

from __future__ import annotations

import math

import numpy as np

from chemoswim import (ActionSet, ConcentrationField, EpisodeConfig,
                       FlowFieldSpec, NO_FLOW, RectSpawn)


def reference_forward(weights, biases, x):
    """Affine-tanh chain evaluated with plain Python loops (forward oracle)."""
    a = [float(v) for v in x]
    last = len(weights) - 1
    for li, (w, b) in enumerate(zip(weights, biases)):
        n_in, n_out = w.shape
        z = []
        for j in range(n_out):
            s = float(b[j])
            for i in range(n_in):
                s += a[i] * float(w[i, j])
            z.append(s)
        a = [math.tanh(v) for v in z] if li < last else z
    return np.array(a)


def reference_forward_batch(weights, biases, states):
    return np.stack([reference_forward(weights, biases, row) for row in states])


def taken_action_mse(weights, biases, states, actions, targets):
    """Batch loss evaluated through the forward oracle."""
    q = reference_forward_batch(weights, biases, states)
    residuals = [q[i, a] - t for i, (a, t) in enumerate(zip(actions, targets))]
    return sum(r * r for r in residuals) / len(residuals)


def finite_difference_grads(net, states, actions, targets, h=1e-5):
    """Central finite differences of the batch loss over every parameter."""
    def loss_now():
        return taken_action_mse(net.weights, net.biases, states, actions, targets)

    grads_w = [np.zeros_like(w) for w in net.weights]
    grads_b = [np.zeros_like(b) for b in net.biases]
    for arr, grad in list(zip(net.weights, grads_w)) + list(zip(net.biases, grads_b)):
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index
            orig = arr[ix]
            arr[ix] = orig + h
            plus = loss_now()
            arr[ix] = orig - h
            minus = loss_now()
            arr[ix] = orig
            grad[ix] = (plus - minus) / (2.0 * h)
    return grads_w, grads_b


def gradient_rel_error(a, b):
    """Scaled error |a - b| / max(1, |a|, |b|), elementwise maximum."""
    worst = 0.0
    for ga, gb in zip(a, b):
        denom = np.maximum(1.0, np.maximum(np.abs(ga), np.abs(gb)))
        worst = max(worst, float(np.max(np.abs(ga - gb) / denom)))
    return worst


def fit_circle(points):
    """Algebraic least-squares circle fit; returns (cx, cy, radius)."""
    pts = np.asarray(points, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    a = np.column_stack([2.0 * x, 2.0 * y, np.ones(len(pts))])
    b = x ** 2 + y ** 2
    (cx, cy, c0), *_ = np.linalg.lstsq(a, b, rcond=None)
    return float(cx), float(cy), math.sqrt(c0 + cx ** 2 + cy ** 2)


def circle_fit_residual(points):
    """Max |distance-to-center - radius| relative to the fitted radius."""
    cx, cy, radius = fit_circle(points)
    pts = np.asarray(points, dtype=float)
    dist = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)
    return float(np.max(np.abs(dist - radius)) / radius)


# standard builders (paper-default parameter values)

def default_actions(adaptive=False):
    if adaptive:
        return ActionSet(3.0, 5.0, 1.1, 0.9, adaptive_speed=True)
    return ActionSet.constant_speed(3.0, 5.0, 1.0)


def linear_field():
    return ConcentrationField("linear", 1.0, 20.0)


def radial_field():
    return ConcentrationField("radial", 1.0, 100.0)


def tg_flow():
    return FlowFieldSpec("taylor_green", 0.1, math.pi / 10.0)


def linear_config(n_t=4, t_life=200.0, adaptive=False, seed=0):
    return EpisodeConfig(n_t=n_t, dt=0.02, t_life=t_life, field=linear_field(),
                         flow=NO_FLOW, flow_aware=False,
                         actions=default_actions(adaptive),
                         spawn=RectSpawn(-10.0, 10.0, -10.0, 10.0), seed=seed)


def tg_config(n_t=4, t_life=400.0, flow_aware=True, seed=0):
    return EpisodeConfig(n_t=n_t, dt=0.02, t_life=t_life, field=linear_field(),
                         flow=tg_flow(), flow_aware=flow_aware,
                         actions=default_actions(),
                         spawn=RectSpawn(0.0, 20.0, 0.0, 20.0), seed=seed)
