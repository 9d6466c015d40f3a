"""Pure-Python rollout kernel: the fallback twin of the compiled extension.

Both kernels must stay expression-for-expression identical (same operation
order, same libm calls via the ``math`` module here and ``libc.math`` in
the extension) so that episodes agree bit for bit between backends.  Keep
edits synchronized with ``_speedups.pyx``.
"""

from __future__ import annotations

import math

BACKEND_NAME = "python"


def rollout_core(
    weights,      # flat policy vector: W1 (4*H), b1 (H), W2 (H*2), b2 (2)
    hidden,       # H
    pole_length,
    gravity,
    cart_mass,
    pole_mass,
    force_magnitude,
    tau,
    theta_threshold,
    x_threshold,
    max_steps,
    gamma,
    uniforms,     # 4 + max_steps uniform draws in [0, 1)
    out_states,   # (max_steps, 4) float64, written for t < length
    out_actions,  # (max_steps,) int64
):
    """Play one episode; returns (length, discounted_return)."""
    # Scalar math on Python floats is much faster than on numpy scalars and
    # yields the same IEEE doubles; buffers are written in bulk at the end.
    weights = weights.tolist()
    uniforms = uniforms.tolist()
    tanh, exp, cos, sin = math.tanh, math.exp, math.cos, math.sin

    w1_end = 4 * hidden
    b1_end = w1_end + hidden
    w2_end = b1_end + hidden * 2

    x = -0.05 + 0.1 * uniforms[0]
    x_dot = -0.05 + 0.1 * uniforms[1]
    theta = -0.05 + 0.1 * uniforms[2]
    theta_dot = -0.05 + 0.1 * uniforms[3]
    states = []
    actions = []

    total_mass = cart_mass + pole_mass
    polemass_length = pole_mass * pole_length

    ret = 0.0
    discount = 1.0
    t = 0
    while t < max_steps:
        states.append((x, x_dot, theta, theta_dot))

        # hidden tanh layer, then the two-logit head
        logit0 = weights[w2_end]
        logit1 = weights[w2_end + 1]
        for j in range(hidden):
            z = weights[w1_end + j]
            z += weights[j] * x
            z += weights[hidden + j] * x_dot
            z += weights[2 * hidden + j] * theta
            z += weights[3 * hidden + j] * theta_dot
            h = tanh(z)
            logit0 += h * weights[b1_end + 2 * j]
            logit1 += h * weights[b1_end + 2 * j + 1]

        # p(action = right); clamp the logit gap so exp never overflows
        d = logit0 - logit1
        if d > 50.0:
            p_right = 0.0
        elif d < -50.0:
            p_right = 1.0
        else:
            p_right = 1.0 / (1.0 + exp(d))
        action = 1 if uniforms[4 + t] < p_right else 0
        actions.append(action)

        force = force_magnitude if action == 1 else -force_magnitude
        cos_t = cos(theta)
        sin_t = sin(theta)
        temp = (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass
        theta_acc = (gravity * sin_t - cos_t * temp) / (
            pole_length * (4.0 / 3.0 - pole_mass * cos_t * cos_t / total_mass)
        )
        x_acc = temp - polemass_length * theta_acc * cos_t / total_mass

        x = x + tau * x_dot
        x_dot = x_dot + tau * x_acc
        theta = theta + tau * theta_dot
        theta_dot = theta_dot + tau * theta_acc

        ret += discount
        discount *= gamma
        t += 1
        if x > x_threshold or x < -x_threshold or theta > theta_threshold or theta < -theta_threshold:
            break

    out_states[:t] = states
    out_actions[:t] = actions
    return t, ret
