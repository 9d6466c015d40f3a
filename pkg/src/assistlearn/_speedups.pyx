# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled rollout kernel for the cart-pole policy loop.

Expression-for-expression twin of ``assistlearn/rl/_rollout_py.py``; both
must produce bit-identical episodes.  Keep edits synchronized.
"""

from libc.math cimport cos, exp, sin, tanh

BACKEND_NAME = "compiled"


def rollout_core(
    double[::1] weights,
    int hidden,
    double pole_length,
    double gravity,
    double cart_mass,
    double pole_mass,
    double force_magnitude,
    double tau,
    double theta_threshold,
    double x_threshold,
    int max_steps,
    double gamma,
    double[::1] uniforms,
    double[:, ::1] out_states,
    long long[::1] out_actions,
):
    """Play one episode; returns (length, discounted_return)."""
    cdef int w1_end = 4 * hidden
    cdef int b1_end = w1_end + hidden
    cdef int w2_end = b1_end + hidden * 2

    cdef double x = -0.05 + 0.1 * uniforms[0]
    cdef double x_dot = -0.05 + 0.1 * uniforms[1]
    cdef double theta = -0.05 + 0.1 * uniforms[2]
    cdef double theta_dot = -0.05 + 0.1 * uniforms[3]

    cdef double total_mass = cart_mass + pole_mass
    cdef double polemass_length = pole_mass * pole_length

    cdef double ret = 0.0
    cdef double discount = 1.0
    cdef int t = 0
    cdef int j, action
    cdef double z, h, logit0, logit1, d, p_right
    cdef double force, cos_t, sin_t, temp, theta_acc, x_acc

    while t < max_steps:
        out_states[t, 0] = x
        out_states[t, 1] = x_dot
        out_states[t, 2] = theta
        out_states[t, 3] = theta_dot

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

        d = logit0 - logit1
        if d > 50.0:
            p_right = 0.0
        elif d < -50.0:
            p_right = 1.0
        else:
            p_right = 1.0 / (1.0 + exp(d))
        action = 1 if uniforms[4 + t] < p_right else 0
        out_actions[t] = action

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
    return t, ret
