"""Pure-numpy implementations of the per-node 3x3 frame kernels.

Reference lane for the compiled extension: identical signatures, identical
results to round-off.  Arrays are (M, 3, 3) node-major frames and (M, 3)
rate vectors; the skew matrix of a rate vector w is

    A(w) = [[0, w3, -w2], [-w3, 0, w1], [w2, -w1, 0]].
"""

import numpy as np


def cayley_factor(omega, tau):
    """Cay(tau*A(omega)) per node, via the closed form for 3x3 skew matrices.

    With q = tau*omega and s = |q|^2, the inverse in
    (I + A/2)(I - A/2)^{-1} collapses to

        Cay = I + (4*A(q) + 2*(q q^T - s I)) / (4 + s),

    which exists for every q since A(q)^3 = -s A(q).
    """
    q = tau * np.asarray(omega, dtype=float)
    q1, q2, q3 = q[..., 0], q[..., 1], q[..., 2]
    s = q1 * q1 + q2 * q2 + q3 * q3
    d = 1.0 / (4.0 + s)
    C = np.empty(q.shape[:-1] + (3, 3))
    C[..., 0, 0] = 1.0 + (2.0 * q1 * q1 - 2.0 * s) * d
    C[..., 0, 1] = (4.0 * q3 + 2.0 * q1 * q2) * d
    C[..., 0, 2] = (-4.0 * q2 + 2.0 * q1 * q3) * d
    C[..., 1, 0] = (-4.0 * q3 + 2.0 * q2 * q1) * d
    C[..., 1, 1] = 1.0 + (2.0 * q2 * q2 - 2.0 * s) * d
    C[..., 1, 2] = (4.0 * q1 + 2.0 * q2 * q3) * d
    C[..., 2, 0] = (4.0 * q2 + 2.0 * q3 * q1) * d
    C[..., 2, 1] = (-4.0 * q1 + 2.0 * q3 * q2) * d
    C[..., 2, 2] = 1.0 + (2.0 * q3 * q3 - 2.0 * s) * d
    return C


def cayley_apply(p, omega, tau):
    """p @ Cay(tau*A(omega)) nodewise."""
    return np.matmul(p, cayley_factor(omega, tau))


def gram_error(p):
    """max over nodes and entries of |p^T p - I|."""
    g = np.einsum("...ji,...jk->...ik", p, p)
    g[..., 0, 0] -= 1.0
    g[..., 1, 1] -= 1.0
    g[..., 2, 2] -= 1.0
    return float(np.abs(g).max())


def det_error(p):
    """max over nodes of |det(p) - 1|."""
    return float(np.abs(np.linalg.det(p) - 1.0).max())


def tangent_pairings(m, d):
    """Frobenius pairings V_k(m) . d per node, stacked as (..., 3).

    V1 = (0, n3, -n2), V2 = (-n3, 0, n1), V3 = (n2, -n1, 0) built from the
    columns of m; d is a frame-shaped array whose column i acts on n_i.
    """
    out = np.empty(m.shape[:-2] + (3,))
    out[..., 0] = np.einsum("...r,...r->...", m[..., :, 2], d[..., :, 1]) \
        - np.einsum("...r,...r->...", m[..., :, 1], d[..., :, 2])
    out[..., 1] = np.einsum("...r,...r->...", m[..., :, 0], d[..., :, 2]) \
        - np.einsum("...r,...r->...", m[..., :, 2], d[..., :, 0])
    out[..., 2] = np.einsum("...r,...r->...", m[..., :, 1], d[..., :, 0]) \
        - np.einsum("...r,...r->...", m[..., :, 0], d[..., :, 1])
    return out


def frame_times_skew(p, omega):
    """p @ A(omega) nodewise, assembled column by column."""
    w1, w2, w3 = omega[..., 0:1], omega[..., 1:2], omega[..., 2:3]
    out = np.empty_like(p)
    out[..., :, 0] = -w3 * p[..., :, 1] + w2 * p[..., :, 2]
    out[..., :, 1] = w3 * p[..., :, 0] - w1 * p[..., :, 2]
    out[..., :, 2] = -w2 * p[..., :, 0] + w1 * p[..., :, 1]
    return out
