"""Frame elasticity: energy forms, coefficient maps, variational derivative.

Three equivalent descriptions of the same elastic energy are covered:

* the 12-constant form in divergences and curl projections of the axes,
* the reduced form gamma_i |grad n_i|^2 + k_i (div n_i)^2
  + k_ij (n_i . curl n_j)^2 used by the integrator (the divergence-shaped
  null terms drop under periodic boundary conditions, so this reduced form
  is the single source of truth for both energy and gradient),
* the fourth-order-tensor form in the D_ab contractions, used to import
  coefficients derived from molecular parameters.
"""

from __future__ import annotations

import warnings
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .frames import FrameField
from .grid import SpectralGrid


@dataclass(frozen=True)
class ElasticCoefficients:
    """Twelve elastic constants K1..K12 plus rotational mobilities chi1..chi3.

    K entries are expected non-negative; that is enforced when reducing
    (negative entries are only legal as raw outputs of the tensor-form
    conversion, which flags them).
    """

    K: tuple
    chi: tuple = (2.0, 2.0, 2.0)

    def __post_init__(self):
        K = tuple(float(v) for v in self.K)
        chi = tuple(float(v) for v in self.chi)
        if len(K) != 12:
            raise ValueError(f"expected 12 elastic constants, got {len(K)}")
        if len(chi) != 3:
            raise ValueError(f"expected 3 mobility coefficients, got {len(chi)}")
        if not all(np.isfinite(K)) or not all(np.isfinite(chi)):
            raise ValueError("elastic coefficients must be finite")
        if any(c <= 0 for c in chi):
            raise ValueError(f"mobilities must be positive, got {chi}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "chi", chi)


@dataclass(frozen=True)
class ReducedCoefficients:
    """Coefficients of the reduced energy density.

    gamma[j] is the minimum of the four constants multiplying derivatives of
    axis j+1; k and kk hold the non-negative remainders, with kk[i, j]
    weighting (n_{i+1} . curl n_{j+1})^2.
    """

    gamma: np.ndarray
    k: np.ndarray
    kk: np.ndarray

    def reconstruct(self) -> tuple:
        """Invert the reduction back to the 12-constant vector (exact)."""
        g, k, kk = self.gamma, self.k, self.kk
        return (k[0] + g[0], k[1] + g[1], k[2] + g[2],
                kk[0, 0] + g[0], kk[1, 1] + g[1], kk[2, 2] + g[2],
                kk[2, 0] + g[0], kk[0, 1] + g[1], kk[1, 2] + g[2],
                kk[1, 0] + g[0], kk[2, 1] + g[1], kk[0, 2] + g[2])


def reduce_coefficients(coeffs: ElasticCoefficients) -> ReducedCoefficients:
    """Map K1..K12 to (gamma_i, k_i, k_ij); all outputs are non-negative."""
    K = coeffs.K
    if any(v < 0 for v in K):
        raise ValueError(f"elastic constants must be non-negative, got {K}")
    gamma = np.array([min(K[0], K[3], K[6], K[9]),
                      min(K[1], K[4], K[7], K[10]),
                      min(K[2], K[5], K[8], K[11])])
    k = np.array([K[0] - gamma[0], K[1] - gamma[1], K[2] - gamma[2]])
    kk = np.zeros((3, 3))
    kk[0, 0] = K[3] - gamma[0]
    kk[1, 1] = K[4] - gamma[1]
    kk[2, 2] = K[5] - gamma[2]
    kk[2, 0] = K[6] - gamma[0]
    kk[0, 1] = K[7] - gamma[1]
    kk[1, 2] = K[8] - gamma[2]
    kk[1, 0] = K[9] - gamma[0]
    kk[2, 1] = K[10] - gamma[1]
    kk[0, 2] = K[11] - gamma[2]
    return ReducedCoefficients(gamma, k, kk)


EnergyParts = namedtuple("EnergyParts", ["total", "f1", "f2", "f3"])


def _columns(p: FrameField):
    return p.data[..., :, 0], p.data[..., :, 1], p.data[..., :, 2]


def total_energy(p: FrameField, rc: ReducedCoefficients) -> EnergyParts:
    """Elastic energy F = (F1 + F2 + F3)/2 with the three parts exposed.

    F1 = sum_i gamma_i int |grad n_i|^2,  F2 = sum_i k_i int (div n_i)^2,
    F3 = sum_ij k_ij int (n_i . curl n_j)^2, all by node-mean quadrature.
    """
    g = p.grid
    f1 = f2 = f3 = 0.0
    for i in range(3):
        if rc.gamma[i] != 0.0:
            J = g.jacobian(p.column(i))
            f1 += rc.gamma[i] * g.integrate((J * J).sum(axis=(-2, -1)))
        if rc.k[i] != 0.0:
            d = g.divergence(p.column(i))
            f2 += rc.k[i] * g.integrate(d * d)
    if np.any(rc.kk != 0.0):
        curls = g.frame_curls(p.data)
        for i in range(3):
            for j in range(3):
                if rc.kk[i, j] == 0.0:
                    continue
                proj = (p.data[..., :, i] * curls[..., :, j]).sum(axis=-1)
                f3 += rc.kk[i, j] * g.integrate(proj * proj)
    return EnergyParts(0.5 * (f1 + f2 + f3), f1, f2, f3)


def continuous_variation(p: FrameField, rc: ReducedCoefficients) -> np.ndarray:
    """Variational derivative of the reduced energy, frame-shaped.

    Column i of the result is
        -gamma_i lap(n_i) - k_i grad(div n_i)
        + sum_j k_ji curl[(n_j . curl n_i) n_j]
        + sum_j k_ij (n_i . curl n_j) curl n_j,
    evaluated spectrally on the grid.
    """
    g = p.grid
    out = np.zeros_like(p.data)
    if np.any(rc.gamma != 0.0):
        lap = g.laplacian(p.data)
        for i in range(3):
            if rc.gamma[i] != 0.0:
                out[..., :, i] -= rc.gamma[i] * lap[..., :, i]
    for i in range(3):
        if rc.k[i] != 0.0:
            out[..., :, i] -= rc.k[i] * g.grad_div(p.column(i))
    if np.any(rc.kk != 0.0):
        curls = g.frame_curls(p.data)
        beta = np.einsum("...ri,...rj->...ij", p.data, curls)
        # curl arguments w_i = sum_j k_ji beta_ji n_j, batched per column
        w = np.zeros_like(p.data)
        for i in range(3):
            for j in range(3):
                if rc.kk[j, i] != 0.0:
                    w[..., :, i] += (rc.kk[j, i] * beta[..., j, i])[..., None] \
                        * p.data[..., :, j]
        cw = g.frame_curls(w)
        for i in range(3):
            acc = cw[..., :, i]
            for j in range(3):
                if rc.kk[i, j] != 0.0:
                    acc = acc + (rc.kk[i, j] * beta[..., i, j])[..., None] \
                        * curls[..., :, j]
            out[..., :, i] += acc
    return out


def energy_original_form(p: FrameField, K) -> float:
    """Twelve-constant energy (divergence/curl-projection form, no null terms).

    Accepts any real K vector, so it also evaluates converted tensor-form
    coefficient sets that carry negative entries.
    """
    g = p.grid
    n = [p.column(i) for i in range(3)]
    curls = g.frame_curls(p.data)
    c = [curls[..., :, j] for j in range(3)]
    div = [g.divergence(n[i]) for i in range(3)]
    proj = lambda a, b: (n[a] * c[b]).sum(axis=-1)
    terms = [div[0] ** 2, div[1] ** 2, div[2] ** 2,
             proj(0, 0) ** 2, proj(1, 1) ** 2, proj(2, 2) ** 2,
             proj(2, 0) ** 2, proj(0, 1) ** 2, proj(1, 2) ** 2,
             proj(1, 0) ** 2, proj(2, 1) ** 2, proj(0, 2) ** 2]
    return 0.5 * sum(float(Ki) * g.integrate(t) for Ki, t in zip(K, terms)
                     if Ki != 0.0)


def oseen_frank_energy(n: np.ndarray, K1: float, K4: float, K7: float,
                       grid: SpectralGrid) -> float:
    """Classical one-director energy: splay K1, twist K4, bend K7.

    n is a unit-vector field (N1, N2, N3, 3); this is the degenerate limit
    of the frame energy when only the n1 constants survive and the two
    transverse curl projections share one constant.
    """
    div = grid.divergence(n)
    c = grid.curl(n)
    twist = (n * c).sum(axis=-1)
    bend = np.cross(n, c)
    density = K1 * div ** 2 + K4 * twist ** 2 + K7 * (bend * bend).sum(axis=-1)
    return 0.5 * grid.integrate(density)


@dataclass(frozen=True)
class FrankTensorCoefficients:
    """Constants of the fourth-order-tensor energy form.

    kiiii = (K1111, K2222, K3333); kijij = (K1212, K2121, K2323, K3232,
    K3131, K1313); kijji = (K1221, K2332, K1331).  Arbitrary reals are
    accepted; the conversion to the 12-constant form may go negative.
    """

    kiiii: tuple
    kijij: tuple
    kijji: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "kiiii", tuple(float(v) for v in self.kiiii))
        object.__setattr__(self, "kijij", tuple(float(v) for v in self.kijij))
        object.__setattr__(self, "kijji", tuple(float(v) for v in self.kijji))
        if len(self.kiiii) != 3 or len(self.kijij) != 6 or len(self.kijji) != 3:
            raise ValueError("expected 3 + 6 + 3 tensor-form constants")


def kijkl_to_frank(KT: FrankTensorCoefficients,
                   chi=(2.0, 2.0, 2.0)) -> ElasticCoefficients:
    """Convert tensor-form constants to the 12-constant vector.

    The map is linear; negative outputs are reported with a warning but not
    rejected, since the tensor form only serves to import molecular
    coefficient sets.
    """
    a, b, c = KT.kiiii
    k1212, k2121, k2323, k3232, k3131, k1313 = KT.kijij
    k1221, k2332, k1331 = KT.kijji
    K = (0.5 * (-a + b + c - k2332),
         0.5 * (a - b + c - k1331),
         0.5 * (a + b - c - k1221),
         0.5 * (-a + b + c),
         0.5 * (a - b + c),
         0.5 * (a + b - c),
         0.5 * (-a + b - c + 2 * k1313 + k1331),
         0.5 * (-a - b + c + 2 * k2121 + k1221),
         0.5 * (a - b - c + 2 * k3232 + k2332),
         0.5 * (-a - b + c + 2 * k1212 + k1221),
         0.5 * (a - b - c + 2 * k2323 + k2332),
         0.5 * (-a + b - c + 2 * k3131 + k1331))
    negative = [i + 1 for i, v in enumerate(K) if v < 0]
    if negative:
        warnings.warn(f"tensor-form conversion produced negative K at "
                      f"positions {negative}", stacklevel=2)
    return ElasticCoefficients(K, chi)


_CYCLIC = ((1, 2), (2, 0), (0, 1))


def d_tensor(p: FrameField) -> np.ndarray:
    """The nine D_ab contractions, returned as (..., 3, 3) with D[a, b].

    D_ab = n_a,i n_{b+1},j d_i n_{b+2},j with cyclic column pairs
    (2,3), (3,1), (1,2) for b = 1, 2, 3.
    """
    g = p.grid
    G = g.jacobian(p.data)  # (..., r, j, axis)
    w = np.empty(p.data.shape[:-2] + (3, 3))  # w[..., b, axis]
    for b, (b1, b2) in enumerate(_CYCLIC):
        w[..., b, :] = np.einsum("...c,...ca->...a",
                                 p.data[..., :, b1], G[..., :, b2, :])
    return np.einsum("...ia,...bi->...ab", p.data, w)


def frank_tensor_energy(p: FrameField, KT: FrankTensorCoefficients) -> float:
    """Energy of the tensor form: (1/2) int of the D_ab quadratic."""
    D = d_tensor(p)
    a, b, c = KT.kiiii
    k1212, k2121, k2323, k3232, k3131, k1313 = KT.kijij
    k1221, k2332, k1331 = KT.kijji
    density = (a * D[..., 0, 0] ** 2 + b * D[..., 1, 1] ** 2
               + c * D[..., 2, 2] ** 2
               + k1212 * D[..., 0, 1] ** 2 + k2121 * D[..., 1, 0] ** 2
               + k2323 * D[..., 1, 2] ** 2 + k3232 * D[..., 2, 1] ** 2
               + k3131 * D[..., 2, 0] ** 2 + k1313 * D[..., 0, 2] ** 2
               + k1221 * D[..., 0, 1] * D[..., 1, 0]
               + k2332 * D[..., 1, 2] * D[..., 2, 1]
               + k1331 * D[..., 0, 2] * D[..., 2, 0])
    return 0.5 * p.grid.integrate(density)
