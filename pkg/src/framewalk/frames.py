"""SO(3)-valued fields on periodic grids: types, constructors, diagnostics.

A frame field stores one rotation matrix per node, node-major with the
3x3 matrix trailing, so data[i1, i2, i3] is the frame at that node and
data[..., :, j] is the j-th column (the axis vector n_{j+1}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import SpectralGrid

PROFILE_NAMES = ("meridian_swirl", "inplane_twist", "manufactured_t0")


@dataclass
class EulerAngles:
    """Node fields (or constants) of the three frame angles, in radians."""

    theta: object
    phi: object
    psi: object


class FrameField:
    """Per-node 3x3 orthonormal matrix field p = (n1, n2, n3).

    `tol` records the orthonormality tolerance the field is trusted to;
    constructors that evaluate closed forms set it at round-off level.
    Determinant +1 is a diagnostic, never re-enforced: the Cayley update
    cannot flip its sign, so a violation indicates a bug rather than drift.
    """

    __slots__ = ("grid", "data", "tol")

    def __init__(self, grid: SpectralGrid, data: np.ndarray, tol: float = 1e-12):
        data = np.asarray(data, dtype=float)
        if data.shape != grid.counts + (3, 3):
            raise ValueError(
                f"frame data shape {data.shape} does not match grid {grid.counts}")
        self.grid = grid
        self.data = data
        self.tol = float(tol)

    def copy(self) -> "FrameField":
        return FrameField(self.grid, self.data.copy(), self.tol)

    def column(self, j: int) -> np.ndarray:
        """Axis vector n_{j+1} as a (N1, N2, N3, 3) view."""
        return self.data[..., :, j]

    def orthonormality_error(self) -> float:
        return kernels.gram_error(self.data)

    def det_error(self) -> float:
        return kernels.det_error(self.data)

    @classmethod
    def identity(cls, grid: SpectralGrid) -> "FrameField":
        data = np.broadcast_to(np.eye(3), grid.counts + (3, 3)).copy()
        return cls(grid, data, tol=0.0)


def orthonormality_error(field: FrameField) -> float:
    """max over nodes and entries of |p^T p - I|."""
    return field.orthonormality_error()


def frame_from_euler(angles: EulerAngles, grid: SpectralGrid) -> FrameField:
    """Evaluate the Euler-angle rotation matrix nodewise.

    Columns are built so that (theta, phi, psi) = (0, 0, 0) gives the
    identity; the result is orthonormal to round-off for any finite angles.
    """
    shape = grid.counts
    th, ph, ps = (np.broadcast_to(np.asarray(a, dtype=float), shape)
                  for a in (angles.theta, angles.phi, angles.psi))
    for name, a in (("theta", th), ("phi", ph), ("psi", ps)):
        if not np.all(np.isfinite(a)):
            raise ValueError(f"non-finite Euler angle field: {name}")
    ct, st = np.cos(th), np.sin(th)
    cf, sf = np.cos(ph), np.sin(ph)
    cp, sp = np.cos(ps), np.sin(ps)
    data = np.empty(shape + (3, 3))
    data[..., 0, 0] = ct * cf * cp - sf * sp
    data[..., 0, 1] = -ct * cf * sp - sf * cp
    data[..., 0, 2] = st * cf
    data[..., 1, 0] = ct * sf * cp + cf * sp
    data[..., 1, 1] = -ct * sf * sp + cf * cp
    data[..., 1, 2] = st * sf
    data[..., 2, 0] = -st * cp
    data[..., 2, 1] = st * sp
    data[..., 2, 2] = ct
    return FrameField(grid, data, tol=1e-14)


def random_frame(grid: SpectralGrid, rng, max_mode: int | None = None,
                 amplitude: float = 0.5) -> FrameField:
    """Random orthonormal field from Euler angles.

    With max_mode=None the angles are i.i.d. uniform per node (rough field,
    exact SO(3) membership regardless).  With a mode cap the angles are
    low-bandwidth random trigonometric polynomials, giving a smooth field
    whose spectral derivatives resolve to near machine precision.
    """
    if max_mode is None:
        th, ph, ps = (rng.uniform(0.0, 2 * np.pi, size=grid.counts)
                      for _ in range(3))
        return frame_from_euler(EulerAngles(th, ph, ps), grid)
    X = grid.coords()
    angles = []
    for _ in range(3):
        a = np.full(grid.counts, rng.uniform(0.0, 2 * np.pi))
        for axis in range(3):
            if grid.counts[axis] == 1:
                continue
            u = 2 * np.pi * (X[axis] - grid.origin[axis]) / grid.extents[axis]
            for m in range(1, max_mode + 1):
                c, s = rng.uniform(-amplitude, amplitude, size=2) / m
                a = a + c * np.cos(m * u) + s * np.sin(m * u)
        angles.append(a)
    return frame_from_euler(EulerAngles(*angles), grid)


def _sphere_frame(grid, a, b):
    # frame with n3 = (-sin b, cos b, 0); a, b are angle fields
    sa, ca = np.sin(a), np.cos(a)
    sb, cb = np.sin(b), np.cos(b)
    data = np.empty(grid.counts + (3, 3))
    data[..., 0, 0] = sa * cb
    data[..., 1, 0] = sa * sb
    data[..., 2, 0] = ca
    data[..., 0, 1] = ca * cb
    data[..., 1, 1] = ca * sb
    data[..., 2, 1] = -sa
    data[..., 0, 2] = -sb
    data[..., 1, 2] = cb
    data[..., 2, 2] = np.zeros_like(a)
    return FrameField(grid, data, tol=1e-14)


def initial_profile(name: str, grid: SpectralGrid) -> FrameField:
    """Closed-form initial frame distributions used by the property runs.

    meridian_swirl and inplane_twist live on [-1, 1]^3 (homogeneous in x3);
    manufactured_t0 is the verification solution at t = 0 on [0, 2*pi]^3.
    """
    if name == "meridian_swirl":
        X1, X2, _ = grid.coords()
        return _sphere_frame(grid, 2.0 * np.sin(np.pi * X1), 2.0 * np.pi * X2)
    if name == "inplane_twist":
        X1, X2, _ = grid.coords()
        u = np.pi * X1 + 2.0 * np.cos(np.pi * X2)
        su, cu = np.sin(u), np.cos(u)
        zero = np.zeros_like(u)
        data = np.empty(grid.counts + (3, 3))
        data[..., :, 0] = np.stack([su, zero, cu], axis=-1)
        data[..., :, 1] = np.stack([cu, zero, -su], axis=-1)
        data[..., :, 2] = np.stack([zero, zero + 1.0, zero], axis=-1)
        return FrameField(grid, data, tol=1e-14)
    if name == "manufactured_t0":
        from .manufactured import manufactured_frame
        return manufactured_frame(0.0, grid)
    raise ValueError(f"unknown initial profile {name!r}; "
                     f"expected one of {PROFILE_NAMES}")


def profile_domain(name: str):
    """Default (origin, extents) of a named profile."""
    if name in ("meridian_swirl", "inplane_twist"):
        return (-1.0, -1.0, -1.0), (2.0, 2.0, 2.0)
    if name == "manufactured_t0":
        return (0.0, 0.0, 0.0), (2 * np.pi, 2 * np.pi, 2 * np.pi)
    raise ValueError(f"unknown initial profile {name!r}")


# Generators of so(3) chosen so that p @ SO3_GENERATORS[k] equals V_{k+1}
# below, i.e. the tangent basis is exactly p times its skew generator.
SO3_GENERATORS = np.array([
    [[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]],
    [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
    [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
])


@dataclass
class TangentBasis:
    """Orthogonal basis V1, V2, V3 of the tangent plane at each node.

    V1 = (0, n3, -n2), V2 = (-n3, 0, n1), V3 = (n2, -n1, 0) columnwise;
    each has Frobenius norm sqrt(2) and <Vi, Vj> = 2*delta_ij nodewise.
    """

    V1: np.ndarray
    V2: np.ndarray
    V3: np.ndarray

    def __iter__(self):
        return iter((self.V1, self.V2, self.V3))


def tangent_basis(field: FrameField) -> TangentBasis:
    p = field.data
    zero = np.zeros(p.shape[:-2] + (3,))
    n1, n2, n3 = p[..., :, 0], p[..., :, 1], p[..., :, 2]
    V1 = np.stack([zero, n3, -n2], axis=-1)
    V2 = np.stack([-n3, zero, n1], axis=-1)
    V3 = np.stack([n2, -n1, zero], axis=-1)
    return TangentBasis(V1, V2, V3)
