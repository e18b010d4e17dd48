"""Standard and dilated contact structure on R^5.

Coordinates are ordered (x1, y1, x2, y2, t).  The contact form is

    alpha = (1/r) dt - (y1 dx1 + y2 dx2),        d alpha = dx1^dy1 + dx2^dy2,

where r in (0, 1] is the dilation parameter (r = 1 is the standard
structure).  Horizontal vectors are stored as their R^4 projections
(HVec); the t-component is always recomputed from the base point, which
is lossless because the horizontal hyperplanes over a fiber are parallel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# type aliases; plain float arrays throughout
Point5 = np.ndarray  # shape (5,)
Vec5 = np.ndarray    # shape (5,)
HVec = np.ndarray    # shape (4,) projection of a horizontal vector

X1, Y1, X2, Y2, T = range(5)


@dataclass(frozen=True)
class ContactParams:
    """Dilation parameter of the flattened contact structure."""

    r: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.r <= 1.0) or not np.isfinite(self.r):
            raise ValueError(f"dilation parameter r must be in (0, 1], got {self.r}")


def point5(x1: float, y1: float, x2: float, y2: float, t: float) -> Point5:
    p = np.array([x1, y1, x2, y2, t], dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("non-finite coordinates")
    return p


def alpha_eval(p: Point5, v: Vec5, params: ContactParams = ContactParams()) -> float:
    """Value of the (dilated) contact form on v at p."""
    return v[T] / params.r - p[Y1] * v[X1] - p[Y2] * v[X2]


def dalpha_eval(u: HVec, v: HVec) -> float:
    """d alpha on horizontal projections: dx1^dy1 + dx2^dy2."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return (u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
            + u[..., 2] * v[..., 3] - u[..., 3] * v[..., 2])


def reeb(params: ContactParams = ContactParams()) -> Vec5:
    """Unique vector with alpha(R) = 1 and i_R dalpha = 0; equals r * dt."""
    return np.array([0.0, 0.0, 0.0, 0.0, params.r])


def lift_vector(q4: np.ndarray, t: float, v: HVec,
                params: ContactParams = ContactParams()) -> Vec5:
    """Horizontal vector at (q4, t) projecting to v.

    The t-component is r*(y1*v_x1 + y2*v_x2), independent of t.
    """
    q4 = np.asarray(q4, dtype=float)
    v = np.asarray(v, dtype=float)
    t5 = params.r * (q4[..., 1] * v[..., 0] + q4[..., 3] * v[..., 2])
    return np.concatenate([v, np.asarray(t5)[..., None]], axis=-1)


def horizontal_frame(p: Point5, params: ContactParams = ContactParams()):
    """Frame (dx1 + r y1 dt, dy1, dx2 + r y2 dt, dy2) of Ker alpha at p."""
    e = np.eye(4)
    return tuple(lift_vector(p[:4], p[T], e[i], params) for i in range(4))


def dilate(p: Point5, r: float) -> Point5:
    """Dilation Lambda_r: componentwise division by r."""
    if r <= 0:
        raise ValueError("dilation requires r > 0")
    return np.asarray(p, dtype=float) / r


def standard_I(v: HVec) -> HVec:
    """Standard complex structure on projections: I dx_i = dy_i."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0], -v[..., 3], v[..., 2]], axis=-1)


def standard_I_matrix() -> np.ndarray:
    return np.array([[0.0, -1.0, 0.0, 0.0],
                     [1.0, 0.0, 0.0, 0.0],
                     [0.0, 0.0, 0.0, -1.0],
                     [0.0, 0.0, 1.0, 0.0]])


# matrix of dalpha on projections: dalpha(u, v) = u @ DALPHA_MATRIX @ v
DALPHA_MATRIX = np.array([[0.0, 1.0, 0.0, 0.0],
                          [-1.0, 0.0, 0.0, 0.0],
                          [0.0, 0.0, 0.0, 1.0],
                          [0.0, 0.0, -1.0, 0.0]])
