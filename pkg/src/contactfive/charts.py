"""Affine contactomorphisms of the model structure and plane charts.

Chart5 is a coordinate change E(x, t) = (P4 + R x, t + tau + phi(x))
combining a base-point translation with a rotation R of the horizontal
coordinates.  The correction phi(x) = r (c.x + x'Gx/2) is chosen so that
E pulls the contact form back to itself exactly; this requires R to
preserve dalpha (R symplectic for the standard matrix).

PlaneChart encodes a 2-plane close to span{dx1, dy2} as the point
[W1 : W2] of CP^1 in the chart w = W1/W2, via the complex identification
z = x1 + i y2, zeta = y1 + i x2 of the horizontal R^4.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contact import DALPHA_MATRIX, ContactParams


def _phi_data(P4: np.ndarray, R: np.ndarray):
    """Linear and quadratic parts of the t-correction for E* alpha = alpha."""
    cvec = P4[1] * R[0, :] + P4[3] * R[2, :]
    G = (np.outer(R[1, :], R[0, :]) + np.outer(R[3, :], R[2, :]))
    G[1, 0] -= 1.0
    G[3, 2] -= 1.0
    return cvec, G


@dataclass(frozen=True)
class Chart5:
    """Affine chart; to_ambient maps chart coordinates to ambient ones."""

    base: np.ndarray                      # ambient Point5 image of the origin
    rot: np.ndarray                       # 4x4, preserves dalpha
    params: ContactParams = ContactParams()
    cvec: np.ndarray = field(init=False, repr=False)
    G: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        R = np.asarray(self.rot, dtype=float)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "rot", R)
        if base.shape != (5,) or R.shape != (4, 4):
            raise ValueError("Chart5 needs a Point5 base and a 4x4 rotation")
        if np.max(np.abs(R.T @ DALPHA_MATRIX @ R - DALPHA_MATRIX)) > 1e-10:
            raise ValueError("rotation does not preserve dalpha")
        cvec, G = _phi_data(base[:4], R)
        if np.max(np.abs(G - G.T)) > 1e-10:
            raise ValueError("t-correction is not integrable; bad rotation")
        G = 0.5 * (G + G.T)
        object.__setattr__(self, "cvec", cvec)
        object.__setattr__(self, "G", G)

    def _phi(self, x: np.ndarray) -> np.ndarray:
        r = self.params.r
        lin = x @ self.cvec
        quad = 0.5 * np.einsum("...j,jk,...k->...", x, self.G, x)
        return r * (lin + quad)

    def to_ambient(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        x4 = q[..., :4]
        p4 = self.base[:4] + x4 @ self.rot.T
        t = q[..., 4] + self.base[4] + self._phi(x4)
        return np.concatenate([p4, t[..., None]], axis=-1)

    def from_ambient(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        x4 = (p[..., :4] - self.base[:4]) @ np.linalg.inv(self.rot).T
        t = p[..., 4] - self.base[4] - self._phi(x4)
        return np.concatenate([x4, t[..., None]], axis=-1)

    def push_hvec(self, v: np.ndarray) -> np.ndarray:
        """Horizontal projection in ambient coordinates of a chart HVec."""
        return np.asarray(v, dtype=float) @ self.rot.T

    def pull_hvec(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v, dtype=float) @ np.linalg.inv(self.rot).T


U1_RADIUS = 1.0 + 1e-9


@dataclass(frozen=True)
class PlaneChart:
    """Point w = W1/W2 of the CP^1 chart covering planes close to
    span{dx1, dy2}; the plane is {zeta = w z}."""

    w: complex

    def __post_init__(self):
        object.__setattr__(self, "w", complex(self.w))
        if not np.isfinite(self.w.real) or not np.isfinite(self.w.imag):
            raise ValueError("non-finite chart value")

    def in_unit_chart(self, radius: float = U1_RADIUS) -> bool:
        return abs(self.w) <= radius


def complex_coords(v: np.ndarray) -> tuple[complex, complex]:
    """(z, zeta) components of an HVec: z = x1 + i y2, zeta = y1 + i x2."""
    v = np.asarray(v, dtype=float)
    return complex(v[0], v[3]), complex(v[1], v[2])


def real_vector(z: complex, zeta: complex) -> np.ndarray:
    return np.array([z.real, zeta.real, zeta.imag, z.imag])


def plane_basis(X: PlaneChart) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of the plane {zeta = w z}."""
    s = 1.0 / np.sqrt(1.0 + abs(X.w) ** 2)
    return s * real_vector(1.0, X.w), s * real_vector(1j, 1j * X.w)


def project_onto_plane(v: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the span of an orthonormal pair."""
    v = np.asarray(v, dtype=float)
    return (v @ u1) * u1 + (v @ u2) * u2


def chart_of_plane(u: np.ndarray, v: np.ndarray) -> PlaneChart:
    """Chart value of the plane spanned by u, v (HVec pair).

    Computed from the projection of dx1 onto the plane, so it is exact
    for complex lines and deterministic for nearby planes.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    q, r = np.linalg.qr(np.stack([u, v], axis=1))
    if min(abs(r[0, 0]), abs(r[1, 1])) < 1e-10 * max(1.0, abs(r[0, 0])):
        raise ValueError("degenerate plane")
    b1, b2 = q[:, 0], q[:, 1]
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    p = project_onto_plane(e1, b1, b2)
    z, zeta = complex_coords(p)
    if abs(z) < 1e-10:
        raise ValueError("plane outside the unit chart: projection of dx1 "
                         "has no z-component")
    return PlaneChart(zeta / z)


def ident_basis(Jm: np.ndarray) -> np.ndarray:
    """Columns (dy1, J dy1, dx1, J dx1): the real basis realizing the
    complex identification induced by an anti-compatible J matrix.

    For the standard J this reproduces the (z, zeta) identification of
    complex_coords."""
    Jm = np.asarray(Jm, dtype=float)
    e_x1 = np.array([1.0, 0.0, 0.0, 0.0])
    e_y1 = np.array([0.0, 1.0, 0.0, 0.0])
    B = np.stack([e_y1, Jm @ e_y1, e_x1, Jm @ e_x1], axis=1)
    if abs(np.linalg.det(B)) < 1e-10:
        raise ValueError("degenerate identification basis")
    return B


def chart_of_plane_j(u: np.ndarray, v: np.ndarray,
                     Jm: np.ndarray) -> PlaneChart:
    """Chart value of span{u, v} in the identification induced by Jm."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    q, r = np.linalg.qr(np.stack([u, v], axis=1))
    if min(abs(r[0, 0]), abs(r[1, 1])) < 1e-10 * max(1.0, abs(r[0, 0])):
        raise ValueError("degenerate plane")
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    p = project_onto_plane(e1, q[:, 0], q[:, 1])
    c = np.linalg.solve(ident_basis(Jm), p)
    W1 = complex(c[0], c[1])
    W2 = complex(c[2], c[3])
    if abs(W2) < 1e-10:
        raise ValueError("plane outside the unit chart: projection of dx1 "
                         "has no z-component")
    return PlaneChart(W1 / W2)


def plane_vector_from_chart(X: PlaneChart, Jm: np.ndarray) -> np.ndarray:
    """A vector spanning (with J of it) the plane with chart value X in
    the identification induced by Jm."""
    return ident_basis(Jm) @ np.array([X.w.real, X.w.imag, 1.0, 0.0])


def adapted_direction(X: PlaneChart) -> np.ndarray:
    """Unit vector of the plane closest in angle to dx1."""
    b1, b2 = plane_basis(X)
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    p = project_onto_plane(e1, b1, b2)
    n = np.linalg.norm(p)
    if n < 1e-12:
        raise ValueError("plane orthogonal to dx1; outside the unit chart")
    return p / n


def translation_chart(p: np.ndarray,
                      params: ContactParams = ContactParams()) -> Chart5:
    return Chart5(np.asarray(p, dtype=float), np.eye(4), params)


# rotation swapping dx2 -> dy2, dy2 -> -dx2; preserves dalpha and turns a
# field with gamma = 0, beta != 0 into one with gamma' = beta
GAMMA_SWAP = np.array([[1.0, 0.0, 0.0, 0.0],
                       [0.0, 1.0, 0.0, 0.0],
                       [0.0, 0.0, 0.0, 1.0],
                       [0.0, 0.0, -1.0, 0.0]])
