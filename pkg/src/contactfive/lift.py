"""Lagrangian graphs over the (x1, y2) disk and their Legendrian lifts.

A potential f on the unit disk defines the Lagrangian graph
L = (x1, f_1, -f_2, y2); integrating the pullback of r (y1 dx1 + y2 dx2)
along staircase paths from the center produces the unique Legendrian
lift through a chosen starting point.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .charts import PlaneChart, chart_of_plane
from .contact import ContactParams, alpha_eval, lift_vector

DEFAULT_N = 65
LIFT_TOL_FACTOR = 10.0  # discretization tolerances are 10 h^2


def _derivative(values: np.ndarray, mask: np.ndarray, h: float,
                axis: int) -> np.ndarray:
    """First derivative on a masked grid: central where possible,
    one-sided second order near the mask boundary."""
    v = np.where(mask, values, 0.0)
    m = mask

    def sh(a, k):
        return np.roll(a, -k, axis=axis)

    vp1, vm1 = sh(v, 1), sh(v, -1)
    vp2, vm2 = sh(v, 2), sh(v, -2)
    mp1, mm1 = sh(m, 1), sh(m, -1)
    mp2, mm2 = sh(m, 2), sh(m, -2)
    # np.roll wraps; kill wrapped entries
    n = values.shape[axis]
    idx = np.arange(n)
    shape = [1, 1]
    shape[axis] = n
    idx = idx.reshape(shape)
    mp1 = mp1 & (idx < n - 1)
    mp2 = mp2 & (idx < n - 2)
    mm1 = mm1 & (idx > 0)
    mm2 = mm2 & (idx > 1)

    central = (vp1 - vm1) / (2 * h)
    fwd2 = (-3 * v + 4 * vp1 - vp2) / (2 * h)
    bwd2 = (3 * v - 4 * vm1 + vm2) / (2 * h)
    fwd1 = (vp1 - v) / h
    bwd1 = (v - vm1) / h

    out = np.zeros_like(v)
    use_c = m & mp1 & mm1
    use_f2 = m & ~use_c & mp1 & mp2
    use_b2 = m & ~use_c & ~use_f2 & mm1 & mm2
    use_f1 = m & ~use_c & ~use_f2 & ~use_b2 & mp1
    use_b1 = m & ~use_c & ~use_f2 & ~use_b2 & ~use_f1 & mm1
    out[use_c] = central[use_c]
    out[use_f2] = fwd2[use_f2]
    out[use_b2] = bwd2[use_b2]
    out[use_f1] = fwd1[use_f1]
    out[use_b1] = bwd1[use_b1]
    return out


def _derivative2(values: np.ndarray, mask: np.ndarray, h: float,
                 axis: int) -> np.ndarray:
    """Pure second derivative along one axis on a masked grid."""
    v = np.where(mask, values, 0.0)
    m = mask

    def sh(a, k):
        return np.roll(a, -k, axis=axis)

    n = values.shape[axis]
    idx = np.arange(n)
    shape = [1, 1]
    shape[axis] = n
    idx = idx.reshape(shape)
    avail = {}
    vals = {}
    for k in (-3, -2, -1, 1, 2, 3):
        a = sh(m, k)
        if k > 0:
            a = a & (idx < n - k)
        else:
            a = a & (idx >= -k)
        avail[k] = a
        vals[k] = sh(v, k)

    central = (vals[1] - 2 * v + vals[-1]) / h ** 2
    fwd2 = (2 * v - 5 * vals[1] + 4 * vals[2] - vals[3]) / h ** 2
    bwd2 = (2 * v - 5 * vals[-1] + 4 * vals[-2] - vals[-3]) / h ** 2
    fwd1 = (v - 2 * vals[1] + vals[2]) / h ** 2
    bwd1 = (v - 2 * vals[-1] + vals[-2]) / h ** 2

    out = np.zeros_like(v)
    use_c = m & avail[1] & avail[-1]
    use_f2 = m & ~use_c & avail[1] & avail[2] & avail[3]
    use_b2 = m & ~use_c & ~use_f2 & avail[-1] & avail[-2] & avail[-3]
    use_f1 = m & ~use_c & ~use_f2 & ~use_b2 & avail[1] & avail[2]
    use_b1 = (m & ~use_c & ~use_f2 & ~use_b2 & ~use_f1
              & avail[-1] & avail[-2])
    out[use_c] = central[use_c]
    out[use_f2] = fwd2[use_f2]
    out[use_b2] = bwd2[use_b2]
    out[use_f1] = fwd1[use_f1]
    out[use_b1] = bwd1[use_b1]
    return out


@dataclass
class GridFunction:
    """Scalar values on the nodes of a square grid over
    [-radius, radius]^2 masked to the closed disk of that radius.

    Axis 0 is x1, axis 1 is y2; n must be odd so the center node exists.
    """

    values: np.ndarray
    radius: float = 1.0
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = self.values.shape[0]
        if self.values.shape != (n, n):
            raise ValueError("grid must be square")
        if n < 17 or n % 2 == 0:
            raise ValueError("grid resolution must be odd and >= 17")
        if self.mask is None:
            X, Y = self.meshgrid()
            self.mask = X ** 2 + Y ** 2 <= self.radius ** 2 * (1 + 1e-12)
        if not np.all(np.isfinite(self.values[self.mask])):
            raise ValueError("non-finite grid values")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 2 * self.radius / (self.n - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(-self.radius, self.radius, self.n)

    def meshgrid(self):
        xs = self.xs
        return np.meshgrid(xs, xs, indexing="ij")

    @property
    def center(self) -> tuple[int, int]:
        return (self.n // 2, self.n // 2)

    @staticmethod
    def from_callable(fn, n: int = DEFAULT_N, radius: float = 1.0
                      ) -> "GridFunction":
        xs = np.linspace(-radius, radius, n)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        g = GridFunction(np.zeros((n, n)), radius)
        g.values = np.where(g.mask, fn(X, Y), 0.0)
        return g

    def like(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(np.where(self.mask, values, 0.0), self.radius,
                            self.mask.copy())

    def f1(self) -> np.ndarray:
        return _derivative(self.values, self.mask, self.h, 0)

    def f2(self) -> np.ndarray:
        return _derivative(self.values, self.mask, self.h, 1)

    def f11(self) -> np.ndarray:
        return _derivative2(self.values, self.mask, self.h, 0)

    def f22(self) -> np.ndarray:
        return _derivative2(self.values, self.mask, self.h, 1)

    def f12(self) -> np.ndarray:
        return _derivative(self.f1(), self.mask, self.h, 1)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values[self.mask])))

    def interp(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Bilinear interpolation at points inside the grid square."""
        return _bilinear(self.values, self.radius, x, y)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "x1", "y2", "value", "in_disk"])
            xs = self.xs
            for i in range(self.n):
                for j in range(self.n):
                    w.writerow([i, j, repr(xs[i]), repr(xs[j]),
                                repr(self.values[i, j]),
                                int(self.mask[i, j])])

    def header(self) -> dict:
        return {"n": self.n, "h": self.h, "radius": self.radius,
                "tolerance": LIFT_TOL_FACTOR * self.h ** 2}


def _bilinear(values: np.ndarray, radius: float, x, y):
    n = values.shape[0]
    h = 2 * radius / (n - 1)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fx = np.clip((x + radius) / h, 0, n - 1 - 1e-12)
    fy = np.clip((y + radius) / h, 0, n - 1 - 1e-12)
    i0 = fx.astype(int)
    j0 = fy.astype(int)
    tx = fx - i0
    ty = fy - j0
    v00 = values[i0, j0]
    v10 = values[i0 + 1, j0]
    v01 = values[i0, j0 + 1]
    v11 = values[i0 + 1, j0 + 1]
    return ((1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10
            + (1 - tx) * ty * v01 + tx * ty * v11)


def lagrangian_graph(f: GridFunction) -> dict:
    """Nodewise graph L = (x1, f1, -f2, y2) with its two tangent fields."""
    X, Y = f.meshgrid()
    f1, f2 = f.f1(), f.f2()
    f11, f12, f22 = f.f11(), f.f12(), f.f22()
    points = np.stack([X, f1, -f2, Y], axis=-1)
    ones = np.ones_like(X)
    zeros = np.zeros_like(X)
    t1 = np.stack([ones, f11, -f12, zeros], axis=-1)
    t2 = np.stack([zeros, f12, -f22, ones], axis=-1)
    return {"points": points, "t1": t1, "t2": t2, "mask": f.mask,
            "h": f.h, "radius": f.radius}


def _segment_sums(L: dict, params: ContactParams):
    """Trapezoid increments of r (y1 dx1 + y2 dx2) along grid edges."""
    pts = L["points"]
    r = params.r
    P = r * pts[..., 1]           # coefficient of dx1
    Q = r * pts[..., 3]           # coefficient of dx2
    X1 = pts[..., 0]
    X2 = pts[..., 2]
    seg_i = (0.5 * (P[1:, :] + P[:-1, :]) * (X1[1:, :] - X1[:-1, :])
             + 0.5 * (Q[1:, :] + Q[:-1, :]) * (X2[1:, :] - X2[:-1, :]))
    seg_j = (0.5 * (P[:, 1:] + P[:, :-1]) * (X1[:, 1:] - X1[:, :-1])
             + 0.5 * (Q[:, 1:] + Q[:, :-1]) * (X2[:, 1:] - X2[:, :-1]))
    return seg_i, seg_j


def closedness_residual(L: dict, params: ContactParams = ContactParams()
                        ) -> float:
    """Max circulation of the pulled-back 1-form around grid cells whose
    four corners lie in the disk; zero for exact Lagrangian graphs."""
    seg_i, seg_j = _segment_sums(L, params)
    m = L["mask"]
    cell = m[:-1, :-1] & m[1:, :-1] & m[:-1, 1:] & m[1:, 1:]
    circ = (seg_i[:, :-1] + seg_j[1:, :] - seg_i[:, 1:] - seg_j[:-1, :])
    if not np.any(cell):
        return 0.0
    return float(np.max(np.abs(circ[cell])))


def _sweep(seg_i, seg_j, mask, center, order: str) -> np.ndarray:
    """Accumulate edge increments along staircase paths from the center:
    first along the center row (order 'row') or column, then along the
    perpendicular lines."""
    n = mask.shape[0]
    ic, jc = center
    t = np.zeros((n, n))
    if order == "row":
        for i in range(ic + 1, n):
            t[i, jc] = t[i - 1, jc] + seg_i[i - 1, jc]
        for i in range(ic - 1, -1, -1):
            t[i, jc] = t[i + 1, jc] - seg_i[i, jc]
        for j in range(jc + 1, n):
            t[:, j] = t[:, j - 1] + seg_j[:, j - 1]
        for j in range(jc - 1, -1, -1):
            t[:, j] = t[:, j + 1] - seg_j[:, j]
    elif order == "column":
        for j in range(jc + 1, n):
            t[ic, j] = t[ic, j - 1] + seg_j[ic, j - 1]
        for j in range(jc - 1, -1, -1):
            t[ic, j] = t[ic, j + 1] - seg_j[ic, j]
        for i in range(ic + 1, n):
            t[i, :] = t[i - 1, :] + seg_i[i - 1, :]
        for i in range(ic - 1, -1, -1):
            t[i, :] = t[i + 1, :] - seg_i[i, :]
    else:
        raise ValueError("order must be 'row' or 'column'")
    return np.where(mask, t, 0.0)


def legendrian_lift(L: dict, start: np.ndarray,
                    params: ContactParams = ContactParams(),
                    order: str = "row") -> GridFunction:
    """t-grid of the lift of the Lagrangian graph with t(center) = start_t.

    Checks that the pulled-back form is closed (the graph is Lagrangian)
    and that the starting point sits over the center node.
    """
    start = np.asarray(start, dtype=float)
    mask = L["mask"]
    h = L["h"]
    n = mask.shape[0]
    center = (n // 2, n // 2)
    tol = LIFT_TOL_FACTOR * h ** 2
    res = closedness_residual(L, params)
    if res > tol:
        raise ValueError(f"input graph is not Lagrangian: closedness "
                         f"residual {res:g} > {tol:g}")
    if np.max(np.abs(L["points"][center] - start[:4])) > 1e-9:
        raise ValueError("starting point is not over the center node")
    seg_i, seg_j = _segment_sums(L, params)
    t = _sweep(seg_i, seg_j, mask, center, order) + start[4]
    return GridFunction(np.where(mask, t, 0.0), L["radius"], mask.copy())


def lift_path_independence(L: dict, params: ContactParams = ContactParams()
                           ) -> float:
    """Sup difference between the row-major and column-major sweeps."""
    seg_i, seg_j = _segment_sums(L, params)
    mask = L["mask"]
    n = mask.shape[0]
    center = (n // 2, n // 2)
    t1 = _sweep(seg_i, seg_j, mask, center, "row")
    t2 = _sweep(seg_i, seg_j, mask, center, "column")
    return float(np.max(np.abs((t1 - t2)[mask])))


@dataclass
class LegendrianPatch:
    """Embedded disk in R^5 with its two tangent fields on grid nodes."""

    points: np.ndarray        # (n, n, 5)
    t1: np.ndarray            # (n, n, 5) tangents along x1
    t2: np.ndarray            # (n, n, 5) tangents along y2
    mask: np.ndarray
    radius: float
    start: np.ndarray
    params: ContactParams = ContactParams()

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def h(self) -> float:
        return 2 * self.radius / (self.n - 1)

    @property
    def center(self) -> tuple[int, int]:
        return (self.n // 2, self.n // 2)

    def grid(self, component: int) -> GridFunction:
        return GridFunction(np.where(self.mask, self.points[..., component],
                                     0.0), self.radius, self.mask.copy())

    def interp_point(self, x, y) -> np.ndarray:
        cols = [_bilinear(np.where(self.mask, self.points[..., k], 0.0),
                          self.radius, x, y) for k in range(5)]
        return np.stack(cols, axis=-1)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "x1", "y1", "x2", "y2", "t", "in_disk"])
            for i in range(self.n):
                for j in range(self.n):
                    w.writerow([i, j] + [repr(c) for c in self.points[i, j]]
                               + [int(self.mask[i, j])])

    def header(self) -> dict:
        return {"n": self.n, "h": self.h, "radius": self.radius,
                "r": self.params.r,
                "start": [float(c) for c in self.start],
                "tolerance": LIFT_TOL_FACTOR * self.h ** 2}

    def save(self, directory, name="patch"):
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        self.to_csv(d / f"{name}.csv")
        with open(d / f"{name}.json", "w") as fh:
            json.dump(self.header(), fh, indent=2, sort_keys=True)


def patch_from_potential(f: GridFunction, start: np.ndarray,
                         params: ContactParams = ContactParams()
                         ) -> LegendrianPatch:
    """Lift the Lagrangian graph of f to a Legendrian patch.

    Tangents are finite differences of the embedded coordinate grids, so
    the residual of alpha on them measures the lift quality honestly.
    """
    L = lagrangian_graph(f)
    start = np.asarray(start, dtype=float)
    tgrid = legendrian_lift(L, start, params)
    pts = np.concatenate([L["points"], tgrid.values[..., None]], axis=-1)
    mask = f.mask
    h = f.h
    t1 = np.stack([_derivative(pts[..., k], mask, h, 0) for k in range(5)],
                  axis=-1)
    t2 = np.stack([_derivative(pts[..., k], mask, h, 1) for k in range(5)],
                  axis=-1)
    return LegendrianPatch(points=pts, t1=t1, t2=t2, mask=mask.copy(),
                           radius=f.radius, start=start, params=params)


def exact_patch(f: GridFunction, start: np.ndarray,
                params: ContactParams = ContactParams()) -> LegendrianPatch:
    """Patch whose tangents are the analytic graph tangents lifted to
    horizontal vectors (alpha vanishes on them exactly)."""
    L = lagrangian_graph(f)
    start = np.asarray(start, dtype=float)
    tgrid = legendrian_lift(L, start, params)
    pts = np.concatenate([L["points"], tgrid.values[..., None]], axis=-1)
    t1 = lift_vector(L["points"], tgrid.values, L["t1"], params)
    t2 = lift_vector(L["points"], tgrid.values, L["t2"], params)
    return LegendrianPatch(points=pts, t1=t1, t2=t2, mask=f.mask.copy(),
                           radius=f.radius, start=start, params=params)


def legendrian_residual(patch: LegendrianPatch,
                        params: ContactParams | None = None) -> float:
    """Max |alpha(tangent)| over nodes and both tangent fields."""
    params = params or patch.params
    p = patch.points
    res = 0.0
    for tg in (patch.t1, patch.t2):
        val = (tg[..., 4] / params.r - p[..., 1] * tg[..., 0]
               - p[..., 3] * tg[..., 2])
        res = max(res, float(np.max(np.abs(val[patch.mask]))))
    return res


def tangent_plane(patch: LegendrianPatch, node: tuple[int, int]
                  ) -> PlaneChart:
    """Chart value of the projected tangent plane at a grid node."""
    i, j = node
    if not patch.mask[i, j]:
        raise ValueError("node outside the disk")
    return chart_of_plane(patch.t1[i, j, :4], patch.t2[i, j, :4])
