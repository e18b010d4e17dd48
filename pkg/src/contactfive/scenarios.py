"""Pointwise verification of the semi-calibration package on concrete
contact 5-manifolds:

  s5  - the unit sphere in C^3 with alpha = (1/2) omega_std(p, .) and
        the real part of the interior product of the position field
        with the holomorphic volume form,
  cy  - an ellipsoid level set in C^3 with the same radial Liouville
        data (only wedge-orthogonality survives without a conformal
        normalization),
  n5  - orthonormal frames {(e1, e2) in S^3 x S^3 : e1 . e2 = 0} with
        alpha(U) = (e1 . U2 - e2 . U1) / 2 and
        omega(U, V) = det(e1, e2, U1, V2) - det(e1, e2, V1, U2).

At each sampled point an orthonormal frame of the horizontal space is
built in which dalpha (computed by finite differences of alpha) equals
e12 + e34 exactly; omega is then read off as a Form2H and checked.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .forms import CheckReport, Form2H, comass, wedge_coeff, DALPHA_FORM

SCENARIO_TOL = 1e-8
FD_H = 1e-5


def _null_on_basis(rows: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of the row system."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    _, s, Vt = np.linalg.svd(rows)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    B = Vt[rank:].T
    if B.shape[1] != dim:
        raise ValueError(f"null space has dimension {B.shape[1]}, "
                         f"expected {dim}")
    return B


def _fd_dalpha(alpha_fn, p: np.ndarray, U: np.ndarray, V: np.ndarray,
               h: float = FD_H) -> float:
    """dalpha(U, V) at p from central differences of the ambient 1-form,
    with one Richardson step."""
    def d(hh):
        dU = (alpha_fn(p + hh * U, V) - alpha_fn(p - hh * U, V)) / (2 * hh)
        dV = (alpha_fn(p + hh * V, U) - alpha_fn(p - hh * V, U)) / (2 * hh)
        return dU - dV
    return float((4.0 * d(h / 2) - d(h)) / 3.0)


def _frame_from_dalpha(B: np.ndarray, A: np.ndarray):
    """Columns of an ambient frame F = B E with dalpha|frame = e12 + e34.

    A is the skew matrix of dalpha on the orthonormal basis B.  The
    associated complex structure is the negative polar factor
    I = -A (A'A)^(-1/2); frame vectors are eigenvectors of (A'A)^(1/2)
    scaled by the inverse square roots of the singular values.
    """
    A = 0.5 * (A - A.T)
    AtA = A.T @ A
    vals, vecs = np.linalg.eigh(AtA)
    if np.min(vals) <= 1e-12:
        raise ValueError("dalpha is degenerate on the horizontal space")
    c = np.sqrt(vals)
    inv_half = vecs @ np.diag(1.0 / c) @ vecs.T
    I = -A @ inv_half
    u = vecs[:, -1]
    c1 = c[-1]
    E1 = u / np.sqrt(c1)
    E2 = I @ u / np.sqrt(c1)
    # eigenvector of the remaining singular value orthogonal to u, Iu
    c2 = c[0]
    resid = None
    for k in range(3, -1, -1):
        w = vecs[:, k]
        w = w - (w @ u) * u - (w @ (I @ u)) * (I @ u)
        if np.linalg.norm(w) > 0.5:
            c2 = c[k]
            resid = w / np.linalg.norm(w)
            break
    if resid is None:
        raise ValueError("could not complete the frame")
    E3 = resid / np.sqrt(c2)
    E4 = I @ resid / np.sqrt(c2)
    E = np.stack([E1, E2, E3, E4], axis=1)
    target = np.array([[0.0, 1, 0, 0], [-1, 0, 0, 0],
                       [0, 0, 0, 1], [0, 0, -1, 0]])
    frame_residual = float(np.max(np.abs(E.T @ A @ E - target)))
    return B @ E, (float(c1), float(c2)), frame_residual


def _reeb_lstsq(alpha_fn, p, T: np.ndarray, H: np.ndarray):
    """Reeb vector in the tangent basis T: alpha(R) = 1 and
    dalpha(R, H_j) = 0; returns (R, residual)."""
    dim = T.shape[1]
    rows = [np.array([alpha_fn(p, T[:, j]) for j in range(dim)])]
    for k in range(H.shape[1]):
        rows.append(np.array([_fd_dalpha(alpha_fn, p, T[:, j], H[:, k])
                              for j in range(dim)]))
    Mt = np.stack(rows, axis=0)
    rhs = np.zeros(Mt.shape[0])
    rhs[0] = 1.0
    x, *_ = np.linalg.lstsq(Mt, rhs, rcond=None)
    R = T @ x
    return R, float(np.max(np.abs(Mt @ x - rhs)))


@dataclass
class ScenarioPoint:
    scenario: str
    point: np.ndarray
    frame: np.ndarray               # ambient columns F1..F4
    reeb: np.ndarray
    reeb_residual: float
    dalpha_singvals: tuple
    frame_residual: float
    omega: Form2H
    report: CheckReport

    def header(self) -> dict:
        return {"scenario": self.scenario,
                "point": [float(c) for c in self.point],
                "dalpha_singvals": [float(c) for c in self.dalpha_singvals],
                "frame_residual": self.frame_residual,
                "reeb_residual": self.reeb_residual,
                "omega": [float(c) for c in self.omega.coeffs()],
                "checks": self.report.checks,
                "pass": self.report.passed}

    def to_json(self) -> str:
        return json.dumps(self.header(), indent=2, sort_keys=True)


# --- C^3 scenarios: coordinates (x1, y1, x2, y2, x3, y3) ------------------

_J6 = np.zeros((6, 6))
for _k in range(3):
    _J6[2 * _k, 2 * _k + 1] = -1.0
    _J6[2 * _k + 1, 2 * _k] = 1.0


def _alpha_c3(x: np.ndarray, v: np.ndarray) -> float:
    """alpha = (1/2) omega_std(x, v); the radial field x/2 is the
    Liouville field of omega_std."""
    return 0.5 * float((_J6 @ x) @ v)


def _zvec(v: np.ndarray) -> np.ndarray:
    return v[0::2] + 1j * v[1::2]


def _omega_theta(p: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    """Re Theta(p, u, v) with Theta the complex volume form dz1dz2dz3."""
    M = np.stack([_zvec(p), _zvec(u), _zvec(v)], axis=0)
    return float(np.real(np.linalg.det(M)))


def _build_point(scenario, p, alpha_fn, omega_fn, T_rows, H_rows,
                 self_dual_expected=True) -> ScenarioPoint:
    m = p.shape[0]
    T = _null_on_basis(T_rows, 5)
    H = _null_on_basis(H_rows, 4)
    A = np.array([[_fd_dalpha(alpha_fn, p, H[:, i], H[:, j])
                   for j in range(4)] for i in range(4)])
    F, singvals, frame_res = _frame_from_dalpha(H, A)
    W = np.array([[omega_fn(p, F[:, i], F[:, j]) for j in range(4)]
                  for i in range(4)])
    w = Form2H.from_matrix(0.5 * (W - W.T))
    reeb, reeb_res = _reeb_lstsq(alpha_fn, p, T, H)
    rep = CheckReport()
    rep.add("frame: dalpha = e12 + e34", frame_res, SCENARIO_TOL)
    rep.add("reeb: alpha(R) = 1, i_R dalpha = 0", reeb_res, 1e-6)
    rep.add("w ^ dalpha = 0", wedge_coeff(w, DALPHA_FORM), SCENARIO_TOL)
    if self_dual_expected:
        rep.add("comass(w) = 1", comass(w) - 1.0, SCENARIO_TOL)
        rep.add("w ^ w = (dalpha)^2", wedge_coeff(w, w) - 2.0, SCENARIO_TOL)
        rep.add("self-duality: |(A,B,C)| = 0",
                float(np.linalg.norm(w.coeffs()[3:])), SCENARIO_TOL)
    return ScenarioPoint(scenario=scenario, point=p, frame=F, reeb=reeb,
                         reeb_residual=reeb_res, dalpha_singvals=singvals,
                         frame_residual=frame_res, omega=w, report=rep)


def s5_point(p: np.ndarray | None = None,
             rng: np.random.Generator | None = None) -> ScenarioPoint:
    """Unit sphere in C^3; omega = Re Theta(p, ., .) is the special
    Legendrian semi-calibration."""
    rng = rng or np.random.default_rng(0)
    if p is None:
        p = rng.normal(size=6)
    p = np.asarray(p, dtype=float)
    p = p / np.linalg.norm(p)
    ip = _J6 @ p
    return _build_point("s5", p, _alpha_c3, _omega_theta,
                        T_rows=p[None, :], H_rows=np.stack([p, ip]))


DEFAULT_CY_WEIGHTS = (1.0, 1.3, 0.8)


def cy_levelset_point(p: np.ndarray | None = None,
                      weights=DEFAULT_CY_WEIGHTS,
                      rng: np.random.Generator | None = None
                      ) -> ScenarioPoint:
    """Ellipsoid sum a_k |z_k|^2 = 1 in C^3 with the radial Liouville
    field; only wedge-orthogonality is expected without a conformal
    rescaling of omega."""
    rng = rng or np.random.default_rng(0)
    a = np.repeat(np.asarray(weights, dtype=float), 2)
    if p is None:
        p = rng.normal(size=6)
    p = np.asarray(p, dtype=float)
    p = p / np.sqrt(np.sum(a * p * p))
    grad = 2.0 * a * p
    alpha_cov = 0.5 * (_J6 @ p)
    return _build_point("cy", p, _alpha_c3, _omega_theta,
                        T_rows=grad[None, :],
                        H_rows=np.stack([grad, alpha_cov]),
                        self_dual_expected=False)


# --- orthonormal 2-frames of R^4 -------------------------------------------


def _alpha_n5(x: np.ndarray, v: np.ndarray) -> float:
    return 0.5 * (float(x[:4] @ v[4:]) - float(x[4:] @ v[:4]))


def _omega_n5(p: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    e1, e2 = p[:4], p[4:]
    d1 = np.linalg.det(np.stack([e1, e2, u[:4], v[4:]], axis=0))
    d2 = np.linalg.det(np.stack([e1, e2, v[:4], u[4:]], axis=0))
    return float(d1 - d2)


def n5_point(p: np.ndarray | None = None,
             rng: np.random.Generator | None = None) -> ScenarioPoint:
    """Orthonormal pairs (e1, e2) in S^3 x S^3; the Reeb vector is
    (-e2, e1) and omega is the Grassmannian 2-form."""
    rng = rng or np.random.default_rng(0)
    if p is None:
        e1 = rng.normal(size=4)
        e1 /= np.linalg.norm(e1)
        e2 = rng.normal(size=4)
        e2 -= (e2 @ e1) * e1
        e2 /= np.linalg.norm(e2)
        p = np.concatenate([e1, e2])
    p = np.asarray(p, dtype=float)
    e1, e2 = p[:4], p[4:]
    z4 = np.zeros(4)
    T_rows = np.stack([np.concatenate([e1, z4]),
                       np.concatenate([z4, e2]),
                       np.concatenate([e2, e1])])
    v = np.concatenate([-e2, e1])
    H_rows = np.concatenate([T_rows, v[None, :]], axis=0)
    sp = _build_point("n5", p, _alpha_n5, _omega_n5,
                      T_rows=T_rows, H_rows=H_rows)
    sp.report.add("reeb = (-e2, e1)",
                  float(np.max(np.abs(sp.reeb - v))), 1e-6)
    return sp


SCENARIOS = {"s5": s5_point, "cy": cy_levelset_point, "n5": n5_point}


def verify_scenario(name: str, n_points: int = 100,
                    rng: np.random.Generator | None = None) -> dict:
    """Campaign over random points; returns max deviations per check."""
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario: {name}")
    rng = rng or np.random.default_rng(0)
    t0 = time.time()
    worst: dict = {}
    n_pass = 0
    for _ in range(n_points):
        sp = SCENARIOS[name](rng=rng)
        n_pass += int(sp.report.passed)
        for c in sp.report.checks:
            k = c["hypothesis"]
            if k not in worst or abs(c["value"]) > abs(worst[k]["value"]):
                worst[k] = dict(c)
    return {"scenario": name, "n_points": n_points,
            "n_pass": n_pass, "pass": n_pass == n_points,
            "worst_checks": worst, "tolerance": SCENARIO_TOL,
            "runtime_s": time.time() - t0}
