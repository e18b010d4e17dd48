import numpy as np
import pytest

from contactfive.acs import (constant_field, dilate_field, j_matrices,
                             sin_beta_field, standard_field)
from contactfive.charts import PlaneChart, plane_vector_from_chart
from contactfive.contact import ContactParams
from contactfive.solver import (ContractionError, EllipticOperator,
                                SolverConfig, adapt_chart, choose_dilation,
                                get_operator, picard_solve, psi, psi_invert,
                                smallness_report, solve_disk)


def test_elliptic_operator_validates():
    with pytest.raises(ValueError):
        EllipticOperator(33, 1.0, 2.0, 1.0)     # not elliptic
    with pytest.raises(ValueError):
        EllipticOperator(33, -1.0, 0.0, 1.0)


def test_laplacian_manufactured_solution():
    # u = (1 - x^2 - y^2) x solves Laplace u = -8x with zero boundary
    errs = {}
    for n in (33, 65):
        op = EllipticOperator(n, 1.0, 0.0, 1.0)
        xs = np.linspace(-1, 1, n)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        u, lin_res = op.solve(-8.0 * X)
        exact = (1 - X ** 2 - Y ** 2) * X
        errs[n] = np.max(np.abs((u - exact)[op.interior]))
        assert lin_res < 1e-10
    assert errs[65] < 5e-5
    assert errs[33] / errs[65] > 3.0           # second-order convergence


def test_laplacian_inverse_norm():
    # sup of the solution of Laplace u = 1 on the unit disk is 1/4
    op = get_operator(65, 1.0, 0.0, 1.0)
    assert op.N == pytest.approx(0.25, abs=0.01)
    assert get_operator(65, 1.0, 0.0, 1.0) is op     # cached


def test_cross_term_operator():
    # u = (1 - x^2 - y^2) xy, full operator with sigma0 != 0.  The cross
    # stencil extends by zero over the cut boundary, which costs one
    # order there; the error must stay bounded and shrink with the grid.
    e0, s0, g0 = 1.2, 0.3, 0.9
    errs = {}
    for n in (65, 129):
        op = EllipticOperator(n, e0, s0, g0)
        xs = np.linspace(-1, 1, n)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        exact = (1 - X ** 2 - Y ** 2) * X * Y
        u11 = -6 * X * Y
        u22 = -6 * X * Y
        u12 = 1 - 3 * X ** 2 - 3 * Y ** 2
        rhs = e0 * u11 + 2 * s0 * u12 + g0 * u22
        u, _ = op.solve(rhs)
        errs[n] = np.max(np.abs((u - exact)[op.interior]))
    assert errs[65] < 5e-3
    assert errs[65] / errs[129] > 1.5


def test_adapt_chart_normal_form():
    acs = sin_beta_field(0.05)
    p = np.array([0.1, -0.2, 0.05, 0.1, 0.3])
    for w in (0.0, 0.3 - 0.1j, 0.5j):
        v = plane_vector_from_chart(PlaneChart(w), j_matrices(acs, p))
        ac = adapt_chart(p, v, acs)
        s0, b0, g0, d0, e0 = ac.coeff_arrays(np.zeros(5))
        assert abs(b0) < 1e-9
        assert s0 == pytest.approx(ac.sigma0, abs=1e-9)
        assert g0 == pytest.approx(ac.gamma0, abs=1e-9)
        assert e0 == pytest.approx((1 + s0 ** 2) / g0, abs=1e-9)
        assert np.allclose(ac.chart.to_ambient(np.zeros(5)), p)


def test_adapt_chart_fallback_direction():
    # span{dy1, J dy1} has no dx1 component for the standard field;
    # the distinguished direction falls back to another axis
    ac = adapt_chart(np.zeros(5), np.array([0.0, 1.0, 0.0, 0.0]),
                     standard_field())
    assert ac.gamma0 > 0.5


def test_flat_solver_exact(rng):
    # constant fields converge to f = 0 immediately
    for _ in range(5):
        s0, d0 = rng.uniform(-0.5, 0.5, size=2)
        b0 = rng.uniform(-0.3, 0.3)
        g0 = rng.uniform(0.7, 1.3)
        acs = constant_field(sigma0=s0, beta0=b0, gamma0=g0, delta0=d0)
        sol = solve_disk(np.zeros(5), np.array([1.0, 0, 0, 0]), acs,
                         SolverConfig(n=33))
        assert sol.converged
        assert sol.iterations <= 2
        assert sol.f.sup() <= 1e-12
        assert sol.eq_residual <= 1e-10
        assert sol.jinv_residual <= 1e-10


def test_sin_beta_solution_regression():
    cfg = SolverConfig(n=65)
    sol = solve_disk(np.zeros(5), np.array([1.0, 0, 0, 0]),
                     sin_beta_field(0.01), cfg)
    assert sol.converged
    assert sol.iterations <= 5
    # frozen residual window: small but not trivially zero
    assert 1e-8 < sol.eq_residual <= 1e-6
    assert sol.jinv_residual <= sol.jinv_tolerance
    assert sol.smallness["satisfied"]
    assert all(r < 1.0 for r in sol.ratios)
    header = sol.header()
    assert header["n"] == 65
    assert sol.to_json().startswith("{")


def test_ambient_patch_is_legendrian():
    from contactfive.lift import legendrian_residual
    sol = solve_disk(np.array([0.0, 0.1, -0.05, 0.0, 0.2]),
                     np.array([1.0, 0.2, 0.0, 0.1]),
                     sin_beta_field(0.02), SolverConfig(n=33))
    patch = sol.ambient_patch()
    assert legendrian_residual(patch) < 1e-10


def test_smallness_report_fields():
    ac = adapt_chart(np.zeros(5), np.array([1.0, 0, 0, 0]),
                     sin_beta_field(0.01))
    op = get_operator(33, ac.e0, ac.sigma0, ac.gamma0)
    rep = smallness_report(ac, op.N, SolverConfig(n=33))
    for key in ("beta_c2", "A_c2", "total", "threshold", "satisfied",
                "ball_radius", "delta_bound_ok"):
        assert key in rep
    assert rep["satisfied"]
    assert rep["ball_radius"] > 0


def test_contraction_error_on_rough_field():
    # far outside the smallness regime the iteration must either abort
    # or report non-contracting ratios instead of pretending success
    acs = sin_beta_field(20.0)
    cfg = SolverConfig(n=33, max_iter=30)
    try:
        sol = solve_disk(np.zeros(5), np.array([1.0, 0, 0, 0]), acs, cfg)
    except (ContractionError, ValueError):
        return
    assert (not sol.smallness["satisfied"]) or not sol.converged


def test_psi_identity_for_standard_field():
    P = np.array([0.0, 0.1, -0.2, 0.0, 0.3])
    X = PlaneChart(0.2 + 0.1j)
    val = psi(P, X, standard_field(), SolverConfig(n=33))
    assert np.max(np.abs(val.Q - P)) < 1e-10
    assert abs(val.Y.w - X.w) < 1e-10


def test_psi_requires_spine_point():
    with pytest.raises(ValueError):
        psi(np.array([0.5, 0, 0, 0, 0]), PlaneChart(0.0), standard_field())
    with pytest.raises(ValueError):
        psi_invert(np.array([0.0, 0, 0, 0.5, 0]), PlaneChart(0.0),
                   standard_field())


def test_psi_invert_roundtrip():
    acs = sin_beta_field(0.05)
    cfg = SolverConfig(n=33)
    Q = np.array([0.0, 0.05, -0.03, 0.0, 0.02])
    Y = PlaneChart(0.08 - 0.04j)
    inv = psi_invert(Q, Y, acs, cfg)
    assert inv.error <= cfg.psi_tol
    val = psi(inv.P, inv.X, acs, cfg)
    assert np.max(np.abs(val.Q - Q)) < 1e-6
    assert abs(val.Y.w - Y.w) < 1e-6


def test_choose_dilation():
    r, rep = choose_dilation(standard_field(), SolverConfig(n=33))
    assert r == 1.0
    assert rep["satisfied"]
    r2, rep2 = choose_dilation(sin_beta_field(2.0), SolverConfig(n=33))
    assert r2 < 1.0
    assert rep2["satisfied"]


def test_solver_respects_contact_dilation():
    cfg = SolverConfig(n=33, params=ContactParams(0.5))
    sol = solve_disk(np.zeros(5), np.array([1.0, 0, 0, 0]),
                     sin_beta_field(0.01), cfg)
    assert sol.converged
    from contactfive.lift import legendrian_residual
    assert legendrian_residual(sol.ambient_patch()) < 1e-10
