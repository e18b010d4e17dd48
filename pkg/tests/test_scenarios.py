import numpy as np
import pytest

from contactfive.scenarios import (DEFAULT_CY_WEIGHTS, SCENARIOS,
                                   cy_levelset_point, n5_point, s5_point,
                                   verify_scenario)


def test_s5_point_passes():
    sp = s5_point(np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]))
    assert sp.report.passed, sp.report.failed_hypotheses()
    # dalpha restricted to the frame is exactly the standard block form
    assert np.allclose(sp.dalpha_singvals, 1.0, atol=1e-8)
    # the 2-form is self-dual with unit comass
    c = sp.omega.coeffs()
    assert np.hypot(c[1], c[2]) == pytest.approx(1.0, abs=1e-8)
    assert np.linalg.norm(c[3:]) < 1e-8


def test_s5_point_normalizes_input():
    sp = s5_point(np.array([2.0, 0.0, 0.0, 0.0, 0.0, 0.0]))
    assert np.linalg.norm(sp.point) == pytest.approx(1.0)


def test_cy_point_wedge_orthogonal_only():
    sp = cy_levelset_point(np.array([0.3, -0.5, 0.4, 0.2, -0.1, 0.6]))
    assert sp.report.passed, sp.report.failed_hypotheses()
    names = [c["hypothesis"] for c in sp.report.checks]
    assert "w ^ dalpha = 0" in names
    # no self-duality claims for the unrescaled ellipsoid form
    assert all("self-duality" not in n for n in names)
    # the point sits on the level set
    a = np.repeat(np.asarray(DEFAULT_CY_WEIGHTS), 2)
    assert np.sum(a * sp.point ** 2) == pytest.approx(1.0, abs=1e-12)


def test_cy_round_weights_recover_sphere():
    p = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    sp = cy_levelset_point(p, weights=(1.0, 1.0, 1.0))
    c = sp.omega.coeffs()
    # on the round sphere the CY form is the special Legendrian one
    assert np.hypot(c[1], c[2]) == pytest.approx(1.0, abs=1e-8)
    assert np.linalg.norm(c[3:]) < 1e-8


def test_n5_point_reeb():
    rng = np.random.default_rng(3)
    sp = n5_point(rng=rng)
    assert sp.report.passed, sp.report.failed_hypotheses()
    e1, e2 = sp.point[:4], sp.point[4:]
    assert np.max(np.abs(sp.reeb - np.concatenate([-e2, e1]))) < 1e-6


def test_verify_scenario_campaigns(rng):
    for name in ("s5", "cy", "n5"):
        out = verify_scenario(name, n_points=20, rng=rng)
        assert out["pass"], out["worst_checks"]
        assert out["n_pass"] == 20
    with pytest.raises(ValueError):
        verify_scenario("t2", n_points=1)


def test_scenarios_registry():
    assert set(SCENARIOS) == {"s5", "cy", "n5"}
