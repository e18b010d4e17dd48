import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contactfive.contact import (DALPHA_MATRIX, ContactParams, alpha_eval,
                                 dalpha_eval, dilate, horizontal_frame,
                                 lift_vector, point5, reeb, standard_I,
                                 standard_I_matrix)

coord = st.floats(-2.0, 2.0)


def test_contact_params_validation():
    ContactParams(1.0)
    ContactParams(0.5)
    for bad in (0.0, -1.0, 2.0, np.inf, np.nan):
        with pytest.raises(ValueError):
            ContactParams(bad)


def test_point5_rejects_nonfinite():
    with pytest.raises(ValueError):
        point5(0.0, np.nan, 0.0, 0.0, 0.0)


def test_reeb_axioms():
    for r in (1.0, 0.5, 0.125):
        params = ContactParams(r)
        R = reeb(params)
        p = point5(0.3, -0.7, 0.2, 0.9, 1.5)
        assert alpha_eval(p, R, params) == pytest.approx(1.0, abs=1e-15)
        # the Reeb field is vertical, so its horizontal projection is 0
        assert np.allclose(R[:4], 0.0)


def test_alpha_on_coordinate_vectors():
    p = point5(0.2, 0.5, -0.3, 0.7, 0.0)
    e = np.eye(5)
    vals = [alpha_eval(p, e[k]) for k in range(5)]
    # alpha = dt - y1 dx1 - y2 dx2
    assert vals == pytest.approx([-0.5, 0.0, -0.7, 0.0, 1.0])


@given(coord, coord, coord, coord, coord, coord, coord, coord)
def test_dalpha_matches_matrix(u0, u1, u2, u3, v0, v1, v2, v3):
    u = np.array([u0, u1, u2, u3])
    v = np.array([v0, v1, v2, v3])
    assert dalpha_eval(u, v) == pytest.approx(u @ DALPHA_MATRIX @ v,
                                              abs=1e-12)
    assert dalpha_eval(u, v) == pytest.approx(-dalpha_eval(v, u), abs=1e-12)


@given(coord, coord, coord, coord, coord, coord, coord, coord, coord,
       st.floats(0.1, 1.0))
def test_lift_vector_is_horizontal(x1, y1, x2, y2, t, v0, v1, v2, v3, r):
    params = ContactParams(r)
    p = point5(x1, y1, x2, y2, t)
    v = np.array([v0, v1, v2, v3])
    lifted = lift_vector(p[:4], t, v, params)
    assert np.allclose(lifted[:4], v)
    assert alpha_eval(p, lifted, params) == pytest.approx(0.0, abs=1e-12)


def test_lift_vector_batched():
    q4 = np.random.default_rng(0).normal(size=(7, 4))
    v = np.random.default_rng(1).normal(size=(7, 4))
    out = lift_vector(q4, 0.0, v)
    assert out.shape == (7, 5)
    for k in range(7):
        assert np.allclose(out[k], lift_vector(q4[k], 0.0, v[k]))


def test_horizontal_frame_spans_kernel():
    params = ContactParams(0.5)
    p = point5(0.1, 0.6, -0.2, 0.8, 2.0)
    frame = horizontal_frame(p, params)
    assert len(frame) == 4
    for k, f in enumerate(frame):
        assert np.allclose(f[:4], np.eye(4)[k])
        assert alpha_eval(p, f, params) == pytest.approx(0.0, abs=1e-14)


def test_dilate():
    p = point5(1.0, 2.0, 3.0, 4.0, 5.0)
    assert np.allclose(dilate(p, 0.5), 2.0 * p)
    with pytest.raises(ValueError):
        dilate(p, 0.0)


def test_standard_I_square():
    I = standard_I_matrix()
    assert np.allclose(I @ I, -np.eye(4))
    v = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.allclose(standard_I(v), I @ v)
    # I preserves dalpha: dalpha(Iv, Iw) = dalpha(v, w)
    assert np.allclose(I.T @ DALPHA_MATRIX @ I, DALPHA_MATRIX)
