"""g2flow unit tests for reduced.py"""

import math

import numpy as np
import pytest

from g2flow.flow import IntegrationConfig, integrate
from g2flow.liealg import preset
from g2flow.reduced import (
    ReducedError,
    ReducedState,
    XYState,
    closed_form_sigma0,
    constant_curvature_frame,
    embed,
    embedded_flow_state,
    from_xy,
    hyperbolic_structure,
    integrate_reduced,
    reduced_field_ab,
    reduced_field_xy,
    reduced_state,
    regime,
    sigma_of_frame,
    to_xy,
)


@pytest.mark.unit
def test_reduced_field_ab_examples():
    """Test reduced_field_ab on the documented examples"""
    assert reduced_field_ab(ReducedState(1.0, 1.0, 0.0)) == (1.0, -1.0)
    assert reduced_field_ab(ReducedState(1.0, 0.0, 0.25)) == (0.0, 0.25)
    assert reduced_field_ab(ReducedState(2.0, 1.0, 0.25)) == pytest.approx((2.0, -15.0 / 16.0))
    with pytest.raises(ReducedError):
        reduced_field_ab(ReducedState(0.0, 1.0, 0.0))


@pytest.mark.unit
def test_reduced_field_xy_examples():
    """Test reduced_field_xy on the documented examples"""
    assert reduced_field_xy(XYState(1.0, 1.0), 0.0) == (2.0, 0.0)
    assert reduced_field_xy(XYState(4.0, 0.0), 1.0) == (0.0, 0.5)
    with pytest.raises(ReducedError):
        reduced_field_xy(XYState(-1.0, 0.0), 1.0)


@pytest.mark.unit
def test_change_of_variables(rng):
    """Test (x, y) = (a², ab) carries one field to the other"""
    for _ in range(10):
        s = ReducedState(rng.uniform(0.2, 3.0), rng.normal(), rng.normal())
        da, db = reduced_field_ab(s)
        dx, dy = reduced_field_xy(to_xy(s), s.sigma)
        assert dx == pytest.approx(2 * s.a * da)
        assert dy == pytest.approx(da * s.b + s.a * db)
        back = from_xy(to_xy(s), s.sigma)
        assert back.a == pytest.approx(s.a)
        assert back.b == pytest.approx(s.b)


@pytest.mark.unit
def test_sigma_of_frame():
    """Test σ of the round and flat frames"""
    assert sigma_of_frame(np.eye(3), preset("su2")) == pytest.approx(0.25)
    assert sigma_of_frame(2.0 * np.eye(3), preset("su2")) == pytest.approx(0.0625)
    assert sigma_of_frame(np.eye(3), preset("abelian")) == 0.0
    with pytest.raises(ReducedError):
        sigma_of_frame(np.diag([1.0, 2.0, 0.5]), preset("su2"))


@pytest.mark.unit
def test_embed_examples():
    """Test embed on the documented examples"""
    st = embed(ReducedState(1.0, 1.0, 0.25), np.eye(3), preset("su2"))
    assert np.allclose(st.E, np.eye(3))
    assert np.allclose(st.S, np.eye(3))
    st = embed(ReducedState(2.0, -0.5, 0.0), np.eye(3), preset("abelian"))
    assert np.allclose(st.E, 2.0 * np.eye(3))
    assert np.allclose(st.S, -0.5 * np.eye(3))
    with pytest.raises(ReducedError):
        embed(ReducedState(1.0, 1.0, 0.25), np.diag([1.0, 2.0, 0.5]), preset("su2"))
    with pytest.raises(ReducedError):
        embed(ReducedState(1.0, 1.0, 0.5), np.eye(3), preset("su2"))
    assert reduced_state(1.0, 2.0, np.eye(3), preset("su2")).sigma == pytest.approx(0.25)


@pytest.mark.unit
def test_closed_form_sigma0():
    """Test closed_form_sigma0 on the documented examples"""
    assert closed_form_sigma0(1.0, 1.0, 0.0) == (1.0, 1.0)
    a, b = closed_form_sigma0(1.0, 1.0, 1.0)
    assert a == pytest.approx(math.sqrt(3.0))
    assert b == pytest.approx(1.0 / math.sqrt(3.0))
    for t in (0.1, 0.7, 5.0):
        a, b = closed_form_sigma0(1.5, -0.4, t)
        assert a * b == pytest.approx(1.5 * -0.4)
    with pytest.raises(ReducedError):
        closed_form_sigma0(-1.0, 1.0, 0.0)
    with pytest.raises(ReducedError):
        closed_form_sigma0(1.0, 1.0, -1.0)


@pytest.mark.unit
def test_regime():
    """Test the regime labels"""
    assert regime(0.5) == "G2"
    assert regime(-0.5) == "G2*"
    assert regime(0.0) == "singular"


@pytest.mark.unit
def test_integrate_reduced_sigma0():
    """Test y stays constant and the closed form is reached when σ = 0"""
    rows = integrate_reduced(ReducedState(1.0, 1.0, 0.0), 1e-3, 1.0)
    assert len(rows) == 1001
    assert rows[-1].t == 1.0
    assert max(abs(r.y - 1.0) for r in rows) <= 1e-10
    a, b = closed_form_sigma0(1.0, 1.0, 1.0)
    assert rows[-1].a == pytest.approx(a, abs=1e-8)
    assert rows[-1].b == pytest.approx(b, abs=1e-8)


@pytest.mark.unit
def test_integrate_reduced_positive_sigma():
    """Test y strictly increases when σ > 0"""
    rows = integrate_reduced(ReducedState(1.0, 1.0, 0.25), 1e-2, 2.0)
    ys = [r.y for r in rows]
    assert all(later > earlier for earlier, later in zip(ys, ys[1:]))


@pytest.mark.unit
def test_integrate_reduced_negative_sigma():
    """Test y strictly decreases and the regime turns indefinite when σ < 0"""
    rows = integrate_reduced(ReducedState(1.0, 0.0, -0.25), 1e-2, 2.0)
    ys = [r.y for r in rows]
    assert all(later < earlier for earlier, later in zip(ys, ys[1:]))
    assert rows[0].regime == "singular"
    assert rows[-1].regime == "G2*"


@pytest.mark.unit
def test_integrate_reduced_validation():
    """Test bad steps and a non-positive a are rejected"""
    with pytest.raises(ReducedError):
        integrate_reduced(ReducedState(1.0, 1.0, 0.0), 0.0, 1.0)
    with pytest.raises(ReducedError):
        integrate_reduced(ReducedState(1.0, 1.0, 0.0), 0.1, -1.0)
    with pytest.raises(ReducedError):
        integrate_reduced(ReducedState(0.0, 1.0, 0.0), 0.1, 1.0)


@pytest.mark.unit
def test_constant_curvature_frames():
    """Test the frames used to embed the reduced system"""
    for sigma in (0.25, 0.0, -0.25, 2.0, -3.0):
        E0, c = constant_curvature_frame(sigma)
        assert sigma_of_frame(E0, c) == pytest.approx(sigma)
    assert constant_curvature_frame(-1.0)[1].name == "hyperbolic"
    assert sigma_of_frame(np.eye(3), hyperbolic_structure()) == pytest.approx(-1.0)


@pytest.mark.unit
def test_full_flow_stays_isotropic():
    """Test the full flow from an embedded state follows the reduced trajectory"""
    for sigma, b0 in ((0.25, 1.0), (-0.25, 0.5), (0.0, 1.0)):
        E0, c = constant_curvature_frame(sigma)
        s = ReducedState(1.0, b0, sigma)
        rows = integrate_reduced(s, 1e-2, 1.0)
        traj = integrate(embed(s, E0, c), c, IntegrationConfig(1e-2, 1.0))
        assert len(rows) == len(traj)
        E0inv = np.linalg.inv(E0)
        for row, st in zip(rows, traj.samples):
            expected = embedded_flow_state(row, E0)
            scaled = st.E @ E0inv
            assert np.max(np.abs(scaled - np.diag(np.diag(scaled)))) <= 1e-10
            assert np.max(np.abs(st.S - np.diag(np.diag(st.S)))) <= 1e-10
            assert np.allclose(st.E, expected.E, atol=1e-8)
            assert np.allclose(st.S, expected.S, atol=1e-8)
