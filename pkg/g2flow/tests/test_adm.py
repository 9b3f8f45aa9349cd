"""g2flow unit tests for adm.py"""

import numpy as np
import pytest

from g2flow.adm import (
    ADMError,
    ADMState,
    adm_constraints,
    adm_hook,
    from_adm,
    hamiltonians,
    momentum_from_frame,
    to_adm,
)
from g2flow.flow import FlowState, hamiltonian_densities, make_state
from g2flow.frame import FrameError, divergence_constraint, levi_civita
from g2flow.liealg import preset
from g2flow.mat3 import random_rotation
from g2flow.selftest import random_frame


@pytest.mark.unit
def test_to_adm_identity_frame(symmetric_matrix):
    """Test to_adm with E = I"""
    state = to_adm(FlowState(np.eye(3), symmetric_matrix))
    assert np.allclose(state.gamma, np.eye(3))
    assert np.allclose(state.pi, 0.5 * symmetric_matrix)


@pytest.mark.unit
def test_to_adm_scaled_frame(symmetric_matrix):
    """Test to_adm with E = aI"""
    state = to_adm(FlowState(3.0 * np.eye(3), symmetric_matrix))
    assert np.allclose(state.gamma, 9.0 * np.eye(3))
    assert np.allclose(state.pi, 1.5 * symmetric_matrix)


@pytest.mark.unit
def test_to_adm_singular_frame():
    """Test to_adm rejects a singular frame"""
    with pytest.raises(FrameError):
        to_adm(FlowState(np.zeros((3, 3)), np.eye(3)))


@pytest.mark.unit
def test_definiteness_transfers(rng):
    """Test S positive-definite gives π positive-definite"""
    for _ in range(5):
        M = rng.normal(size=(3, 3))
        S = M @ M.T + 0.1 * np.eye(3)
        E = random_frame(rng)
        state = to_adm(FlowState(E, S))
        assert np.all(np.linalg.eigvalsh(state.pi) > 0)


@pytest.mark.unit
def test_from_adm_examples():
    """Test from_adm on simple inputs"""
    st = from_adm(ADMState(np.eye(3), 0.5 * np.eye(3)))
    assert np.allclose(st.E, np.eye(3))
    assert np.allclose(st.S, np.eye(3))
    pi = np.array([[1.0, 0.2, 0.0], [0.2, -0.5, 0.1], [0.0, 0.1, 0.3]])
    st = from_adm(ADMState(4.0 * np.eye(3), pi))
    assert np.allclose(st.E, 2.0 * np.eye(3))
    assert np.allclose(to_adm(st).pi, pi, atol=1e-12)


@pytest.mark.unit
def test_from_adm_round_trip(spd_matrix, symmetric_matrix):
    """Test to_adm after from_adm is the identity"""
    state = ADMState(spd_matrix, symmetric_matrix)
    back = to_adm(from_adm(state))
    assert np.allclose(back.gamma, state.gamma, atol=1e-12)
    assert np.allclose(back.pi, state.pi, atol=1e-12)
    st = from_adm(state)
    assert np.allclose(st.E, st.E.T)
    assert np.all(np.linalg.eigvalsh(st.E) > 0)


@pytest.mark.unit
def test_from_adm_rejects_bad_gamma():
    """Test from_adm rejects indefinite and non-symmetric metrics"""
    with pytest.raises(ADMError):
        from_adm(ADMState(np.diag([1.0, -1.0, 1.0]), np.zeros((3, 3))))
    with pytest.raises(ADMError):
        from_adm(ADMState(np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]), np.zeros((3, 3))))


@pytest.mark.unit
def test_hamiltonians_flat():
    """Test all Hamiltonians vanish for flat data with zero momentum"""
    assert hamiltonians(ADMState(np.eye(3), np.zeros((3, 3))), preset("abelian")) == pytest.approx((0.0, 0.0, 0.0))


@pytest.mark.unit
def test_hamiltonians_su2():
    """Test the Hamiltonians of the round frame with S = I"""
    ham = hamiltonians(to_adm(FlowState(np.eye(3), np.eye(3))), preset("su2"))
    assert ham.H == pytest.approx(0.25)
    assert ham.HG2 == pytest.approx(-1.5 + 0.125)
    assert ham.HGR == pytest.approx(-1.5 - 0.375)


@pytest.mark.unit
def test_hamiltonians_match_flow_densities(rng):
    """Test H agrees with the flow densities and the density dictionary holds"""
    for name in ("su2", "heisenberg", "sol"):
        c = preset(name)
        E = random_frame(rng)
        S = rng.normal(size=(3, 3))
        st = make_state(E, S + S.T)
        dens = hamiltonian_densities(st, c)
        ham = hamiltonians(to_adm(st), c)
        assert ham.H == pytest.approx(dens.h, abs=1e-9)
        assert ham.H == pytest.approx(-0.5 * dens.h1 + dens.h2, abs=1e-9)
        assert ham.HG2 == pytest.approx(-dens.h1 + 0.125 * dens.h2, abs=1e-9)


@pytest.mark.unit
def test_determinant_identity(rng):
    """Test 8·det(π)/det(E)² = det(S)·det(E)"""
    for _ in range(10):
        E = random_frame(rng)
        S = rng.normal(size=(3, 3))
        S = S + S.T
        state = to_adm(FlowState(E, S))
        lhs = 8.0 * np.linalg.det(state.pi @ state.gamma) / np.linalg.det(E) ** 2
        assert lhs == pytest.approx(np.linalg.det(S) * np.linalg.det(E), abs=1e-12 * (1.0 + abs(lhs)))


@pytest.mark.unit
def test_adm_constraints_examples():
    """Test the constraints of flat and round data"""
    scalar, momentum = adm_constraints(ADMState(np.eye(3), np.zeros((3, 3))), preset("abelian"))
    assert scalar == 0.0
    assert np.allclose(momentum, 0.0)
    scalar, momentum = adm_constraints(to_adm(FlowState(np.eye(3), np.eye(3))), preset("su2"))
    assert scalar == pytest.approx(15.0 / 8.0)
    assert np.allclose(momentum, 0.0, atol=1e-12)


@pytest.mark.unit
def test_momentum_constraint_heisenberg():
    """Test the momentum constraint of an off-diagonal heisenberg state"""
    S = np.zeros((3, 3))
    S[0, 1] = S[1, 0] = 1.0
    c = preset("heisenberg")
    _, momentum = adm_constraints(to_adm(FlowState(np.eye(3), S)), c)
    assert np.allclose(momentum, [0.0, 0.0, -0.5], atol=1e-12)
    v = divergence_constraint(S, np.eye(3), levi_civita(np.eye(3), c))
    assert np.allclose(v, [0.0, 0.0, -1.0], atol=1e-12)


@pytest.mark.unit
def test_momentum_matches_divergence(rng):
    """Test the momentum constraint is the frame divergence in ADM variables"""
    for name in ("su2", "heisenberg", "e2", "sol"):
        c = preset(name)
        for _ in range(25):
            E = random_frame(rng)
            S = rng.normal(size=(3, 3))
            S = S + S.T
            v = divergence_constraint(S, E, levi_civita(E, c))
            _, momentum = adm_constraints(to_adm(FlowState(E, S)), c)
            assert np.allclose(momentum, momentum_from_frame(v, E), atol=1e-9)


@pytest.mark.unit
def test_gauge_invariance(rng):
    """Test a rotation of the frame leaves the ADM observables unchanged"""
    c = preset("su2")
    E = random_frame(rng)
    S = rng.normal(size=(3, 3))
    S = S + S.T
    R = random_rotation(rng)
    state = to_adm(FlowState(E, S))
    rotated = to_adm(FlowState(R @ E, R @ S @ R.T))
    assert np.allclose(state.gamma, rotated.gamma, atol=1e-12)
    assert np.allclose(state.pi, rotated.pi, atol=1e-12)
    assert hamiltonians(state, c) == pytest.approx(hamiltonians(rotated, c))


@pytest.mark.unit
def test_adm_hook():
    """Test the monitor hook columns"""
    extra = adm_hook(FlowState(np.eye(3), np.eye(3)), preset("su2"), (0.5, 1.0))
    assert set(extra) == {"adm_scalar", "adm_momentum_norm"}
    assert extra["adm_scalar"] == pytest.approx(15.0 / 8.0)
    assert extra["adm_momentum_norm"] == pytest.approx(0.0, abs=1e-12)
