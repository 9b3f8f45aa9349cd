"""Bridge between invariant frame data (E, S) and ADM variables (γ, π).

γ = EᵀE are the metric components in the λ-frame and
π = ½ E⁻¹ S E⁻ᵀ det E the momentum components, the density weight being the
explicit det E factor.  Traces and determinants of π use the mixed tensor
π^i_j = (π γ)^i_j.
"""
import math
from typing import NamedTuple

import numpy as np

from g2flow import frame
from g2flow.flow import FlowState
from g2flow.mat3 import as_mat3, symmetrize
from g2flow.util import G2FlowError


class ADMError(G2FlowError):
    """Raised for ADM data outside the domain of the bridge"""


class ADMState(NamedTuple):
    """Metric γ and momentum density π in the λ-frame"""
    gamma: np.ndarray
    pi: np.ndarray


class Hamiltonians(NamedTuple):
    """Densities of H, H_G2 and H_GR"""
    H: float
    HG2: float
    HGR: float


class ADMConstraints(NamedTuple):
    """Scalar (Hamiltonian) and vector (momentum) constraint values"""
    scalar: float
    momentum: np.ndarray


def _check_gamma(gamma):
    gamma = as_mat3(gamma, "gamma")
    if np.max(np.abs(gamma - gamma.T)) > 1e-12 * max(1.0, float(np.max(np.abs(gamma)))):
        raise ADMError("gamma must be symmetric")
    if not np.all(np.linalg.eigvalsh(symmetrize(gamma)) > 0):
        raise ADMError("gamma must be positive-definite")
    return symmetrize(gamma)


def to_adm(st):
    """γ = EᵀE, π = ½ E⁻¹ S E⁻ᵀ det E"""
    E = frame.check_frame(st.E)
    Einv = np.linalg.inv(E)
    return ADMState(E.T @ E, symmetrize(0.5 * Einv @ st.S @ Einv.T * np.linalg.det(E)))


def from_adm(adm, t=0.0):
    """Inverse of to_adm in the gauge where E is the positive square root of γ"""
    gamma = _check_gamma(adm.gamma)
    values, vectors = np.linalg.eigh(gamma)
    E = vectors @ np.diag(np.sqrt(values)) @ vectors.T
    S = 2.0 * E @ np.asarray(adm.pi, dtype=float) @ E.T / np.linalg.det(E)
    return FlowState(E, symmetrize(S), float(t))


def pi_mixed(adm):
    """π^i_j = π^ik γ_kj"""
    return np.asarray(adm.pi, dtype=float) @ adm.gamma


def volume_factor(adm):
    """det E = √det γ"""
    return math.sqrt(float(np.linalg.det(_check_gamma(adm.gamma))))


def hamiltonians(adm, c):
    """Densities H = -½R vol + 8 det(π^i_j) vol⁻², H_G2 = -H1 + ⅛H2, H_GR = -R vol + (tr π² - ½(tr π)²) vol⁻¹"""
    st = from_adm(adm)
    vol = volume_factor(adm)
    R = frame.scalar_curvature(st.E, c)
    mixed = pi_mixed(adm)
    h1 = R * vol
    h2 = 8.0 * float(np.linalg.det(mixed)) / vol ** 2
    supermomentum = float(np.trace(mixed @ mixed)) - 0.5 * float(np.trace(mixed)) ** 2
    return Hamiltonians(-0.5 * h1 + h2, -h1 + 0.125 * h2, -h1 + supermomentum / vol)


def christoffel(gamma, c):
    """Γ^i_jk of the left-invariant metric γ in the λ-frame, ∇_(X_j) X_k = Γ^i_jk X_i"""
    cc = c.c
    lowered = np.einsum("mjk,ml->ljk", cc, gamma)
    koszul = 0.5 * (
        lowered
        - np.einsum("mkl,mj->ljk", cc, gamma)
        + np.einsum("mlj,mk->ljk", cc, gamma)
    )
    return np.einsum("il,ljk->ijk", np.linalg.inv(gamma), koszul)


def adm_constraints(adm, c):
    """Scalar constraint R vol² + ½(tr π)² - tr π² and momentum constraint ∇_j π^ij"""
    gamma = _check_gamma(adm.gamma)
    st = from_adm(adm)
    vol = volume_factor(adm)
    R = frame.scalar_curvature(st.E, c)
    mixed = pi_mixed(adm)
    scalar = R * vol ** 2 + 0.5 * float(np.trace(mixed)) ** 2 - float(np.trace(mixed @ mixed))
    Gam = christoffel(gamma, c)
    pi = np.asarray(adm.pi, dtype=float)
    momentum = np.einsum("ijl,lj->i", Gam, pi) + np.einsum("jjl,il->i", Gam, pi)
    return ADMConstraints(scalar, momentum)


def momentum_from_frame(v, E):
    """Image of the frame divergence S_iα;α under the change of variables: ½ det E · E⁻¹ v"""
    return 0.5 * float(np.linalg.det(E)) * np.linalg.solve(E, np.asarray(v, dtype=float))


def adm_hook(st, c, coeffs):  # pylint: disable=W0613
    """Monitor hook for flow.integrate: ADM constraint columns"""
    constraints = adm_constraints(to_adm(st), c)
    return {
        "adm_scalar": constraints.scalar,
        "adm_momentum_norm": float(np.linalg.norm(constraints.momentum)),
    }
