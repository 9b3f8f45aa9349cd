"""Invariant frame geometry on P = G × SO(3).

A frame is a matrix E with e^i = E_ij λ^j and det E > 0.  A connection is a
matrix A with a^i = A_ij λ^j in the section gauge.  Two-forms in the λ-basis
are stored as antisymmetric arrays X[i, m, n] meaning ½ X_imn λ^m∧λ^n, and
in the e-basis the same way with e in place of λ.
"""
from typing import NamedTuple

import numpy as np

from g2flow import TORSION_TOL
from g2flow.mat3 import EPSILON, as_mat3, so3_bracket
from g2flow.util import G2FlowError

_PAIRS = ((0, 1), (1, 2), (2, 0))


class FrameError(G2FlowError):
    """Raised for singular frames or connections that do not fit the request"""


class CurvatureData(NamedTuple):
    """Curvature of an invariant connection in the orthonormal frame"""
    G: np.ndarray
    R: float
    T: np.ndarray


def check_frame(E):
    """Return E as an array after checking det E > 0"""
    E = as_mat3(E, "E")
    det = np.linalg.det(E)
    if not det > 0:
        raise FrameError(f"frame must have positive determinant, got det E = {det:.6g}")
    return E


def _to_e_basis(X, Einv):
    """Re-express ½X_imn λ^m∧λ^n in the e-basis via λ = E⁻¹e"""
    return np.einsum("imn,mj,nk->ijk", X, Einv, Einv)


def _torsion_lambda(E, A, c):
    """d_H e in the λ∧λ basis: -E_il c^l_mn + ε_ijk (A_jm E_kn - A_jn E_km)"""
    return (
        -np.einsum("il,lmn->imn", E, c.c)
        + np.einsum("ijk,jm,kn->imn", EPSILON, A, E)
        - np.einsum("ijk,jn,km->imn", EPSILON, A, E)
    )


def torsion(E, A, c):
    """Components T^i_jk of d_H e^i = ½ T^i_jk e^j∧e^k"""
    E = check_frame(E)
    return _to_e_basis(_torsion_lambda(E, as_mat3(A, "A"), c), np.linalg.inv(E))


def levi_civita(E, c):
    """The torsion-free connection of E, solved as a 9×9 linear system"""
    E = check_frame(E)

    def equations(A):
        tau = _torsion_lambda(E, A, c)
        return np.array([tau[i, m, n] for i in range(3) for (m, n) in _PAIRS])

    offset = equations(np.zeros((3, 3)))
    system = np.empty((9, 9))
    for p in range(9):
        unit = np.zeros(9)
        unit[p] = 1.0
        system[:, p] = equations(unit.reshape(3, 3)) - offset
    try:
        A = np.linalg.solve(system, -offset).reshape(3, 3)
    except np.linalg.LinAlgError as ex:
        raise FrameError(f"Levi-Civita system is singular for E={E.tolist()}: {ex}") from ex
    residual = float(np.max(np.abs(equations(A))))
    scale = 1.0 + float(np.max(np.abs(offset)))
    if residual > TORSION_TOL * scale:
        raise FrameError(f"Levi-Civita solve left torsion {residual:.3e}")
    return A


def curvature_lambda(A, c):
    """d_H a = da + ½[a∧a] in the λ∧λ basis: -A_ij c^j_mn + ε_ijk A_jm A_kn"""
    return -np.einsum("ij,jmn->imn", A, c.c) + np.einsum("ijk,jm,kn->imn", EPSILON, A, A)


def einstein_tensor(E, A, c):
    """Read G from d_H a^i = G_iβ ê^β, where ê^β = ½ ε_βjk e^j∧e^k, and set R = -2 tr G"""
    E = check_frame(E)
    A = as_mat3(A, "A")
    Einv = np.linalg.inv(E)
    F = _to_e_basis(curvature_lambda(A, c), Einv)
    G = 0.5 * np.einsum("bjk,ijk->ib", EPSILON, F)
    R = -2.0 * float(np.trace(G))
    return CurvatureData(G, R, _to_e_basis(_torsion_lambda(E, A, c), Einv))


def levi_civita_curvature(E, c):
    """einstein_tensor of the Levi-Civita connection of E"""
    return einstein_tensor(E, levi_civita(E, c), c)


def ricci_tensor(G):
    """Ric = G - tr(G)·I in the orthonormal frame"""
    return G - np.trace(G) * np.eye(3)


def scalar_curvature(E, c):
    """R of the left-invariant metric with orthonormal coframe E·λ"""
    return levi_civita_curvature(E, c).R


def covariant_derivative(S, E, A):
    """S_ij;m = Σ_kl A_kl (E⁻¹)_lm [L_k, S]_ij for invariant S (dS = 0)"""
    E = check_frame(E)
    brackets = np.stack([so3_bracket(k, S) for k in range(3)])
    return np.einsum("kl,lm,kij->ijm", A, np.linalg.inv(E), brackets)


def divergence_constraint(S, E, A):
    """(S_1α;α, S_2α;α, S_3α;α)"""
    return np.einsum("iaa->i", covariant_derivative(S, E, A))


def connection_variation(E, A_LC, P, c):
    """Q with ∂_t a^i = Q_iγ e^γ along ∂_t e^i = P_iα e^α: Q_ij = -ε_iαβ P_jα;β"""
    residual = float(np.max(np.abs(torsion(E, A_LC, c))))
    if residual > TORSION_TOL * (1.0 + float(np.max(np.abs(A_LC)))):
        raise FrameError(f"connection_variation needs the Levi-Civita connection, torsion is {residual:.3e}")
    dP = covariant_derivative(P, E, A_LC)
    return -np.einsum("iab,jab->ij", EPSILON, dP)


def covd_time_derivative(E, A, S, P, Q, B):
    """Time derivative of S_ij;k along ∂_t e = Pe, ∂_t a = Qe, ∂_t S = B

    ∂_t(S_ij;k) = B_ij;k - S_ij;α P_αk + ε_iαγ S_γj Q_αk + ε_jαγ S_iγ Q_αk
    """
    dS = covariant_derivative(S, E, A)
    dB = covariant_derivative(B, E, A)
    return (
        dB
        - np.einsum("ija,ak->ijk", dS, P)
        + np.einsum("iag,gj,ak->ijk", EPSILON, S, Q)
        + np.einsum("jag,ig,ak->ijk", EPSILON, S, Q)
    )
