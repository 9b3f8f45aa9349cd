"""3×3 matrix kernel: Levi-Civita symbol, adjugate and the so(3) action.

Indices are 0-based throughout the library: generator k = 0, 1, 2 stands for
the mathematical L_1, L_2, L_3.
"""
import numpy as np

from g2flow.util import G2FlowError

EPSILON = np.zeros((3, 3, 3))
"""Levi-Civita symbol ε_ijk with ε_012 = +1"""
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPSILON[_i, _j, _k] = 1.0
    EPSILON[_i, _k, _j] = -1.0

SO3_BASIS = -EPSILON.copy()
"""so(3) basis with (L_k)_ij = -ε_kij, so that [L_i, L_j] = ε_ijk L_k and L_k v = e_k × v"""

IDENTITY = np.eye(3)


class Mat3Error(G2FlowError):
    """Raised for malformed 3×3 input"""


def as_mat3(m, name="matrix"):
    """Return m as a finite float 3×3 array or raise Mat3Error"""
    arr = np.asarray(m, dtype=float)
    if arr.shape != (3, 3):
        raise Mat3Error(f"{name} must be 3x3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise Mat3Error(f"{name} has non-finite entries")
    return arr


def determinant(m):
    """det(m)"""
    return float(np.linalg.det(m))


def trace(m):
    """tr(m)"""
    return float(np.trace(m))


def adjugate(m):
    """Transpose cofactor matrix: adj(m)_ij = ½ ε_iαβ ε_jγδ m_γα m_δβ, so adj(m)·m = det(m)·I"""
    return 0.5 * np.einsum("iab,jgd,ga,db->ij", EPSILON, EPSILON, m, m)


def adjugate_derivative(m, dm):
    """Directional derivative of adjugate at m along dm"""
    return np.einsum("iab,jgd,ga,db->ij", EPSILON, EPSILON, dm, m)


def so3_bracket(k, s):
    """[L_k, s] = L_k s - s L_k for a general 3×3 matrix s"""
    L = SO3_BASIS[k]
    return L @ s - s @ L


def hat(v):
    """Σ v_k L_k, the matrix of the cross product with v"""
    return np.einsum("k,kij->ij", np.asarray(v, dtype=float), SO3_BASIS)


def sym_antisym_split(m):
    """Split m into its symmetric and antisymmetric parts"""
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T), 0.5 * (m - m.T)


def symmetrize(m):
    """Symmetric part of m"""
    return 0.5 * (m + m.T)


def is_symmetric(m, tol=1e-12):
    """True if m equals its transpose up to tol (relative to the size of m)"""
    m = np.asarray(m, dtype=float)
    scale = max(1.0, float(np.max(np.abs(m))))
    return bool(np.max(np.abs(m - m.T)) <= tol * scale)


def bracket_relation_residual():
    """max |[L_i, L_j] - ε_ijk L_k| over all i, j; zero for a consistent basis"""
    worst = 0.0
    for i in range(3):
        for j in range(3):
            lhs = SO3_BASIS[i] @ SO3_BASIS[j] - SO3_BASIS[j] @ SO3_BASIS[i]
            rhs = np.einsum("k,kab->ab", EPSILON[i, j], SO3_BASIS)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def random_rotation(rng):
    """A random element of SO(3) drawn from a numpy Generator"""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
