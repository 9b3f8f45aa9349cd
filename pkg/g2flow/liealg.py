"""Structure constants of 3-dimensional Lie algebras.

Convention: dλ^i = -½ c^i_jk λ^j∧λ^k for the left-invariant Maurer-Cartan
coframe λ, stored as c[i, j, k].  The shipped presets are the unimodular
(class A) Bianchi algebras c^i_jk = n_il ε_ljk with diagonal n.
"""
import logging
from typing import NamedTuple, Optional

import numpy as np

from g2flow.mat3 import EPSILON
from g2flow.util import G2FlowError

JACOBI_TOL = 1e-12


class StructureConstantsError(G2FlowError):
    """Raised for structure constants that are malformed or fail the Jacobi identity"""


class StructureConstants(NamedTuple):
    """Bracket data of a 3-dimensional Lie algebra"""
    c: np.ndarray
    name: Optional[str] = None


class BianchiPreset(NamedTuple):
    """A shipped unimodular Lie algebra, described by the diagonal of its n matrix"""
    n: tuple
    description: str


PRESETS = {
    "abelian": BianchiPreset((0.0, 0.0, 0.0), "Bianchi I, flat torus"),
    "heisenberg": BianchiPreset((1.0, 0.0, 0.0), "Bianchi II, nilmanifold"),
    "e2": BianchiPreset((1.0, 1.0, 0.0), "Bianchi VII0, Euclidean motions"),
    "sol": BianchiPreset((1.0, -1.0, 0.0), "Bianchi VI0, solvmanifold"),
    "su2": BianchiPreset((1.0, 1.0, 1.0), "Bianchi IX, round 3-sphere"),
}
"""Unimodular presets keyed by name"""


def make_structure_constants(c, name=None):
    """Validate lower-index antisymmetry and wrap c as StructureConstants"""
    arr = np.array(c, dtype=float)
    if arr.shape != (3, 3, 3):
        raise StructureConstantsError(f"structure constants must be 3x3x3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StructureConstantsError("structure constants have non-finite entries")
    asym = float(np.max(np.abs(arr + np.transpose(arr, (0, 2, 1)))))
    if asym > JACOBI_TOL:
        raise StructureConstantsError(
            f"c^i_jk must be antisymmetric in (j,k); deviation {asym:.3e}"
        )
    arr.setflags(write=False)
    return StructureConstants(arr, name)


def bianchi_class_a(n, name=None):
    """Structure constants c^i_jk = n_i ε_ijk (no sum) of a unimodular algebra with diagonal n"""
    c = np.einsum("il,ljk->ijk", np.diag(np.asarray(n, dtype=float)), EPSILON)
    return make_structure_constants(c, name)


def preset(name):
    """Structure constants of a named preset"""
    if name not in PRESETS:
        raise StructureConstantsError(
            f"unknown structure constants preset '{name}', expected one of {sorted(PRESETS)}"
        )
    return bianchi_class_a(PRESETS[name].n, name)


def jacobi_residual(c):
    """max over (i,j,k,l) of |Σ_m c^m_jk c^i_ml + c^m_kl c^i_mj + c^m_lj c^i_mk|"""
    arr = c.c if isinstance(c, StructureConstants) else make_structure_constants(c).c
    j = (
        np.einsum("mjk,iml->ijkl", arr, arr)
        + np.einsum("mkl,imj->ijkl", arr, arr)
        + np.einsum("mlj,imk->ijkl", arr, arr)
    )
    return float(np.max(np.abs(j)))


def unimodularity_residual(c):
    """max_i |Σ_j c^j_ij|, zero for unimodular algebras"""
    return float(np.max(np.abs(np.einsum("jij->i", c.c))))


def maurer_cartan_d(c, v):
    """d(v_i λ^i) as an antisymmetric array W with d(v·λ) = ½ W_jk λ^j∧λ^k

    W[j, k] for j < k is the coefficient of the basis element λ^j∧λ^k.
    """
    return -np.einsum("i,ijk->jk", np.asarray(v, dtype=float), c.c)


def maurer_cartan_dd(c, v):
    """Coefficient of λ^1∧λ^2∧λ^3 in d(d(v_i λ^i)); vanishes for all v iff c satisfies Jacobi"""
    v = np.asarray(v, dtype=float)
    return 0.5 * float(np.einsum("i,ijk,jmn,mnk->", v, c.c, c.c, EPSILON))


def from_config(group):
    """Build structure constants from a config value.

    Accepts a preset name, {"bianchi": [n1, n2, n3]} or {"c": nested 3x3x3 list, "name": ...}.
    """
    if isinstance(group, str):
        return preset(group)
    if not hasattr(group, "get"):
        raise StructureConstantsError(f"group must be a preset name or a mapping, got {group!r}")
    if group.get("bianchi") is not None:
        sc = bianchi_class_a(group.get("bianchi"), group.get("name") or "bianchi")
    elif group.get("c") is not None:
        sc = make_structure_constants(group.get("c"), group.get("name") or "custom")
    else:
        raise StructureConstantsError("group mapping needs a 'c' or a 'bianchi' entry")
    residual = jacobi_residual(sc)
    if residual > JACOBI_TOL:
        raise StructureConstantsError(f"structure constants fail the Jacobi identity (residual {residual:.3e})")
    if unimodularity_residual(sc) > JACOBI_TOL:
        logging.warning(f"structure constants '{sc.name}' are not unimodular; integrated quantities may pick up boundary terms")
    return sc
