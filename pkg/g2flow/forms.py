"""Exterior algebra of invariant forms on P×I, P = G × SO(3).

Forms are dense coefficient vectors over the 128 monomials in the generators
y = (e1, e2, e3, a1, a2, a3, dt), a monomial being the bitmask of its
generators (bit 0 = e1 ... bit 6 = dt) taken in increasing order.

The exterior derivative of a form whose coefficients are constant in the
frame (ω, ψ, φ, ⋆φ) is computed exactly in the left-invariant coframe
ν = (λ, ρ, dt) of P, ρ = dg·g⁻¹, whose structure equations are constant:

    dλ^i = -½ c^i_jk λ^j∧λ^k,   dρ^i = ½ ε_ijk ρ^j∧ρ^k,   d(dt) = 0.

At the base point e = Eλ and a = ρ + Aλ.  The Cartan rules

    de^i = -ε_ijk a^j∧e^k + ½ T^i_jk e^j∧e^k,   da^i = -½ ε_ijk a^j∧a^k + G_iβ ê^β

are available as structural_d; the two differentials satisfy
d(x) = structural_d(x) + Σ_k ρ^k∧δ_k(x), with δ_k the so(3) rotation of the
generators, and so coincide on rotation-invariant forms.
"""
import functools
import itertools
import logging
from typing import NamedTuple, Optional

import numpy as np

from g2flow import frame
from g2flow.mat3 import EPSILON, SO3_BASIS
from g2flow.util import G2FlowError

NGEN = 7
NBASIS = 1 << NGEN
TOP = NBASIS - 1
GENERATOR_NAMES = ("e1", "e2", "e3", "a1", "a2", "a3", "dt")
E_BITS = 0b0000111
A_BITS = 0b0111000
DT_BIT = 0b1000000


class FormError(G2FlowError):
    """Raised for degenerate 3-forms or metrics the Hodge star cannot use"""


def bits(mask):
    """Generator indices of a monomial in increasing order"""
    return tuple(i for i in range(NGEN) if mask >> i & 1)


def _permutation_sign(seq):
    inversions = sum(1 for p, q in itertools.combinations(seq, 2) if p > q)
    return -1 if inversions % 2 else 1


DEGREE = np.array([bin(m).count("1") for m in range(NBASIS)])
MASKS_BY_DEGREE = [[m for m in range(NBASIS) if DEGREE[m] == p] for p in range(NGEN + 1)]

WEDGE_SIGN = np.zeros((NBASIS, NBASIS))
"""Sign of y^I∧y^J relative to the sorted monomial y^(I|J), zero when I and J overlap"""
for _I in range(NBASIS):
    for _J in range(NBASIS):
        if not _I & _J:
            WEDGE_SIGN[_I, _J] = _permutation_sign(bits(_I) + bits(_J))

_OR_TABLE = np.bitwise_or.outer(np.arange(NBASIS), np.arange(NBASIS))


class InvariantForm:
    """An element of the exterior algebra over the seven generators"""

    def __init__(self, coeffs=None):
        arr = np.zeros(NBASIS) if coeffs is None else np.array(coeffs, dtype=float)
        if arr.shape != (NBASIS,):
            raise FormError(f"a form needs {NBASIS} coefficients, got shape {arr.shape}")
        arr.setflags(write=False)
        self.coeffs = arr

    def __add__(self, other):
        return InvariantForm(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return InvariantForm(self.coeffs - other.coeffs)

    def __neg__(self):
        return InvariantForm(-self.coeffs)

    def __mul__(self, scalar):
        return InvariantForm(float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def degrees(self):
        """Degrees carrying a nonzero coefficient"""
        return sorted({int(DEGREE[m]) for m in np.nonzero(self.coeffs)[0]})

    def component(self, degree):
        """The homogeneous part of the given degree"""
        return InvariantForm(np.where(DEGREE == degree, self.coeffs, 0.0))

    def coefficient(self, *indices):
        """Coefficient of y^i1∧...∧y^ip, the indices in any order"""
        mask, sign = _sorted_sign(indices)
        return float(sign * self.coeffs[mask])

    def maxNorm(self):
        """Largest absolute coefficient"""
        return float(np.max(np.abs(self.coeffs)))

    def isClose(self, other, tol=1e-12):
        """Coefficient-wise comparison"""
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol)

    def __repr__(self):
        terms = []
        for m in np.nonzero(self.coeffs)[0]:
            name = "^".join(GENERATOR_NAMES[i] for i in bits(m)) or "1"
            terms.append(f"{self.coeffs[m]:+.6g}*{name}")
        return "InvariantForm(" + (" ".join(terms) or "0") + ")"


def _sorted_sign(indices):
    """(mask, sign) of the monomial y^i1∧...∧y^ip, sign 0 on repeats"""
    if len(set(indices)) != len(indices):
        return 0, 0
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask, _permutation_sign(tuple(indices))


def zero():
    """The zero form"""
    return InvariantForm()


def one():
    """The constant function 1"""
    return basis()


def basis(*indices):
    """The monomial y^i1∧...∧y^ip (indices need not be sorted)"""
    coeffs = np.zeros(NBASIS)
    mask, sign = _sorted_sign(indices)
    coeffs[mask] = sign
    return InvariantForm(coeffs)


def e(i):
    """e^(i+1)"""
    return basis(i)


def a(i):
    """a^(i+1)"""
    return basis(3 + i)


def dt():
    """The time differential"""
    return basis(6)


def vol_e():
    """e1∧e2∧e3"""
    return basis(0, 1, 2)


def mu0():
    """Reference volume e1∧e2∧e3∧a1∧a2∧a3∧dt"""
    return basis(*range(NGEN))


def e_hat(i):
    """ê^i = ½ ε_iαβ e^α∧e^β"""
    j, k = (i + 1) % 3, (i + 2) % 3
    return basis(j, k)


def wedge(x, y):
    """Graded-commutative exterior product"""
    result = np.zeros(NBASIS)
    ynz = np.nonzero(y.coeffs)[0]
    if len(ynz) == 0:
        return InvariantForm(result)
    for I in np.nonzero(x.coeffs)[0]:
        np.add.at(result, _OR_TABLE[I, ynz], x.coeffs[I] * y.coeffs[ynz] * WEDGE_SIGN[I, ynz])
    return InvariantForm(result)


def contract(v, x):
    """Interior product with the frame vector dual to generator v"""
    result = np.zeros(NBASIS)
    bit = 1 << v
    for m in np.nonzero(x.coeffs)[0]:
        if m & bit:
            position = int(DEGREE[m & (bit - 1)])
            result[m ^ bit] += (-1) ** position * x.coeffs[m]
    return InvariantForm(result)


def top_coefficient(x):
    """Coefficient of the reference volume μ0"""
    return float(x.coeffs[TOP])


def fiber_restriction(x):
    """Restriction to the SO(3) fibers of P: drop every monomial containing an e or dt"""
    mask = np.array([(m & (E_BITS | DT_BIT)) == 0 for m in range(NBASIS)])
    return InvariantForm(np.where(mask, x.coeffs, 0.0))


def one_form(coefficients):
    """Σ_i v_i y^i for a 7-vector v"""
    coeffs = np.zeros(NBASIS)
    for i, val in enumerate(coefficients):
        coeffs[1 << i] = val
    return InvariantForm(coeffs)


def induced_matrix(M):
    """Matrix of minors Λ(M)[I, J] = det M[I, J], so that y^I = Σ_J Λ(M)[I, J] ν^J when y = Mν"""
    M = np.asarray(M, dtype=float)
    result = np.zeros((NBASIS, NBASIS))
    result[0, 0] = 1.0
    for p in range(1, NGEN + 1):
        masks = MASKS_BY_DEGREE[p]
        idx = [bits(m) for m in masks]
        blocks = np.array([[M[np.ix_(I, J)] for J in idx] for I in idx])
        result[np.ix_(masks, masks)] = np.linalg.det(blocks)
    return result


def derivation_matrix(N):
    """Matrix of the degree-0 derivation extending y^i ↦ Σ_j N_ij y^j"""
    N = np.asarray(N, dtype=float)
    result = np.zeros((NBASIS, NBASIS))
    for I in range(1, NBASIS):
        seq = bits(I)
        for r, i in enumerate(seq):
            for j in np.nonzero(N[i])[0]:
                replaced = seq[:r] + (int(j),) + seq[r + 1:]
                mask, sign = _sorted_sign(replaced)
                if sign:
                    result[mask, I] += sign * N[i, j]
    return result


def leibniz_matrix(rules):
    """Matrix of the degree-1 antiderivation sending generator i to rules[i]"""
    result = np.zeros((NBASIS, NBASIS))
    for I in range(1, NBASIS):
        seq = bits(I)
        for r, i in enumerate(seq):
            if not np.any(rules[i].coeffs):
                continue
            term = wedge(wedge(basis(*seq[:r]), rules[i]), basis(*seq[r + 1:]))
            result[:, I] += (-1) ** r * term.coeffs
    return result


def rotation_derivation(k):
    """δ_k: the action of the k-th so(3) generator, e ↦ L_k e, a ↦ L_k a, dt ↦ 0"""
    N = np.zeros((NGEN, NGEN))
    N[0:3, 0:3] = SO3_BASIS[k]
    N[3:6, 3:6] = SO3_BASIS[k]
    return derivation_matrix(N)


def _pair_sum(coefficients, first, second):
    """Σ_jk C_jk y^(first+j)∧y^(second+k) for a 3×3 array C"""
    total = zero()
    for j in range(3):
        for k in range(3):
            if coefficients[j, k]:
                total = total + coefficients[j, k] * basis(first + j, second + k)
    return total


@functools.lru_cache(maxsize=32)
def _coframe_d_matrix(cbytes):
    """d in the ν = (λ, ρ, dt) basis for structure constants given as raw bytes"""
    c = np.frombuffer(cbytes).reshape(3, 3, 3)
    rules = []
    for i in range(3):
        rules.append(_pair_sum(-0.5 * c[i], 0, 0))
    for i in range(3):
        rules.append(_pair_sum(0.5 * EPSILON[i], 3, 3))
    rules.append(zero())
    return leibniz_matrix(rules)


class StructuralDifferential:
    """Exterior derivative on P×I at one invariant state (E, A) with optional time data

    P and Q give the time rotations ∂_t e = P e and ∂_t a = Q e; leave them out
    for the purely spatial differential.
    """

    def __init__(self, E, A, c, P=None, Q=None):
        self.E = frame.check_frame(E)
        self.A = np.array(A, dtype=float)
        self.c = c
        curvature = frame.einstein_tensor(self.E, self.A, c)
        self.T = curvature.T
        self.G = curvature.G
        self.P = np.zeros((3, 3)) if P is None else np.array(P, dtype=float)
        self.Q = np.zeros((3, 3)) if Q is None else np.array(Q, dtype=float)
        self._dMatrix = None
        self._timeMatrix = None
        self._structuralMatrix = None

    def substitution(self):
        """M with y = Mν at the base point"""
        M = np.eye(NGEN)
        M[0:3, 0:3] = self.E
        M[3:6, 0:3] = self.A
        return M

    def dMatrix(self):
        """Spatial exterior derivative in the y-basis"""
        if self._dMatrix is None:
            M = self.substitution()
            dNu = _coframe_d_matrix(np.ascontiguousarray(self.c.c, dtype=float).tobytes())
            self._dMatrix = induced_matrix(np.linalg.inv(M)).T @ dNu @ induced_matrix(M).T
        return self._dMatrix

    def timeMatrix(self):
        """Derivation of the moving generators, ∂_t y = N y"""
        if self._timeMatrix is None:
            N = np.zeros((NGEN, NGEN))
            N[0:3, 0:3] = self.P
            N[3:6, 0:3] = self.Q
            self._timeMatrix = derivation_matrix(N)
        return self._timeMatrix

    def hasTimeData(self):
        """True if the generators move in time"""
        return bool(np.any(self.P) or np.any(self.Q))

    def generator_rule(self, i):
        """Cartan rule for generator i: de, da from torsion and curvature, d(dt) = 0"""
        if i < 3:
            rule = _pair_sum(-EPSILON[i], 3, 0) + _pair_sum(0.5 * self.T[i], 0, 0)
        elif i < 6:
            k = i - 3
            rule = _pair_sum(-0.5 * EPSILON[k], 3, 3)
            for beta in range(3):
                rule = rule + self.G[k, beta] * e_hat(beta)
        else:
            rule = zero()
        return rule

    def structuralMatrix(self):
        """Leibniz extension of the Cartan rules"""
        if self._structuralMatrix is None:
            self._structuralMatrix = leibniz_matrix([self.generator_rule(i) for i in range(NGEN)])
        return self._structuralMatrix

    def verticalPart(self, k):
        """ρ^k = a^k - (A E⁻¹)_kj e^j"""
        v = np.zeros(NGEN)
        v[3 + k] = 1.0
        v[0:3] = -(self.A @ np.linalg.inv(self.E))[k]
        return one_form(v)


def d(x, sd, rate: Optional[InvariantForm] = None):
    """Exterior derivative on P×I: d_P x + dt∧∂_t x

    rate holds the time derivatives of the coefficients of x; ∂_t x adds the
    motion of the generators given by sd.
    """
    result = InvariantForm(sd.dMatrix() @ x.coeffs)
    if rate is None and not sd.hasTimeData():
        return result
    moving = sd.timeMatrix() @ x.coeffs
    if rate is not None:
        moving = moving + rate.coeffs
    return result + wedge(dt(), InvariantForm(moving))


def spatial_d(x, sd):
    """d_P x, ignoring any time data carried by sd"""
    return InvariantForm(sd.dMatrix() @ x.coeffs)


def structural_d(x, sd):
    """Leibniz extension of the generator rules (spatial part only)"""
    return InvariantForm(sd.structuralMatrix() @ x.coeffs)


def rotate(k, x):
    """δ_k x"""
    return InvariantForm(rotation_derivation(k) @ x.coeffs)


class PhiMetric(NamedTuple):
    """Metric data recovered from a nondegenerate 3-form"""
    g: np.ndarray
    orientation: int
    definite: bool


def metric_from_phi(phi):
    """Metric of a 3-form: B_ij μ0 = ι_iφ∧ι_jφ∧φ, g = 6^(-2/9) B (det B)^(-1/9)

    The real ninth root makes g positive-definite for G2-forms whatever the
    sign of B; the sign of det B is the orientation of φ relative to μ0.

    Returns a PhiMetric: the 7×7 metric g, the orientation (+1 or -1) and
    whether g is definite. Raises FormError when φ is degenerate.
    """
    inner = [contract(i, phi) for i in range(NGEN)]
    B = np.zeros((NGEN, NGEN))
    for i in range(NGEN):
        for j in range(i, NGEN):
            B[i, j] = B[j, i] = top_coefficient(wedge(wedge(inner[i], inner[j]), phi))
    detB = float(np.linalg.det(B))
    scale = max(1.0, float(np.max(np.abs(B)))) ** NGEN
    if abs(detB) <= 1e-14 * scale:
        raise FormError(f"3-form is degenerate: det B = {detB:.3e}")
    g = 6.0 ** (-2.0 / 9.0) * B / np.cbrt(np.cbrt(detB))
    g = 0.5 * (g + g.T)
    eigenvalues = np.linalg.eigvalsh(g)
    definite = bool(np.all(eigenvalues > 0))
    if not definite:
        logging.debug(f"3-form has an indefinite metric, eigenvalues {eigenvalues}")
    return PhiMetric(g, 1 if detB > 0 else -1, definite)


def hodge_star(x, g, orientation=1):
    """Hodge star for a positive-definite 7×7 metric and orientation ±μ0"""
    g = np.asarray(g, dtype=float)
    if g.shape != (NGEN, NGEN) or not np.all(np.linalg.eigvalsh(0.5 * (g + g.T)) > 0):
        raise FormError("hodge_star needs a positive-definite 7x7 metric")
    raised = induced_matrix(np.linalg.inv(g)) @ x.coeffs
    result = np.zeros(NBASIS)
    for J in np.nonzero(raised)[0]:
        complement = TOP ^ J
        result[complement] += WEDGE_SIGN[J, complement] * raised[J]
    return InvariantForm(orientation * np.sqrt(np.linalg.det(g)) * result)
