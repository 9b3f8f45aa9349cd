"""SU(3)- and G2-structures built from flow states, and their torsion.

An invariant state (E, S) with det S > 0 defines on P

    ω = (det S)^(-½) adj(S)_ij a^i∧e^j
    ψ = -det(S) e1∧e2∧e3 + e1∧a2∧a3 + e2∧a3∧a1 + e3∧a1∧a2

and, along an orbit, φ = (det S)^½ ω∧dt + ψ on P×I.
"""
import logging
import math
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from g2flow import DEFAULT_COEFFS, forms, frame
from g2flow.flow import classify_definiteness, flow_field
from g2flow.forms import InvariantForm, a, e, wedge
from g2flow.mat3 import adjugate, adjugate_derivative
from g2flow.util import G2FlowError

STAR_RATE_STEP = 1e-3
"""Relative step of the finite-difference rate of ⋆φ along dS/dt"""


class G2Error(G2FlowError):
    """Raised when a G2 quantity is requested outside its domain"""


class SU3Structure(NamedTuple):
    """The pair (ω, ψ) together with the state it was built from"""
    omega: InvariantForm
    psi: InvariantForm
    E: np.ndarray
    S: np.ndarray
    A: np.ndarray


class G2Form(NamedTuple):
    """φ with its metric data; starPhi is None outside the G2 region"""
    phi: Optional[InvariantForm]
    f: float
    starPhi: Optional[InvariantForm]
    metric: Optional[forms.PhiMetric]
    regime: str
    A: Optional[np.ndarray] = None


class TorsionResidual(NamedTuple):
    """Max coefficient norms of dφ and d⋆φ"""
    ndphi: float
    ndstarphi: float


class Transition(NamedTuple):
    """A change of the definiteness flag of S"""
    t: float
    previous: str
    current: str


class DefinitenessReport(NamedTuple):
    """Per-sample flags and the transitions between them"""
    samples: List[Tuple[float, str]]
    transitions: List[Transition]


def _mixed_two_form(C):
    """Σ_ij C_ij a^i∧e^j"""
    total = forms.zero()
    for i in range(3):
        for j in range(3):
            if C[i, j]:
                total = total + C[i, j] * wedge(a(i), e(j))
    return total


def _psi(detS):
    psi = -detS * forms.vol_e()
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        psi = psi + wedge(e(i), wedge(a(j), a(k)))
    return psi


def _forms_of(S):
    """(ω, ψ, f) with |det S| in the normalizations, so G2* states are covered too"""
    detS = float(np.linalg.det(S))
    root = math.sqrt(abs(detS))
    return _mixed_two_form(adjugate(S) / root), _psi(detS), root


def _phi_of(S):
    omega, psi, f = _forms_of(S)
    return f * wedge(omega, forms.dt()) + psi


def su3_structure(E, S, A):
    """(ω, ψ) of a state with det S > 0"""
    S = np.asarray(S, dtype=float)
    detS = float(np.linalg.det(S))
    if not detS > 0:
        raise G2Error(f"an SU(3)-structure needs det S > 0, got {detS:.6g}")
    omega, psi, _ = _forms_of(S)
    return SU3Structure(omega, psi, np.asarray(E, dtype=float), S, np.asarray(A, dtype=float))


def g2_form(st, c):
    """φ = (det S)^½ ω∧dt + ψ with its metric and ⋆φ.

    For det S < 0 the 3-form is built with |det S| and only its metric
    signature is reported (regime "G2*"); det S = 0 gives regime "singular".
    """
    A = frame.levi_civita(st.E, c)
    detS = float(np.linalg.det(st.S))
    if classify_definiteness(st.S) == "singular":
        return G2Form(None, 0.0, None, None, "singular", A)
    phi = _phi_of(st.S)
    f = math.sqrt(abs(detS))
    try:
        metric = forms.metric_from_phi(phi)
    except forms.FormError:
        return G2Form(phi, f, None, None, "singular", A)
    if detS < 0 or not metric.definite:
        logging.debug(f"state at t={st.t} lies outside the G2 region (det S = {detS:.6g})")
        return G2Form(phi, f, None, metric, "G2*", A)
    starPhi = forms.hodge_star(phi, metric.g, metric.orientation)
    return G2Form(phi, f, starPhi, metric, "G2", A)


def half_flat_residual(su3, sd):
    """(max|d(ω∧ω)|, max|dψ|) for the spatial differential"""
    r1 = forms.spatial_d(wedge(su3.omega, su3.omega), sd).maxNorm()
    r2 = forms.spatial_d(su3.psi, sd).maxNorm()
    return r1, r2


def _phi_rate(S, Sdot):
    """Coefficient time derivative of φ through S(t), by the chain rule"""
    detS = float(np.linalg.det(S))
    Stilde = adjugate(S)
    ddet = float(np.trace(Stilde @ Sdot))
    root = math.sqrt(detS)
    omega = _mixed_two_form(Stilde / root)
    omegaRate = _mixed_two_form(-0.5 * ddet / detS ** 1.5 * Stilde + adjugate_derivative(S, Sdot) / root)
    fRate = 0.5 * ddet / root
    psiRate = -ddet * forms.vol_e()
    return wedge(fRate * omega + root * omegaRate, forms.dt()) + psiRate


def _star_of(S):
    phi = _phi_of(S)
    metric = forms.metric_from_phi(phi)
    return forms.hodge_star(phi, metric.g, metric.orientation)


def _star_rate(S, Sdot):
    """Five-point directional derivative of the ⋆φ coefficients along dS/dt"""
    size = float(np.max(np.abs(Sdot)))
    if size == 0.0:
        return forms.zero()
    h = STAR_RATE_STEP * float(np.min(np.abs(np.linalg.eigvalsh(S)))) / size
    values = {k: _star_of(S + k * h * Sdot) for k in (-2, -1, 1, 2)}
    return (1.0 / (12.0 * h)) * (values[-2] - 8.0 * values[-1] + 8.0 * values[1] - values[2])


def torsion_residual(st, c, coeffs=DEFAULT_COEFFS, Sdot=None):
    """Max coefficient norms of dφ and d⋆φ on P×I at a state of the (-a·H1 + b·H2)-flow.

    Sdot overrides the flow value of dS/dt, for off-orbit comparisons.
    """
    flag = classify_definiteness(st.S)
    if flag != "pos-def":
        raise G2Error(
            f"torsion residuals need a positive-definite S, got {flag} S with det S = {np.linalg.det(st.S):.6g}"
        )
    A = frame.levi_civita(st.E, c)
    dE, dS = flow_field(st, c, coeffs)
    if Sdot is not None:
        dS = np.asarray(Sdot, dtype=float)
    P = dE @ np.linalg.inv(st.E)
    Q = frame.connection_variation(st.E, A, P, c)
    sd = forms.StructuralDifferential(st.E, A, c, P, Q)
    phi = _phi_of(st.S)
    metric = forms.metric_from_phi(phi)
    starPhi = forms.hodge_star(phi, metric.g, metric.orientation)
    dphi = forms.d(phi, sd, _phi_rate(st.S, dS))
    dstar = forms.d(starPhi, sd, _star_rate(st.S, dS))
    return TorsionResidual(dphi.maxNorm(), dstar.maxNorm())


def torsion_hook(st, c, coeffs):
    """Monitor hook for flow.integrate: torsion residual columns, nan outside the G2 region"""
    if classify_definiteness(st.S) != "pos-def":
        return {"dphi_norm": math.nan, "dstarphi_norm": math.nan}
    residual = torsion_residual(st, c, coeffs)
    return {"dphi_norm": residual.ndphi, "dstarphi_norm": residual.ndstarphi}


def _crossing_time(t0, t1, v0, v1):
    if v0 == v1 or np.sign(v0) == np.sign(v1):
        return t1
    return t0 + (t1 - t0) * v0 / (v0 - v1)


def definiteness_classify(traj):
    """Definiteness flag of S per sample, with interpolated transition times"""
    samples = [(st.t, classify_definiteness(st.S)) for st in traj.samples]
    transitions = []
    for k in range(1, len(samples)):
        previous, current = samples[k - 1][1], samples[k][1]
        if previous == current:
            continue
        S0, S1 = traj.samples[k - 1].S, traj.samples[k].S
        t0, t1 = samples[k - 1][0], samples[k][0]
        d0, d1 = float(np.linalg.det(S0)), float(np.linalg.det(S1))
        if np.sign(d0) != np.sign(d1):
            t = _crossing_time(t0, t1, d0, d1)
        else:
            t = _crossing_time(t0, t1, float(np.min(np.linalg.eigvalsh(S0))), float(np.min(np.linalg.eigvalsh(S1))))
        transitions.append(Transition(t, previous, current))
    return DefinitenessReport(samples, transitions)
