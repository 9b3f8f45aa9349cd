"""Isotropic reduction of the flow over a frame of constant curvature.

Over a frame E0 whose Einstein tensor is G = -σ·I, states E = a·E0, S = b·I
stay isotropic and the flow collapses to

    da/dt = a·b²,   db/dt = σ·a⁻² - b³

or, with x = a² and y = a·b,

    dx/dt = 2y²,    dy/dt = σ·x^(-½).
"""
import math
from typing import NamedTuple

import numpy as np

from g2flow import frame
from g2flow.flow import FlowState, make_state
from g2flow.liealg import make_structure_constants, preset
from g2flow.util import G2FlowError, rk4_step

SIGMA_TOL = 1e-10


class ReducedError(G2FlowError):
    """Raised outside the domain of the reduced systems"""


class ReducedState(NamedTuple):
    """Frame scale a > 0, momentum scale b and curvature parameter σ"""
    a: float
    b: float
    sigma: float


class XYState(NamedTuple):
    """x = a² > 0 and y = a·b"""
    x: float
    y: float


class ReducedSample(NamedTuple):
    """One row of a reduced trajectory"""
    t: float
    a: float
    b: float
    x: float
    y: float
    regime: str


def reduced_field_ab(s):
    """(da/dt, db/dt) = (a·b², σ·a⁻² - b³)"""
    if not s.a > 0:
        raise ReducedError(f"a must be positive, got {s.a}")
    return s.a * s.b ** 2, s.sigma / s.a ** 2 - s.b ** 3


def reduced_field_xy(s, sigma):
    """(dx/dt, dy/dt) = (2y², σ·x^(-½))"""
    if not s.x > 0:
        raise ReducedError(f"x must be positive, got {s.x}")
    return 2.0 * s.y ** 2, sigma / math.sqrt(s.x)


def to_xy(s):
    """(a, b) ↦ (a², a·b)"""
    return XYState(s.a ** 2, s.a * s.b)


def from_xy(s, sigma):
    """(x, y) ↦ (√x, y/√x)"""
    if not s.x > 0:
        raise ReducedError(f"x must be positive, got {s.x}")
    a = math.sqrt(s.x)
    return ReducedState(a, s.y / a, sigma)


def sigma_of_frame(E0, c):
    """σ with G = -σ·I for the Levi-Civita connection of E0; raises if G is not isotropic"""
    G = frame.levi_civita_curvature(E0, c).G
    sigma = -float(np.trace(G)) / 3.0
    deviation = float(np.max(np.abs(G + sigma * np.eye(3))))
    if deviation > SIGMA_TOL * max(1.0, abs(sigma)):
        raise ReducedError(f"frame is not of constant curvature: |G + sigma*I| = {deviation:.3e}")
    return sigma


def reduced_state(a, b, E0, c):
    """ReducedState over E0 with σ read off the frame"""
    return ReducedState(float(a), float(b), sigma_of_frame(E0, c))


def embed(s, E0, c):
    """FlowState(a·E0, b·I) after checking that E0 has G = -σ·I with σ = s.sigma"""
    if not s.a > 0:
        raise ReducedError(f"a must be positive, got {s.a}")
    sigma = sigma_of_frame(E0, c)
    if abs(sigma - s.sigma) > SIGMA_TOL * max(1.0, abs(sigma)):
        raise ReducedError(f"frame has sigma = {sigma:.12g}, state claims {s.sigma:.12g}")
    return make_state(s.a * np.asarray(E0, dtype=float), s.b * np.eye(3))


def closed_form_sigma0(a0, b0, t):
    """Exact σ = 0 solution: a = a0·√(1 + 2b0²t), b = b0/√(1 + 2b0²t)"""
    stretch = 1.0 + 2.0 * b0 ** 2 * t
    if not a0 > 0 or not stretch > 0:
        raise ReducedError(f"closed form undefined for a0={a0}, b0={b0}, t={t}")
    root = math.sqrt(stretch)
    return a0 * root, b0 / root


def regime(b):
    """Regime of the 3-form built from S = b·I: G2 (definite metric), G2* (indefinite) or singular"""
    if b > 0:
        return "G2"
    if b < 0:
        return "G2*"
    return "singular"


def integrate_reduced(s, dt, tEnd):
    """RK4 of the (a, b) system from t = 0; stops early if a leaves (0, ∞)"""
    if not dt > 0:
        raise ReducedError(f"dt must be positive, got {dt}")
    if not tEnd > 0:
        raise ReducedError(f"t_end must be positive, got {tEnd}")
    reduced_field_ab(s)

    def field(y):
        da, db = reduced_field_ab(ReducedState(y[0], y[1], s.sigma))
        return np.array([da, db])

    def sample(t, y):
        return ReducedSample(t, y[0], y[1], y[0] ** 2, y[0] * y[1], regime(y[1]))

    y = np.array([s.a, s.b], dtype=float)
    rows = [sample(0.0, y)]
    nsteps = max(1, math.ceil(tEnd / dt - 1e-9))
    for step in range(1, nsteps + 1):
        t = tEnd if step == nsteps else step * dt
        try:
            y = rk4_step(field, y, t - (step - 1) * dt)
        except ReducedError:
            break
        if not (np.all(np.isfinite(y)) and y[0] > 0):
            break
        rows.append(sample(t, y))
    return rows


def embedded_flow_state(row, E0):
    """FlowState(a·E0, b·I) of a reduced sample, without the curvature check"""
    return FlowState(row.a * np.asarray(E0, dtype=float), row.b * np.eye(3), row.t)


def hyperbolic_structure():
    """Non-unimodular constants with [X3, X1] = X1, [X3, X2] = X2; the identity frame has G = I"""
    c = np.zeros((3, 3, 3))
    c[0, 2, 0], c[0, 0, 2] = 1.0, -1.0
    c[1, 2, 1], c[1, 1, 2] = 1.0, -1.0
    return make_structure_constants(c, "hyperbolic")


def constant_curvature_frame(sigma):
    """(E0, c) with G = -σ·I: a round su2 frame for σ > 0, abelian for σ = 0, hyperbolic for σ < 0"""
    if sigma == 0:
        return np.eye(3), preset("abelian")
    c = preset("su2") if sigma > 0 else hyperbolic_structure()
    unit = sigma_of_frame(np.eye(3), c)
    if unit * sigma <= 0:
        raise ReducedError(f"no isotropic frame with sigma = {sigma} on {c.name}")
    E0 = math.sqrt(unit / sigma) * np.eye(3)
    return E0, c
