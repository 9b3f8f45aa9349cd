"""The constrained Hamiltonian flow on invariant data (E, S).

For the Hamiltonian -a·H1 + b·H2 the flow reads

    dE/dt = T E,   T = b·adj(S)
    dS/dt = -2a·G + 2b·det(S)·I - tr(T)·S

with G the Einstein tensor of the Levi-Civita connection of E.  The
default coefficients (½, 1) give H = -½H1 + H2.
"""
import logging
import math
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np
from pubsub import pub

from g2flow import DEFAULT_COEFFS, MAX_NORM, MIN_DET_E, SYMMETRY_TOL
from g2flow import frame
from g2flow.mat3 import adjugate, as_mat3, is_symmetric, symmetrize
from g2flow.util import G2FlowError, rk4_step

SCALE_RESIDUAL_TOL = 1e-7

DEFINITENESS_FLAGS = ("pos-def", "indef", "neg-def", "singular")


class FlowError(G2FlowError):
    """Raised for invalid flow states or requests"""


class FlowState(NamedTuple):
    """Solder matrix E, symmetric momentum S and flow time t"""
    E: np.ndarray
    S: np.ndarray
    t: float = 0.0


class IntegrationConfig(NamedTuple):
    """Fixed-step integration settings"""
    dt: float
    tEnd: float
    coeffs: tuple = DEFAULT_COEFFS
    minDetE: float = MIN_DET_E
    maxNorm: float = MAX_NORM
    sampleEvery: int = 1


class HamiltonianDensities(NamedTuple):
    """Densities relative to the Maurer-Cartan volume λ1∧λ2∧λ3"""
    h1: float
    h2: float
    h3: float
    h: float


class VariationRates(NamedTuple):
    """Time derivatives of the H1, H2, H3 densities along the H-flow"""
    dH1: float
    dH2: float
    dH3: float


class Monitor(NamedTuple):
    """Per-sample diagnostics recorded by integrate"""
    t: float
    densities: HamiltonianDensities
    constraint: np.ndarray
    detS: float
    detE: float
    definiteness: str
    extra: dict


class ScaleInfo(NamedTuple):
    """Parameters and check of a scaled trajectory"""
    kappa: float
    alpha: float
    beta: float
    residual: float


class Trajectory:
    """Samples of a flow orbit with their monitors"""

    def __init__(self, structure, coeffs=DEFAULT_COEFFS):
        self.structure = structure
        self.coeffs = tuple(coeffs)
        self.samples: List[FlowState] = []
        self.monitors: List[Monitor] = []
        self.stopReason: Optional[str] = None
        self.scaling: Optional[ScaleInfo] = None

    def append(self, state, monitor):
        """Add one sample; times must increase"""
        if self.samples and not state.t > self.samples[-1].t:
            raise FlowError(f"trajectory times must increase, got {state.t} after {self.samples[-1].t}")
        self.samples.append(state)
        self.monitors.append(monitor)

    def times(self):
        """Sample times as an array"""
        return np.array([s.t for s in self.samples])

    def finalState(self):
        """The last recorded state"""
        return self.samples[-1]

    def stoppedEarly(self):
        """True if a stop condition ended the integration"""
        return self.stopReason is not None

    def __len__(self):
        return len(self.samples)


def make_state(E, S, t=0.0):
    """Validated FlowState: det E > 0 and S symmetric"""
    E = frame.check_frame(E)
    S = as_mat3(S, "S")
    if not is_symmetric(S, SYMMETRY_TOL):
        raise FlowError(f"S must be symmetric, got {S.tolist()}")
    return FlowState(E, symmetrize(S), float(t))


def classify_definiteness(S, tol=1e-12):
    """Sign pattern of the eigenvalues of S: pos-def, neg-def, indef or singular"""
    eigenvalues = np.linalg.eigvalsh(symmetrize(np.asarray(S, dtype=float)))
    threshold = tol * max(1.0, float(np.max(np.abs(eigenvalues))))
    if np.any(np.abs(eigenvalues) <= threshold):
        return "singular"
    if np.all(eigenvalues > 0):
        return "pos-def"
    if np.all(eigenvalues < 0):
        return "neg-def"
    return "indef"


def hamiltonian_densities(st, c, coeffs=DEFAULT_COEFFS):
    """h1 = R·det E, h2 = det S·det E, h3 = det E, h = -a·h1 + b·h2"""
    detE = float(np.linalg.det(st.E))
    R = frame.scalar_curvature(st.E, c)
    h1 = R * detE
    h2 = float(np.linalg.det(st.S)) * detE
    return HamiltonianDensities(h1, h2, detE, -coeffs[0] * h1 + coeffs[1] * h2)


def flow_field(st, c, coeffs=DEFAULT_COEFFS):
    """(dE/dt, dS/dt) of the (-a·H1 + b·H2)-flow"""
    a, b = coeffs
    G = symmetrize(frame.levi_civita_curvature(st.E, c).G)
    # symmetric S gives a symmetric frame velocity, so the orbit stays on the horizontal lift
    T = b * symmetrize(adjugate(st.S))
    dE = T @ st.E
    dS = -2.0 * a * G + 2.0 * b * float(np.linalg.det(st.S)) * np.eye(3) - np.trace(T) * st.S
    return dE, dS


def omega_pairing(Z1, Z2, st):
    """Ω'((T1,V1), (T2,V2)) density: tr(T1·V2 - T2·V1)·det E"""
    T1, V1 = Z1
    T2, V2 = Z2
    return float(np.trace(T1 @ V2 - T2 @ V1)) * float(np.linalg.det(st.E))


def hamiltonian_vector(st, c, coeffs=DEFAULT_COEFFS):
    """(T, V) components of the Hamiltonian vector field: T = b·adj(S), V = -2a·G + 2b·det(S)·I"""
    a, b = coeffs
    G = symmetrize(frame.levi_civita_curvature(st.E, c).G)
    T = b * symmetrize(adjugate(st.S))
    V = -2.0 * a * G + 2.0 * b * float(np.linalg.det(st.S)) * np.eye(3)
    return T, V


def _pack(E, S):
    return np.concatenate([np.ravel(E), np.ravel(S)])


def _unpack(y):
    return y[:9].reshape(3, 3), y[9:].reshape(3, 3)


def _monitor(st, c, coeffs, hooks):
    A = frame.levi_civita(st.E, c)
    extra = {}
    for hook in hooks:
        extra.update(hook(st, c, coeffs))
    return Monitor(
        t=st.t,
        densities=hamiltonian_densities(st, c, coeffs),
        constraint=frame.divergence_constraint(st.S, st.E, A),
        detS=float(np.linalg.det(st.S)),
        detE=float(np.linalg.det(st.E)),
        definiteness=classify_definiteness(st.S),
        extra=extra,
    )


def _stop_reason(E, S, cfg):
    if not (np.all(np.isfinite(E)) and np.all(np.isfinite(S))):
        return "non-finite"
    if np.linalg.det(E) < cfg.minDetE:
        return "detE-floor"
    if max(np.max(np.abs(E)), np.max(np.abs(S))) > cfg.maxNorm:
        return "norm-ceiling"
    return None


def integrate(initial, c, cfg, hooks: Sequence[Callable] = ()):
    """Classical fixed-step RK4 of the flow from initial to cfg.tEnd.

    hooks are callables (state, c, coeffs) -> dict whose entries are stored in
    Monitor.extra for every recorded sample.
    """
    if not cfg.dt > 0:
        raise FlowError(f"dt must be positive, got {cfg.dt}")
    if not cfg.tEnd > initial.t:
        raise FlowError(f"t_end must exceed the initial time {initial.t}, got {cfg.tEnd}")
    if cfg.sampleEvery < 1:
        raise FlowError(f"sample_every must be at least 1, got {cfg.sampleEvery}")
    state = make_state(initial.E, initial.S, initial.t)
    traj = Trajectory(c, cfg.coeffs)
    traj.append(state, _monitor(state, c, cfg.coeffs, hooks))

    def field(y):
        E, S = _unpack(y)
        dE, dS = flow_field(FlowState(E, S), c, cfg.coeffs)
        return _pack(dE, dS)

    nsteps = max(1, math.ceil((cfg.tEnd - initial.t) / cfg.dt - 1e-9))
    logging.debug(f"integrating {nsteps} steps of {cfg.dt} on {c.name} with coeffs {cfg.coeffs}")
    y = _pack(state.E, state.S)
    previousFlag = traj.monitors[0].definiteness
    for step in range(1, nsteps + 1):
        t = cfg.tEnd if step == nsteps else initial.t + step * cfg.dt
        h = t - (initial.t + (step - 1) * cfg.dt)
        with np.errstate(all="ignore"):
            try:
                y = rk4_step(field, y, h)
            except frame.FrameError as ex:
                logging.debug(f"step {step} left GL+(3): {ex}")
                reason = "detE-floor"
            except (np.linalg.LinAlgError, G2FlowError) as ex:
                logging.debug(f"step {step} failed: {ex}")
                reason = "non-finite"
            else:
                E, S = _unpack(y)
                reason = _stop_reason(E, S, cfg)
        if reason is not None:
            traj.stopReason = reason
            logging.debug(f"integration stopped at t={t:.6g}: {reason}")
            pub.sendMessage("g2flow.integration.stopped", reason=reason, t=t)
            break
        S = symmetrize(S)
        y = _pack(E, S)
        if step % cfg.sampleEvery and step != nsteps:
            continue
        state = FlowState(E.copy(), S.copy(), t)
        monitor = _monitor(state, c, cfg.coeffs, hooks)
        traj.append(state, monitor)
        if monitor.definiteness != previousFlag:
            logging.debug(f"definiteness of S changed from {previousFlag} to {monitor.definiteness} at t={t:.6g}")
            pub.sendMessage("g2flow.definiteness.changed", t=t, previous=previousFlag, current=monitor.definiteness)
            previousFlag = monitor.definiteness
    return traj


def constraint_ode_rhs(v, Stilde):
    """Evolution of the divergence constraint: -tr(adj S)·v - adj(S)·v"""
    v = np.asarray(v, dtype=float)
    return -np.trace(Stilde) * v - Stilde @ v


def scale_factors(kappa, coeffs):
    """(α, β) solving κβ⁻² = b and κα²β = 2a"""
    a, b = coeffs
    if not (kappa > 0 and a > 0 and b > 0):
        raise FlowError(f"scaling needs kappa, a, b > 0, got kappa={kappa}, a={a}, b={b}")
    beta = math.sqrt(kappa / b)
    alpha = math.sqrt(2.0 * a / (kappa * beta))
    return alpha, beta


def scale_map(traj, kappa, coeffs, hooks: Sequence[Callable] = ()):
    """Map an H-orbit to an orbit of -a·H1 + b·H2: t' = t/κ, E' = αE, S' = βS.

    The image is checked against the target flow field using the exact
    derivatives of the source orbit.
    """
    if tuple(traj.coeffs) != tuple(DEFAULT_COEFFS):
        raise FlowError(f"scale_map expects an orbit of H {DEFAULT_COEFFS}, got coefficients {traj.coeffs}")
    alpha, beta = scale_factors(kappa, coeffs)
    c = traj.structure
    scaled = Trajectory(c, coeffs)
    residual = 0.0
    for st in traj.samples:
        image = FlowState(alpha * st.E, beta * st.S, st.t / kappa)
        dE, dS = flow_field(st, c)
        tE, tS = flow_field(image, c, coeffs)
        scale = 1.0 + max(np.max(np.abs(tE)), np.max(np.abs(tS)))
        residual = max(
            residual,
            float(np.max(np.abs(kappa * alpha * dE - tE))) / scale,
            float(np.max(np.abs(kappa * beta * dS - tS))) / scale,
        )
        scaled.append(image, _monitor(image, c, coeffs, hooks))
    scaled.stopReason = traj.stopReason
    scaled.scaling = ScaleInfo(kappa, alpha, beta, residual)
    if residual > SCALE_RESIDUAL_TOL:
        raise FlowError(f"scaled trajectory misses the target flow field by {residual:.3e}")
    return scaled


def variation_rates(st, c):
    """dH1 = -2 tr(G adj S)·det E, dH2 = ½ dH1, dH3 = tr(adj S)·det E along the H-flow"""
    G = symmetrize(frame.levi_civita_curvature(st.E, c).G)
    Stilde = adjugate(st.S)
    detE = float(np.linalg.det(st.E))
    dH1 = -2.0 * float(np.trace(G @ Stilde)) * detE
    return VariationRates(dH1, 0.5 * dH1, float(np.trace(Stilde)) * detE)


def drift_ratio(initial, c, cfg):
    """Ratio of the Hamiltonian drift at dt to the drift at dt/2 (about 16 for RK4)"""
    drifts = []
    for dt in (cfg.dt, cfg.dt / 2.0):
        traj = integrate(initial, c, cfg._replace(dt=dt))
        h = np.array([m.densities.h for m in traj.monitors])
        drifts.append(float(np.max(np.abs(h - h[0]))))
    return drifts[0] / drifts[1] if drifts[1] > 0 else math.inf
