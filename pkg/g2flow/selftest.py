"""Invariant self-test suites, run from the cli with the "--selftest" option.

Every suite is a function taking a numpy Generator and returning the number
of checks it made together with the names of the checks that failed.
"""
import contextlib
import logging
import time
from typing import List, NamedTuple

import numpy as np
from tabulate import tabulate

from g2flow import adm, flow, forms, frame, g2, liealg, mat3
from g2flow.flow import FlowState, IntegrationConfig

FIXTURES_PER_PRESET = 5


class SuiteResult(NamedTuple):
    """Outcome of one self-test suite"""
    name: str
    checks: int
    failures: List[str]
    seconds: float


@contextlib.contextmanager
def corrupted_epsilon():
    """Flip the sign of the shared Levi-Civita symbol for the duration of the block"""
    mat3.EPSILON *= -1.0
    forms._coframe_d_matrix.cache_clear()  # pylint: disable=W0212
    try:
        yield
    finally:
        mat3.EPSILON *= -1.0
        forms._coframe_d_matrix.cache_clear()  # pylint: disable=W0212


def random_frame(rng, spread=0.3):
    """A random E with det E > 0 near the identity"""
    while True:
        E = np.eye(3) + spread * rng.normal(size=(3, 3))
        if np.linalg.det(E) > 0.1:
            return E


def constrained_su2_state(rng):
    """A non-isotropic su2 state with vanishing divergence constraint"""
    R = mat3.random_rotation(rng)
    E = R @ np.diag(rng.uniform(0.8, 1.2, size=3))
    S = R @ np.diag(rng.uniform(0.8, 1.2, size=3)) @ R.T
    return flow.make_state(E, S)


class _Checks:
    def __init__(self):
        self.count = 0
        self.failures = []

    def check(self, name, ok):
        self.count += 1
        if not ok:
            self.failures.append(name)
            logging.debug(f"self-test check failed: {name}")


def testBracketRelations(rng):
    """[L_i, L_j] = ε_ijk L_k and adj(M)·M = det(M)·I"""
    checks = _Checks()
    checks.check("so3 bracket relation", mat3.bracket_relation_residual() <= 1e-14)
    for n in range(10):
        M = rng.normal(size=(3, 3))
        ok = np.allclose(mat3.adjugate(M) @ M, np.linalg.det(M) * np.eye(3), atol=1e-12)
        checks.check(f"adjugate identity #{n}", ok)
    return checks


def testJacobi(rng):
    """Jacobi identity and d∘d = 0 on invariant 1-forms for every preset"""
    checks = _Checks()
    for name in liealg.PRESETS:
        c = liealg.preset(name)
        checks.check(f"jacobi {name}", liealg.jacobi_residual(c) <= 1e-12)
        checks.check(f"unimodular {name}", liealg.unimodularity_residual(c) <= 1e-12)
        v = rng.normal(size=3)
        checks.check(f"maurer-cartan dd {name}", abs(liealg.maurer_cartan_dd(c, v)) <= 1e-12)
    return checks


def testLeviCivita(rng):
    """The solved connection is torsion-free and its Einstein tensor symmetric"""
    checks = _Checks()
    for name in liealg.PRESETS:
        c = liealg.preset(name)
        for n in range(FIXTURES_PER_PRESET):
            E = random_frame(rng)
            A = frame.levi_civita(E, c)
            checks.check(f"torsion-free {name} #{n}", np.max(np.abs(frame.torsion(E, A, c))) <= 1e-10)
            G = frame.einstein_tensor(E, A, c).G
            checks.check(f"symmetric G {name} #{n}", mat3.is_symmetric(G, 1e-10))
    return checks


def testDSquared(rng):
    """d∘d = 0 on P for the Levi-Civita connection of random frames"""
    checks = _Checks()
    for name in liealg.PRESETS:
        c = liealg.preset(name)
        E = random_frame(rng)
        sd = forms.StructuralDifferential(E, frame.levi_civita(E, c), c)
        x = forms.InvariantForm(rng.normal(size=forms.NBASIS))
        once = forms.d(x, sd)
        twice = forms.d(once, sd)
        checks.check(f"d squared {name}", twice.maxNorm() <= 1e-9 * (1.0 + once.maxNorm()))
        ruled = forms.structural_d(x, sd)
        for k in range(3):
            ruled = ruled + forms.wedge(sd.verticalPart(k), forms.rotate(k, x))
        checks.check(f"generator rules {name}", (ruled - once).maxNorm() <= 1e-9 * (1.0 + once.maxNorm()))
    return checks


def testMetricCalibration(rng):  # pylint: disable=W0613
    """S = I gives the standard G2-form with g = I"""
    checks = _Checks()
    st = FlowState(np.eye(3), np.eye(3))
    form = g2.g2_form(st, liealg.preset("abelian"))
    checks.check("G2 regime", form.regime == "G2")
    checks.check("metric is the identity", form.metric is not None and np.allclose(form.metric.g, np.eye(7), atol=1e-12))
    return checks


def testGradientIdentity(rng):
    """Rates of H1, H2, H3 along the flow match finite differences"""
    checks = _Checks()
    c = liealg.preset("su2")
    h = 1e-5
    for n in range(3):
        st = flow.make_state(random_frame(rng), mat3.symmetrize(np.eye(3) + 0.3 * rng.normal(size=(3, 3))))
        dE, dS = flow.flow_field(st, c)
        ahead = flow.hamiltonian_densities(FlowState(st.E + h * dE, st.S + h * dS), c)
        behind = flow.hamiltonian_densities(FlowState(st.E - h * dE, st.S - h * dS), c)
        rates = flow.variation_rates(st, c)
        estimates = [(getattr(ahead, k) - getattr(behind, k)) / (2.0 * h) for k in ("h1", "h2", "h3")]
        for label, exact, estimate in zip(("H1", "H2", "H3"), rates, estimates):
            checks.check(f"rate of {label} #{n}", abs(exact - estimate) <= 1e-6 * (1.0 + abs(exact)))
    return checks


def testConservation(rng):
    """H is conserved along su2 orbits"""
    checks = _Checks()
    c = liealg.preset("su2")
    cfg = IntegrationConfig(dt=1e-3, tEnd=0.2)
    for label, st in (("isotropic", flow.make_state(np.eye(3), np.eye(3))), ("rotated", constrained_su2_state(rng))):
        traj = flow.integrate(st, c, cfg)
        h = np.array([m.densities.h for m in traj.monitors])
        checks.check(f"completed {label}", not traj.stoppedEarly())
        checks.check(f"conservation {label}", float(np.max(np.abs(h - h[0]))) <= 1e-9)
    return checks


def testConstraintPreservation(rng):
    """A vanishing divergence constraint stays zero"""
    checks = _Checks()
    c = liealg.preset("su2")
    traj = flow.integrate(constrained_su2_state(rng), c, IntegrationConfig(dt=1e-3, tEnd=0.2))
    worst = max(float(np.linalg.norm(m.constraint)) for m in traj.monitors)
    checks.check("constraint preserved", worst <= 1e-8)
    return checks


def testTorsion(rng):
    """Constrained states give torsion-free G2-structures, frozen S does not"""
    checks = _Checks()
    c = liealg.preset("su2")
    iso = flow.make_state(np.eye(3), np.eye(3))
    residual = g2.torsion_residual(iso, c)
    checks.check("torsion-free isotropic", max(residual) <= 1e-8)
    residual = g2.torsion_residual(constrained_su2_state(rng), c)
    checks.check("torsion-free rotated", max(residual) <= 1e-8)
    frozen = g2.torsion_residual(iso, c, Sdot=np.zeros((3, 3)))
    checks.check("frozen S is detected", max(frozen) >= 1e-6)
    st = constrained_su2_state(rng)
    su3 = g2.su3_structure(st.E, st.S, frame.levi_civita(st.E, c))
    sd = forms.StructuralDifferential(st.E, su3.A, c)
    checks.check("half-flat", max(g2.half_flat_residual(su3, sd)) <= 1e-10)
    return checks


def testADMRoundTrip(rng):
    """(E, S) to (γ, π) and back, with matching Hamiltonians"""
    checks = _Checks()
    c = liealg.preset("su2")
    for n in range(5):
        st = flow.make_state(random_frame(rng), mat3.symmetrize(rng.normal(size=(3, 3))))
        state = adm.to_adm(st)
        back = adm.to_adm(adm.from_adm(state))
        checks.check(f"round trip #{n}", np.allclose(back.gamma, state.gamma, atol=1e-10) and np.allclose(back.pi, state.pi, atol=1e-10))
        H = adm.hamiltonians(state, c).H
        checks.check(f"hamiltonian #{n}", abs(H - flow.hamiltonian_densities(st, c).h) <= 1e-9 * (1.0 + abs(H)))
    return checks


SUITES = (
    ("so3 bracket relations", testBracketRelations),
    ("jacobi identity", testJacobi),
    ("levi-civita connection", testLeviCivita),
    ("d squared", testDSquared),
    ("metric calibration", testMetricCalibration),
    ("gradient identity", testGradientIdentity),
    ("hamiltonian conservation", testConservation),
    ("constraint preservation", testConstraintPreservation),
    ("torsion residuals", testTorsion),
    ("adm round trip", testADMRoundTrip),
)
"""Self-test suites in the order they are run"""


def runSuites(seed=0):
    """Run every suite with a Generator seeded from seed; exceptions count as failures"""
    results = []
    for name, suite in SUITES:
        rng = np.random.default_rng(seed)
        start = time.perf_counter()
        try:
            checks = suite(rng)
            count, failures = checks.count, checks.failures
        except Exception as ex:  # pylint: disable=W0703
            logging.debug(f"suite {name} raised {ex!r}")
            count, failures = 1, [f"raised {type(ex).__name__}: {ex}"]
        results.append(SuiteResult(name, count, failures, time.perf_counter() - start))
    return results


def testAll(seed=0, corruptEpsilon=False):
    """
    Run all invariant suites and print a summary table.
    This is called from the cli with the "--selftest" option.

    Returns True if every check passed.
    """
    guard = corrupted_epsilon() if corruptEpsilon else contextlib.nullcontext()
    with guard:
        results = runSuites(seed)
    table = [
        [r.name, r.checks, len(r.failures), f"{r.seconds:.2f}", "ok" if not r.failures else "FAILED"]
        for r in results
    ]
    print(tabulate(table, headers=["suite", "checks", "failures", "seconds", "status"]))
    for r in results:
        for failure in r.failures:
            print(f"failed: {r.name}: {failure}")
    return all(not r.failures for r in results)
