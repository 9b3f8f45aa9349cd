"""g2flow unit tests for selftest.py"""

import re

import numpy as np
import pytest

from g2flow import forms, mat3, selftest
from g2flow.flow import FlowState
from g2flow.frame import divergence_constraint, levi_civita
from g2flow.liealg import preset
from g2flow.selftest import SUITES, constrained_su2_state, corrupted_epsilon, random_frame


@pytest.mark.unit
def test_random_frame(rng):
    """Test random frames have a comfortable determinant"""
    for _ in range(20):
        assert np.linalg.det(random_frame(rng)) > 0.1


@pytest.mark.unit
def test_constrained_su2_state(rng):
    """Test the rotated diagonal su2 fixture satisfies the divergence constraint"""
    st = constrained_su2_state(rng)
    assert isinstance(st, FlowState)
    c = preset("su2")
    v = divergence_constraint(st.S, st.E, levi_civita(st.E, c))
    assert np.allclose(v, 0.0, atol=1e-12)
    assert not np.allclose(st.S, st.S[0, 0] * np.eye(3))


@pytest.mark.unit
def test_corrupted_epsilon_restores(rng):
    """Test the corrupted symbol is flipped inside the block and restored after"""
    before = mat3.EPSILON.copy()
    with corrupted_epsilon():
        assert np.array_equal(mat3.EPSILON, -before)
        assert mat3.bracket_relation_residual() > 1.0
    assert np.array_equal(mat3.EPSILON, before)
    assert mat3.bracket_relation_residual() <= 1e-14
    assert selftest.testJacobi(rng).failures == []


@pytest.mark.unit
def test_corrupted_epsilon_restores_on_error():
    """Test the symbol is restored when the block raises"""
    before = mat3.EPSILON.copy()
    with pytest.raises(RuntimeError):
        with corrupted_epsilon():
            raise RuntimeError("boom")
    assert np.array_equal(mat3.EPSILON, before)
    assert forms._coframe_d_matrix.cache_info().currsize == 0  # pylint: disable=W0212


@pytest.mark.unit
def test_individual_suites(rng):
    """Test the quick suites pass and count their checks"""
    checks = selftest.testBracketRelations(rng)
    assert checks.count == 11
    assert checks.failures == []
    checks = selftest.testMetricCalibration(rng)
    assert checks.count == 2
    assert checks.failures == []


@pytest.mark.unit
def test_bracket_suite_detects_corruption(rng):
    """Test the bracket suite fails with the corrupted symbol"""
    with corrupted_epsilon():
        checks = selftest.testBracketRelations(rng)
    assert "so3 bracket relation" in checks.failures


@pytest.mark.unit
def test_suite_names_unique():
    """Test every suite has its own name"""
    names = [name for name, _ in SUITES]
    assert len(names) == len(set(names))


@pytest.mark.unitslow
def test_test_all(capsys):
    """Test testAll passes and prints a row per suite"""
    assert selftest.testAll(seed=0)
    out, _ = capsys.readouterr()
    for name, _ in SUITES:
        assert re.search(name, out, re.MULTILINE)
    assert not re.search(r"failed:", out, re.MULTILINE)


@pytest.mark.unitslow
def test_test_all_corrupted(capsys):
    """Test testAll fails with the corrupted symbol and names the failures"""
    assert not selftest.testAll(seed=0, corruptEpsilon=True)
    out, _ = capsys.readouterr()
    assert re.search(r"failed: so3 bracket relations", out, re.MULTILINE)
    assert mat3.bracket_relation_residual() <= 1e-14
