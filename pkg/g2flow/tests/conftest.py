"""Common pytest code (place for fixtures)."""

import argparse

import numpy as np
import pytest

from g2flow.__main__ import Globals
from g2flow.selftest import random_frame


@pytest.fixture
def reset_globals():
    """Fixture to reset globals."""
    parser = None
    parser = argparse.ArgumentParser()
    Globals.getInstance().reset()
    Globals.getInstance().set_parser(parser)


@pytest.fixture
def rng():
    """Fixture with a seeded numpy Generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def frame_matrix(rng):
    """Fixture with a random E of positive determinant."""
    return random_frame(rng)


@pytest.fixture
def symmetric_matrix(rng):
    """Fixture with a random symmetric matrix."""
    m = rng.normal(size=(3, 3))
    return 0.5 * (m + m.T)


@pytest.fixture
def spd_matrix(rng):
    """Fixture with a random positive-definite matrix."""
    m = rng.normal(size=(3, 3))
    return m @ m.T + 0.5 * np.eye(3)


@pytest.fixture
def config_file(tmp_path):
    """Fixture writing a run configuration and returning its path."""

    def write(text, name="run.yaml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write
