import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make `oracle` importable

from teleaudit.statevec import PureState


@pytest.fixture
def rng():
    return np.random.default_rng(20240911)


def random_state(rng, labels) -> PureState:
    n = len(labels)
    v = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
    return PureState(tuple(labels), v / np.linalg.norm(v))


def assert_states_close(a: PureState, b: PureState, tol=1e-10):
    assert set(a.labels) == set(b.labels)
    bb = b.reorder(a.labels) if a.labels != b.labels else b
    assert np.max(np.abs(a.amps - bb.amps)) < tol


def assert_states_close_up_to_phase(a: PureState, b: PureState, tol=1e-9):
    assert set(a.labels) == set(b.labels)
    bb = b.reorder(a.labels) if a.labels != b.labels else b
    overlap = np.vdot(a.amps, bb.amps)
    assert abs(abs(overlap) - 1.0) < tol
