import json
import sys

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from regulator.config import bundled_scenarios, scenario_from_dict
from regulator.model import StateSpace

settings.register_profile("default", deadline=None, max_examples=30)
settings.load_profile("default")


def random_system(rng, n, m, p, stable=False, shift=0.5):
    """Random real system; ``stable`` shifts the spectrum left of ``-shift``."""
    A = rng.standard_normal((n, n)) / np.sqrt(n)
    if stable:
        A -= (np.linalg.eigvals(A).real.max() + shift) * np.eye(n)
    return StateSpace(A, rng.standard_normal((n, m)), rng.standard_normal((p, n)),
                      np.zeros((p, m)))


@st.composite
def small_systems(draw, max_n=6, stable=False):
    seed = draw(st.integers(0, 2**31 - 1))
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, 3))
    p = draw(st.integers(1, 3))
    return random_system(np.random.default_rng(seed), n, m, p, stable=stable)


def load_bundled(name, **overrides):
    """Bundled scenario with nested dict overrides, e.g. ``model={"N": 50}``."""
    cfg = json.loads(bundled_scenarios()[name].read_text())
    for section, values in overrides.items():
        cfg[section].update(values)
    return scenario_from_dict(cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
