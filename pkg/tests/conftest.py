import hypothesis
import numpy as np
import pytest

from resonance_rls.driveline import excitation_profile, simulate, tune_for_target

hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def driveline_98():
    """Two-mass driveline at 9.8 Hz, zeta 0.02, 60 s at 1 kHz, chirp synced to 10 s windows."""
    cfg = tune_for_target(9.8, 0.02)
    out = simulate(cfg, excitation_profile(4.0, 18.0, sweep_period_s=10.0), 1000.0, 60.0)
    return cfg, out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
