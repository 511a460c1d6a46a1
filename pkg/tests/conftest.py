import numpy as np
import pytest

from puppetfollow.core import ActionTemplate, FollowerModel, MotionClip


def pytest_terminal_summary(terminalreporter):
    """Re-print acceptance verdict lines so they survive output capture."""
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in VERDICTS:
            terminalreporter.write_line(line)


@pytest.fixture
def ramp_template():
    """1-D features 0..9 at 10 Hz."""
    feats = np.arange(10.0)[:, None]
    return ActionTemplate("ramp", np.arange(10) / 10.0, feats, 10.0, [("s", 1)])


@pytest.fixture
def three_state_model():
    """1-D chain with states [0, 1, 2], sigma2 = 0.5, start prior."""
    return FollowerModel(
        id="chain3",
        states=np.array([[0.0], [1.0], [2.0]]),
        sigma2=0.5,
        rate=10.0,
        half_window=3,
        prior_mode="start_state",
    )


@pytest.fixture
def square_clip():
    """Two channels sweeping over 4 frames at 2 Hz."""
    frames = np.array([[0.0, 1.0], [2.0, 0.5], [4.0, 0.25], [6.0, 0.0]])
    return MotionClip("sweep", [("a", "joint"), ("b", "blend")], frames, 2.0)
