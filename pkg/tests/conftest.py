import pytest
from hypothesis import HealthCheck, settings

from radar_qkernel.datasets import build_fall_dataset, build_uav_dataset

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_line(request):
    """Record a one-line PASS/FAIL verdict that is echoed in the terminal summary."""

    def record(number: int, name: str, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {name} ({detail})"
        request.config.stash[ACCEPTANCE_KEY].append(line)
        print(line)
        return ok

    return record


@pytest.fixture(scope="session")
def small_uav():
    return build_uav_dataset(n_per_class=8, seed=3)


@pytest.fixture(scope="session")
def small_fall():
    return build_fall_dataset(n_clips=8, seed=3, n_frames=96)
