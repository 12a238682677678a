import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from svmedge import KernelSpec, build_training_set, default_patch_specs, train  # noqa: E402


@pytest.fixture(scope="session")
def default_training_set():
    return build_training_set(default_patch_specs(0))


@pytest.fixture(scope="session")
def default_model(default_training_set):
    return train(default_training_set, KernelSpec("rbf3", 0.6), C=10.0, tol=1e-3)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
