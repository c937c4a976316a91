import pytest
from hypothesis import settings

from taskverify.datagen import DatasetConfig, build_dataset

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def small_dataset():
    cfg = DatasetConfig(sizes={"train": 40, "val": 8, "novel_tasks": 24, "novel_steps": 24, "abstraction": 24}, seed=3)
    return build_dataset(cfg)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
