import pytest

from viewdisagree.dataset import SyntheticConfig, generate_synthetic, split_labeled_unlabeled
from viewdisagree.disagreement import build_entropy_table


@pytest.fixture(scope="session")
def small_config():
    return SyntheticConfig(per_class_count=40, test_per_class=20, disagreement_rate=0.3, rng_seed=3)


@pytest.fixture(scope="session")
def small_split(small_config):
    return split_labeled_unlabeled(generate_synthetic(small_config), 5, 17, include_background=True)


@pytest.fixture(scope="session")
def small_table(small_split):
    return build_entropy_table(small_split)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
