import random

import pytest
from hypothesis import HealthCheck, settings

from gflab.tree import Tree

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ELEVEN_NODE_TREE = "6(4(2(1(-,-),3(-,-)),5(-,-)),10(8(7(-,-),9(-,-)),11(-,-)))"


def random_bst(n: int, rng: random.Random) -> Tree:
    from gflab.experiments import random_bst as make
    return make(n, rng)


@pytest.fixture
def t3() -> Tree:
    return Tree.parse("2(1(-,-),3(-,-))")


CRITERIA: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[n])
