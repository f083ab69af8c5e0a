import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from leakproof import auctions as au  # noqa: E402
from leakproof.game import ValueTypeSpace  # noqa: E402

settings.register_profile("repo", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("repo")

TENTH = Fraction(1, 10)

# lines printed by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def exact_auction(fmt, tie="uniform_random", step=TENTH, reserve=None, bidders=2):
    values = ValueTypeSpace.uniform(au.uniform_grid(step), bidders)
    spec = au.AuctionSpec(fmt, values, reserve=Fraction(0) if reserve is None else reserve, tie_break=tie)
    return au.build_auction(spec)


@pytest.fixture(scope="session")
def spa_tenth():
    return exact_auction("second_price")


@pytest.fixture(scope="session")
def fpa_tenth():
    return exact_auction("first_price")


@pytest.fixture(scope="session")
def english_tenth():
    return exact_auction("english")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
