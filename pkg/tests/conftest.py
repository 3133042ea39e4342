import sys
from pathlib import Path

import pytest

from bellkit import builtin_expression, ghz_state, paper_model

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def g_expr():
    return builtin_expression("g-paper")


@pytest.fixture
def mermin_expr():
    return builtin_expression("mermin")


@pytest.fixture
def ghz3():
    return ghz_state(3)


@pytest.fixture
def xy_model():
    return paper_model()
