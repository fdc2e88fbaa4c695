import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from counterlab.machines import parse_machine

FIXTURES = Path(__file__).parent / "fixtures"
PACKAGE_FIXTURES = Path(__file__).parent.parent / "src" / "counterlab" / "fixtures"


@pytest.fixture(scope="session")
def leq_machine():
    return parse_machine((PACKAGE_FIXTURES / "leq_2dcta.machine").read_text())


@pytest.fixture(scope="session")
def leq_machine_path():
    return PACKAGE_FIXTURES / "leq_2dcta.machine"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES
