import json
import pathlib

import pytest

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def special_reference():
    return json.loads((FIXTURES / "special_reference.json").read_text())
