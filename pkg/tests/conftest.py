from __future__ import annotations

import pytest

from spdireach import fixtures


@pytest.fixture(scope="session")
def hcorridor():
    return fixtures.hcorridor()


@pytest.fixture(scope="session")
def spinbox():
    return fixtures.spinbox()
