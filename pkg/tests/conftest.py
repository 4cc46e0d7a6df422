import os

import pytest

from bellsim.core import SimConfig
from bellsim.database import db_manager

INPUTS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "inputs")


@pytest.fixture
def inputs_dir():
    return INPUTS


@pytest.fixture
def fast_solvers():
    # 테스트에서는 재시작/seesaw 횟수를 줄인다
    with SimConfig.override(MEASURE_RESTARTS=2, MEASURE_MAX_ITERS=2000, SEESAW_RESTARTS=2, SEESAW_ROUNDS=4):
        yield SimConfig


@pytest.fixture
def sqlite_db(tmp_path):
    url = f"sqlite:///{tmp_path / 'runs.db'}"
    db_manager.close()
    db_manager.init_db(url)
    yield url
    db_manager.close()
