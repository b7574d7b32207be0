import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))  # make tests/oracle.py importable

from liveprof.session import SessionState


@pytest.fixture
def tmp_csv(tmp_path):
    def write(content: str, name: str = "data.csv") -> str:
        p = tmp_path / name
        p.write_text(content, encoding="utf-8")
        return str(p)

    return write


@pytest.fixture
def session(tmp_path):
    return SessionState(base_dir=str(tmp_path))
