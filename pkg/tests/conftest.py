import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from htype.config import read_kv  # noqa: E402


@pytest.fixture(scope="session")
def thresholds():
    raw = read_kv(Path(__file__).parent / "acceptance.cfg")
    return {k: float(v) for k, v in raw.items()}


@pytest.fixture
def verdict(capsys):
    """Print one PASS/FAIL line to the terminal, then assert."""
    def check(label, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"
    return check
