import pytest

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def record(cid, title, passed, detail=""):
    ACCEPTANCE[cid] = (title, bool(passed), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[cid]
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid}. {title}: {detail}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240607)
