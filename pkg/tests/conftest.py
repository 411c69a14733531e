import numpy as np
import pytest

from cpdpgan import dataset

_ACCEPTANCE = {}


@pytest.fixture
def write_csv(tmp_path):
    """Write raw CSV text to a temp file and return its path."""
    def _write(text, name="data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write


@pytest.fixture
def labeled_file(tmp_path):
    """CSV with ``n`` rows, exactly ``n_faulty`` of them labeled 1."""
    def _make(n, n_faulty, name="project.csv", f=3, seed=0):
        rng = np.random.default_rng(seed)
        labels = [dataset.Label.FAULTY] * n_faulty + [dataset.Label.CLEAN] * (n - n_faulty)
        ds = dataset.ProjectDataset(name.split(".")[0], [f"m{k}" for k in range(f)],
                                    rng.normal(size=(n, f)), labels=labels)
        path = tmp_path / name
        dataset.save_csv(ds, str(path))
        return str(path)
    return _make


@pytest.fixture(scope="session")
def shifted_pair():
    return dataset.shifted_domain_pair(n=400, shift=5.0, buggy_fraction=0.4, seed=0)


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE[name] = ("PASS" if report.passed else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, secs) in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"{status}  {name}  ({secs:.2f}s)")
