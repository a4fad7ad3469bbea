import numpy as np
import pytest

from qpcaclf.classifier import ClassifierModel
from qpcaclf.pca import fit_components

# (criterion, passed, detail) rows appended by tests/test_acceptance.py
ACCEPTANCE_RESULTS = []


def random_orthonormal(rng, count, dim, complex_=False):
    """Rows form an orthonormal set (QR of a Gaussian matrix)."""
    a = rng.standard_normal((dim, count))
    if complex_:
        a = a + 1j * rng.standard_normal((dim, count))
    q, _ = np.linalg.qr(a)
    return q.T


def random_trained_model(rng, m_max=16, n_max=64, s_max=8):
    """Train a model on random non-negative samples; returns (model, samples)."""
    while True:
        m = int(rng.integers(1, m_max + 1))
        n = int(rng.integers(2, n_max + 1))
        samples = rng.random((m, n))
        rank = min(m, n)
        s = int(rng.integers(1, min(s_max, rank) + 1))
        try:
            pcs = fit_components(samples, n_components=s)
        except Exception:  # pragma: no cover - rank-deficient draw, retry
            continue
        return ClassifierModel.from_components(pcs), samples


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}: {detail}")
