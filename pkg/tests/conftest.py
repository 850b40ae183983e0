import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from adiasym import kernels

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=40,
                          suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("repo")

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def kron_string(letters: str) -> np.ndarray:
    """Dense Pauli string by Kronecker products; letter q acts on bit q."""
    out = np.eye(1, dtype=complex)
    for c in reversed(letters):
        out = np.kron(out, _PAULI[c])
    return out


def kron_operator(terms, n):
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for c, s in terms:
        out += c * kron_string(s)
    return out


def random_terms(rng, n, count):
    letters = np.array(list("IXYZ"))
    return [(float(rng.normal()), "".join(rng.choice(letters, n))) for _ in range(count)]


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request, monkeypatch):
    """Run a test once per importable kernel backend."""
    monkeypatch.setattr(kernels, "_impl", kernels.available_backends()[request.param])
    return request.param


# --------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per criterion

CRITERIA: dict = {}


@pytest.fixture
def criterion():
    def report(number: int, passed: bool, detail: str = ""):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        CRITERIA[number] = line
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
