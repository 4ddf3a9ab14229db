import numpy as np
import pytest

from tensorank.ctucker import CTuckerState, Hyperparameters


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def tiny_instance(k: int = 1):
    """Frozen state for n=2, p=2, d=2, m=2 and ``k`` groups."""
    data = np.array([[0, 1], [1, 1]])
    scheme = (2, 2)
    hyper = Hyperparameters(m=2, k=k, arm_schedule="flat", a_beta=1.5, b_beta=2.0, a_delta=1.2, b_delta=0.7)
    lam = (np.array([[0.3, 0.7], [0.8, 0.2]]), np.array([[0.6, 0.4], [0.1, 0.9]]))
    if k == 1:
        z = np.array([[0], [1]])
        w = np.array([0, 0])
        nu_star = np.array([1.0])
        zeta = np.array([[[0.35, 1.0]]])
        s = np.array([0, 0])
        xi = np.array([1.0])
        delta = np.array([0.9])
    else:
        z = np.array([[0, 1], [1, 1]])
        w = np.array([0, 1])
        nu_star = np.array([0.4, 1.0])
        zeta = np.array([[[0.35, 1.0], [0.6, 1.0]], [[0.2, 1.0], [0.75, 1.0]]])
        s = np.array([0, 1])
        xi = np.array([0.55, 0.45])
        delta = np.array([0.9, 1.6])
    state = CTuckerState(lam, z, w, nu_star, zeta, s, xi, 1.3, delta)
    return data, scheme, hyper, state


# acceptance lines collected during the run and repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance(capsys):
    def record(name: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
