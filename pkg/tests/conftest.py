import pytest

from chimex import _backend, energy, stepper

BACKENDS = sorted(_backend.AVAILABLE)


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    mod = _backend.get(request.param)
    monkeypatch.setattr(_backend, "kernels", mod)
    monkeypatch.setattr(stepper, "kernels", mod)
    monkeypatch.setattr(energy, "kernels", mod)
    return request.param


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
