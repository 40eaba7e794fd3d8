import math

import pytest

from gnheat import Grid1D, MaterialParams, Profile, Scenario

TWO_PI = 2.0 * math.pi

# criterion number -> list of (ok, message); filled by the acceptance tests
ACCEPTANCE_LINES: dict[int, list[tuple[bool, str]]] = {}


def periodic_grid(n=256, length=TWO_PI):
    return Grid1D.from_length(n, length)


def sine_scenario(theory, n=256, amplitude=0.1, dt=None, t_end=1.0, stride=1, **material):
    params = dict(lam=1.0, theta0=1.0)
    params.update(material)
    p = MaterialParams(**params)
    grid = periodic_grid(n)
    if dt is None:
        dt = 0.2 * grid.dx**2 if theory in ("Classical", "TypeI_Nonlinear", "TypeI_XiForm") else 0.25 * grid.dx
    return Scenario(grid, p, theory, Profile.sine(1.0, amplitude), dt=dt, t_end=t_end, output_stride=stride)


@pytest.fixture
def report_criterion():
    """Record an acceptance line: ``report_criterion(number, ok, message)``."""

    def record(number, ok, message):
        ACCEPTANCE_LINES.setdefault(number, []).append((bool(ok), message))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {message}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        lines = ACCEPTANCE_LINES[number]
        ok = all(flag for flag, _ in lines)
        detail = "; ".join(msg for _, msg in lines)
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
