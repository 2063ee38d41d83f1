import functools

import numpy as np
import pytest

from qbohm import well

_CRITERIA = {}


def record_criterion(key, title, ok, detail=""):
    """Store one acceptance line; printed in the terminal summary."""
    _CRITERIA[key] = (title, bool(ok), detail)
    line = f"[{'PASS' if ok else 'FAIL'}] {key}: {title}" + (f" ({detail})" if detail else "")
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: int(k.split("-")[1])):
        title, ok, detail = _CRITERIA[key]
        tail = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}: {title}{tail}")


@functools.lru_cache(maxsize=None)
def well_state(gammaL, n, n_points=4001, kind="physical_x"):
    """Cached analytic eigenstate ``(spec, psi, phi)``."""
    spec = well.WellSpec.from_gammaL(gammaL)
    psi, phi = well.sample_state(spec, n, n_points, kind)
    return spec, psi, phi


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
