import time

import pytest

from imdrive.params import MachineParams
from imdrive.simulation import SimConfig, resolve_config, run_scenario

ACCEPTANCE_LINES = []


def record(criterion: str, ok: bool, detail: str) -> None:
    """Log one acceptance line, printed in the terminal summary."""
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def params():
    return MachineParams()


class _Run:
    def __init__(self, cfg, params):
        self.cfg = resolve_config(cfg, params)
        t0 = time.perf_counter()
        self.trace, self.metrics = run_scenario(self.cfg, params)
        self.runtime = time.perf_counter() - t0


@pytest.fixture(scope="session")
def linear_run(params):
    """Torque-step scenario at v_dc = 2.5 v_b."""
    return _Run(SimConfig(v_dc_pu=2.5), params)


@pytest.fixture(scope="session")
def overmod_run(params):
    """Same scenario at v_dc = 1.7 v_b."""
    return _Run(SimConfig(v_dc_pu=1.7), params)
