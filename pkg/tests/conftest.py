import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
sys.path.insert(0, str(HERE))

settings.register_profile(
    "default", max_examples=60, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

CLUTCH_CAP = 0.05  # N*m
MOTOR_CAP = 0.40  # N*m

# Filled in by test_acceptance; printed after the run.
ACCEPTANCE: dict[int, tuple[bool, str]] = {}

# Every simulation step taken in this session, checked against the drive caps.
AUDIT = {"steps": 0, "clutch_violations": 0, "motor_violations": 0, "max_clutch": 0.0, "max_motor": 0.0}


@pytest.fixture(scope="session", autouse=True)
def drive_cap_audit():
    from edusofthand.solver import Simulator

    original = Simulator.step

    def audited(self, state, dt):
        new = original(self, state, dt)
        c = max(abs(cl.transmitted_torque) for cl in new.clutches)
        m = max(abs(mo.delivered_torque) for mo in new.motors)
        AUDIT["steps"] += 1
        AUDIT["max_clutch"] = max(AUDIT["max_clutch"], c)
        AUDIT["max_motor"] = max(AUDIT["max_motor"], m)
        AUDIT["clutch_violations"] += c > CLUTCH_CAP
        AUDIT["motor_violations"] += m > MOTOR_CAP
        return new

    Simulator.step = audited
    yield AUDIT
    Simulator.step = original


def audit_verdict() -> tuple[bool, str]:
    ok = AUDIT["steps"] > 0 and AUDIT["clutch_violations"] == 0 and AUDIT["motor_violations"] == 0
    detail = (
        f"{AUDIT['steps']} steps, max clutch {AUDIT['max_clutch']:.6g} N*m, "
        f"max motor {AUDIT['max_motor']:.6g} N*m, "
        f"{AUDIT['clutch_violations'] + AUDIT['motor_violations']} violations"
    )
    return ok, detail


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    if 2 in ACCEPTANCE:
        # by now the audit covers every step of the whole session
        ACCEPTANCE[2] = audit_verdict()
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
