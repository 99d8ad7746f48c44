import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from edusofthand.drive import (
    ClutchState,
    MotorState,
    ShaftState,
    SpoolState,
    clutch_transmit,
    motor_step,
    shaft_step,
)

LIMIT = 0.05
R = 8.0


def fresh_shaft(speed=2.0):
    return ShaftState(
        MotorState(commanded_speed=speed),
        tuple(ClutchState() for _ in range(4)),
        tuple(SpoolState(0.0, R, i) for i in range(4)),
    )


@pytest.mark.parametrize(
    "demand, out",
    [(0.03, (0.03, False)), (0.07, (0.05, True)), (-0.07, (-0.05, True)), (0.05, (0.05, False))],
)
def test_clutch_examples(demand, out):
    assert clutch_transmit(demand, LIMIT) == out


@given(st.floats(-10, 10), st.floats(0.001, 1.0))
def test_clutch_is_a_clamp(demand, limit):
    t, slipping = clutch_transmit(demand, limit)
    assert abs(t) <= limit
    assert slipping == (abs(demand) > limit)
    if not slipping:
        assert t == demand


@pytest.mark.parametrize("load, factor", [(0.0, 1.0), (0.2, 0.5), (0.4, 0.0), (-0.2, 0.5), (0.9, 0.0)])
def test_motor_droop(load, factor):
    m = motor_step(MotorState(), 4.0, load, 0.01)
    assert m.speed == pytest.approx(4.0 * factor, abs=1e-15)
    assert m.shaft_angle == pytest.approx(0.04 * factor, abs=1e-15)
    assert abs(m.delivered_torque) <= 0.40


def test_motor_rejects_bad_dt():
    with pytest.raises(ValueError):
        motor_step(MotorState(), 1.0, 0.0, 0.0)


def test_encoder_ticks_are_degrees():
    m = MotorState(shaft_angle=math.radians(90.4))
    assert m.encoder_ticks == 90
    assert MotorState(shaft_angle=-math.radians(10.6)).encoder_ticks == -11


def test_no_load_speed_limits_command():
    m = motor_step(MotorState(), 50.0, 0.0, 0.01, no_load_speed=5.0)
    assert m.speed == 5.0


def test_zero_tension_spools_track_shaft():
    s = fresh_shaft()
    for _ in range(10):
        s = shaft_step(s, 2.0, [0.0] * 4, 0.01, [LIMIT] * 4)
    for sp in s.spools:
        assert sp.angle == s.motor.shaft_angle
        assert sp.wound_length == pytest.approx(R * sp.angle)
    assert not any(c.slipping for c in s.clutches)


def test_overloaded_spool_slips_while_others_wind():
    s = fresh_shaft()
    loads = [10.0, 1.0, 0.0, 2.0]
    # 10 N on an 8 mm spool asks for 0.08 N*m
    for _ in range(5):
        s = shaft_step(s, 2.0, loads, 0.01, [LIMIT] * 4)
    assert s.clutches[0].slipping
    assert s.clutches[0].transmitted_torque == LIMIT
    assert s.spools[0].angle == 0.0
    assert s.clutches[0].slip_angle_accum == pytest.approx(s.motor.shaft_angle)
    for i in (1, 2, 3):
        assert not s.clutches[i].slipping
        assert s.spools[i].angle == pytest.approx(s.motor.shaft_angle)
    total = sum(c.transmitted_torque for c in s.clutches)
    assert s.motor.delivered_torque == pytest.approx(total)


def test_clutches_alone_cannot_stall_the_motor():
    s = fresh_shaft()
    s = shaft_step(s, 2.0, [100.0] * 4, 0.01, [LIMIT] * 4)
    assert s.motor.delivered_torque == pytest.approx(4 * LIMIT)
    s = shaft_step(s, 2.0, [100.0] * 4, 0.01, [LIMIT] * 4)
    # the droop at 0.20 N*m halves the speed but never stops the shaft
    assert s.motor.speed == pytest.approx(1.0)


def test_back_drive_settles_at_clutch_limit():
    k = 2.0  # N/mm
    s = fresh_shaft()
    gaps = [10.0, 0.0, -1.0, 1.0]  # 10 mm stretch = 20 N, far over the limit
    s2 = shaft_step(s, 2.0, [0.0] * 4, 0.01, [LIMIT] * 4, stiffness=k, gaps=gaps)
    d = s2.spools[0].angle - s.spools[0].angle
    tension = k * (gaps[0] + R * d)
    assert tension == pytest.approx(LIMIT / (R * 1e-3))  # 6.25 N
    assert d < 0
    assert s2.clutches[0].slipping
    assert not s2.clutches[1].slipping


def test_disengaged_spool_is_idle():
    s = shaft_step(fresh_shaft(), 2.0, [0.0] * 4, 0.01, [LIMIT] * 4, engaged=[True, False, True, True])
    assert s.spools[1].angle == 0.0 and s.clutches[1].transmitted_torque == 0.0
    assert s.spools[0].angle > 0.0


@given(
    loads=st.lists(st.floats(0.0, 30.0), min_size=4, max_size=4),
    cmd=st.floats(-6.0, 6.0),
    steps=st.integers(1, 20),
)
def test_shaft_invariants(loads, cmd, steps):
    s = fresh_shaft(cmd)
    for _ in range(steps):
        before = s
        s = shaft_step(s, cmd, loads, 0.01, [LIMIT] * 4)
        assert abs(s.motor.delivered_torque) <= 0.40
        for c0, c, sp0, sp in zip(before.clutches, s.clutches, before.spools, s.spools):
            assert abs(c.transmitted_torque) <= LIMIT
            # dissipation in the clutch never goes negative
            assert c.slip_angle_accum >= c0.slip_angle_accum
            if not c.slipping:
                assert (sp.angle - s.motor.shaft_angle) == pytest.approx(
                    sp0.angle - before.motor.shaft_angle, abs=1e-12
                )
