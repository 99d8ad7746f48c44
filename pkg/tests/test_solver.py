from dataclasses import replace

import numpy as np
import pytest

import oracles
from edusofthand.contact import Circle
from edusofthand.experiments import _full_speed, _inits, _policy
from edusofthand.model import build_default_hand
from edusofthand.scene import FingerInit, MotorCommand, ObjectSpec, Scene, SimConfig
from edusofthand.solver import (
    EquilibriumNotReached,
    NumericalBlowup,
    grasp_quality,
    initial_state,
    quasi_static_step,
    simulate,
)

INDEX = 1


def single_finger(hand, control=(), sim=None, **init):
    inits = tuple(
        (f.name, FingerInit(**init) if i == INDEX else FingerInit(locked=True, detached=True))
        for i, f in enumerate(hand.fingers)
    )
    return Scene(hand=hand, init=inits, control=control, sim=sim or SimConfig())


def test_zero_input_is_a_fixed_point():
    sc = Scene()
    s0 = initial_state(sc)
    s1 = quasi_static_step(s0, sc)
    assert np.array_equal(s1.q, s0.q)
    assert np.all(s1.qdot == 0.0)
    assert [sp.angle for sp in s1.spools] == [sp.angle for sp in s0.spools]
    assert s1.t == pytest.approx(0.001)


def test_agonist_tension_flexes_every_joint():
    hand = build_default_hand()
    sc = single_finger(hand, slack_flexor=-0.5, slack_extensor=20.0)
    s = quasi_static_step(initial_state(sc), sc)
    assert np.all(s.qdot[INDEX] > 0)
    assert np.all(s.qdot[[0, 2, 3]] == 0)


def test_stop_penetration_matches_closed_form():
    # pre-stretched extensor, frictionless guides, flexor well slack
    hand = build_default_hand(guide_friction_mu=0.0)
    sim = SimConfig(t_end=2.0, stop="equilibrium", equilibrium_tol=1e-12)
    sc = single_finger(hand, sim=sim, slack_flexor=20.0, slack_extensor=-0.3)
    final = simulate(sc)[-1]
    q = final.q[INDEX]
    assert np.all(q < 0)  # pressed into the extension stops
    route = hand.route_for(INDEX, "extensor")
    T = final.tendons[hand.routes.index(route)].tension_at_spool
    assert T > 0
    arms = oracles.fd_moment_arms(route, hand.fingers[INDEX], list(q))
    for j in range(3):
        expected = oracles.stop_penetration(T * abs(arms[j]), hand.stop_stiffness)
        assert -q[j] == pytest.approx(expected, abs=1e-6)


def test_zero_duration_returns_initial_state():
    sc = Scene(sim=SimConfig(t_end=0.0))
    (s,) = simulate(sc)
    assert s.t == 0.0


def _closing(hand, t_end):
    w = _full_speed(hand)
    return Scene(
        hand=hand, init=_inits(hand, ["index"]), control=_policy("close", w),
        sim=SimConfig(t_end=t_end, stop="equilibrium", record_every=50),
    )


def test_free_finger_closes_to_its_limits():
    hand = build_default_hand()
    trace = simulate(_closing(hand, 3.0))
    final = trace[-1]
    hi = hand.fingers[INDEX].upper_limits
    assert np.all(np.abs(final.q[INDEX] - hi) < 1e-2)
    for s in trace:
        assert np.all(s.q <= np.array([f.upper_limits for f in hand.fingers]) + 1e-2)
        assert all(abs(c.transmitted_torque) <= 0.05 for c in s.clutches)
        assert all(abs(m.delivered_torque) <= 0.40 for m in s.motors)


def test_unsettled_run_raises_with_trace():
    with pytest.raises(EquilibriumNotReached) as ei:
        simulate(_closing(build_default_hand(), 0.2))
    assert ei.value.trace and ei.value.residual > 1e-4


def test_runs_are_bit_identical():
    sc = _closing(build_default_hand(), 0.3)
    a = simulate(sc, stop="t_end")
    b = simulate(sc, stop="t_end")
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert x.t == y.t
        assert np.array_equal(x.q, y.q)
        assert [t.tension_at_spool for t in x.tendons] == [t.tension_at_spool for t in y.tendons]


def test_slack_tendon_does_not_move_the_finger():
    hand = build_default_hand()
    control = (MotorCommand(0.0, "agonist", 4.0),)
    sc = single_finger(hand, control, SimConfig(t_end=0.1), slack_flexor=10.0, slack_extensor=20.0)
    for s in simulate(sc, record_every=1):
        assert np.all(s.q == 0.0)
        assert all(t.tension_at_spool == 0.0 for t in s.tendons)


def test_blowup_is_reported():
    hand = replace(build_default_hand(), joint_damping=1e-9)
    sc = single_finger(hand, sim=SimConfig(t_end=0.01), slack_flexor=-5.0)
    with pytest.raises(NumericalBlowup):
        simulate(sc)


def test_step_rejects_bad_dt():
    sc = Scene()
    with pytest.raises(ValueError):
        quasi_static_step(initial_state(sc), sc, 0.0)


# ------------------------------------------------------------ grasp quality


def test_no_contacts_is_unstable_with_gravity_residual():
    sc = Scene(objects=(ObjectSpec("ball", Circle(45.0), 0.4, (0.0, 900.0, 0.0)),), gravity=(0.0, 9.81))
    rep = grasp_quality(initial_state(sc), sc, 0)
    assert not rep.stable and rep.contact_count == 0
    assert rep.residual_force == pytest.approx(0.4 * 9.81)


def test_symmetric_pinch_is_stable():
    hand = build_default_hand()
    # park the two outer right fingers away so only thumb and index touch
    moved = tuple(
        replace(f, base=(400.0 + 100 * i, 0.0)) if i in (2, 3) else f for i, f in enumerate(hand.fingers)
    )
    hand = replace(hand, fingers=moved)
    ball = ObjectSpec("ball", Circle(52.0), 0.2, (0.0, 92.5, 0.0))
    sc = Scene(hand=hand, objects=(ball,))
    rep = grasp_quality(initial_state(sc), sc, 0)
    assert rep.contact_count == 2 and rep.opposing
    assert rep.residual < 1e-9
    assert rep.stable


def test_grasp_quality_checks_object_index():
    with pytest.raises(IndexError):
        grasp_quality(initial_state(Scene()), Scene(), 0)
