import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from edusofthand.kinematics import (
    PAYING_OUT,
    STUCK,
    WINDING,
    forward_kinematics,
    moment_arms,
    pose_unclamped,
    route_geometry,
    tendon_path_length,
    tension_profile,
)
from edusofthand.model import TendonRoute, build_default_hand

HAND = build_default_hand()
WIDE = tuple((0.0, math.pi) for _ in range(3))


def joint_angles(finger):
    hi = finger.upper_limits
    return st.tuples(*[st.floats(0.0, float(h), allow_nan=False) for h in hi])


def test_straight_finger_tip_is_145_along_axis():
    for f in HAND.fingers:
        pose = forward_kinematics(f, (0.0, 0.0, 0.0))
        tip = pose.tip(f)
        axis = f.base_rotation[:, 0]
        assert np.hypot(*(tip - np.asarray(f.base))) == pytest.approx(145.0, abs=1e-12)
        assert np.dot(tip - np.asarray(f.base), axis) == pytest.approx(145.0, abs=1e-12)


def test_first_joint_rotation_is_rigid():
    f = replace(HAND.fingers[1], joint_limits=WIDE)
    straight = forward_kinematics(f, (0.0, 0.0, 0.0))
    bent = forward_kinematics(f, (math.pi / 2, 0.0, 0.0))
    j1 = straight.joints[0]
    s = f.flexion_sign * math.pi / 2
    R = np.array([[math.cos(s), -math.sin(s)], [math.sin(s), math.cos(s)]])
    expected = j1 + R @ (straight.tip(f) - j1)
    assert np.allclose(bent.tip(f), expected, atol=1e-12)
    assert np.allclose(bent.tip(f), oracles.fingertip(f, (math.pi / 2, 0, 0)), atol=1e-9)


def test_out_of_range_angles_are_clamped_and_flagged():
    f = HAND.fingers[0]
    pose = forward_kinematics(f, (2.0, -0.3, 0.1))
    assert pose.clamped
    assert np.allclose(pose.q, [f.upper_limits[0], 0.0, 0.1])
    assert not forward_kinematics(f, (0.1, 0.2, 0.3)).clamped


@pytest.mark.parametrize("fi", range(4))
@given(data=st.data())
def test_guides_match_transform_oracle(fi, data):
    f = HAND.fingers[fi]
    q = data.draw(joint_angles(f))
    pose = forward_kinematics(f, q)
    frames = oracles.finger_frames(f, q)
    for side in ("flexor", "extensor"):
        got = pose.guide_positions(f, side)
        want = []
        for k, ph in enumerate(f.phalanges):
            want += [oracles.local_to_world(frames, k, g) for g in ph.guides(side)]
            if ph.is_terminal:
                want.append(oracles.local_to_world(frames, k, ph.anchor(side)))
        assert np.allclose(got, want, atol=1e-9, rtol=0)


def test_collinear_route_length():
    f = HAND.fingers[1]
    pts = ((0, 0.0, -12.0), (1, 10.0, -12.0), (2, 20.0, -12.0), (3, 30.0, -12.0))
    route = TendonRoute(1, "flexor", 1, pts, 0.0)
    assert tendon_path_length(route, forward_kinematics(f, (0, 0, 0))) == pytest.approx(140.0, abs=1e-12)


@given(q=st.tuples(*[st.floats(0.0, math.radians(45)) for _ in range(3)]))
def test_path_length_matches_polyline_oracle(q):
    for r in HAND.routes:
        f = HAND.fingers[r.finger_id]
        got = tendon_path_length(r, forward_kinematics(f, q))
        assert got == pytest.approx(oracles.path_length(r, f, q), abs=1e-9)


def test_thirty_degree_pose_matches_oracle():
    f = replace(HAND.fingers[2], joint_limits=WIDE)
    q = [math.radians(30)] * 3
    for side in ("flexor", "extensor"):
        r = HAND.route_for(2, side)
        assert tendon_path_length(r, forward_kinematics(f, q)) == pytest.approx(
            oracles.path_length(r, f, q), abs=1e-9
        )


def _moved(finger, route, phi, t):
    """Finger and route rigidly moved by rotation ``phi`` then translation ``t``."""
    R = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    base = tuple(R @ np.asarray(finger.base) + t)
    f2 = replace(finger, base=base, angle=finger.angle + phi)
    pts = []
    for b, x, y in route.points:
        if b < 0:
            x, y = R @ np.array([x, y]) + t
        pts.append((b, float(x), float(y)))
    return f2, replace(route, points=tuple(pts))


@given(
    phi=st.floats(-math.pi, math.pi),
    tx=st.floats(-500, 500),
    ty=st.floats(-500, 500),
    q=st.tuples(*[st.floats(0.0, math.radians(45)) for _ in range(3)]),
)
def test_isometry_invariance(phi, tx, ty, q):
    for r in (HAND.routes[1], HAND.routes[4]):
        f = HAND.fingers[r.finger_id]
        f2, r2 = _moved(f, r, phi, np.array([tx, ty]))
        L1 = tendon_path_length(r, pose_unclamped(f, q))
        L2 = tendon_path_length(r2, pose_unclamped(f2, q))
        assert L2 == pytest.approx(L1, abs=1e-9)
        assert np.allclose(moment_arms(r2, f2, q), moment_arms(r, f, q), atol=1e-9)


def test_default_flexor_arms_positive_extensor_negative():
    for r in HAND.routes:
        arms = moment_arms(r, HAND.fingers[r.finger_id], (0, 0, 0))
        if r.side == "flexor":
            assert np.all(arms > 0)
        else:
            assert np.all(arms < 0)
        fd = oracles.fd_moment_arms(r, HAND.fingers[r.finger_id], (0, 0, 0))
        assert np.all(np.sign(arms) == np.sign(fd))


def test_guide_on_joint_axis_has_zero_arm():
    f = HAND.fingers[1]
    # the guide at (0, 0) of phalanx 1 sits on the first joint's axle
    pts = ((0, 20.0, -12.0), (1, 0.0, 0.0), (1, 20.0, -12.0), (2, 10.0, -12.0), (3, 30.0, -12.0))
    route = TendonRoute(1, "flexor", 1, pts, 0.0)
    for q in [(0, 0, 0), (0.3, 0.2, 0.1), (0.7, 0.0, 0.5)]:
        assert moment_arms(route, f, q)[0] == pytest.approx(0.0, abs=1e-12)


def test_virtual_work_against_finite_differences():
    rng = np.random.default_rng(7)
    for r in HAND.routes:
        f = HAND.fingers[r.finger_id]
        for _ in range(100):
            q = rng.uniform(0.0, f.upper_limits)
            a = moment_arms(r, f, q)
            fd = np.array(oracles.fd_moment_arms(r, f, q))
            assert np.all(np.abs(a - fd) <= 1e-6 * np.abs(fd))


@pytest.mark.parametrize("j", range(3))
def test_excursion_is_monotone(j):
    # with a positive (flexing) arm r = -dL/dq the flexor shortens as the
    # finger closes, which is why winding the agonist spool closes it
    hand = build_default_hand(guide_friction_mu=0.0)
    for fi, f in enumerate(hand.fingers):
        qs = np.linspace(0.0, f.upper_limits[j], 40)
        for side, sign in (("flexor", -1.0), ("extensor", 1.0)):
            r = hand.route_for(fi, side)
            L = []
            for v in qs:
                q = np.zeros(3)
                q[j] = v
                L.append(tendon_path_length(r, forward_kinematics(f, q)))
            assert np.all(sign * np.diff(L) > 0)


# ------------------------------------------------------------ capstan


def _turn_angles(points):
    out = []
    for p0, p1, p2 in zip(points, points[1:], points[2:]):
        a = math.atan2(p1[1] - p0[1], p1[0] - p0[0])
        b = math.atan2(p2[1] - p1[1], p2[0] - p1[0])
        d = (b - a + math.pi) % (2 * math.pi) - math.pi
        out.append(abs(d))
    return out


def test_wrap_angles_match_turning_script():
    f = HAND.fingers[1]
    q = (0.3, 0.5, 0.2)
    for side in ("flexor", "extensor"):
        r = HAND.route_for(1, side)
        g = route_geometry(r, forward_kinematics(f, q))
        assert np.allclose(g.wraps, _turn_angles(oracles.route_world(r, f, q)), atol=1e-12)


def test_distal_tension_follows_capstan():
    f = HAND.fingers[1]
    r = HAND.route_for(1, "flexor")
    q = (0.2, 0.4, 0.6)
    g = route_geometry(r, forward_kinematics(f, q))
    B = sum(_turn_angles(oracles.route_world(r, f, q)))
    prof = tension_profile(g.wraps, 4.0, WINDING, 0.15)
    assert prof[-1] == pytest.approx(4.0 * math.exp(-0.15 * B), rel=1e-12)
    prof = tension_profile(g.wraps, 4.0, PAYING_OUT, 0.15)
    assert prof[-1] == pytest.approx(4.0 * math.exp(0.15 * B), rel=1e-12)


def test_frictionless_and_zero_tension_profiles():
    wraps = [0.1, 0.4, 0.2]
    for d in (WINDING, PAYING_OUT, STUCK):
        assert np.all(tension_profile(wraps, 3.0, d, 0.0) == 3.0)
        assert np.all(tension_profile(wraps, 0.0, d, 0.15) == 0.0)


@given(
    wraps=st.lists(st.floats(0.0, 1.5), min_size=1, max_size=12),
    T=st.floats(0.0, 10.0),
    mu=st.floats(0.0, 0.5),
    prev=st.floats(-5.0, 20.0),
)
def test_friction_dissipates(wraps, T, mu, prev):
    win = tension_profile(wraps, T, WINDING, mu)
    out = tension_profile(wraps, T, PAYING_OUT, mu)
    held = tension_profile(wraps, T, STUCK, mu, [prev] * (len(wraps) + 1))
    assert np.all(win >= 0) and np.all(out >= 0) and np.all(held >= 0)
    assert np.all(win <= T + 1e-12) and np.all(out >= T - 1e-12)
    assert np.all(held >= win - 1e-12) and np.all(held <= out + 1e-12)
    assert np.all(np.diff(win) <= 1e-12) and np.all(np.diff(out) >= -1e-12)
