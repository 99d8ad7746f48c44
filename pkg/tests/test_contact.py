import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from edusofthand.contact import (
    Capsule,
    Circle,
    ContactParams,
    ContactPoint,
    Polygon,
    capsule_contacts,
    capsule_vs_shape,
    contact_forces,
    detect_contacts,
    is_convex_ccw,
)
from edusofthand.kinematics import forward_kinematics
from edusofthand.model import build_default_hand

HAND = build_default_hand()
SQUARE = Polygon(((-50.0, -50.0), (50.0, -50.0), (50.0, 50.0), (-50.0, 50.0)))


def straight_poses(hand=HAND):
    return [forward_kinematics(f, (0.0, 0.0, 0.0)) for f in hand.fingers]


def test_far_object_gives_nothing():
    objs = [(Circle(30.0), (500.0, 500.0, 0.0), None)]
    assert detect_contacts(straight_poses(), HAND.fingers, objs) == []


def test_tangent_circle_is_not_a_contact():
    # capsule half-width 15 plus radius 30: centre exactly 45 mm off the midline
    assert capsule_vs_shape((0.0, 0.0), (40.0, 0.0), 15.0, Circle(30.0), (20.0, 45.0, 0.0)) is None
    hit = capsule_vs_shape((0.0, 0.0), (40.0, 0.0), 15.0, Circle(30.0), (20.0, 44.0, 0.0))
    assert hit[2] == pytest.approx(1.0, abs=1e-12)


def test_two_mm_overlap_matches_closed_form():
    poses = straight_poses()
    f = HAND.fingers[1]
    a, b = poses[1].phalanx_segment(2, f.phalanges[2].length)
    mid = (a + b) / 2.0
    axis = (b - a) / np.hypot(*(b - a))
    normal = np.array([-axis[1], axis[0]])
    centre = mid + normal * (30.0 + f.width / 2.0 - 2.0)
    objs = [(Circle(30.0), (centre[0], centre[1], 0.0), None)]
    found = [c for c in detect_contacts(poses, HAND.fingers, objs) if c.finger == 1 and c.phalanx == 2]
    assert len(found) == 1
    c = found[0]
    depth, n = oracles.circle_capsule_depth(tuple(centre), 30.0, tuple(a), tuple(b), f.width / 2.0)
    assert c.depth == pytest.approx(2.0, abs=1e-9)
    assert c.depth == pytest.approx(depth, abs=1e-9)
    assert np.allclose(c.normal, n, atol=1e-9)
    assert c.normal_force == 0.0 and c.tangent_force == 0.0


@given(
    cx=st.floats(-80, 120), cy=st.floats(-80, 80), r=st.floats(1, 60),
    bx=st.floats(-60, 60), by=st.floats(-60, 60),
)
def test_circle_query_matches_oracle(cx, cy, r, bx, by):
    a, b = (0.0, 0.0), (bx + 0.5, by)
    hit = capsule_vs_shape(a, b, 15.0, Circle(r), (cx, cy, 0.0))
    depth, n = oracles.circle_capsule_depth((cx, cy), r, a, b, 15.0)
    if depth <= 0:
        assert hit is None
    else:
        assert hit is not None
        assert hit[2] == pytest.approx(depth, abs=1e-9)
        if depth < r + 15.0 - 1e-6:
            assert np.allclose(hit[1], n, atol=1e-9)


def test_flat_face_gives_one_contact_per_endpoint():
    hits = capsule_contacts((-20.0, 60.0), (20.0, 60.0), 15.0, SQUARE, (0.0, 0.0, 0.0))
    assert [h[3] for h in hits] == [2, 3]
    for pos, n, depth, _ in hits:
        assert depth == pytest.approx(5.0)
        assert np.allclose(n, (0.0, 1.0))
    deepest = capsule_vs_shape((-20.0, 60.0), (20.0, 60.0), 15.0, SQUARE, (0.0, 0.0, 0.0))
    assert deepest[2] == pytest.approx(5.0)


def test_close_candidates_merge():
    hits = capsule_contacts((0.0, 60.0), (0.5, 60.0), 15.0, SQUARE, (0.0, 0.0, 0.0))
    assert len(hits) == 1


def test_default_detection_is_one_per_pair():
    poses = straight_poses()
    f = HAND.fingers[1]
    a, b = poses[1].phalanx_segment(1, f.phalanges[1].length)
    axis = (b - a) / np.hypot(*(b - a))
    normal = np.array([-axis[1], axis[0]])
    centre = (a + b) / 2.0 + normal * (50.0 + f.width / 2.0 - 3.0)
    th = math.atan2(axis[1], axis[0])
    objs = [(SQUARE, (centre[0], centre[1], th), None)]
    single = detect_contacts(poses, HAND.fingers, objs)
    pairs = [(c.finger, c.phalanx, c.obj) for c in single]
    assert len(pairs) == len(set(pairs)) > 0
    many = detect_contacts(poses, HAND.fingers, objs, manifold=True)
    assert len(many) >= len(single)


def test_convexity_check():
    assert is_convex_ccw(SQUARE.vertices)
    assert not is_convex_ccw(SQUARE.vertices[::-1])
    assert not is_convex_ccw(((0, 0), (10, 0), (2, 2), (0, 10)))


def _contact(depth, mu=0.5):
    return ContactPoint(np.zeros(2), np.array([0.0, 1.0]), depth, mu, 0, 1, 0)


def test_force_examples():
    p = ContactParams(k_n=10.0, c_n=0.01, k_t=5.0, c_t=0.01)
    (c,), _ = contact_forces([_contact(0.0)], [(3.0, -2.0)], p)
    assert c.normal_force == 0.0 and c.tangent_force == 0.0
    (c,), _ = contact_forces([_contact(1.0)], [(0.0, 0.0)], p)
    assert c.normal_force == 10.0 and c.tangent_force == 0.0
    # sliding: the stick spring would exceed the cone, so friction saturates
    (c,), stick = contact_forces([_contact(1.0)], [(100.0, 0.0)], p, dt=0.01, stick={})
    assert abs(c.tangent_force) == pytest.approx(0.5 * c.normal_force, rel=0, abs=0)
    assert c.force_on_finger[0] < 0  # opposes the +x slide
    assert stick[c.key] == pytest.approx(-(c.tangent_force - 0.01 * 100.0) / 5.0)  # v_t = -100


def test_damping_acts_in_compression_only():
    p = ContactParams(k_n=10.0, c_n=1.0, k_t=0.0, c_t=0.0)
    (press,), _ = contact_forces([_contact(0.5)], [(0.0, -2.0)], p)
    (pull,), _ = contact_forces([_contact(0.5)], [(0.0, 20.0)], p)
    assert press.normal_force == pytest.approx(7.0)
    assert pull.normal_force == pytest.approx(5.0)


@given(
    depth=st.floats(0.0, 5.0),
    vx=st.floats(-500, 500), vy=st.floats(-500, 500),
    mu=st.floats(0.0, 1.5),
    s0=st.floats(-10, 10),
    dt=st.floats(0.0, 0.01),
)
def test_friction_cone_and_unilaterality(depth, vx, vy, mu, s0, dt):
    c = _contact(depth, mu)
    (out,), stick = contact_forces([c], [(vx, vy)], ContactParams(), dt, {c.key: s0})
    assert out.normal_force >= 0.0
    assert abs(out.tangent_force) <= mu * out.normal_force + 1e-12
    if depth > 0:
        assert set(stick) == {c.key}
    f = out.force_on_finger
    assert np.allclose(f, out.normal_force * c.normal + out.tangent_force * c.tangent)


def test_capsule_object_touches_capsule_phalanx():
    shape = Capsule((-30.0, 0.0), (30.0, 0.0), 10.0)
    hits = capsule_contacts((-20.0, 24.0), (20.0, 24.0), 15.0, shape, (0.0, 0.0, 0.0))
    assert hits and all(h[2] == pytest.approx(1.0) for h in hits)
    assert all(np.allclose(h[1], (0.0, 1.0)) for h in hits)
