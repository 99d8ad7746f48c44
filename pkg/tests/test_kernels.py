import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from edusofthand import _kernels_py as py
from edusofthand.kinematics import forward_kinematics
from edusofthand.model import build_default_hand

cy = pytest.importorskip("edusofthand._kernels")

HAND = build_default_hand()
coord = st.floats(-200, 200, allow_nan=False)
angle = st.floats(-1.0, 1.5)


def _close(a, b, tol=1e-12):
    if isinstance(a, tuple):
        assert len(a) == len(b)
        for x, y in zip(a, b):
            _close(x, y, tol)
    else:
        assert np.allclose(a, b, atol=tol, rtol=0)


@given(fi=st.integers(0, 3), q=st.tuples(angle, angle, angle))
def test_chain_frames_agree(fi, q):
    f = HAND.fingers[fi]
    args = (f.base_rotation, np.asarray(f.base, float), np.asarray(f.lengths, float), np.asarray(q))
    _close(cy.chain_frames(*args), py.chain_frames(*args))
    rots, origins = py.chain_frames(*args)
    frames = oracles.finger_frames(f, q)
    for k in range(4):
        assert np.allclose(origins[k], [frames[k][0][2], frames[k][1][2]], atol=1e-9)


@given(ri=st.integers(0, 7), q=st.tuples(angle, angle, angle))
def test_route_kernels_agree(ri, q):
    r = HAND.routes[ri]
    f = HAND.fingers[r.finger_id]
    rots, origins = py.chain_frames(f.base_rotation, np.asarray(f.base, float), np.asarray(f.lengths, float), np.asarray(q))
    pts_py = py.transform_points(rots, origins, r.local, r.body)
    pts_cy = cy.transform_points(rots, origins, r.local, r.body)
    _close(pts_cy, pts_py)
    sigma = forward_kinematics(f, q).sigma
    a = cy.route_geometry(pts_py, r.body, origins[1:], sigma)
    b = py.route_geometry(pts_py, r.body, origins[1:], sigma)
    _close(a, b, 1e-10)
    assert b[0] == pytest.approx(oracles.polyline_length([tuple(p) for p in pts_py]), abs=1e-9)


@given(p=st.tuples(*[coord] * 6))
def test_point_segment_agrees(p):
    a = cy.point_segment(*p)
    b = py.point_segment(*p)
    _close(a, b, 1e-9)
    d, _ = oracles.point_segment_distance(p[:2], p[2:4], p[4:6])
    assert b[3] == pytest.approx(d, abs=1e-9)


@given(p=st.tuples(*[coord] * 8))
def test_segment_segment_agrees(p):
    a = cy.segment_segment(*p)
    b = py.segment_segment(*p)
    assert a[4] == pytest.approx(b[4], abs=1e-9)
    # distance equals the brute-force minimum over endpoint projections or zero
    A, B, C, D = p[0:2], p[2:4], p[4:6], p[6:8]
    brute = min(
        oracles.point_segment_distance(A, C, D)[0],
        oracles.point_segment_distance(B, C, D)[0],
        oracles.point_segment_distance(C, A, B)[0],
        oracles.point_segment_distance(D, A, B)[0],
    )
    assert b[4] <= brute + 1e-9
    assert math.hypot(b[0] - b[2], b[1] - b[3]) == pytest.approx(b[4], abs=1e-9)


def test_pure_backend_gives_the_same_trajectory():
    code = (
        "import numpy as np, sys\n"
        "from edusofthand import kernels\n"
        "from edusofthand.experiments import configure_hand, _inits, _policy, _full_speed\n"
        "from edusofthand.model import FINGER_NAMES\n"
        "from edusofthand.scene import Scene, SimConfig\n"
        "from edusofthand.solver import simulate\n"
        "h = configure_hand()\n"
        "sc = Scene(hand=h, init=_inits(h, FINGER_NAMES), control=_policy('close', _full_speed(h)),"
        " sim=SimConfig(t_end=0.2))\n"
        "s = simulate(sc)[-1]\n"
        "sys.stdout.write(kernels.BACKEND + ' ' + ' '.join(repr(float(x)) for x in s.q.ravel()))\n"
    )
    out = {}
    for pure in ("0", "1"):
        env = dict(os.environ, EDUSOFTHAND_PURE=pure)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, *vals = res.stdout.split()
        out[name] = np.array([float(v) for v in vals])
    assert set(out) == {"cython", "python"}
    assert np.allclose(out["cython"], out["python"], atol=1e-9, rtol=0)
