"""Pure-Python reference kernels.

Same signatures and results as the compiled ``_kernels`` extension; used when
the extension is not built or ``EDUSOFTHAND_PURE=1`` is set.
"""

import math

import numpy as np


def chain_frames(base_rot, base_pos, lengths, q):
    """Serial-chain frames for a 4-phalanx finger.

    Returns ``(rots, origins)`` with shapes (4, 2, 2) and (4, 2). Joint k
    (1-based) sits at ``origins[k]`` and rotates phalanx k by ``-q[k-1]``
    in the finger-local frame.
    """
    rots = np.empty((4, 2, 2))
    origins = np.empty((4, 2))
    R = np.asarray(base_rot, dtype=float)
    o = np.asarray(base_pos, dtype=float)
    rots[0] = R
    origins[0] = o
    angle = 0.0
    for k in range(1, 4):
        o = o + R[:, 0] * lengths[k - 1]
        angle -= q[k - 1]
        c, s = math.cos(angle), math.sin(angle)
        R = np.asarray(base_rot, dtype=float) @ np.array([[c, -s], [s, c]])
        rots[k] = R
        origins[k] = o
    return rots, origins


def transform_points(rots, origins, local, body):
    """World positions of local points; ``body[i] < 0`` means palm frame."""
    out = np.empty((len(local), 2))
    for i in range(len(local)):
        b = body[i]
        if b < 0:
            out[i, 0] = local[i, 0]
            out[i, 1] = local[i, 1]
        else:
            R = rots[b]
            out[i, 0] = origins[b, 0] + R[0, 0] * local[i, 0] + R[0, 1] * local[i, 1]
            out[i, 1] = origins[b, 1] + R[1, 0] * local[i, 0] + R[1, 1] * local[i, 1]
    return out


def route_geometry(points, body, joints, sigma):
    """Polyline length, per-segment lengths and their joint derivatives.

    ``joints`` holds the world positions of joints 1..3. A point on body b
    moves with joint j iff ``b >= j``; its velocity is
    ``sigma * perp(p - joint_j)`` per unit flexion.

    Returns ``(length, seg_len, dseg, wraps)`` where ``dseg[s, j]`` is
    d(seg_len[s])/dq_j and ``wraps[i]`` is the turn angle at interior
    point i+1.
    """
    n = len(points)
    seg_len = np.zeros(n - 1)
    dseg = np.zeros((n - 1, 3))
    wraps = np.zeros(max(n - 2, 0))
    dirs = np.zeros((n - 1, 2))
    total = 0.0
    for s in range(n - 1):
        ax, ay = points[s]
        bx, by = points[s + 1]
        dx, dy = bx - ax, by - ay
        ln = math.hypot(dx, dy)
        seg_len[s] = ln
        total += ln
        if ln <= 0.0:
            continue
        ux, uy = dx / ln, dy / ln
        dirs[s, 0] = ux
        dirs[s, 1] = uy
        ba, bb = body[s], body[s + 1]
        for j in range(1, 4):
            jx, jy = joints[j - 1]
            d = 0.0
            if bb >= j:
                # perp(p - c) = (-(py - cy), px - cx)
                d += ux * (-(by - jy)) + uy * (bx - jx)
            if ba >= j:
                d -= ux * (-(ay - jy)) + uy * (ax - jx)
            dseg[s, j - 1] = sigma * d
    for i in range(n - 2):
        ux, uy = dirs[i]
        vx, vy = dirs[i + 1]
        wraps[i] = abs(math.atan2(ux * vy - uy * vx, ux * vx + uy * vy))
    return total, seg_len, dseg, wraps


def point_segment(px, py, ax, ay, bx, by):
    """Closest point on segment AB to P: ``(t, cx, cy, dist)``."""
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den <= 0.0:
        t = 0.0
    else:
        t = ((px - ax) * dx + (py - ay) * dy) / den
        t = min(1.0, max(0.0, t))
    cx, cy = ax + t * dx, ay + t * dy
    return t, cx, cy, math.hypot(px - cx, py - cy)


def segment_segment(ax, ay, bx, by, cx, cy, dx, dy):
    """Closest points between segments AB and CD.

    Returns ``(p1x, p1y, p2x, p2y, dist)`` with p1 on AB and p2 on CD.
    """
    best = None
    # Intersecting segments have zero distance at the intersection point.
    r = (bx - ax, by - ay)
    s = (dx - cx, dy - cy)
    den = r[0] * s[1] - r[1] * s[0]
    if den != 0.0:
        qpx, qpy = cx - ax, cy - ay
        t = (qpx * s[1] - qpy * s[0]) / den
        u = (qpx * r[1] - qpy * r[0]) / den
        if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
            x, y = ax + t * r[0], ay + t * r[1]
            return x, y, x, y, 0.0
    for cand in (
        (ax, ay) + point_segment(ax, ay, cx, cy, dx, dy)[1:3],
        (bx, by) + point_segment(bx, by, cx, cy, dx, dy)[1:3],
        point_segment(cx, cy, ax, ay, bx, by)[1:3] + (cx, cy),
        point_segment(dx, dy, ax, ay, bx, by)[1:3] + (dx, dy),
    ):
        d = math.hypot(cand[0] - cand[2], cand[1] - cand[3])
        if best is None or d < best[4]:
            best = (cand[0], cand[1], cand[2], cand[3], d)
    return best
