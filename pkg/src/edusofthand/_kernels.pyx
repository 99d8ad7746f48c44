# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the geometry kernels in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, atan2, fabs, hypot

cnp.import_array()


def chain_frames(base_rot, base_pos, lengths, q):
    cdef double[:, :] R0 = np.ascontiguousarray(base_rot, dtype=np.float64)
    cdef double[:] L = np.ascontiguousarray(lengths, dtype=np.float64)
    cdef double[:] qq = np.ascontiguousarray(q, dtype=np.float64)
    rots_np = np.empty((4, 2, 2))
    origins_np = np.empty((4, 2))
    cdef double[:, :, :] rots = rots_np
    cdef double[:, :] origins = origins_np
    cdef double ox = base_pos[0], oy = base_pos[1]
    cdef double angle = 0.0, c, s
    cdef int k
    rots[0, 0, 0] = R0[0, 0]; rots[0, 0, 1] = R0[0, 1]
    rots[0, 1, 0] = R0[1, 0]; rots[0, 1, 1] = R0[1, 1]
    origins[0, 0] = ox; origins[0, 1] = oy
    for k in range(1, 4):
        ox = ox + rots[k - 1, 0, 0] * L[k - 1]
        oy = oy + rots[k - 1, 1, 0] * L[k - 1]
        angle -= qq[k - 1]
        c = cos(angle); s = sin(angle)
        rots[k, 0, 0] = R0[0, 0] * c + R0[0, 1] * s
        rots[k, 0, 1] = -R0[0, 0] * s + R0[0, 1] * c
        rots[k, 1, 0] = R0[1, 0] * c + R0[1, 1] * s
        rots[k, 1, 1] = -R0[1, 0] * s + R0[1, 1] * c
        origins[k, 0] = ox; origins[k, 1] = oy
    return rots_np, origins_np


def transform_points(rots_in, origins_in, local_in, body_in):
    cdef double[:, :, :] rots = np.ascontiguousarray(rots_in, dtype=np.float64)
    cdef double[:, :] origins = np.ascontiguousarray(origins_in, dtype=np.float64)
    cdef double[:, :] local = np.ascontiguousarray(local_in, dtype=np.float64)
    cdef long[:] body = np.ascontiguousarray(body_in, dtype=np.int64)
    cdef Py_ssize_t n = local.shape[0], i
    cdef long b
    out_np = np.empty((n, 2))
    cdef double[:, :] out = out_np
    for i in range(n):
        b = body[i]
        if b < 0:
            out[i, 0] = local[i, 0]
            out[i, 1] = local[i, 1]
        else:
            out[i, 0] = origins[b, 0] + rots[b, 0, 0] * local[i, 0] + rots[b, 0, 1] * local[i, 1]
            out[i, 1] = origins[b, 1] + rots[b, 1, 0] * local[i, 0] + rots[b, 1, 1] * local[i, 1]
    return out_np


def route_geometry(points_in, body_in, joints_in, double sigma):
    cdef double[:, :] points = np.ascontiguousarray(points_in, dtype=np.float64)
    cdef long[:] body = np.ascontiguousarray(body_in, dtype=np.int64)
    cdef double[:, :] joints = np.ascontiguousarray(joints_in, dtype=np.float64)
    cdef Py_ssize_t n = points.shape[0], s, i
    cdef int j
    seg_np = np.zeros(n - 1)
    dseg_np = np.zeros((n - 1, 3))
    wraps_np = np.zeros(max(n - 2, 0))
    dirs_np = np.zeros((n - 1, 2))
    cdef double[:] seg_len = seg_np
    cdef double[:, :] dseg = dseg_np
    cdef double[:] wraps = wraps_np
    cdef double[:, :] dirs = dirs_np
    cdef double total = 0.0, ax, ay, bx, by, dx, dy, ln, ux, uy, jx, jy, d, vx, vy
    cdef long ba, bb
    for s in range(n - 1):
        ax = points[s, 0]; ay = points[s, 1]
        bx = points[s + 1, 0]; by = points[s + 1, 1]
        dx = bx - ax; dy = by - ay
        ln = hypot(dx, dy)
        seg_len[s] = ln
        total += ln
        if ln <= 0.0:
            continue
        ux = dx / ln; uy = dy / ln
        dirs[s, 0] = ux; dirs[s, 1] = uy
        ba = body[s]; bb = body[s + 1]
        for j in range(1, 4):
            jx = joints[j - 1, 0]; jy = joints[j - 1, 1]
            d = 0.0
            if bb >= j:
                d += ux * (-(by - jy)) + uy * (bx - jx)
            if ba >= j:
                d -= ux * (-(ay - jy)) + uy * (ax - jx)
            dseg[s, j - 1] = sigma * d
    for i in range(n - 2):
        ux = dirs[i, 0]; uy = dirs[i, 1]
        vx = dirs[i + 1, 0]; vy = dirs[i + 1, 1]
        wraps[i] = fabs(atan2(ux * vy - uy * vx, ux * vx + uy * vy))
    return total, seg_np, dseg_np, wraps_np


cdef inline void _pseg(double px, double py, double ax, double ay, double bx, double by,
                       double* t, double* cx, double* cy, double* dist):
    cdef double dx = bx - ax, dy = by - ay
    cdef double den = dx * dx + dy * dy
    cdef double tt
    if den <= 0.0:
        tt = 0.0
    else:
        tt = ((px - ax) * dx + (py - ay) * dy) / den
        if tt < 0.0:
            tt = 0.0
        elif tt > 1.0:
            tt = 1.0
    t[0] = tt
    cx[0] = ax + tt * dx
    cy[0] = ay + tt * dy
    dist[0] = hypot(px - cx[0], py - cy[0])


def point_segment(double px, double py, double ax, double ay, double bx, double by):
    cdef double t, cx, cy, dist
    _pseg(px, py, ax, ay, bx, by, &t, &cx, &cy, &dist)
    return t, cx, cy, dist


def segment_segment(double ax, double ay, double bx, double by,
                    double cx, double cy, double dx, double dy):
    cdef double rx = bx - ax, ry = by - ay, sx = dx - cx, sy = dy - cy
    cdef double den = rx * sy - ry * sx
    cdef double qpx, qpy, t, u, x, y
    cdef double tt, qx, qy, dist
    cdef double best_d = -1.0, b0 = 0, b1 = 0, b2 = 0, b3 = 0
    if den != 0.0:
        qpx = cx - ax; qpy = cy - ay
        t = (qpx * sy - qpy * sx) / den
        u = (qpx * ry - qpy * rx) / den
        if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
            x = ax + t * rx; y = ay + t * ry
            return x, y, x, y, 0.0
    # candidate order matches the pure-Python kernel
    _pseg(ax, ay, cx, cy, dx, dy, &tt, &qx, &qy, &dist)
    best_d = dist; b0 = ax; b1 = ay; b2 = qx; b3 = qy
    _pseg(bx, by, cx, cy, dx, dy, &tt, &qx, &qy, &dist)
    if dist < best_d:
        best_d = dist; b0 = bx; b1 = by; b2 = qx; b3 = qy
    _pseg(cx, cy, ax, ay, bx, by, &tt, &qx, &qy, &dist)
    if dist < best_d:
        best_d = dist; b0 = qx; b1 = qy; b2 = cx; b3 = cy
    _pseg(dx, dy, ax, ay, bx, by, &tt, &qx, &qy, &dist)
    if dist < best_d:
        best_d = dist; b0 = qx; b1 = qy; b2 = dx; b3 = dy
    return b0, b1, b2, b3, best_d
