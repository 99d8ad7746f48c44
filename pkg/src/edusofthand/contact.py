"""Planar contact between finger capsules, the palm and convex objects.

Every phalanx is a capsule of half-width ``finger.width / 2`` around its
midline. Objects are circles, convex CCW polygons or capsules given in
their body frame and placed by a pose ``(x, y, theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels

PALM = -1
MERGE_DISTANCE = 1.0  # mm; manifold points closer than this are one contact


@dataclass(frozen=True)
class Circle:
    radius: float
    kind = "circle"

    def extent(self) -> float:
        return self.radius


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[tuple[float, float], ...]
    kind = "polygon"

    def extent(self) -> float:
        return max(math.hypot(x, y) for x, y in self.vertices)


@dataclass(frozen=True)
class Capsule:
    p1: tuple[float, float]
    p2: tuple[float, float]
    radius: float
    kind = "capsule"

    def extent(self) -> float:
        return max(math.hypot(*self.p1), math.hypot(*self.p2)) + self.radius


def is_convex_ccw(vertices: Sequence[tuple[float, float]]) -> bool:
    n = len(vertices)
    if n < 3:
        return False
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        cx, cy = vertices[(i + 2) % n]
        if (bx - ax) * (cy - by) - (by - ay) * (cx - bx) <= 0:
            return False
    return True


def place(local, pose) -> np.ndarray:
    x, y, th = pose
    c, s = math.cos(th), math.sin(th)
    p = np.asarray(local, dtype=float)
    return np.array([x + c * p[0] - s * p[1], y + s * p[0] + c * p[1]])


@dataclass(frozen=True)
class ContactPoint:
    position: np.ndarray
    normal: np.ndarray
    depth: float
    mu: float
    finger: int
    phalanx: int
    obj: int
    normal_force: float = 0.0
    tangent_force: float = 0.0
    feature: int = 0  # which vertex/endpoint pair produced the point

    @property
    def source(self) -> str:
        return "palm" if self.finger == PALM else f"finger{self.finger}.phalanx{self.phalanx}"

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.finger, self.phalanx, self.obj, self.feature)

    @property
    def tangent(self) -> np.ndarray:
        return np.array([-self.normal[1], self.normal[0]])

    @property
    def force_on_finger(self) -> np.ndarray:
        return self.normal_force * self.normal + self.tangent_force * self.tangent


@dataclass(frozen=True)
class ContactParams:
    k_n: float = 10.0  # N/mm
    c_n: float = 0.01  # N*s/mm, compression only
    k_t: float = 5.0  # N/mm stick spring
    c_t: float = 0.01  # N*s/mm


def _point_in_convex(p, verts: np.ndarray) -> bool:
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) < 0:
            return False
    return True


def capsule_vs_shape(a, b, radius: float, shape, pose):
    """Deepest contact between capsule ``a-b`` (half-width ``radius``) and a shape.

    Returns ``(position, normal, depth)`` with the normal pointing from the
    object toward the capsule, or ``None`` when they do not overlap.
    """
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if isinstance(shape, Circle):
        c = place((0.0, 0.0), pose)
        _, px, py, d = kernels.point_segment(c[0], c[1], ax, ay, bx, by)
        depth = radius + shape.radius - d
        if depth <= 0.0:
            return None
        if d > 0.0:
            n = np.array([px - c[0], py - c[1]]) / d
        else:
            n = _segment_normal(ax, ay, bx, by, c)
        pos = c + n * (shape.radius - depth / 2.0)
        return pos, n, depth
    if isinstance(shape, Capsule):
        p1, p2 = place(shape.p1, pose), place(shape.p2, pose)
        fx, fy, ox, oy, d = kernels.segment_segment(ax, ay, bx, by, p1[0], p1[1], p2[0], p2[1])
        depth = radius + shape.radius - d
        if depth <= 0.0:
            return None
        if d > 0.0:
            n = np.array([fx - ox, fy - oy]) / d
        else:
            mid = np.array([(ax + bx) / 2.0, (ay + by) / 2.0])
            n = _segment_normal(p1[0], p1[1], p2[0], p2[1], mid, toward=True)
        pos = np.array([ox, oy]) + n * (shape.radius - depth / 2.0)
        return pos, n, depth
    verts = np.array([place(v, pose) for v in shape.vertices])
    return _capsule_vs_polygon(ax, ay, bx, by, radius, verts)


def capsule_contacts(a, b, radius: float, shape, pose) -> list[tuple]:
    """Contact manifold between capsule ``a-b`` and a shape.

    Like ``capsule_vs_shape`` but a flat or parallel overlap yields one
    point per penetrating vertex/endpoint, so resting faces do not rock
    between corners. Items are ``(position, normal, depth, feature)``.
    """
    if isinstance(shape, Circle):
        hit = capsule_vs_shape(a, b, radius, shape, pose)
        return [] if hit is None else [(*hit, 0)]
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if isinstance(shape, Capsule):
        p1, p2 = place(shape.p1, pose), place(shape.p2, pose)
        reach = radius + shape.radius
        found = []
        for fid, (px, py) in enumerate((p1, p2)):
            _, cx, cy, d = kernels.point_segment(px, py, ax, ay, bx, by)
            if 0.0 < d < reach:
                n = np.array([cx - px, cy - py]) / d
                found.append((np.array([px, py]) + n * (shape.radius - (reach - d) / 2.0), n, reach - d, fid))
        for fid, (ex, ey) in enumerate(((ax, ay), (bx, by))):
            _, cx, cy, d = kernels.point_segment(ex, ey, p1[0], p1[1], p2[0], p2[1])
            if 0.0 < d < reach:
                n = np.array([ex - cx, ey - cy]) / d
                found.append((np.array([cx, cy]) + n * (shape.radius - (reach - d) / 2.0), n, reach - d, 2 + fid))
        return _manifold(found, capsule_vs_shape(a, b, radius, shape, pose))
    verts = np.array([place(v, pose) for v in shape.vertices])
    if _point_in_convex((ax, ay), verts) or _point_in_convex((bx, by), verts):
        hit = _capsule_vs_polygon(ax, ay, bx, by, radius, verts)
        return [] if hit is None else [(*hit, 1000)]
    found = []
    nv = len(verts)
    for i in range(nv):
        vx, vy = verts[i]
        _, cx, cy, d = kernels.point_segment(vx, vy, ax, ay, bx, by)
        if 0.0 < d < radius:
            n = np.array([cx - vx, cy - vy]) / d
            found.append((verts[i] - n * (radius - d) / 2.0, n, radius - d, 10 + i))
    for k, (ex, ey) in enumerate(((ax, ay), (bx, by))):
        best = None
        for i in range(nv):
            c, e = verts[i], verts[(i + 1) % nv]
            r = kernels.point_segment(ex, ey, c[0], c[1], e[0], e[1])
            if best is None or r[3] < best[3]:
                best = r
        _, cx, cy, d = best
        if 0.0 < d < radius:
            n = np.array([ex - cx, ey - cy]) / d
            found.append((np.array([cx, cy]) - n * (radius - d) / 2.0, n, radius - d, 2 + k))
    return _manifold(found, _capsule_vs_polygon(ax, ay, bx, by, radius, verts))


def _deepest(a, b, radius: float, shape, pose) -> list[tuple]:
    hit = capsule_vs_shape(a, b, radius, shape, pose)
    return [] if hit is None else [(*hit, 0)]


def _manifold(found: list, deepest) -> list[tuple]:
    """Merge coincident candidates; fall back to the single deepest point."""
    if not found:
        return [] if deepest is None else [(*deepest, 1000)]
    found.sort(key=lambda h: (-h[2], h[3]))
    out: list[tuple] = []
    for h in found:
        if all(np.hypot(*(h[0] - o[0])) > MERGE_DISTANCE for o in out):
            out.append(h)
    return sorted(out, key=lambda h: h[3])


def _segment_normal(ax, ay, bx, by, p, toward: bool = False) -> np.ndarray:
    """Unit normal of segment AB; points away from ``p`` (or toward it)."""
    dx, dy = bx - ax, by - ay
    ln = math.hypot(dx, dy) or 1.0
    n = np.array([-dy / ln, dx / ln])
    side = (p[0] - ax) * n[0] + (p[1] - ay) * n[1]
    if (side > 0) != toward:
        n = -n
    return n


def _capsule_vs_polygon(ax, ay, bx, by, radius, verts: np.ndarray):
    nv = len(verts)
    inside = _point_in_convex((ax, ay), verts) or _point_in_convex((bx, by), verts)
    best = None
    for i in range(nv):
        c, d = verts[i], verts[(i + 1) % nv]
        r = kernels.segment_segment(ax, ay, bx, by, c[0], c[1], d[0], d[1])
        if best is None or r[4] < best[4]:
            best = r
    if best[4] > 0.0 and not inside:
        depth = radius - best[4]
        if depth <= 0.0:
            return None
        fx, fy, ox, oy, dist = best
        n = np.array([fx - ox, fy - oy]) / dist
        pos = np.array([ox, oy]) + n * (-depth / 2.0)
        return pos, n, depth
    # Segment core overlaps the polygon: separating-axis penetration.
    min_overlap, n_best, deep = math.inf, None, None
    for i in range(nv):
        c, d = verts[i], verts[(i + 1) % nv]
        e = d - c
        n = np.array([e[1], -e[0]]) / math.hypot(e[0], e[1])
        h = float(n @ c)
        pa, pb = n[0] * ax + n[1] * ay, n[0] * bx + n[1] * by
        m = min(pa, pb)
        if h - m < min_overlap:
            min_overlap = h - m
            n_best = n
            if pa < pb:
                deep = np.array([ax, ay])
            elif pb < pa:
                deep = np.array([bx, by])
            else:
                deep = np.array([(ax + bx) / 2.0, (ay + by) / 2.0])
    depth = min_overlap + radius
    surface = deep - n_best * radius
    return surface + n_best * depth / 2.0, n_best, depth


def detect_contacts(poses, fingers, objects, palm=None, manifold: bool = False) -> list[ContactPoint]:
    """Geometric contacts (forces zeroed) between hand and objects.

    ``objects`` is a sequence of ``(shape, pose, mu_override)``; the
    override replaces the phalanx friction when larger. By default each
    (segment, object) pair yields at most one contact, at its deepest
    point. With ``manifold`` a flat or parallel overlap yields one contact
    per penetrating vertex instead, which keeps resting faces from rocking.
    """
    query = capsule_contacts if manifold else _deepest
    contacts: list[ContactPoint] = []
    for oi, (shape, pose, mu_obj) in enumerate(objects):
        centre = np.array(pose[:2], dtype=float)
        reach = shape.extent()
        if palm is not None:
            a, b, r = palm
            for pos, n, depth, fid in query(a, b, r, shape, pose):
                contacts.append(
                    ContactPoint(pos, n, depth, max(0.5, mu_obj or 0.0), PALM, 0, oi, feature=fid)
                )
        for fi, (finger, fpose) in enumerate(zip(fingers, poses)):
            half = finger.width / 2.0
            for k, ph in enumerate(finger.phalanges):
                a, b = fpose.phalanx_segment(k, ph.length)
                # cheap bounding-circle reject
                mid = (a + b) / 2.0
                if np.hypot(*(mid - centre)) > reach + half + ph.length / 2.0:
                    continue
                mu = max(ph.pad_friction, mu_obj or 0.0)
                for pos, n, depth, fid in query(a, b, half, shape, pose):
                    contacts.append(ContactPoint(pos, n, depth, mu, fi, k, oi, feature=fid))
    return contacts


def contact_forces(
    contacts: Sequence[ContactPoint],
    rel_velocities,
    params: ContactParams,
    dt: float = 0.0,
    stick: dict | None = None,
) -> tuple[list[ContactPoint], dict]:
    """Penalty normal force plus regularized Coulomb friction.

    ``rel_velocities[i]`` is the velocity of the finger-side point relative
    to the object-side point (mm/s). ``stick`` maps contact keys to the
    accumulated tangential stick displacement (mm); the updated map is
    returned and holds only the current contacts.
    """
    out = []
    new_stick = {}
    for c, v in zip(contacts, rel_velocities):
        v = np.asarray(v, dtype=float)
        if c.depth <= 0.0:
            out.append(replace(c, normal_force=0.0, tangent_force=0.0))
            continue
        vn = float(v @ c.normal)
        fn = params.k_n * c.depth + params.c_n * max(0.0, -vn)
        fn = max(0.0, fn)
        vt = float(v @ c.tangent)
        s = 0.0
        if stick is not None:
            s = stick.get(c.key, 0.0) + vt * dt
        ft = -params.k_t * s - params.c_t * vt
        cap = c.mu * fn
        if abs(ft) > cap:
            ft = math.copysign(cap, ft)
            if params.k_t > 0:
                s = -(ft + params.c_t * vt) / params.k_t
        new_stick[c.key] = s
        out.append(replace(c, normal_force=fn, tangent_force=ft))
    return out, new_stick
