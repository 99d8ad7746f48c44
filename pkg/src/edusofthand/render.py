"""Deterministic SVG frames of a simulation state.

Drawing is in palm-frame millimetres with y up: the content sits in a
group flipped about the x axis, one SVG unit per mm. Flexor tendons are
blue and extensor tendons red.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .contact import Capsule, Circle, Polygon, place
from .kinematics import forward_kinematics, route_points_world
from .scene import Scene
from .solver import SimState


@dataclass(frozen=True)
class RenderStyle:
    flexor_color: str = "#1f5fbf"
    extensor_color: str = "#c62828"
    phalanx_fill: str = "#d9d9d9"
    palm_fill: str = "#bdbdbd"
    object_fill: str = "#f2c14e"
    contact_color: str = "#2e7d32"
    force_scale: float = 5.0  # mm of glyph per N
    contact_radius: float = 2.0  # mm
    tendon_width: float = 1.2  # mm
    margin: float = 20.0  # mm


def _f(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _pts(points) -> str:
    return " ".join(f"{_f(x)},{_f(y)}" for x, y in points)


def capsule_path(a, b, radius: float) -> str:
    """SVG path data of a stadium around segment ``a-b``."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    d = b - a
    n = float(np.hypot(*d))
    u = d / n if n > 0 else np.array([1.0, 0.0])
    side = np.array([-u[1], u[0]]) * radius
    r = _f(radius)
    p1, p2, p3, p4 = a + side, b + side, b - side, a - side
    return (
        f"M{_f(p1[0])},{_f(p1[1])} L{_f(p2[0])},{_f(p2[1])} "
        f"A{r},{r} 0 0 0 {_f(p3[0])},{_f(p3[1])} L{_f(p4[0])},{_f(p4[1])} "
        f"A{r},{r} 0 0 0 {_f(p1[0])},{_f(p1[1])} Z"
    )


def _shape_element(shape, pose, cls: str, fill: str) -> tuple[str, np.ndarray]:
    if isinstance(shape, Circle):
        c = np.asarray(pose[:2], float)
        el = (
            f'<circle class="{cls}" cx="{_f(c[0])}" cy="{_f(c[1])}" r="{_f(shape.radius)}" '
            f'fill="{fill}" stroke="#000" stroke-width="0.5"/>'
        )
        r = shape.radius
        return el, np.array([c - r, c + r])
    if isinstance(shape, Polygon):
        pts = np.array([place(v, pose) for v in shape.vertices])
        el = (
            f'<polygon class="{cls}" points="{_pts(pts)}" fill="{fill}" '
            f'stroke="#000" stroke-width="0.5"/>'
        )
        return el, np.array([pts.min(axis=0), pts.max(axis=0)])
    if isinstance(shape, Capsule):
        a, b = place(shape.p1, pose), place(shape.p2, pose)
        el = (
            f'<path class="{cls}" d="{capsule_path(a, b, shape.radius)}" fill="{fill}" '
            f'stroke="#000" stroke-width="0.5"/>'
        )
        lo = np.minimum(a, b) - shape.radius
        hi = np.maximum(a, b) + shape.radius
        return el, np.array([lo, hi])
    raise TypeError(f"cannot draw {type(shape).__name__}")


def render_frame(state: SimState, scene: Scene, style: RenderStyle | None = None) -> str:
    """One SVG document for ``state``; identical inputs give identical bytes."""
    style = style or RenderStyle()
    hand = scene.hand
    body: list[str] = []
    boxes: list[np.ndarray] = []

    a, b, r = hand.palm
    body.append(
        f'<path class="palm" d="{capsule_path(a, b, r)}" fill="{style.palm_fill}" '
        f'stroke="#000" stroke-width="0.5"/>'
    )
    boxes.append(np.array([np.minimum(a, b) - r, np.maximum(a, b) + r]))

    poses = [forward_kinematics(f, state.q[i]) for i, f in enumerate(hand.fingers)]
    half = [f.width / 2.0 for f in hand.fingers]
    for i, (f, pose) in enumerate(zip(hand.fingers, poses)):
        for k, ph in enumerate(f.phalanges):
            p, q = pose.phalanx_segment(k, ph.length)
            body.append(
                f'<path class="phalanx" id="{escape(f.name)}-{k}" '
                f'd="{capsule_path(p, q, half[i])}" fill="{style.phalanx_fill}" '
                f'fill-opacity="0.8" stroke="#000" stroke-width="0.5"/>'
            )
            boxes.append(np.array([np.minimum(p, q) - half[i], np.maximum(p, q) + half[i]]))

    for oi, spec in enumerate(scene.objects):
        el, box = _shape_element(spec.shape, state.obj_pose[oi], "object", style.object_fill)
        body.append(el)
        boxes.append(box)

    for route in hand.routes:
        pts = route_points_world(route, poses[route.finger_id])
        color = style.flexor_color if route.side == "flexor" else style.extensor_color
        body.append(
            f'<polyline class="tendon {route.side}" points="{_pts(pts)}" fill="none" '
            f'stroke="{color}" stroke-width="{_f(style.tendon_width)}"/>'
        )
        boxes.append(np.array([pts.min(axis=0), pts.max(axis=0)]))

    for c in state.contacts:
        p = np.asarray(c.position, float)
        # force the hand exerts on the object, scaled by magnitude
        tip = p - np.asarray(c.force_on_finger, float) * style.force_scale
        body.append(
            f'<g class="contact"><circle cx="{_f(p[0])}" cy="{_f(p[1])}" '
            f'r="{_f(style.contact_radius)}" fill="{style.contact_color}"/>'
            f'<line class="force" x1="{_f(p[0])}" y1="{_f(p[1])}" x2="{_f(tip[0])}" '
            f'y2="{_f(tip[1])}" stroke="{style.contact_color}" stroke-width="0.8"/></g>'
        )
        boxes.append(np.array([np.minimum(p, tip), np.maximum(p, tip)]))

    lo = np.min([bx[0] for bx in boxes], axis=0) - style.margin
    hi = np.max([bx[1] for bx in boxes], axis=0) + style.margin
    w, h = hi - lo
    # after the y flip the visible band is [-hi_y, -lo_y]
    view = f"{_f(lo[0])} {_f(-hi[1])} {_f(w)} {_f(h)}"
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{view}" '
        f'width="{_f(w)}mm" height="{_f(h)}mm">\n'
        f"<title>t = {state.t:.4f} s</title>\n"
        '<g transform="scale(1,-1)">\n'
    )
    return head + "\n".join(body) + "\n</g>\n</svg>\n"


def frame_indices(n_states: int, frames: int) -> list[int]:
    """``frames`` evenly spaced indices into a trace, always ending on the last."""
    if n_states <= 0 or frames <= 0:
        return []
    if frames == 1:
        return [n_states - 1]
    picks = {round(i * (n_states - 1) / (frames - 1)) for i in range(frames)}
    return sorted(picks)


def write_frames(
    trace: Sequence[SimState], scene: Scene, out_dir: Path, frames: int, prefix: str = "frame"
) -> list[Path]:
    """Render selected states of ``trace`` as ``prefix_0000.svg`` ... files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for j, i in enumerate(frame_indices(len(trace), frames)):
        path = out_dir / f"{prefix}_{j:04d}.svg"
        path.write_text(render_frame(trace[i], scene), encoding="utf-8")
        paths.append(path)
    return paths


__all__ = ["RenderStyle", "render_frame", "capsule_path", "frame_indices", "write_frames"]
