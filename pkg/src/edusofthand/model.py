"""Mechanical description of the hand and its default construction.

Units: lengths in mm, angles in rad, torques in N*m (converted to N*mm
inside the solver), masses in kg.

Finger-local frame: x runs along the finger from the base phalanx origin,
y is lateral and the palm side is -y. Flexion rotates a phalanx toward -y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

FINGER_NAMES = ("thumb", "index", "middle", "pinkie")
SIDES = ("flexor", "extensor")

PHALANX_LENGTHS = (40.0, 35.0, 35.0, 35.0)
FINGER_WIDTH = 30.0
JOINT_LIMIT_MAX = math.radians(45.0)

CLUTCH_SLIP_TORQUE = 0.05  # N*m
MOTOR_MAX_TORQUE = 0.40  # N*m
SPOOL_RADIUS = 8.0

# Fitted on the single-finger closing time only, then frozen.
NO_LOAD_SPEED = 5.27057  # rad/s
JOINT_DAMPING = 0.02  # N*m*s/rad
GUIDE_FRICTION_MU = 0.15

Point = tuple[float, float]


@dataclass(frozen=True)
class Phalanx:
    length: float
    guides_flexor: tuple[Point, ...]
    guides_extensor: tuple[Point, ...]
    is_terminal: bool = False
    anchor_flexor: Point | None = None
    anchor_extensor: Point | None = None
    pad_friction: float = 0.5

    def guides(self, side: str) -> tuple[Point, ...]:
        return self.guides_flexor if side == "flexor" else self.guides_extensor

    def anchor(self, side: str) -> Point | None:
        return self.anchor_flexor if side == "flexor" else self.anchor_extensor


@dataclass(frozen=True)
class Finger:
    name: str
    phalanges: tuple[Phalanx, ...]
    joint_limits: tuple[tuple[float, float], ...]
    base: Point
    angle: float
    mirror: bool
    width: float = FINGER_WIDTH

    @cached_property
    def base_rotation(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        R = np.array([[c, -s], [s, c]])
        if self.mirror:
            R = R @ np.diag([1.0, -1.0])
        return R

    @property
    def flexion_sign(self) -> float:
        """World rotation sign of positive flexion (+1 = counter-clockwise)."""
        return 1.0 if self.mirror else -1.0

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([p.length for p in self.phalanges])

    @cached_property
    def upper_limits(self) -> np.ndarray:
        return np.array([hi for _, hi in self.joint_limits])

    @cached_property
    def lower_limits(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.joint_limits])


@dataclass(frozen=True)
class TendonRoute:
    """Ordered route from spool to fingertip anchor.

    ``points`` are ``(body, x, y)``: body -1 is the palm frame, 0..3 the
    phalanx frames. The first point is the spool exit, the last the anchor.
    """

    finger_id: int
    side: str
    spool_id: int
    points: tuple[tuple[int, float, float], ...]
    rest_length: float

    @cached_property
    def body(self) -> np.ndarray:
        return np.array([p[0] for p in self.points], dtype=np.int64)

    @cached_property
    def local(self) -> np.ndarray:
        return np.array([[p[1], p[2]] for p in self.points], dtype=float)


@dataclass(frozen=True)
class MotorSpec:
    max_torque: float = MOTOR_MAX_TORQUE
    no_load_speed: float = NO_LOAD_SPEED


@dataclass(frozen=True)
class ClutchSpec:
    slip_torque: float = CLUTCH_SLIP_TORQUE


@dataclass(frozen=True)
class SpoolSpec:
    radius: float
    clutch: int
    shaft: int
    position: Point


@dataclass(frozen=True)
class DriveSpec:
    motors: tuple[MotorSpec, ...]
    clutches: tuple[ClutchSpec, ...]
    spools: tuple[SpoolSpec, ...]

    def shaft_spools(self, shaft: int) -> list[int]:
        return [i for i, s in enumerate(self.spools) if s.shaft == shaft]


@dataclass(frozen=True)
class HandModel:
    fingers: tuple[Finger, ...]
    palm_guides: tuple[tuple[Point, ...], ...]
    drive: DriveSpec
    tendon_stiffness: float = 5.0  # N/mm
    guide_friction_mu: float = GUIDE_FRICTION_MU
    joint_damping: float = JOINT_DAMPING  # N*m*s/rad
    stop_stiffness: float = 10.0  # N*m/rad
    phalanx_mass: float = 0.01  # kg
    contact_stiffness: float = 10.0  # N/mm
    contact_damping: float = 0.01  # N*s/mm
    tangential_stiffness: float = 5.0  # N/mm
    palm: tuple[Point, Point, float] = ((-50.0, -8.0), (50.0, -8.0), 8.0)

    @property
    def joint_count(self) -> int:
        return sum(len(f.joint_limits) for f in self.fingers)

    @property
    def guide_count(self) -> int:
        n = sum(len(pg) for pg in self.palm_guides)
        for f in self.fingers:
            for p in f.phalanges:
                n += len(p.guides_flexor) + len(p.guides_extensor)
        return n

    @cached_property
    def routes(self) -> tuple[TendonRoute, ...]:
        return tuple(_build_routes(self))

    def route_for(self, finger_id: int, side: str) -> TendonRoute:
        return self.routes[finger_id + (0 if side == "flexor" else len(self.fingers))]

    def finger_index(self, name: str) -> int:
        for i, f in enumerate(self.fingers):
            if f.name == name:
                return i
        raise KeyError(name)


def route_id(finger_id: int, side: str, n_fingers: int = 4) -> int:
    return finger_id + (0 if side == "flexor" else n_fingers)


def _build_routes(model: HandModel) -> list[TendonRoute]:
    from .kinematics import route_points_world, forward_kinematics

    routes = []
    n = len(model.fingers)
    for side in SIDES:
        for fi, finger in enumerate(model.fingers):
            rid = route_id(fi, side, n)
            pts: list[tuple[int, float, float]] = []
            if rid < len(model.drive.spools):
                sx, sy = model.drive.spools[rid].position
                pts.append((-1, sx, sy))
            if rid < len(model.palm_guides):
                pts.extend((-1, x, y) for x, y in model.palm_guides[rid])
            for k, ph in enumerate(finger.phalanges):
                pts.extend((k, x, y) for x, y in ph.guides(side))
                anchor = ph.anchor(side)
                if ph.is_terminal and anchor is not None:
                    pts.append((k, anchor[0], anchor[1]))
            route = TendonRoute(fi, side, rid, tuple(pts), 0.0)
            rest = 0.0
            if len(pts) >= 2:
                pose = forward_kinematics(finger, np.zeros(len(finger.joint_limits)))
                world = route_points_world(route, pose)
                rest = float(np.sum(np.hypot(*np.diff(world, axis=0).T)))
            routes.append(replace(route, rest_length=rest))
    return routes


def _medial_guides(length: float, lateral: float, apex: float) -> tuple[Point, ...]:
    return ((6.0, lateral), (length / 2.0, apex), (length - 6.0, lateral))


def default_finger(name: str, base: Point, angle: float, mirror: bool) -> Finger:
    phalanges = []
    for k, length in enumerate(PHALANX_LENGTHS):
        if k < 3:
            # flexor triangle points to the palm side, extensor triangle inverted
            phalanges.append(
                Phalanx(
                    length,
                    _medial_guides(length, -12.0, -16.0),
                    _medial_guides(length, 12.0, 8.0),
                )
            )
        else:
            phalanges.append(
                Phalanx(
                    length,
                    ((6.0, -12.0),),
                    ((6.0, 12.0),),
                    is_terminal=True,
                    anchor_flexor=(30.0, -12.0),
                    anchor_extensor=(30.0, 12.0),
                    pad_friction=0.9,
                )
            )
    return Finger(
        name,
        tuple(phalanges),
        tuple((0.0, JOINT_LIMIT_MAX) for _ in range(3)),
        base,
        angle,
        mirror,
    )


def default_palm_guides(finger: Finger, side: str) -> tuple[Point, ...]:
    """Palm guides from the spool side toward the finger base."""
    lateral = -12.0 if side == "flexor" else 12.0
    R = finger.base_rotation
    out = []
    for x in (-60.0, -35.0, -10.0):
        p = np.asarray(finger.base) + R @ np.array([x, lateral])
        out.append((round(float(p[0]), 6), round(float(p[1]), 6)))
    return tuple(out)


def build_default_hand(**overrides) -> HandModel:
    """Default four-finger hand: thumb opposing three fingers across the palm.

    Keyword overrides replace top-level ``HandModel`` fields, e.g.
    ``build_default_hand(guide_friction_mu=0.0)``.
    """
    half_pi = math.pi / 2.0
    fingers = (
        default_finger("thumb", (-65.0, 0.0), half_pi, False),
        default_finger("index", (65.0, 0.0), half_pi, True),
        default_finger("middle", (65.0, 8.0), half_pi, True),
        default_finger("pinkie", (65.0, -8.0), half_pi, True),
    )
    palm_guides = tuple(
        default_palm_guides(f, side) for side in SIDES for f in fingers
    )
    spool_x = (-30.0, -10.0, 10.0, 30.0)
    spools = tuple(
        SpoolSpec(SPOOL_RADIUS, i, shaft, (spool_x[i % 4], -120.0 - 10.0 * shaft))
        for i, shaft in enumerate([0] * 4 + [1] * 4)
    )
    drive = DriveSpec(
        motors=(MotorSpec(), MotorSpec()),
        clutches=tuple(ClutchSpec() for _ in range(8)),
        spools=spools,
    )
    model = HandModel(fingers=fingers, palm_guides=palm_guides, drive=drive)
    return replace(model, **overrides) if overrides else model


def with_drive(model: HandModel, **changes) -> HandModel:
    """Copy of ``model`` with drive parameters changed uniformly.

    Accepts ``slip_torque``, ``spool_radius``, ``no_load_speed`` and
    ``motor_max_torque``.
    """
    drive = model.drive
    if "slip_torque" in changes:
        drive = replace(
            drive, clutches=tuple(ClutchSpec(changes["slip_torque"]) for _ in drive.clutches)
        )
    if "spool_radius" in changes:
        drive = replace(
            drive, spools=tuple(replace(s, radius=changes["spool_radius"]) for s in drive.spools)
        )
    motor_fields = {}
    if "no_load_speed" in changes:
        motor_fields["no_load_speed"] = changes["no_load_speed"]
    if "motor_max_torque" in changes:
        motor_fields["max_torque"] = changes["motor_max_torque"]
    if motor_fields:
        drive = replace(drive, motors=tuple(replace(m, **motor_fields) for m in drive.motors))
    return replace(model, drive=drive)


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, field_name: str, message: str) -> None:
        self.violations.append(Violation(field_name, message))

    def fields(self) -> set[str]:
        return {v.field for v in self.violations}


def validate(model: HandModel) -> ValidationReport:
    """Check every structural and kinematic invariant of ``model``.

    Violations are returned as data; this never raises for a malformed model.
    """
    rep = ValidationReport()
    if len(model.fingers) != 4:
        rep.add("fingers", f"finger count is {len(model.fingers)}, expected 4")
    if model.joint_count != 12:
        rep.add("fingers.joint_limits", f"joint count is {model.joint_count}, expected 12")
    if model.guide_count < 100:
        rep.add("guides", f"only {model.guide_count} guide points, expected at least 100")
    if len(model.palm_guides) != 2 * len(model.fingers):
        rep.add("palm_guides", "one palm guide list per tendon route required")
    for name in ("tendon_stiffness", "joint_damping", "stop_stiffness", "contact_stiffness"):
        if not getattr(model, name) > 0:
            rep.add(name, "must be positive")
    for name in ("guide_friction_mu", "phalanx_mass", "contact_damping", "tangential_stiffness"):
        if not getattr(model, name) >= 0:
            rep.add(name, "must be non-negative")

    for fi, finger in enumerate(model.fingers):
        tag = f"fingers[{fi}]"
        if len(finger.phalanges) != 4:
            rep.add(f"{tag}.phalanges", f"{len(finger.phalanges)} phalanges, expected 4")
        if len(finger.joint_limits) != 3:
            rep.add(f"{tag}.joint_limits", f"{len(finger.joint_limits)} joints, expected 3")
        for j, (lo, hi) in enumerate(finger.joint_limits):
            if lo != 0.0:
                rep.add(f"{tag}.joint_limits[{j}]", "extension stop must be at 0")
            if not hi > 0.0:
                rep.add(f"{tag}.joint_limits[{j}]", "flexion limit must be positive")
        for k, ph in enumerate(finger.phalanges):
            ptag = f"{tag}.phalanges[{k}]"
            if not ph.length > 0:
                rep.add(f"{ptag}.length", "length must be positive")
            if not ph.pad_friction >= 0:
                rep.add(f"{ptag}.pad_friction", "friction must be non-negative")
            for side in SIDES:
                for x, _ in ph.guides(side):
                    if not 0.0 <= x <= ph.length:
                        rep.add(f"{ptag}.guides_{side}", f"guide x={x} outside [0, {ph.length}]")
            last = k == len(finger.phalanges) - 1
            if ph.is_terminal != last:
                rep.add(f"{ptag}.is_terminal", "only the distal phalanx is terminal")
            if ph.is_terminal:
                for side in SIDES:
                    if len(ph.guides(side)) < 1:
                        rep.add(f"{ptag}.guides_{side}", "terminal phalanx needs a guide per side")
                    if ph.anchor(side) is None:
                        rep.add(f"{ptag}.anchor_{side}", "terminal phalanx needs both anchors")
            elif k > 0:
                for side in SIDES:
                    if len(ph.guides(side)) < 3:
                        rep.add(f"{ptag}.guides_{side}", "medial phalanx needs 3 guides per side")

    drive = model.drive
    if len(drive.motors) != 2:
        rep.add("drive.motors", f"{len(drive.motors)} motors, expected 2")
    if len(drive.clutches) != 8:
        rep.add("drive.clutches", f"{len(drive.clutches)} clutches, expected 8")
    if len(drive.spools) != 8:
        rep.add("drive.spools", f"{len(drive.spools)} spools, expected 8")
    for i, c in enumerate(drive.clutches):
        if not c.slip_torque > 0:
            rep.add(f"drive.clutches[{i}].slip_torque", "slip torque must be positive")
    for i, m in enumerate(drive.motors):
        if not m.max_torque > 0:
            rep.add(f"drive.motors[{i}].max_torque", "motor torque cap must be positive")
        if not m.no_load_speed >= 0:
            rep.add(f"drive.motors[{i}].no_load_speed", "no-load speed must be non-negative")
    for i, s in enumerate(drive.spools):
        if not s.radius > 0:
            rep.add(f"drive.spools[{i}].radius", "spool radius must be positive")
    for shaft in range(len(drive.motors)):
        if len(drive.shaft_spools(shaft)) != 4:
            rep.add("drive.spools", f"shaft {shaft} carries {len(drive.shaft_spools(shaft))} spools, expected 4")

    if rep.violations:
        # routing checks assume a well-formed chain
        return rep

    spool_ids = [r.spool_id for r in model.routes]
    if len(routes := model.routes) != 8:
        rep.add("routes", f"{len(routes)} tendon routes, expected 8")
    if len(set(spool_ids)) != len(spool_ids):
        rep.add("routes", "spools shared between routes")
    for r in routes:
        rtag = f"routes[{r.spool_id}]"
        bodies = [b for b, _, _ in r.points]
        if any(b2 < b1 for b1, b2 in zip(bodies, bodies[1:])):
            rep.add(rtag, "route does not visit phalanges proximal to distal")
        if not bodies or bodies[-1] != 3:
            rep.add(rtag, "route does not terminate at a fingertip anchor")
        if not r.rest_length > 0:
            rep.add(rtag, "rest length must be positive")
    _check_moment_arm_signs(model, rep)
    return rep


def _check_moment_arm_signs(model: HandModel, rep: ValidationReport) -> None:
    from .kinematics import moment_arms

    for r in model.routes:
        finger = model.fingers[r.finger_id]
        arms = moment_arms(r, finger, np.zeros(3))
        want = 1.0 if r.side == "flexor" else -1.0
        for j, a in enumerate(arms):
            if not want * a > 0:
                rep.add(
                    f"fingers[{r.finger_id}].phalanges.guides_{r.side}",
                    f"moment-arm sign at joint {j + 1}: {a:+.4f} mm on {r.side} route",
                )


def repose_finger(model: HandModel, name: str, base: Point, angle: float, mirror: bool) -> HandModel:
    """Move one finger to a new base pose, as on a single-finger test rig.

    Its palm guides stay attached to the base and its two spools move in
    line behind it, so the cords run straight into the guides.
    """
    fi = model.finger_index(name)
    finger = replace(model.fingers[fi], base=base, angle=angle, mirror=mirror)
    fingers = model.fingers[:fi] + (finger,) + model.fingers[fi + 1:]
    guides = list(model.palm_guides)
    spools = list(model.drive.spools)
    n = len(model.fingers)
    for side in SIDES:
        rid = route_id(fi, side, n)
        if rid < len(guides):
            guides[rid] = default_palm_guides(finger, side)
        if rid < len(spools):
            lateral = -12.0 if side == "flexor" else 12.0
            p = np.asarray(base) + finger.base_rotation @ np.array([-100.0, lateral])
            spools[rid] = replace(spools[rid], position=(round(float(p[0]), 6), round(float(p[1]), 6)))
    drive = replace(model.drive, spools=tuple(spools))
    return replace(model, fingers=fingers, palm_guides=tuple(guides), drive=drive)
