"""Time-stepped quasi-static simulation of the hand.

Joints follow overdamped first-order dynamics ``b * qdot = tau`` with the
stiff terms (tendon springs, contact penalties, joint stops) treated
implicitly per finger. Mobile objects settle under strong linear and
angular damping. After the joint update each motor shaft advances and its
clutches cap the spool torque.

Internal units: mm, N, s, rad; torques N*mm. Public residuals are N*m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .contact import PALM, ContactParams, ContactPoint, contact_forces, detect_contacts
from .drive import ClutchState, MotorState, ShaftState, SpoolState, shaft_step
from .kinematics import (
    PAYING_OUT,
    STUCK,
    WINDING,
    RouteGeometry,
    TendonState,
    pose_unclamped,
    route_geometry,
    tension_profile,
)
from .scene import MOTORS, Scene

# Object force residuals are converted to N*m with this hand-scale lever.
FORCE_TO_TORQUE = 0.1  # m
SLIDE_EPS = 1e-4  # mm of tendon flow per step below which a tendon is stuck
TENDON_SLIP_LENGTH = 0.5  # mm of sliding over which the capstan profile develops


class NumericalBlowup(RuntimeError):
    def __init__(self, message: str, state: "SimState | None" = None):
        super().__init__(message)
        self.state = state


class EquilibriumNotReached(RuntimeError):
    def __init__(self, trace: list, residual: float):
        super().__init__(f"equilibrium not reached; final residual {residual:.3g} N*m")
        self.trace = trace
        self.residual = residual


@dataclass
class SimState:
    t: float
    q: np.ndarray  # (4, 3)
    qdot: np.ndarray
    obj_pose: np.ndarray  # (n, 3) x, y mm, theta rad
    obj_vel: np.ndarray
    shafts: tuple[ShaftState, ...]
    tendons: tuple[TendonState, ...]
    geometry: tuple[RouteGeometry, ...]
    contacts: tuple[ContactPoint, ...] = ()
    stick: dict = field(default_factory=dict)
    residual: float = math.inf  # N*m
    settled_steps: int = 0
    peak_clutch_torque: float = 0.0
    peak_motor_torque: float = 0.0
    step: int = 0

    @property
    def motors(self) -> tuple[MotorState, ...]:
        return tuple(s.motor for s in self.shafts)

    @property
    def clutches(self) -> tuple[ClutchState, ...]:
        return tuple(c for s in self.shafts for c in s.clutches)

    @property
    def spools(self) -> tuple[SpoolState, ...]:
        return tuple(sp for s in self.shafts for sp in s.spools)


@dataclass(frozen=True)
class GraspReport:
    stable: bool
    residual_force: float  # N
    residual_torque: float  # N*m
    contact_count: int
    min_cone_margin: float  # N
    opposing: bool

    @property
    def residual(self) -> float:
        return max(self.residual_force * FORCE_TO_TORQUE, self.residual_torque)


def _perp(v):
    return np.array([-v[1], v[0]])


def _cross(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


class Simulator:
    """Scene-bound stepping engine; all scene-derived constants cached here."""

    def __init__(self, scene: Scene):
        self.scene = scene
        hand = scene.hand
        self.hand = hand
        self.fingers = hand.fingers
        self.nf = len(hand.fingers)
        self.routes = hand.routes
        self.k_t = hand.tendon_stiffness
        self.b = hand.joint_damping * 1e3
        self.k_stop = hand.stop_stiffness * 1e3
        self.mu_guide = hand.guide_friction_mu
        # Contact damping enters the implicit update as a viscous matrix, so
        # the explicit force law only sees the springs.
        self.c_contact = hand.contact_damping  # N*s/mm
        self.params = ContactParams(hand.contact_stiffness, 0.0, hand.tangential_stiffness, 0.0)
        self.g = np.asarray(scene.gravity, dtype=float)
        self.inits = [scene.finger_init(f.name) for f in self.fingers]
        self.locked = np.array([fi.locked for fi in self.inits])
        self.detached = [fi.detached for fi in self.inits]
        self.lo = np.array([f.lower_limits for f in self.fingers])
        self.hi = np.array([f.upper_limits for f in self.fingers])
        drive = hand.drive
        self.spool_radius = np.array([s.radius for s in drive.spools])
        self.slip = np.array([drive.clutches[s.clutch].slip_torque for s in drive.spools])
        self.shaft_ids = [drive.shaft_spools(m) for m in range(len(drive.motors))]
        self.control = sorted(scene.control, key=lambda c: (c.t, MOTORS.index(c.motor)))
        self.objects = scene.objects
        self.mobile = np.array([o.mobile for o in scene.objects], dtype=bool)
        self.masses = np.array([o.mass for o in scene.objects])
        self.load_finger = [hand.finger_index(ld.finger) for ld in scene.loads]
        # last pose (and its route geometries) per finger, keyed by joint angles
        self._pose_cache: list = [None] * self.nf

    # ------------------------------------------------------------- helpers

    def poses(self, q):
        out = []
        for i, f in enumerate(self.fingers):
            key = q[i].tobytes()
            hit = self._pose_cache[i]
            if hit is None or hit[0] != key:
                hit = (key, pose_unclamped(f, q[i]), {})
                self._pose_cache[i] = hit
            out.append(hit[1])
        return out

    def geometries(self, poses) -> tuple[RouteGeometry, ...]:
        out = []
        for rid, r in enumerate(self.routes):
            fi = r.finger_id
            hit = self._pose_cache[fi]
            if hit is not None and hit[1] is poses[fi]:
                geo = hit[2].get(rid)
                if geo is None:
                    geo = hit[2][rid] = route_geometry(r, poses[fi])
            else:
                geo = route_geometry(r, poses[fi])
            out.append(geo)
        return tuple(out)

    def commanded_length(self, rid: int, spool_angle: float) -> float:
        return self.routes[rid].rest_length - self.spool_radius[rid] * spool_angle

    def command(self, motor: int, t: float) -> float:
        speed = 0.0
        name = MOTORS[motor]
        for c in self.control:
            if c.t > t + 1e-12:
                break
            if c.motor == name:
                speed = 0.0 if c.speed is None else c.speed
        return speed

    def object_list(self, obj_pose):
        return [(o.shape, tuple(obj_pose[i]), o.friction) for i, o in enumerate(self.objects)]

    # --------------------------------------------------------------- setup

    def initial_state(self) -> SimState:
        q = np.array([fi.q for fi in self.inits], dtype=float)
        poses = self.poses(q)
        geo = self.geometries(poses)
        drive = self.hand.drive
        spool_angles = []
        tendons = []
        for rid, r in enumerate(self.routes):
            init = self.inits[r.finger_id]
            slack = init.slack_flexor if r.side == "flexor" else init.slack_extensor
            L = geo[rid].length
            theta = (r.rest_length - (L + slack)) / self.spool_radius[rid]
            spool_angles.append(theta)
            # a negative slack starts the cord stretched, evenly along its length
            T = self.k_t * max(0.0, -slack)
            tendons.append(
                TendonState(L, L + slack, T, np.full(len(geo[rid].seg_len), T), STUCK)
            )
        shafts = []
        for m, ids in enumerate(self.shaft_ids):
            shafts.append(
                ShaftState(
                    MotorState(),
                    tuple(ClutchState() for _ in ids),
                    tuple(SpoolState(spool_angles[i], drive.spools[i].radius, i) for i in ids),
                )
            )
        n_obj = len(self.objects)
        obj_pose = np.array([o.pose for o in self.objects], dtype=float).reshape(n_obj, 3)
        return SimState(
            t=0.0,
            q=q,
            qdot=np.zeros_like(q),
            obj_pose=obj_pose,
            obj_vel=np.zeros((n_obj, 3)),
            shafts=tuple(shafts),
            tendons=tuple(tendons),
            geometry=geo,
        )

    # ---------------------------------------------------------------- step

    def step(self, state: SimState, dt: float) -> SimState:
        if dt <= 0:
            raise ValueError("dt must be positive")
        nf = self.nf
        q = state.q
        poses = self.poses(q)
        geo = state.geometry
        tau = np.zeros((nf, 3))
        K = np.zeros((nf, 3, 3))
        C = np.zeros((nf, 3, 3))

        for rid, r in enumerate(self.routes):
            ts = state.tendons[rid]
            g = geo[rid]
            seg_t = ts.segment_tension
            if ts.tension_at_spool > 0.0:
                tau[r.finger_id] -= seg_t @ g.dseg
                if not self._slipping(state, rid):
                    arms = g.moment_arms
                    K[r.finger_id] += self.k_t * np.outer(arms, arms)

        if np.any(self.g):
            for fi, f in enumerate(self.fingers):
                pose = poses[fi]
                for k in range(1, 4):
                    a, b = pose.phalanx_segment(k, f.phalanges[k].length)
                    F = self.hand.phalanx_mass * self.g
                    self._apply_point_force(tau, fi, k, pose, (a + b) / 2.0, F)
        for li, ld in enumerate(self.scene.loads):
            fi = self.load_finger[li]
            p = poses[fi].to_world(ld.phalanx, ld.point)
            self._apply_point_force(tau, fi, ld.phalanx, poses[fi], p, np.asarray(ld.force, float))

        n_obj = len(self.objects)
        obj_force = np.zeros((n_obj, 3))
        obj_k = np.zeros((n_obj, 2))
        obj_c = np.zeros(n_obj)
        contacts: list[ContactPoint] = []
        stick = {}
        if n_obj:
            raw = detect_contacts(
                poses, self.fingers, self.object_list(state.obj_pose), self.hand.palm,
                manifold=True,
            )
            vel = [self._relative_velocity(c, poses, state) for c in raw]
            contacts, stick = contact_forces(raw, vel, self.params, dt, state.stick)
            for c in contacts:
                F = c.force_on_finger
                centre = state.obj_pose[c.obj, :2]
                lever = c.position - centre
                obj_force[c.obj, :2] -= F
                obj_force[c.obj, 2] -= _cross(lever, F)
                obj_k[c.obj, 0] += self.params.k_n + self.params.k_t
                obj_k[c.obj, 1] += (self.params.k_n + self.params.k_t) * float(lever @ lever)
                obj_c[c.obj] += self.c_contact  # c (n n^T + t t^T) = c I in the plane
                if c.finger == PALM or c.phalanx == 0:
                    continue
                pose = poses[c.finger]
                self._apply_point_force(tau, c.finger, c.phalanx, pose, c.position, F)
                jn = self._jacobian_row(pose, c.phalanx, c.position, c.normal)
                jt = self._jacobian_row(pose, c.phalanx, c.position, c.tangent)
                K[c.finger] += self.params.k_n * np.outer(jn, jn)
                K[c.finger] += self.params.k_t * np.outer(jt, jt)
                C[c.finger] += self.c_contact * (np.outer(jn, jn) + np.outer(jt, jt))

        below = q < self.lo
        above = q > self.hi
        tau += self.k_stop * np.where(below, self.lo - q, 0.0)
        tau -= self.k_stop * np.where(above, q - self.hi, 0.0)

        qdot = np.zeros_like(q)
        for fi in range(nf):
            if self.locked[fi]:
                continue
            Kf = K[fi] + np.diag(self.k_stop * (below[fi] | above[fi]))
            A = self.b * np.eye(3) + C[fi] + dt * Kf
            qdot[fi] = np.linalg.solve(A, tau[fi])
        limit = self.scene.sim.max_joint_speed
        if not np.all(np.isfinite(qdot)) or np.max(np.abs(qdot)) > limit:
            raise NumericalBlowup(
                f"joint speed {np.max(np.abs(qdot)):.3g} rad/s exceeds {limit} at t={state.t:.4f}",
                state,
            )
        q_new = q + dt * qdot

        # Gauss-Seidel coupling: the object sees the contact forces already
        # changed by this step's finger motion (linearized springs).
        for c in contacts:
            if c.finger == PALM or c.phalanx == 0 or self.locked[c.finger]:
                continue
            pose = poses[c.finger]
            vf = np.zeros(2)
            for j in range(1, c.phalanx + 1):
                vf += qdot[c.finger, j - 1] * pose.sigma * _perp(c.position - pose.origins[j])
            dF = dt * (
                self.params.k_n * float(vf @ c.normal) * c.normal
                + self.params.k_t * float(vf @ c.tangent) * c.tangent
            )
            obj_force[c.obj, :2] += dF
            obj_force[c.obj, 2] += _cross(c.position - state.obj_pose[c.obj, :2], dF)

        obj_vel = np.zeros((n_obj, 3))
        obj_pose = state.obj_pose.copy()
        obj_res = 0.0
        for oi in range(n_obj):
            W = obj_force[oi].copy()
            W[:2] += self.masses[oi] * self.g
            if self.mobile[oi]:
                drag = self.objects[oi].drag
                if drag > 0.0:
                    mag = math.hypot(W[0], W[1])
                    W[:2] *= 0.0 if mag <= drag else 1.0 - drag / mag
                c_lin = self.scene.sim.object_damping
                c_ang = self.scene.sim.object_angular_damping
                obj_vel[oi, :2] = W[:2] / (c_lin + obj_c[oi] + dt * obj_k[oi, 0])
                obj_vel[oi, 2] = W[2] / (c_ang + dt * obj_k[oi, 1])
                obj_pose[oi] += dt * obj_vel[oi]
                obj_res = max(
                    obj_res, math.hypot(W[0], W[1]) * FORCE_TO_TORQUE, abs(W[2]) * 1e-3
                )

        poses_new = self.poses(q_new)
        geo_new = self.geometries(poses_new)
        shafts, tendons = self._drive(state, geo_new, dt)

        free = ~self.locked
        joint_res = float(np.max(np.abs(tau[free]))) * 1e-3 if free.any() else 0.0
        residual = max(joint_res, obj_res)
        tol = self.scene.sim.equilibrium_tol
        peak_c = max(state.peak_clutch_torque, max(abs(c.transmitted_torque) for s in shafts for c in s.clutches))
        peak_m = max(state.peak_motor_torque, max(abs(s.motor.delivered_torque) for s in shafts))
        return SimState(
            t=state.t + dt,
            q=q_new,
            qdot=qdot,
            obj_pose=obj_pose,
            obj_vel=obj_vel,
            shafts=shafts,
            tendons=tendons,
            geometry=geo_new,
            contacts=tuple(contacts),
            stick=stick,
            residual=residual,
            settled_steps=state.settled_steps + 1 if residual < tol else 0,
            peak_clutch_torque=peak_c,
            peak_motor_torque=peak_m,
            step=state.step + 1,
        )

    def _slipping(self, state: SimState, rid: int) -> bool:
        for ids, shaft in zip(self.shaft_ids, state.shafts):
            if rid in ids:
                return shaft.clutches[ids.index(rid)].slipping
        return False

    def _apply_point_force(self, tau, fi, k, pose, p, F) -> None:
        sigma = pose.sigma
        for j in range(1, k + 1):
            tau[fi, j - 1] += sigma * _cross(p - pose.origins[j], F)

    def _jacobian_row(self, pose, k, p, direction) -> np.ndarray:
        row = np.zeros(3)
        for j in range(1, k + 1):
            row[j - 1] = pose.sigma * _cross(p - pose.origins[j], direction)
        return row

    def _relative_velocity(self, c: ContactPoint, poses, state: SimState) -> np.ndarray:
        v = np.zeros(2)
        if c.finger != PALM:
            pose = poses[c.finger]
            for j in range(1, c.phalanx + 1):
                v += state.qdot[c.finger, j - 1] * pose.sigma * _perp(c.position - pose.origins[j])
        ov = state.obj_vel[c.obj]
        centre = state.obj_pose[c.obj, :2]
        v -= ov[:2] + ov[2] * _perp(c.position - centre)
        return v

    def _drive(self, state: SimState, geo_new, dt):
        hand = self.hand
        shafts = []
        new_angles = {}
        for m, ids in enumerate(self.shaft_ids):
            shaft = state.shafts[m]
            gaps = []
            for i, rid in enumerate(ids):
                gaps.append(geo_new[rid].length - self.commanded_length(rid, shaft.spools[i].angle))
            spec = hand.drive.motors[m]
            new = shaft_step(
                shaft,
                self.command(m, state.t),
                [state.tendons[rid].tension_at_spool for rid in ids],
                dt,
                [self.slip[rid] for rid in ids],
                max_torque=spec.max_torque,
                no_load_speed=spec.no_load_speed,
                engaged=[not self.detached[self.routes[rid].finger_id] for rid in ids],
                stiffness=self.k_t,
                gaps=gaps,
            )
            shafts.append(new)
            for i, rid in enumerate(ids):
                new_angles[rid] = (shaft.spools[i].angle, new.spools[i].angle)
        tendons = []
        for rid in range(len(self.routes)):
            old, new = new_angles[rid]
            g = geo_new[rid]
            prev = state.tendons[rid]
            L_cmd = self.commanded_length(rid, new)
            T = self.k_t * max(0.0, g.length - L_cmd)
            flow = self.spool_radius[rid] * (new - old) - (g.length - prev.path_length)
            if T == 0.0:
                direction = STUCK
            elif flow > SLIDE_EPS:
                direction = WINDING
            elif flow < -SLIDE_EPS:
                direction = PAYING_OUT
            else:
                direction = STUCK
            seg = tension_profile(g.wraps, T, direction, self.mu_guide, prev.segment_tension)
            if direction != STUCK and T > 0.0 and len(prev.segment_tension) == len(seg):
                # The capstan profile only develops as the cord slides.
                held = tension_profile(g.wraps, T, STUCK, self.mu_guide, prev.segment_tension)
                seg = held + min(1.0, abs(flow) / TENDON_SLIP_LENGTH) * (seg - held)
            tendons.append(TendonState(g.length, L_cmd, T, seg, direction))
        return tuple(shafts), tuple(tendons)


def quasi_static_step(state: SimState, scene: Scene, dt: float | None = None) -> SimState:
    """Advance ``state`` by one step of ``dt`` (defaults to the scene's)."""
    return Simulator(scene).step(state, scene.sim.dt if dt is None else dt)


def initial_state(scene: Scene) -> SimState:
    return Simulator(scene).initial_state()


def simulate(
    scene: Scene,
    stop: str | None = None,
    initial: SimState | None = None,
    monitor: Callable[[SimState], bool] | None = None,
    record_every: int | None = None,
) -> list[SimState]:
    """Run ``scene`` from its initial state (or ``initial``).

    ``stop`` is ``"t_end"`` or ``"equilibrium"`` (default from the scene).
    A ``monitor`` returning True ends the run early. The trace holds the
    initial state, every ``record_every``-th state and the final state.
    Raises ``EquilibriumNotReached`` (carrying the partial trace) when an
    equilibrium run reaches ``t_end`` unsettled.
    """
    sim = Simulator(scene)
    cfg = scene.sim
    stop = stop or cfg.stop
    every = record_every or cfg.record_every
    state = initial if initial is not None else sim.initial_state()
    n_steps = int(round(cfg.t_end / cfg.dt))
    trace = [state]
    for i in range(1, n_steps + 1):
        state = sim.step(state, cfg.dt)
        if stop == "equilibrium" and state.settled_steps >= cfg.settle_steps:
            trace.append(state)
            return trace
        if monitor is not None and monitor(state):
            trace.append(state)
            return trace
        if i % every == 0 or i == n_steps:
            trace.append(state)
    if stop == "equilibrium" and n_steps > 0:
        raise EquilibriumNotReached(trace, state.residual)
    return trace


def static_object_wrench(scene: Scene, state: SimState, obj: int):
    """Net force (N) and moment (N*mm) on an object from static contact forces and gravity."""
    sim = Simulator(scene)
    poses = sim.poses(state.q)
    raw = detect_contacts(
        poses, sim.fingers, sim.object_list(state.obj_pose), sim.hand.palm, manifold=True
    )
    raw = [c for c in raw if c.obj == obj]
    contacts, _ = contact_forces(raw, [np.zeros(2)] * len(raw), sim.params, 0.0, state.stick)
    F = sim.masses[obj] * sim.g if len(sim.masses) else np.zeros(2)
    F = np.array(F, dtype=float)
    M = 0.0
    centre = state.obj_pose[obj, :2]
    for c in contacts:
        f = c.force_on_finger
        F -= f
        M -= _cross(c.position - centre, f)
    return F, M, contacts


def grasp_quality(state: SimState, scene: Scene, obj: int, tol: float = 1e-3) -> GraspReport:
    """Static stability of object ``obj`` in ``state``.

    Stable iff the wrench residual (N*m equivalent) is below ``tol``, every
    contact lies within its friction cone, and at least two contacts push
    from opposing directions.
    """
    if not 0 <= obj < len(scene.objects):
        raise IndexError(f"no object {obj}")
    F, M, contacts = static_object_wrench(scene, state, obj)
    margins = [c.mu * c.normal_force - abs(c.tangent_force) for c in contacts]
    opposing = any(
        float(a.normal @ b.normal) < 0.0
        for i, a in enumerate(contacts)
        for b in contacts[i + 1:]
    )
    rf = float(np.hypot(*F))
    rt = abs(M) * 1e-3
    report = GraspReport(
        stable=False,
        residual_force=rf,
        residual_torque=rt,
        contact_count=len(contacts),
        min_cone_margin=min(margins) if margins else 0.0,
        opposing=opposing,
    )
    stable = (
        report.residual < tol
        and all(m >= -1e-12 for m in margins)
        and len(contacts) >= 2
        and opposing
    )
    return replace(report, stable=stable)
