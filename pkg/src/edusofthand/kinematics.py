"""Finger forward kinematics and tendon path geometry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels

WINDING = "winding"
PAYING_OUT = "paying_out"
STUCK = "stuck"


@dataclass(frozen=True)
class FingerPose:
    """Palm-frame pose of one finger.

    ``rots[k]``/``origins[k]`` map phalanx-k local coordinates to the palm
    frame; ``joints[j]`` is the axle of joint j+1 (= ``origins[j+1]``).
    """

    q: np.ndarray
    rots: np.ndarray
    origins: np.ndarray
    sigma: float
    clamped: bool = False

    @property
    def joints(self) -> np.ndarray:
        return self.origins[1:]

    def to_world(self, body: int, local) -> np.ndarray:
        local = np.asarray(local, dtype=float)
        if body < 0:
            return local.copy()
        return self.origins[body] + self.rots[body] @ local

    def phalanx_segment(self, k: int, length: float) -> tuple[np.ndarray, np.ndarray]:
        a = self.origins[k]
        return a, a + self.rots[k][:, 0] * length

    def tip(self, finger) -> np.ndarray:
        return self.phalanx_segment(3, finger.phalanges[3].length)[1]

    def guide_positions(self, finger, side: str) -> np.ndarray:
        """World positions of every guide (and the anchor) on one side."""
        pts = []
        for k, ph in enumerate(finger.phalanges):
            for g in ph.guides(side):
                pts.append(self.to_world(k, g))
            anchor = ph.anchor(side)
            if ph.is_terminal and anchor is not None:
                pts.append(self.to_world(k, anchor))
        return np.array(pts)


@dataclass(frozen=True)
class RouteGeometry:
    length: float
    seg_len: np.ndarray
    dseg: np.ndarray
    wraps: np.ndarray

    @property
    def moment_arms(self) -> np.ndarray:
        return -self.dseg.sum(axis=0)

    @property
    def cumulative_wrap(self) -> np.ndarray:
        """Wrap angle accumulated between the spool and each segment."""
        return np.concatenate(([0.0], np.cumsum(self.wraps)))


@dataclass
class TendonState:
    path_length: float
    commanded_length: float
    tension_at_spool: float
    segment_tension: np.ndarray
    direction: str = STUCK

    @property
    def stretch(self) -> float:
        return max(0.0, self.path_length - self.commanded_length)

    @property
    def slack(self) -> bool:
        return self.path_length < self.commanded_length


def forward_kinematics(finger, q) -> FingerPose:
    """Chain transforms for ``finger`` at joint angles ``q``.

    Angles outside the joint limits are clamped and the pose is flagged.
    """
    q = np.asarray(q, dtype=float)
    lo, hi = finger.lower_limits, finger.upper_limits
    qc = np.clip(q, lo, hi)
    clamped = bool(np.any(qc != q))
    return pose_unclamped(finger, qc, clamped)


def pose_unclamped(finger, q, clamped: bool = False) -> FingerPose:
    """Pose without limit clamping; the solver lets stops be penetrated."""
    q = np.asarray(q, dtype=float)
    rots, origins = kernels.chain_frames(finger.base_rotation, finger.base, finger.lengths, q)
    return FingerPose(q, rots, origins, finger.flexion_sign, clamped)


def route_points_world(route, pose: FingerPose) -> np.ndarray:
    return kernels.transform_points(pose.rots, pose.origins, route.local, route.body)


def _pose_for(route, poses) -> FingerPose:
    if isinstance(poses, FingerPose):
        return poses
    return poses[route.finger_id]


def route_geometry(route, poses) -> RouteGeometry:
    pose = _pose_for(route, poses)
    pts = route_points_world(route, pose)
    length, seg_len, dseg, wraps = kernels.route_geometry(pts, route.body, pose.joints, pose.sigma)
    return RouteGeometry(float(length), seg_len, dseg, wraps)


def tendon_path_length(route, poses) -> float:
    """Polyline length of ``route`` through its guides (mm)."""
    return route_geometry(route, poses).length


def moment_arms(route, finger, q) -> np.ndarray:
    """Signed moment arms (mm, + flexes) from the path-length gradient."""
    pose = pose_unclamped(finger, q)
    return route_geometry(route, pose).moment_arms


def tension_profile(
    wraps: Sequence[float],
    tension_at_spool: float,
    sliding_direction: str,
    mu: float,
    previous: Sequence[float] | None = None,
) -> np.ndarray:
    """Per-segment tension along a route, spool end first.

    Sliding toward the spool (winding) attenuates tension distally by the
    capstan factor; paying out amplifies it. A stuck tendon keeps its
    previous profile, clamped into the static friction band.
    """
    T = max(0.0, float(tension_at_spool))
    B = np.concatenate(([0.0], np.cumsum(np.asarray(wraps, dtype=float))))
    if T == 0.0:
        return np.zeros_like(B)
    if mu == 0.0:
        return np.full_like(B, T)
    low = T * np.exp(-mu * B)
    high = T * np.exp(mu * B)
    if sliding_direction == WINDING:
        return low
    if sliding_direction == PAYING_OUT:
        return high
    if previous is None or len(previous) != len(B):
        return np.full_like(B, T).clip(low, high)
    return np.clip(np.asarray(previous, dtype=float), low, high)
