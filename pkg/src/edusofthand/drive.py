"""Motors, torque-limited clutches and spools on the two drive shafts.

Positive motor and spool rotation winds tendon onto the spool.
Torques are N*m, spool radii and tendon lengths mm, tensions N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence


@dataclass(frozen=True)
class MotorState:
    shaft_angle: float = 0.0
    speed: float = 0.0
    commanded_speed: float = 0.0
    delivered_torque: float = 0.0

    @property
    def encoder_ticks(self) -> int:
        return round(math.degrees(self.shaft_angle))


@dataclass(frozen=True)
class ClutchState:
    transmitted_torque: float = 0.0
    slipping: bool = False
    slip_angle_accum: float = 0.0


@dataclass(frozen=True)
class SpoolState:
    angle: float
    radius: float
    tendon_id: int

    @property
    def wound_length(self) -> float:
        return self.radius * self.angle


@dataclass(frozen=True)
class ShaftState:
    motor: MotorState
    clutches: tuple[ClutchState, ...]
    spools: tuple[SpoolState, ...]


def clutch_transmit(demand: float, limit: float) -> tuple[float, bool]:
    """Ideal torque clamp: ``(clamp(demand, -limit, limit), |demand| > limit)``."""
    if limit < 0:
        raise ValueError("clutch limit must be non-negative")
    slipping = abs(demand) > limit
    return min(limit, max(-limit, demand)), slipping


def motor_step(
    state: MotorState,
    command: float,
    load: float,
    dt: float,
    max_torque: float = 0.40,
    no_load_speed: float | None = None,
) -> MotorState:
    """Advance the motor one step under a linear speed-torque droop.

    ``command`` is the requested shaft speed (rad/s), limited to the
    no-load speed when one is given.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if no_load_speed is not None:
        command = max(-no_load_speed, min(no_load_speed, command))
    torque = max(-max_torque, min(max_torque, load))
    droop = max(0.0, 1.0 - abs(torque) / max_torque)
    speed = command * droop
    return MotorState(
        shaft_angle=state.shaft_angle + speed * dt,
        speed=speed,
        commanded_speed=command,
        delivered_torque=torque,
    )


def shaft_step(
    shaft: ShaftState,
    command: float,
    loads: Sequence[float],
    dt: float,
    limits: Sequence[float],
    *,
    max_torque: float = 0.40,
    no_load_speed: float | None = None,
    engaged: Sequence[bool] | None = None,
    stiffness: float | None = None,
    gaps: Sequence[float] | None = None,
) -> ShaftState:
    """One tick of a motor shaft driving its spools through clutches.

    With only ``loads`` (tendon tension at each spool, N), a spool whose
    demand ``load * radius`` exceeds its clutch limit holds its angle while
    the shaft slips past it. When ``stiffness`` (N/mm) and ``gaps`` (signed
    path-minus-commanded length, mm) are given, the tension after winding
    is predicted from the tendon spring and an overloaded spool is
    back-driven until the tension sits exactly at the clutch limit.
    """
    n = len(shaft.spools)
    engaged = [True] * n if engaged is None else list(engaged)
    motor = motor_step(
        shaft.motor, shaft.motor.commanded_speed if command is None else command,
        shaft.motor.delivered_torque, dt, max_torque, no_load_speed,
    )
    dtheta = motor.shaft_angle - shaft.motor.shaft_angle
    clutches = []
    spools = []
    total = 0.0
    for i in range(n):
        sp, cl = shaft.spools[i], shaft.clutches[i]
        r = sp.radius
        if not engaged[i]:
            spools.append(sp)
            clutches.append(replace(cl, transmitted_torque=0.0, slipping=False))
            continue
        if stiffness is None:
            demand = loads[i] * r * 1e-3
            transmitted, slipping = clutch_transmit(demand, limits[i])
            if slipping:
                spools.append(sp)
                slip = abs(dtheta)
            else:
                spools.append(replace(sp, angle=sp.angle + dtheta))
                slip = 0.0
        else:
            gap = gaps[i] + r * dtheta
            demand = stiffness * max(0.0, gap) * r * 1e-3
            transmitted, slipping = clutch_transmit(demand, limits[i])
            if slipping:
                gap_cap = limits[i] * 1e3 / r / stiffness
                delta = (gap_cap - gaps[i]) / r
                slip = abs(dtheta - delta)
                spools.append(replace(sp, angle=sp.angle + delta))
            else:
                slip = 0.0
                spools.append(replace(sp, angle=sp.angle + dtheta))
        total += transmitted
        clutches.append(
            ClutchState(transmitted, slipping, cl.slip_angle_accum + slip)
        )
    motor = replace(motor, delivered_torque=max(-max_torque, min(max_torque, total)))
    return ShaftState(motor, tuple(clutches), tuple(spools))
