"""Intelligent Driver Model longitudinal control.

Used for scripted background traffic, normal-behavior training episodes,
and the planner's longitudinal proposal profiles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class IdmParams:
    accel_max: float = 1.5
    decel_comfort: float = 2.0
    decel_hard: float = 4.5
    exponent: float = 4.0
    min_gap: float = 4.0
    headway_s: float = 1.2


DEFAULT_IDM = IdmParams()


def idm_accel(
    speed: float,
    target_speed: float,
    gap: float | None = None,
    lead_speed: float = 0.0,
    params: IdmParams = DEFAULT_IDM,
) -> float:
    """IDM acceleration; gap=None means free road.

    `gap` is bumper-to-bumper distance to the leader, `lead_speed` the
    leader's speed along the lane. Output clamped to [-decel_hard, accel_max].
    """
    v = max(speed, 0.0)
    v0 = max(target_speed, 0.1)
    free = 1.0 - (v / v0) ** params.exponent
    interaction = 0.0
    if gap is not None:
        s = max(gap, 0.1)
        dv = v - lead_speed
        s_star = params.min_gap + v * params.headway_s
        s_star += v * dv / (2.0 * math.sqrt(params.accel_max * params.decel_comfort))
        s_star = max(s_star, params.min_gap)
        interaction = (s_star / s) ** 2
    accel = params.accel_max * (free - interaction)
    return min(params.accel_max, max(-params.decel_hard, accel))
