"""Closed-loop 2D world state, kinematic stepping, and plan tracking.

Integration convention: speeds update first (explicit accel), positions
advance by the step-mean speed along the step-start heading, so one step
from rest covers a*dt^2/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from madplan.geometry import (
    AgentKind,
    AgentState,
    EgoState,
    MapModel,
    Plan,
    normalize_angle,
    unit,
    world_to_frame,
)

STEER_MAX = 0.7
EGO_WHEELBASE = 2.8
EGO_EXTENT = (4.6, 1.8)
VEHICLE_EXTENT = (4.6, 1.8)
PEDESTRIAN_EXTENT = (0.5, 0.5)

TRACK_ACCEL_MAX = 2.0
TRACK_DECEL_MAX = 4.5


@dataclass(frozen=True)
class WorldState:
    ego: EgoState
    agents: tuple[AgentState, ...]
    map_model: MapModel
    time_index: int

    def __post_init__(self):
        ids = [a.agent_id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ValueError("agent ids must be unique")

    @property
    def time_s(self) -> float:
        from madplan.geometry import DT

        return self.time_index * DT

    def agent_by_id(self, agent_id: int) -> AgentState:
        for a in self.agents:
            if a.agent_id == agent_id:
                return a
        raise KeyError(f"no agent with id {agent_id}")


def advance_ego(ego: EgoState, accel: float, steer: float, dt: float) -> EgoState:
    """Kinematic bicycle step; speed clamped at zero."""
    v0 = ego.speed
    v1 = max(0.0, v0 + accel * dt)
    ds = 0.5 * (v0 + v1) * dt
    yaw_rate = 0.5 * (v0 + v1) * math.tan(steer) / EGO_WHEELBASE
    position = ego.position + ds * unit(ego.heading)
    heading = normalize_angle(ego.heading + yaw_rate * dt)
    applied = (v1 - v0) / dt if dt > 0 else 0.0
    return EgoState(position, heading, v1, applied, ego.extent)


def advance_agent(agent: AgentState, accel: float, steer: float, dt: float) -> AgentState:
    """Agents integrate like the ego; pedestrians treat steer as a yaw rate."""
    v0 = agent.speed
    v1 = max(0.0, v0 + accel * dt)
    ds = 0.5 * (v0 + v1) * dt
    if agent.kind is AgentKind.PEDESTRIAN:
        yaw_rate = steer
    else:
        yaw_rate = 0.5 * (v0 + v1) * math.tan(steer) / EGO_WHEELBASE
    position = agent.position + ds * unit(agent.heading)
    heading = normalize_angle(agent.heading + yaw_rate * dt)
    return replace(agent, position=position, heading=heading, speed=v1)


def step_world(
    world: WorldState,
    ego_accel: float,
    ego_steer: float,
    dt: float,
    agent_controls: dict[int, tuple[float, float]],
) -> WorldState:
    """Advance every body one step; scripted agents use `agent_controls`."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if abs(ego_steer) > STEER_MAX + 1e-12:
        raise ValueError(f"|ego_steer| must be <= {STEER_MAX}")
    ego = advance_ego(world.ego, ego_accel, ego_steer, dt)
    agents = tuple(
        advance_agent(a, *agent_controls.get(a.agent_id, (0.0, 0.0)), dt)
        for a in world.agents
    )
    return WorldState(ego, agents, world.map_model, world.time_index + 1)


def track_plan(ego: EgoState, plan: Plan, steps_into_plan: int, dt: float) -> tuple[float, float]:
    """Pure-pursuit steering plus proportional speed control onto a plan."""
    idx = min(max(steps_into_plan, 0), plan.positions.shape[0] - 1)
    target_speed = float(plan.speeds[idx])
    accel = (target_speed - ego.speed) / dt
    accel = min(TRACK_ACCEL_MAX, max(-TRACK_DECEL_MAX, accel))

    lookahead = max(3.0, 0.9 * ego.speed)
    local = world_to_frame(plan.positions, ego.position, ego.heading)
    dist = np.linalg.norm(local, axis=1)
    ahead = np.nonzero((dist >= lookahead) & (local[:, 0] > 0.0))[0]
    if ahead.size:
        tgt = local[int(ahead[0])]
    else:
        forward = np.nonzero(local[:, 0] > 0.1)[0]
        tgt = local[int(forward[-1])] if forward.size else None
    if tgt is None or float(np.hypot(tgt[0], tgt[1])) < 0.5:
        return accel, 0.0
    d = float(np.hypot(tgt[0], tgt[1]))
    alpha = math.atan2(tgt[1], tgt[0])
    steer = math.atan2(2.0 * EGO_WHEELBASE * math.sin(alpha), d)
    return accel, min(STEER_MAX, max(-STEER_MAX, steer))


def ego_collides(world: WorldState) -> tuple[bool, int | None]:
    """Check the ego box against every agent box at the current instant."""
    from madplan.geometry import obb_collision

    for a in world.agents:
        if obb_collision(
            world.ego.position, world.ego.heading, world.ego.extent,
            a.position, a.heading, a.extent,
        ):
            return True, a.agent_id
    return False, None


def collision_at_fault(ego: EgoState, agent_position: np.ndarray) -> bool:
    """At-fault unless the ego is stationary or struck on its braking rear half."""
    if ego.speed < 0.05:
        return False
    rel = world_to_frame(np.asarray(agent_position, dtype=float)[None, :], ego.position, ego.heading)[0]
    if rel[0] < 0.0 and ego.acceleration < -0.1:
        return False
    return True


def ego_off_drivable(world: WorldState) -> bool:
    from madplan.geometry import obb_corners

    corners = obb_corners(world.ego.position, world.ego.heading, world.ego.extent)
    return any(not world.map_model.contains_point(c) for c in corners)


def agent_velocity(agent: AgentState) -> np.ndarray:
    return agent.speed * unit(agent.heading)


def min_ttc_to_agents(world: WorldState) -> float:
    """Min constant-velocity TTC from the ego to any agent, inf when clear."""
    from madplan.geometry import body_ttc

    ego = world.ego
    ego_pose = (ego.position, ego.heading, ego.extent)
    ego_vel = ego.speed * unit(ego.heading)
    best = math.inf
    for a in world.agents:
        best = min(
            best,
            body_ttc(ego_pose, ego_vel, (a.position, a.heading, a.extent), agent_velocity(a)),
        )
    return best
