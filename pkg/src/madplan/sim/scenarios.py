"""Benchmark scenario families: maps, scripted agent roles, deterministic builders.

Two map templates: a straight 160 m two-lane road (jaywalking families) and a
four-way signalized intersection (red-light family). Jaywalker placement is
conflict-matched: the fast runner's crossing point is solved so a full-speed
ego meets it mid-crossing, while the slow walker reaches the lane only after
a full-speed ego has cleared it.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from madplan.geometry import (
    DT,
    AgentKind,
    AgentState,
    EgoState,
    MapModel,
    TrafficLight,
    point_at_arclength,
    project_to_centerline,
)
from madplan.idm import DEFAULT_IDM, idm_accel
from madplan.sim.world import (
    EGO_EXTENT,
    PEDESTRIAN_EXTENT,
    TRACK_ACCEL_MAX,
    VEHICLE_EXTENT,
    WorldState,
)

ROAD_LEN = 160.0
LANE_HALF = 1.75
ROAD_HALF = 3.5
ROAD_SPEED_LIMIT = 13.9
EGO_START_X = 4.0
EGO_SPEED_FRACTION = 0.8

LEG_LEN = 45.0
INTERSECTION_SPEED_LIMIT = 8.33
STOP_OFFSET = 4.5  # stop line distance from the intersection center

JAYWALK_START_Y = -(ROAD_HALF + 2.0)  # 2 m off the near road edge
JAYWALK_STOP_Y = ROAD_HALF + 2.0
FAST_TOP_SPEED = 3.0
SLOW_TOP_SPEED = 1.0


class ScenarioConfigError(ValueError):
    pass


class ScenarioFamily(enum.Enum):
    SINGLE_JAYWALK_FAST = "single_jaywalk_fast"
    SINGLE_JAYWALK_SLOW = "single_jaywalk_slow"
    MULTI_JAYWALK = "multi_jaywalk"
    RED_LIGHT_VIOLATION = "red_light_violation"


@dataclass(frozen=True)
class ScenarioSpec:
    family: ScenarioFamily
    jay_accel: float = 1.5
    jay_offset: float = 0.0
    violation_time_s: float = 2.5
    violator_accel: float = 2.5
    n_background: int = 3
    episode_len: int = 0  # 0 -> family default
    seed: int = 0

    def __post_init__(self):
        f = self.family
        if not 0.3 <= self.jay_accel <= 2.5:
            raise ScenarioConfigError(f"jay_accel {self.jay_accel} outside [0.3, 2.5]")
        if f in (ScenarioFamily.SINGLE_JAYWALK_FAST, ScenarioFamily.MULTI_JAYWALK):
            if not -8.0 <= self.jay_offset <= 8.0:
                raise ScenarioConfigError(
                    f"fast-family jay_offset {self.jay_offset} outside [-8, 8] "
                    "(it jitters the conflict-matched crossing point)"
                )
        if f is ScenarioFamily.SINGLE_JAYWALK_SLOW:
            if not 10.0 <= self.jay_offset <= 30.0:
                raise ScenarioConfigError(
                    f"slow-family jay_offset {self.jay_offset} outside [10, 30]"
                )
        if not 0.5 <= self.violation_time_s <= 5.0:
            raise ScenarioConfigError(f"violation_time_s {self.violation_time_s} outside [0.5, 5]")
        if not 1.0 <= self.violator_accel <= 4.0:
            raise ScenarioConfigError(f"violator_accel {self.violator_accel} outside [1, 4]")
        if not 0 <= self.n_background <= 5:
            raise ScenarioConfigError(f"n_background {self.n_background} outside [0, 5]")
        if self.episode_len and not 4 <= self.episode_len <= 200:
            raise ScenarioConfigError(f"episode_len {self.episode_len} outside [4, 200]")

    @property
    def steps(self) -> int:
        if self.episode_len:
            return self.episode_len
        return 26 if self.family is ScenarioFamily.RED_LIGHT_VIOLATION else 20

    @property
    def jay_top_speed(self) -> float:
        if self.family is ScenarioFamily.SINGLE_JAYWALK_SLOW:
            return SLOW_TOP_SPEED
        return FAST_TOP_SPEED


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------


def straight_road_map(
    crosswalk_x: float | None = 140.0,
    walk_green_s: float = 1.0,
    walk_red_s: float = 0.0,
    signal_offset_s: float = 0.0,
) -> MapModel:
    """Two-lane road along x; optional mid-block crosswalk with a signal.

    The crosswalk signal phase refers to vehicles: green means vehicles go
    and pedestrians wait. Defaults give an always-green (inactive) signal.
    """
    east = np.array([[0.0, -LANE_HALF], [ROAD_LEN, -LANE_HALF]])
    west = np.array([[ROAD_LEN, LANE_HALF], [0.0, LANE_HALF]])
    drivable = np.array(
        [[0.0, -ROAD_HALF], [ROAD_LEN, -ROAD_HALF], [ROAD_LEN, ROAD_HALF], [0.0, ROAD_HALF]]
    )
    crosswalks: tuple[np.ndarray, ...] = ()
    lights: tuple[TrafficLight, ...] = ()
    if crosswalk_x is not None:
        crosswalks = (
            np.array(
                [
                    [crosswalk_x - 1.5, -ROAD_HALF],
                    [crosswalk_x + 1.5, -ROAD_HALF],
                    [crosswalk_x + 1.5, ROAD_HALF],
                    [crosswalk_x - 1.5, ROAD_HALF],
                ]
            ),
        )
        lights = (
            TrafficLight(
                np.array([crosswalk_x, -ROAD_HALF]),
                centerline_index=0,
                stop_arclength=crosswalk_x - STOP_OFFSET,
                green_s=walk_green_s,
                red_s=walk_red_s,
                offset_s=signal_offset_s,
            ),
            TrafficLight(
                np.array([crosswalk_x, ROAD_HALF]),
                centerline_index=1,
                stop_arclength=(ROAD_LEN - crosswalk_x) - STOP_OFFSET,
                green_s=walk_green_s,
                red_s=walk_red_s,
                offset_s=signal_offset_s,
            ),
        )
    return MapModel(
        centerlines=(east, west),
        speed_limits=(ROAD_SPEED_LIMIT, ROAD_SPEED_LIMIT),
        drivable_area=(drivable,),
        crosswalks=crosswalks,
        lights=lights,
    )


def intersection_map(x_green_s: float = 1.0, x_red_s: float = 0.0) -> MapModel:
    """Four-way signalized intersection; x-road and y-road phases alternate.

    Defaults freeze the x-road green and the y-road red (the red-light
    benchmark configuration).
    """
    east = np.array([[-LEG_LEN, -LANE_HALF], [LEG_LEN, -LANE_HALF]])
    west = np.array([[LEG_LEN, LANE_HALF], [-LEG_LEN, LANE_HALF]])
    north = np.array([[LANE_HALF, -LEG_LEN], [LANE_HALF, LEG_LEN]])
    south = np.array([[-LANE_HALF, LEG_LEN], [-LANE_HALF, -LEG_LEN]])
    x_band = np.array(
        [[-LEG_LEN, -ROAD_HALF], [LEG_LEN, -ROAD_HALF], [LEG_LEN, ROAD_HALF], [-LEG_LEN, ROAD_HALF]]
    )
    y_band = np.array(
        [[-ROAD_HALF, -LEG_LEN], [ROAD_HALF, -LEG_LEN], [ROAD_HALF, LEG_LEN], [-ROAD_HALF, LEG_LEN]]
    )
    crosswalks = (
        np.array([[-7.0, -ROAD_HALF], [-4.0, -ROAD_HALF], [-4.0, ROAD_HALF], [-7.0, ROAD_HALF]]),
        np.array([[4.0, -ROAD_HALF], [7.0, -ROAD_HALF], [7.0, ROAD_HALF], [4.0, ROAD_HALF]]),
    )
    stop_s = LEG_LEN - STOP_OFFSET
    y_green_s, y_red_s = x_red_s, x_green_s
    y_offset = -x_green_s
    lights = (
        TrafficLight(np.array([-STOP_OFFSET, -LANE_HALF]), 0, stop_s, x_green_s, x_red_s),
        TrafficLight(np.array([STOP_OFFSET, LANE_HALF]), 1, stop_s, x_green_s, x_red_s),
        TrafficLight(np.array([LANE_HALF, -STOP_OFFSET]), 2, stop_s, y_green_s, y_red_s, y_offset),
        TrafficLight(np.array([-LANE_HALF, STOP_OFFSET]), 3, stop_s, y_green_s, y_red_s, y_offset),
    )
    return MapModel(
        centerlines=(east, west, north, south),
        speed_limits=(INTERSECTION_SPEED_LIMIT,) * 4,
        drivable_area=(x_band, y_band),
        crosswalks=crosswalks,
        lights=lights,
    )


# ---------------------------------------------------------------------------
# Scripted roles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JaywalkerRole:
    trigger_s: float
    accel: float
    top_speed: float
    stop_y: float = JAYWALK_STOP_Y


@dataclass(frozen=True)
class ViolatorRole:
    violation_s: float
    accel: float
    centerline_index: int


@dataclass(frozen=True)
class LaneFollowRole:
    centerline_index: int
    target_speed: float
    obey_lights: bool = True


@dataclass(frozen=True)
class WaitRole:
    pass


@dataclass(frozen=True)
class CrosswalkCrossRole:
    light_index: int
    accel: float
    top_speed: float
    start_pos: tuple[float, float]
    cross_dist: float


Role = JaywalkerRole | ViolatorRole | LaneFollowRole | WaitRole | CrosswalkCrossRole


def _hold_speed_accel(speed: float, top_speed: float, accel: float) -> float:
    if speed < top_speed - 1e-9:
        return min(accel, (top_speed - speed) / DT)
    return 0.0


def _brake_to_stop(speed: float) -> float:
    return -min(4.0, speed / DT)


def _leader_gap(
    agent: AgentState, world: WorldState, centerline_index: int, obey_lights: bool
) -> tuple[float, float] | None:
    """Nearest constraint ahead on the lane: vehicle, pedestrian, or red light."""
    line = world.map_model.centerlines[centerline_index]
    s_self, _ = project_to_centerline(agent.position, line)
    own_half = agent.extent[0] / 2.0
    best: tuple[float, float] | None = None

    bodies = [(world.ego.position, world.ego.heading, world.ego.speed, world.ego.extent)]
    bodies += [
        (a.position, a.heading, a.speed, a.extent)
        for a in world.agents
        if a.agent_id != agent.agent_id
    ]
    for pos, heading, speed, extent in bodies:
        s, lat = project_to_centerline(pos, line)
        if abs(lat) > LANE_HALF or s <= s_self:
            continue
        _, lane_heading = point_at_arclength(line, s)
        along = speed * math.cos(heading - lane_heading)
        gap = s - s_self - own_half - extent[0] / 2.0
        if best is None or gap < best[0]:
            best = (gap, along)

    if obey_lights:
        for light in world.map_model.lights:
            if light.centerline_index != centerline_index:
                continue
            if light.is_green(world.time_s):
                continue
            gap = light.stop_arclength - s_self - own_half
            if gap < -1.0:
                continue  # already past the line, committed
            if best is None or gap < best[0]:
                best = (gap, 0.0)
    return best


def _policy_lane_follow(agent: AgentState, world: WorldState, role: LaneFollowRole):
    leader = _leader_gap(agent, world, role.centerline_index, role.obey_lights)
    if leader is None:
        return idm_accel(agent.speed, role.target_speed), 0.0
    return idm_accel(agent.speed, role.target_speed, gap=leader[0], lead_speed=leader[1]), 0.0


def _policy_jaywalker(agent: AgentState, world: WorldState, role: JaywalkerRole):
    if world.time_s < role.trigger_s - 1e-9:
        return 0.0, 0.0
    if agent.position[1] >= role.stop_y:
        return _brake_to_stop(agent.speed), 0.0
    return _hold_speed_accel(agent.speed, role.top_speed, role.accel), 0.0


def _policy_violator(agent: AgentState, world: WorldState, role: ViolatorRole):
    if world.time_s >= role.violation_s - 1e-9:
        limit = world.map_model.speed_limits[role.centerline_index]
        return min(role.accel, max(0.0, (limit - agent.speed) / DT)), 0.0
    return _policy_lane_follow(
        agent, world, LaneFollowRole(role.centerline_index, 0.9 * INTERSECTION_SPEED_LIMIT)
    )


def _policy_crosswalk_ped(agent: AgentState, world: WorldState, role: CrosswalkCrossRole):
    start = np.asarray(role.start_pos)
    progress = float(np.linalg.norm(agent.position - start))
    if progress >= role.cross_dist:
        return _brake_to_stop(agent.speed), 0.0
    started = progress > 0.05
    walk_on = not world.map_model.lights[role.light_index].is_green(world.time_s)
    if started or walk_on:
        return _hold_speed_accel(agent.speed, role.top_speed, role.accel), 0.0
    return 0.0, 0.0


def scripted_policy(agent: AgentState, world: WorldState, roles: dict[int, Role]):
    """Deterministic control for a scripted agent given its role table."""
    role = roles.get(agent.agent_id)
    if role is None:
        raise ScenarioConfigError(f"agent {agent.agent_id} has no scripted role")
    if isinstance(role, JaywalkerRole):
        return _policy_jaywalker(agent, world, role)
    if isinstance(role, ViolatorRole):
        return _policy_violator(agent, world, role)
    if isinstance(role, LaneFollowRole):
        return _policy_lane_follow(agent, world, role)
    if isinstance(role, CrosswalkCrossRole):
        return _policy_crosswalk_ped(agent, world, role)
    if isinstance(role, WaitRole):
        return _brake_to_stop(agent.speed), 0.0
    raise ScenarioConfigError(f"unknown role type {type(role)!r}")


def scenario_controls(world: WorldState, roles: dict[int, Role]) -> dict[int, tuple[float, float]]:
    return {a.agent_id: scripted_policy(a, world, roles) for a in world.agents}


# ---------------------------------------------------------------------------
# Conflict matching
# ---------------------------------------------------------------------------


def ped_time_to_distance(dist: float, accel: float, top_speed: float) -> float:
    """Closed-form time for rest-start piecewise accel-then-cruise motion."""
    if dist <= 0:
        return 0.0
    d_accel = top_speed**2 / (2.0 * accel)
    if dist <= d_accel:
        return math.sqrt(2.0 * dist / accel)
    return top_speed / accel + (dist - d_accel) / top_speed


def ego_x_at_time(t: float, x0: float, v0: float, limit: float, accel: float = TRACK_ACCEL_MAX) -> float:
    """Ego position assuming it accelerates to the speed limit and holds it."""
    t_ramp = max(0.0, (limit - v0) / accel)
    if t <= t_ramp:
        return x0 + v0 * t + 0.5 * accel * t * t
    return x0 + v0 * t_ramp + 0.5 * accel * t_ramp**2 + limit * (t - t_ramp)


def jaywalk_crossing_x(spec: ScenarioSpec) -> float:
    """Longitudinal crossing point of the jaywalker."""
    v0 = EGO_SPEED_FRACTION * ROAD_SPEED_LIMIT
    if spec.family is ScenarioFamily.SINGLE_JAYWALK_SLOW:
        return EGO_START_X + spec.jay_offset
    # fast families: solve for the point where a full-speed ego meets the
    # runner as it reaches the ego lane center
    d_center = abs(-LANE_HALF - JAYWALK_START_Y)
    t_mid = ped_time_to_distance(d_center, spec.jay_accel, spec.jay_top_speed)
    return ego_x_at_time(t_mid, EGO_START_X, v0, ROAD_SPEED_LIMIT) + spec.jay_offset


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def scenario_roles(spec: ScenarioSpec) -> dict[int, Role]:
    roles: dict[int, Role] = {}
    if spec.family in (
        ScenarioFamily.SINGLE_JAYWALK_FAST,
        ScenarioFamily.SINGLE_JAYWALK_SLOW,
        ScenarioFamily.MULTI_JAYWALK,
    ):
        roles[0] = JaywalkerRole(0.0, spec.jay_accel, spec.jay_top_speed)
        if spec.family is ScenarioFamily.MULTI_JAYWALK:
            rng = np.random.default_rng(spec.seed)
            table = _background_table(rng)
            for i in range(spec.n_background):
                roles[i + 1] = table[i][0]
    else:
        roles[1] = ViolatorRole(spec.violation_time_s, spec.violator_accel, centerline_index=2)
    return roles


def _background_table(rng: np.random.Generator):
    """Role and spawn info for background vehicles (multi-jaywalk)."""
    jit = rng.uniform(-3.0, 3.0, size=5)
    sjit = rng.uniform(-0.8, 0.8, size=5)
    return [
        # (role, start position, heading, start speed)
        (
            LaneFollowRole(0, ROAD_SPEED_LIMIT + sjit[0]),
            np.array([EGO_START_X + 50.0 + jit[0], -LANE_HALF]),
            0.0,
            0.9 * ROAD_SPEED_LIMIT,
        ),
        (
            LaneFollowRole(1, 10.0 + sjit[1]),
            np.array([95.0 + jit[1], LANE_HALF]),
            math.pi,
            10.0,
        ),
        (
            LaneFollowRole(1, 9.0 + sjit[2]),
            np.array([120.0 + jit[2], LANE_HALF]),
            math.pi,
            9.0,
        ),
        (
            LaneFollowRole(0, ROAD_SPEED_LIMIT + sjit[3]),
            np.array([EGO_START_X - 18.0 + jit[3], -LANE_HALF]),
            0.0,
            EGO_SPEED_FRACTION * ROAD_SPEED_LIMIT,
        ),
        (
            LaneFollowRole(1, 10.5 + sjit[4]),
            np.array([145.0 + jit[4], LANE_HALF]),
            math.pi,
            10.0,
        ),
    ]


def build_scenario(spec: ScenarioSpec) -> WorldState:
    """Deterministic initial world for a benchmark scenario."""
    if spec.family is ScenarioFamily.RED_LIGHT_VIOLATION:
        map_model = intersection_map()
        v0 = EGO_SPEED_FRACTION * INTERSECTION_SPEED_LIMIT
        ego = EgoState(np.array([-38.0, -LANE_HALF]), 0.0, v0, 0.0, EGO_EXTENT)
        violator = AgentState(
            1, AgentKind.VEHICLE, np.array([LANE_HALF, -22.0]), math.pi / 2, 7.0, VEHICLE_EXTENT
        )
        return WorldState(ego, (violator,), map_model, 0)

    map_model = straight_road_map()
    v0 = EGO_SPEED_FRACTION * ROAD_SPEED_LIMIT
    ego = EgoState(np.array([EGO_START_X, -LANE_HALF]), 0.0, v0, 0.0, EGO_EXTENT)
    ped_x = jaywalk_crossing_x(spec)
    if not EGO_START_X + 5.0 <= ped_x <= ROAD_LEN - 10.0:
        raise ScenarioConfigError(
            f"jaywalker crossing point {ped_x:.1f} m falls outside the road"
        )
    agents: list[AgentState] = [
        AgentState(
            0,
            AgentKind.PEDESTRIAN,
            np.array([ped_x, JAYWALK_START_Y]),
            math.pi / 2,
            0.0,
            PEDESTRIAN_EXTENT,
        )
    ]
    if spec.family is ScenarioFamily.MULTI_JAYWALK:
        rng = np.random.default_rng(spec.seed)
        table = _background_table(rng)
        for i in range(spec.n_background):
            _, pos, heading, speed = table[i]
            agents.append(AgentState(i + 1, AgentKind.VEHICLE, pos, heading, speed, VEHICLE_EXTENT))
    return WorldState(ego, tuple(agents), map_model, 0)


def route_centerline_index(spec: ScenarioSpec) -> int:
    """The ego's route lane for each family (eastbound in both maps)."""
    return 0
