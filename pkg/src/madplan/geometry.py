"""Shared domain types, coordinate frames, and geometric predicates.

Conventions: positions are 2-vectors in meters, headings in radians wrapped
to (-pi, pi], speeds in m/s. Oriented boxes touch-count as colliding and
polygon boundaries count as inside (conservative for safety checks).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# Fixed pipeline granularity: 0.5 s steps, 6 s future, 2.5 s history.
DT = 0.5
HORIZON = 12
HISTORY = 5
MAX_AGENTS = 8

# Kinematic bound used by plan feasibility checks (hard braking limit).
ACCEL_BOUND = 5.0


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def unit(heading: float) -> np.ndarray:
    return np.array([math.cos(heading), math.sin(heading)])


def cross2(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


class AgentKind(enum.Enum):
    VEHICLE = "vehicle"
    PEDESTRIAN = "pedestrian"


@dataclass(frozen=True)
class AgentState:
    agent_id: int
    kind: AgentKind
    position: np.ndarray
    heading: float
    speed: float
    extent: tuple[float, float]  # (length, width)

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "heading", normalize_angle(self.heading))
        if self.speed < 0:
            raise ValueError(f"agent {self.agent_id}: speed must be >= 0, got {self.speed}")
        if self.extent[0] <= 0 or self.extent[1] <= 0:
            raise ValueError(f"agent {self.agent_id}: extent must be positive, got {self.extent}")


@dataclass(frozen=True)
class EgoState:
    position: np.ndarray
    heading: float
    speed: float
    acceleration: float
    extent: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "heading", normalize_angle(self.heading))
        if self.speed < 0:
            raise ValueError(f"ego speed must be >= 0, got {self.speed}")
        if self.extent[0] <= 0 or self.extent[1] <= 0:
            raise ValueError(f"ego extent must be positive, got {self.extent}")


@dataclass(frozen=True)
class TrafficLight:
    """Signal gating one centerline at a stop arc-length.

    Phase cycles green_s then red_s, shifted by offset_s; a non-positive
    red_s means always green, non-positive green_s means always red.
    """

    position: np.ndarray
    centerline_index: int
    stop_arclength: float
    green_s: float
    red_s: float
    offset_s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))

    def is_green(self, t_s: float) -> bool:
        if self.red_s <= 0.0:
            return True
        if self.green_s <= 0.0:
            return False
        phase = math.fmod(t_s + self.offset_s, self.green_s + self.red_s)
        if phase < 0:
            phase += self.green_s + self.red_s
        return phase < self.green_s


@dataclass(frozen=True)
class MapModel:
    centerlines: tuple[np.ndarray, ...]
    speed_limits: tuple[float, ...]
    drivable_area: tuple[np.ndarray, ...]
    crosswalks: tuple[np.ndarray, ...] = ()
    lights: tuple[TrafficLight, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "centerlines", tuple(np.asarray(c, dtype=float) for c in self.centerlines)
        )
        object.__setattr__(
            self, "drivable_area", tuple(np.asarray(p, dtype=float) for p in self.drivable_area)
        )
        object.__setattr__(
            self, "crosswalks", tuple(np.asarray(p, dtype=float) for p in self.crosswalks)
        )
        if len(self.speed_limits) != len(self.centerlines):
            raise ValueError("one speed limit per centerline required")
        for poly in self.drivable_area + self.crosswalks:
            if not is_simple_ccw_polygon(poly):
                raise ValueError("map polygons must be simple with CCW vertices")
        for line in self.centerlines:
            if line.ndim != 2 or line.shape[0] < 2 or line.shape[1] != 2:
                raise ValueError("centerlines must be (V,2) with V >= 2")
            for v in line:
                if not self.contains_point(v):
                    raise ValueError("centerline vertex outside drivable area")

    def contains_point(self, p: np.ndarray) -> bool:
        return any(point_in_polygon(p, poly) for poly in self.drivable_area)

    def in_crosswalk(self, p: np.ndarray) -> bool:
        return any(point_in_polygon(p, poly) for poly in self.crosswalks)


@dataclass(frozen=True)
class Plan:
    """Candidate ego trajectory: H future (position, heading, speed) states."""

    positions: np.ndarray  # (H, 2)
    headings: np.ndarray  # (H,)
    speeds: np.ndarray  # (H,)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        hdg = np.asarray(self.headings, dtype=float)
        spd = np.asarray(self.speeds, dtype=float)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "headings", hdg)
        object.__setattr__(self, "speeds", spd)
        if pos.shape != (HORIZON, 2) or hdg.shape != (HORIZON,) or spd.shape != (HORIZON,):
            raise ValueError(f"plan must have exactly H={HORIZON} states")
        if not (np.isfinite(pos).all() and np.isfinite(hdg).all() and np.isfinite(spd).all()):
            raise ValueError("plan states must be finite")
        step = np.linalg.norm(np.diff(pos, axis=0), axis=1)
        bound = (np.maximum(spd[:-1], spd[1:]) + ACCEL_BOUND * DT) * DT
        if np.any(step > bound + 1e-9):
            raise ValueError("consecutive plan positions inconsistent with speeds")


@dataclass(frozen=True)
class JointPrediction:
    """One sampled joint future: positions for all non-ego agents over H steps."""

    positions: np.ndarray  # (A, H, 2)
    agent_ids: tuple[int, ...]
    valid: np.ndarray  # (A,) bool

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        valid = np.asarray(self.valid, dtype=bool)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "valid", valid)
        n = pos.shape[0]
        if pos.ndim != 3 or pos.shape[1] != HORIZON or pos.shape[2] != 2:
            raise ValueError(f"positions must be (A, H={HORIZON}, 2)")
        if len(self.agent_ids) != n or valid.shape != (n,):
            raise ValueError("agent_ids/valid length must match positions")
        if n and not np.isfinite(pos[valid]).all():
            raise ValueError("valid prediction positions must be finite")

    @property
    def num_valid(self) -> int:
        return int(self.valid.sum())


@dataclass(frozen=True)
class SceneContext:
    """Conditioning input: ego/agent history windows plus the map."""

    ego_history: tuple[EgoState, ...]  # length HISTORY, oldest first
    agent_histories: tuple[tuple[AgentState, ...], ...]  # per agent, length HISTORY
    agent_valid: np.ndarray  # one flag per agent
    map_model: MapModel
    time_index: int

    def __post_init__(self):
        object.__setattr__(self, "agent_valid", np.asarray(self.agent_valid, dtype=bool))
        if len(self.ego_history) != HISTORY:
            raise ValueError(f"ego history must have T_h={HISTORY} states")
        for hist in self.agent_histories:
            if len(hist) != HISTORY:
                raise ValueError(f"agent histories must have T_h={HISTORY} states")
        if len(self.agent_histories) > MAX_AGENTS:
            raise ValueError(f"at most A_max={MAX_AGENTS} agents supported")
        if self.agent_valid.shape != (len(self.agent_histories),):
            raise ValueError("agent_valid length must match agent_histories")

    @property
    def ego(self) -> EgoState:
        return self.ego_history[-1]

    @property
    def agents(self) -> tuple[AgentState, ...]:
        return tuple(h[-1] for h in self.agent_histories)


# ---------------------------------------------------------------------------
# Oriented-box collision (separating axis test)
# ---------------------------------------------------------------------------


def obb_corners(center: np.ndarray, heading: float, extent: tuple[float, float]) -> np.ndarray:
    """Corners of an oriented rectangle, CCW order, shape (4, 2)."""
    c, s = math.cos(heading), math.sin(heading)
    hl, hw = extent[0] / 2.0, extent[1] / 2.0
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    rot = np.array([[c, -s], [s, c]])
    return np.asarray(center, dtype=float) + local @ rot.T


def obb_collision(
    center_a: np.ndarray,
    heading_a: float,
    extent_a: tuple[float, float],
    center_b: np.ndarray,
    heading_b: float,
    extent_b: tuple[float, float],
) -> bool:
    """True iff the two oriented rectangles overlap (touching counts)."""
    ca = obb_corners(center_a, heading_a, extent_a)
    cb = obb_corners(center_b, heading_b, extent_b)
    for boxes in ((ca, cb), (cb, ca)):
        edges = boxes[0][[1, 2]] - boxes[0][[0, 1]]
        for edge in edges:
            axis = np.array([-edge[1], edge[0]])
            pa = ca @ axis
            pb = cb @ axis
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


# ---------------------------------------------------------------------------
# Polygon predicates
# ---------------------------------------------------------------------------

_EDGE_EPS = 1e-9


def _on_segment(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> bool:
    ab = b - a
    ap = p - a
    seg_len2 = float(ab @ ab)
    if seg_len2 == 0.0:
        return bool(np.linalg.norm(ap) <= _EDGE_EPS)
    t = float(ap @ ab) / seg_len2
    t = min(1.0, max(0.0, t))
    return bool(np.linalg.norm(a + t * ab - p) <= _EDGE_EPS)


def point_in_polygon(p: np.ndarray, poly: np.ndarray) -> bool:
    """Ray-casting test; points on the boundary count as inside."""
    p = np.asarray(p, dtype=float)
    poly = np.asarray(poly, dtype=float)
    n = poly.shape[0]
    inside = False
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if _on_segment(p, a, b):
            return True
        # half-open edge rule avoids double-counting vertices
        if (a[1] > p[1]) != (b[1] > p[1]):
            x_cross = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0])
            if x_cross > p[0]:
                inside = not inside
    return inside


def polygon_area(poly: np.ndarray) -> float:
    """Signed shoelace area (positive for CCW)."""
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_properly_intersect(a, b, c, d) -> bool:
    def orient(p, q, r):
        v = cross2(q - p, r - p)
        return 0 if abs(v) < 1e-12 else (1 if v > 0 else -1)

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def is_simple_ccw_polygon(poly: np.ndarray) -> bool:
    poly = np.asarray(poly, dtype=float)
    n = poly.shape[0]
    if n < 3 or polygon_area(poly) <= 0:
        return False
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_properly_intersect(
                poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]
            ):
                return False
    return True


# ---------------------------------------------------------------------------
# Polyline projection and sampling
# ---------------------------------------------------------------------------


def polyline_arclengths(line: np.ndarray) -> np.ndarray:
    """Cumulative arc length at each vertex, starting at 0."""
    seg = np.linalg.norm(np.diff(line, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def project_to_centerline(p: np.ndarray, line: np.ndarray) -> tuple[float, float]:
    """Project a point onto a polyline.

    Returns (arc length of the closest point, signed lateral offset with
    left-of-travel positive). Equidistant candidates resolve to the smaller
    arc length.
    """
    p = np.asarray(p, dtype=float)
    line = np.asarray(line, dtype=float)
    if line.shape[0] < 2:
        raise ValueError("polyline needs at least 2 vertices")
    cum = polyline_arclengths(line)
    best = None
    for i in range(line.shape[0] - 1):
        a, b = line[i], line[i + 1]
        ab = b - a
        seg_len2 = float(ab @ ab)
        if seg_len2 == 0.0:
            continue
        t = min(1.0, max(0.0, float((p - a) @ ab) / seg_len2))
        proj = a + t * ab
        d2 = float((p - proj) @ (p - proj))
        s = cum[i] + t * math.sqrt(seg_len2)
        if best is None or d2 < best[0] - 1e-12:
            direction = ab / math.sqrt(seg_len2)
            side = cross2(direction, p - proj)
            # at clamped endpoints the cross product only captures the
            # perpendicular component; keep magnitude = true distance
            lat = math.copysign(math.sqrt(d2), side) if side != 0.0 else math.sqrt(d2)
            best = (d2, s, lat)
    if best is None:
        raise ValueError("degenerate polyline (zero length)")
    return best[1], best[2]


def point_at_arclength(line: np.ndarray, s: float) -> tuple[np.ndarray, float]:
    """Point and tangent heading at arc length s (clamped to the line)."""
    line = np.asarray(line, dtype=float)
    cum = polyline_arclengths(line)
    s = min(max(s, 0.0), float(cum[-1]))
    i = int(np.searchsorted(cum, s, side="right")) - 1
    i = min(max(i, 0), line.shape[0] - 2)
    seg = line[i + 1] - line[i]
    seg_len = float(np.linalg.norm(seg))
    if seg_len == 0.0:
        return line[i].copy(), 0.0
    t = (s - cum[i]) / seg_len
    heading = math.atan2(seg[1], seg[0])
    return line[i] + t * seg, heading


# ---------------------------------------------------------------------------
# Constant-velocity time-to-collision (multi-circle body approximation)
# ---------------------------------------------------------------------------


def body_circles(center: np.ndarray, heading: float, extent: tuple[float, float]) -> tuple[np.ndarray, float]:
    """Approximate an oriented box by circles along its length axis.

    Returns (circle centers (k,2), radius). Elongated bodies get three
    circles, compact ones a single circle.
    """
    length, width = extent
    r = 0.55 * width
    if length < 1.5 * width:
        return np.asarray(center, dtype=float)[None, :], max(r, 0.55 * length)
    d = unit(heading)
    off = 0.5 * length - r
    centers = np.asarray(center, dtype=float) + np.outer([-off, 0.0, off], d)
    return centers, r


def circle_ttc(
    p_a: np.ndarray,
    v_a: np.ndarray,
    r_a: float,
    p_b: np.ndarray,
    v_b: np.ndarray,
    r_b: float,
) -> float:
    """First t >= 0 with the moving circles in contact, or inf."""
    dp = np.asarray(p_b, dtype=float) - np.asarray(p_a, dtype=float)
    dv = np.asarray(v_b, dtype=float) - np.asarray(v_a, dtype=float)
    rr = r_a + r_b
    c = float(dp @ dp) - rr * rr
    if c <= 0.0:
        return 0.0
    a = float(dv @ dv)
    b = 2.0 * float(dp @ dv)
    if a < 1e-12:
        return math.inf
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return math.inf
    t = (-b - math.sqrt(disc)) / (2.0 * a)
    return t if t >= 0.0 else math.inf


def body_ttc(
    pose_a: tuple[np.ndarray, float, tuple[float, float]],
    vel_a: np.ndarray,
    pose_b: tuple[np.ndarray, float, tuple[float, float]],
    vel_b: np.ndarray,
) -> float:
    """Min constant-velocity TTC between two oriented bodies (circle model)."""
    ca, ra = body_circles(*pose_a)
    cb, rb = body_circles(*pose_b)
    best = math.inf
    for pa in ca:
        for pb in cb:
            best = min(best, circle_ttc(pa, vel_a, ra, pb, vel_b, rb))
    return best


def world_to_frame(points: np.ndarray, origin: np.ndarray, heading: float) -> np.ndarray:
    """Rigidly map world points into the frame at origin/heading."""
    c, s = math.cos(heading), math.sin(heading)
    rot = np.array([[c, s], [-s, c]])
    return (np.asarray(points, dtype=float) - np.asarray(origin, dtype=float)) @ rot.T


def frame_to_world(points: np.ndarray, origin: np.ndarray, heading: float) -> np.ndarray:
    c, s = math.cos(heading), math.sin(heading)
    rot = np.array([[c, -s], [s, c]])
    return np.asarray(points, dtype=float) @ rot.T + np.asarray(origin, dtype=float)
