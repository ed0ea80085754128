import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from madplan.geometry import (
    DT,
    HORIZON,
    Plan,
    frame_to_world,
    normalize_angle,
    obb_collision,
    obb_corners,
    point_at_arclength,
    point_in_polygon,
    polyline_arclengths,
    project_to_centerline,
    world_to_frame,
)


def grid_overlap_oracle(ca, ha, ea, cb, hb, eb, n=200):
    """Dense point-sampling overlap oracle: sample box A's interior on a grid
    and report whether any sample falls inside box B (and vice versa)."""

    def inside(p, center, heading, extent):
        local = world_to_frame(p[None, :], np.asarray(center, float), heading)[0]
        return abs(local[0]) <= extent[0] / 2 and abs(local[1]) <= extent[1] / 2

    def samples(center, heading, extent):
        xs = np.linspace(-extent[0] / 2, extent[0] / 2, n)
        ys = np.linspace(-extent[1] / 2, extent[1] / 2, n)
        grid = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
        return frame_to_world(grid, np.asarray(center, float), heading)

    for p in samples(np.asarray(ca), ha, ea):
        if inside(p, cb, hb, eb):
            return True
    for p in samples(np.asarray(cb), hb, eb):
        if inside(p, ca, ha, ea):
            return True
    return False


class TestObbCollision:
    def test_identical_boxes_overlap(self):
        assert obb_collision((0, 0), 0.3, (2, 1), (0, 0), 0.3, (2, 1))

    def test_disjoint_unit_squares(self):
        assert not obb_collision((0, 0), 0.0, (1, 1), (3, 0), 0.0, (1, 1))

    def test_rotated_pair_matches_grid_oracle(self):
        # expected value frozen from grid_overlap_oracle(n=400): overlapping
        args = ((0.0, 0.0), 0.0, (2.0, 1.0), (1.4, 0.0), math.pi / 2, (2.0, 1.0))
        assert grid_overlap_oracle(*args, n=400) is True
        assert obb_collision(*args)

    def test_touching_counts_as_collision(self):
        assert obb_collision((0, 0), 0.0, (2, 2), (2, 0), 0.0, (2, 2))

    @pytest.mark.parametrize("seed", range(30))
    def test_random_pairs_match_grid_oracle(self, seed):
        rng = np.random.default_rng(seed)
        ca, cb = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
        ha, hb = rng.uniform(-math.pi, math.pi, 2)
        ea = tuple(rng.uniform(0.5, 3.0, 2))
        eb = tuple(rng.uniform(0.5, 3.0, 2))
        got = obb_collision(ca, ha, ea, cb, hb, eb)
        want = grid_overlap_oracle(ca, ha, ea, cb, hb, eb, n=150)
        # grid oracle can narrowly miss grazing contact; tolerate only
        # SAT-true/grid-false right at the boundary
        if got != want:
            assert got and not want
            shrunk = (ea[0] * 0.98, ea[1] * 0.98)
            assert not obb_collision(ca, ha, shrunk, cb, hb, eb) or grid_overlap_oracle(
                ca, ha, ea, cb, hb, eb, n=400
            )

    @given(
        st.floats(-5, 5), st.floats(-5, 5), st.floats(-math.pi, math.pi),
        st.floats(-5, 5), st.floats(-5, 5), st.floats(-math.pi, math.pi),
        st.floats(0.2, 4), st.floats(0.2, 4), st.floats(0.2, 4), st.floats(0.2, 4),
    )
    @settings(max_examples=150, deadline=None)
    def test_symmetric(self, ax, ay, ah, bx, by, bh, al, aw, bl, bw):
        a = ((ax, ay), ah, (al, aw))
        b = ((bx, by), bh, (bl, bw))
        assert obb_collision(*a, *b) == obb_collision(*b, *a)

    @given(
        st.floats(-3, 3), st.floats(-3, 3), st.floats(-math.pi, math.pi),
        st.floats(-3, 3), st.floats(-3, 3), st.floats(-math.pi, math.pi),
        st.floats(-50, 50), st.floats(-50, 50), st.floats(-math.pi, math.pi),
    )
    @settings(max_examples=150, deadline=None)
    def test_rigid_transform_invariance(self, ax, ay, ah, bx, by, bh, tx, ty, rot):
        ea, eb = (2.0, 1.0), (1.5, 0.8)
        before = obb_collision((ax, ay), ah, ea, (bx, by), bh, eb)
        c, s = math.cos(rot), math.sin(rot)
        rmat = np.array([[c, -s], [s, c]])
        pa = rmat @ np.array([ax, ay]) + [tx, ty]
        pb = rmat @ np.array([bx, by]) + [tx, ty]
        after = obb_collision(pa, ah + rot, ea, pb, bh + rot, eb)
        assert before == after

    def test_corners_shape_and_extent(self):
        corners = obb_corners(np.array([1.0, 2.0]), 0.0, (4.0, 2.0))
        assert corners.shape == (4, 2)
        assert np.allclose(corners.max(axis=0), [3.0, 3.0])
        assert np.allclose(corners.min(axis=0), [-1.0, 1.0])


SQUARE = np.array([[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]])
TRIANGLE = np.array([[0.0, 0.0], [6.0, 0.0], [3.0, 5.0]])


class TestPointInPolygon:
    def test_centroid_inside(self):
        assert point_in_polygon(TRIANGLE.mean(axis=0), TRIANGLE)

    def test_far_point_outside(self):
        assert not point_in_polygon(np.array([100.0, 100.0]), SQUARE)

    def test_edge_midpoint_inside(self):
        assert point_in_polygon(np.array([2.0, 0.0]), SQUARE)
        assert point_in_polygon(np.array([4.0, 2.0]), SQUARE)

    def test_vertex_inside(self):
        assert point_in_polygon(np.array([0.0, 0.0]), SQUARE)

    @given(st.floats(-2, 6), st.floats(-2, 6))
    @settings(max_examples=200, deadline=None)
    def test_square_matches_bounds(self, x, y):
        # skip the on-boundary tolerance band where either answer is fine
        assume(min(abs(x), abs(x - 4), abs(y), abs(y - 4)) > 1e-9)
        want = 0 <= x <= 4 and 0 <= y <= 4
        assert point_in_polygon(np.array([x, y]), SQUARE) == want


class TestProjectToCenterline:
    def test_first_vertex(self):
        line = np.array([[0.0, 0.0], [10.0, 0.0]])
        s, lat = project_to_centerline(np.array([0.0, 0.0]), line)
        assert s == 0.0 and lat == 0.0

    def test_axis_aligned(self):
        line = np.array([[0.0, 0.0], [10.0, 0.0]])
        s, lat = project_to_centerline(np.array([4.0, 2.0]), line)
        assert math.isclose(s, 4.0) and math.isclose(lat, 2.0)

    def test_right_side_negative(self):
        line = np.array([[0.0, 0.0], [10.0, 0.0]])
        _, lat = project_to_centerline(np.array([4.0, -2.0]), line)
        assert math.isclose(lat, -2.0)

    def test_corner_tie_breaks_to_smaller_arclength(self):
        # right-angle corner; the query sits on the bisector, equidistant
        line = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]])
        s, _ = project_to_centerline(np.array([9.0, 1.0]), line)
        assert math.isclose(s, 9.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_dense_sampling_oracle(self, seed):
        rng = np.random.default_rng(100 + seed)
        pts = np.cumsum(rng.uniform(-2, 4, size=(5, 2)), axis=0)
        line = pts - pts[0]
        p = rng.uniform(-5, 10, 2)
        s, lat = project_to_centerline(p, line)
        # oracle: densify the polyline and find the nearest sample
        cum = polyline_arclengths(line)
        dense_s = np.linspace(0, cum[-1], 40000)
        dense_pts = np.array([point_at_arclength(line, si)[0] for si in dense_s])
        d = np.linalg.norm(dense_pts - p, axis=1)
        i = int(np.argmin(d))
        assert abs(s - dense_s[i]) < 2e-3 or abs(abs(lat) - d[i]) < 1e-6
        assert math.isclose(abs(lat), d.min(), abs_tol=1e-3)

    @given(st.floats(0.05, 9.95))
    @settings(max_examples=100, deadline=None)
    def test_zero_lateral_iff_on_polyline(self, s):
        line = np.array([[0.0, 0.0], [5.0, 0.0], [5.0, 5.0]])
        p, _ = point_at_arclength(line, s)
        _, lat = project_to_centerline(p, line)
        assert abs(lat) < 1e-9

    def test_off_line_point_has_nonzero_lateral(self):
        line = np.array([[0.0, 0.0], [5.0, 0.0]])
        _, lat = project_to_centerline(np.array([2.0, 0.5]), line)
        assert abs(lat) > 1e-9


class TestFrames:
    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-math.pi, math.pi))
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, x, y, heading):
        origin = np.array([1.0, -2.0])
        p = np.array([[x, y]])
        back = frame_to_world(world_to_frame(p, origin, heading), origin, heading)
        assert np.allclose(back, p, atol=1e-12)

    def test_normalize_angle_range(self):
        for theta in np.linspace(-10, 10, 101):
            w = normalize_angle(theta)
            assert -math.pi < w <= math.pi
            assert math.isclose(math.sin(w), math.sin(theta), abs_tol=1e-12)


class TestPlanInvariants:
    def test_valid_plan_constructs(self):
        speeds = np.full(HORIZON, 2.0)
        xs = np.cumsum(np.full(HORIZON, 2.0 * DT))
        pos = np.stack([xs, np.zeros(HORIZON)], axis=1)
        Plan(pos, np.zeros(HORIZON), speeds)

    def test_teleporting_plan_rejected(self):
        pos = np.zeros((HORIZON, 2))
        pos[5] = [50.0, 0.0]
        with pytest.raises(ValueError):
            Plan(pos, np.zeros(HORIZON), np.zeros(HORIZON))

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            Plan(np.zeros((HORIZON - 1, 2)), np.zeros(HORIZON - 1), np.zeros(HORIZON - 1))
