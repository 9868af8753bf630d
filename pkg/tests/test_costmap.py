import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from avor.costmap import (
    CostParams,
    INVALID_VCC,
    V_LAT_MIN,
    build_dynamic_costmap,
    build_static_costmap,
    compose_costmap,
    compute_vcc,
)
from avor.errors import GridMismatchError
from avor.grid import GridField, GridSpec
from avor.scenario import RoadGeometry, StaticObject

from conftest import state

PARAMS = CostParams()


def road(**kw):
    base = dict(lane_count=3, lane_width=3.5, ego_lane_index=0,
                road_length=500.0, static_objects=())
    base.update(kw)
    return RoadGeometry(**base)


def spec(res=0.25, half=12.0, ahead=40.0):
    return GridSpec(origin_x=0.0, origin_y=-half, res=res,
                    nx=int(ahead / res) + 1, ny=int(2 * half / res) + 1)


class TestStaticLayer:
    def test_cell_classes(self):
        cut = state(x=20.0, y=3.5)
        s = spec()
        fld = build_static_costmap(road(), cut, [], "O", s, PARAMS)
        at = lambda x, y: fld.values[s.index_of(x, y)]
        assert at(5.0, 0.0) == 0.0                       # ego lane center
        assert at(5.0, -5.0) == PARAMS.cost_offroad      # below road edge
        assert at(5.0, 1.75) == PARAMS.cost_lane_marking
        assert at(20.0, 3.5) == PARAMS.cost_car          # inside footprint
        assert at(20.0, 5.0) == 0.0                      # just past the car

    def test_population_filters_actors(self):
        cut = state(x=20.0, y=3.5)
        other = state(x=10.0, y=7.0)
        s = spec()
        f_o = build_static_costmap(road(), cut, [other], "O", s)
        f_a = build_static_costmap(road(), cut, [other], "A", s)
        assert f_o.values[s.index_of(10.0, 7.0)] == 0.0
        assert f_a.values[s.index_of(10.0, 7.0)] == PARAMS.cost_car

    def test_population_monotone(self):
        objs = (StaticObject(np.array([[5.0, 9.0], [15.0, 9.0], [15.0, 11.0],
                                       [5.0, 11.0]]), "building"),)
        cut = state(x=20.0, y=3.5)
        other = state(x=10.0, y=7.0)
        s = spec()
        fields = [
            build_static_costmap(road(static_objects=objs), cut, [other], pop, s)
            for pop in ("O", "A", "A+R")
        ]
        assert np.all(fields[0].values <= fields[1].values)
        assert np.all(fields[1].values <= fields[2].values)
        assert fields[2].values[s.index_of(10.0, 10.0)] == PARAMS.cost_building

    def test_rotated_footprint(self):
        cut = state(x=20.0, y=0.0, heading=math.pi / 2 * 0.999)
        s = spec()
        fld = build_static_costmap(road(), cut, [], "O", s)
        # rotated ~90 degrees: long axis now spans y, narrow axis spans x
        assert fld.values[s.index_of(20.0, 2.0)] == PARAMS.cost_car
        assert fld.values[s.index_of(22.0, 0.0)] == 0.0

    def test_overlap_resolves_to_max(self):
        # car parked across a lane marking: marking cells take the car cost
        cut = state(x=20.0, y=1.75)
        s = spec()
        fld = build_static_costmap(road(), cut, [], "O", s)
        assert fld.values[s.index_of(20.0, 1.75)] == PARAMS.cost_car

    def test_no_cutin_is_allowed(self):
        fld = build_static_costmap(road(), None, [], "O", spec())
        assert fld.values.max() == PARAMS.cost_offroad


class TestVcc:
    def test_perpendicular_cut_basic(self):
        ego = state(v_lon=10.0)
        cut = state(x=20.0, y=3.5, v_lon=12.0, v_lat=-1.0)
        vcc = compute_vcc(ego, cut)
        assert vcc.valid
        assert vcc.x == pytest.approx(20.0)
        assert vcc.y == pytest.approx(0.0)
        assert vcc.d_vcc == pytest.approx(3.5)
        assert vcc.tta == pytest.approx(3.5)

    def test_diverging_motion_is_invalid(self):
        ego = state(v_lon=10.0)
        cut = state(x=20.0, y=3.5, v_lon=12.0, v_lat=+1.0)
        assert not compute_vcc(ego, cut).valid

    def test_below_lateral_speed_gate(self):
        ego = state(v_lon=10.0)
        cut = state(x=20.0, y=3.5, v_lon=12.0, v_lat=-0.8 * V_LAT_MIN)
        assert not compute_vcc(ego, cut).valid

    def test_intersection_behind_ego_is_invalid(self):
        ego = state(x=50.0, v_lon=10.0)
        cut = state(x=20.0, y=3.5, v_lon=12.0, v_lat=-1.0)
        assert not compute_vcc(ego, cut).valid

    def test_lateral_direction_uses_component_perpendicular_to_ego(self):
        # cut-in velocity has a big along-ego part; only the perpendicular
        # projection defines the lateral ray and the approach speed
        ego = state(v_lon=10.0)
        cut = state(x=20.0, y=4.0, v_lon=15.0, v_lat=-2.0)
        vcc = compute_vcc(ego, cut)
        assert vcc.valid
        assert vcc.x == pytest.approx(20.0)
        assert vcc.d_vcc == pytest.approx(4.0)
        assert vcc.tta == pytest.approx(4.0 / 2.0)

    def test_rigid_transform_equivariance(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            ego = state(x=rng.uniform(-20, 20), y=rng.uniform(-5, 5),
                        heading=rng.uniform(-1, 1), v_lon=rng.uniform(5, 20))
            cut = state(x=ego.x + rng.uniform(5, 30), y=ego.y + rng.uniform(2, 6),
                        heading=0.3, v_lon=rng.uniform(5, 20),
                        v_lat=rng.uniform(-3, -0.2))
            base = compute_vcc(ego, cut)
            dx, dy = 123.4, -56.7
            import dataclasses
            shifted = compute_vcc(
                dataclasses.replace(ego, x=ego.x + dx, y=ego.y + dy),
                dataclasses.replace(cut, x=cut.x + dx, y=cut.y + dy),
            )
            assert shifted.valid == base.valid
            if base.valid:
                assert shifted.x == pytest.approx(base.x + dx, abs=1e-9)
                assert shifted.y == pytest.approx(base.y + dy, abs=1e-9)
                assert shifted.tta == pytest.approx(base.tta, abs=1e-9)

    def test_linear_solve_oracle(self):
        # independent oracle: solve ego + t*e = cut + u*u_hat as a 2x2 system
        rng = np.random.default_rng(11)
        checked = 0
        for _ in range(300):
            ego = state(x=rng.uniform(-50, 50), y=rng.uniform(-50, 50),
                        heading=rng.uniform(-1.5, 1.5), v_lon=rng.uniform(1, 25))
            cut = state(x=rng.uniform(-50, 50), y=rng.uniform(-50, 50),
                        heading=rng.uniform(-1.5, 1.5),
                        v_lon=rng.uniform(1, 25), v_lat=rng.uniform(-4, 4))
            vcc = compute_vcc(ego, cut)
            e = np.array([math.cos(ego.heading), math.sin(ego.heading)])
            v = np.array([cut.v_lon, cut.v_lat])
            p = v - (v @ e) * e
            if np.linalg.norm(p) < V_LAT_MIN:
                assert not vcc.valid
                continue
            u_hat = p / np.linalg.norm(p)
            A = np.column_stack([e, -u_hat])
            b = np.array([cut.x - ego.x, cut.y - ego.y])
            if abs(np.linalg.det(A)) < 1e-12:
                assert not vcc.valid
                continue
            t, u = np.linalg.solve(A, b)
            if t < 0 or u <= 0:
                assert not vcc.valid
                continue
            checked += 1
            point = np.array([cut.x, cut.y]) + u * u_hat
            assert vcc.valid
            assert vcc.x == pytest.approx(point[0], abs=1e-9)
            assert vcc.y == pytest.approx(point[1], abs=1e-9)
            assert vcc.d_vcc == pytest.approx(u, abs=1e-9)
            assert vcc.tta == pytest.approx(u / np.linalg.norm(p), abs=1e-9)
        assert checked > 30  # the sweep must actually exercise valid geometry


class TestDynamicLayer:
    def test_invalid_vcc_gives_zero_field(self):
        fld = build_dynamic_costmap(INVALID_VCC, spec())
        assert np.all(fld.values == 0.0)

    def test_single_cell_impulse_value(self):
        ego = state(v_lon=10.0)
        cut = state(x=20.0, y=3.5, v_lon=12.0, v_lat=-1.4)
        vcc = compute_vcc(ego, cut)
        s = spec()
        fld = build_dynamic_costmap(vcc, s, PARAMS)
        nz = np.argwhere(fld.values > 0)
        assert len(nz) == 1
        assert tuple(nz[0]) == s.index_of(vcc.x, vcc.y)
        assert fld.values[tuple(nz[0])] == pytest.approx(
            PARAMS.cost_car / vcc.tta)

    def test_cost_monotone_in_lateral_speed(self):
        ego = state(v_lon=10.0)
        s = spec()
        prev = 0.0
        for v_lat in (-0.5, -1.0, -2.0, -3.0):
            cut = state(x=20.0, y=3.5, v_lon=12.0, v_lat=v_lat)
            fld = build_dynamic_costmap(compute_vcc(ego, cut), s, PARAMS)
            peak = fld.values.max()
            assert peak > prev
            prev = peak

    def test_cost_monotone_in_distance(self):
        ego = state(v_lon=10.0)
        s = spec()
        prev = math.inf
        for y in (2.0, 3.5, 6.0, 9.0):
            cut = state(x=20.0, y=y, v_lon=12.0, v_lat=-1.0)
            fld = build_dynamic_costmap(compute_vcc(ego, cut), s, PARAMS)
            peak = fld.values.max()
            assert peak < prev
            prev = peak

    def test_point_outside_grid_is_dropped(self):
        vcc = compute_vcc(state(v_lon=10.0),
                          state(x=300.0, y=3.5, v_lon=12.0, v_lat=-1.0))
        fld = build_dynamic_costmap(vcc, spec(ahead=40.0))
        assert np.all(fld.values == 0.0)


class TestComposition:
    def test_sum_and_immutability(self):
        s = spec(res=1.0, half=3.0, ahead=5.0)
        rng = np.random.default_rng(2)
        a = GridField(s, rng.random((s.nx, s.ny)))
        b = GridField(s, rng.random((s.nx, s.ny)))
        a_copy = a.values.copy()
        stack = compose_costmap(a, b)
        np.testing.assert_allclose(stack.composed.values, a.values + b.values)
        np.testing.assert_array_equal(a.values, a_copy)

    def test_spec_mismatch_raises(self):
        s1 = spec(res=1.0, half=3.0, ahead=5.0)
        s2 = spec(res=0.5, half=3.0, ahead=5.0)
        with pytest.raises(GridMismatchError):
            compose_costmap(GridField(s1, np.zeros((s1.nx, s1.ny))),
                            GridField(s2, np.zeros((s2.nx, s2.ny))))


class TestCostParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            CostParams(cost_offroad=-1.0)
        with pytest.raises(ValueError):
            CostParams(cost_car=100.0, cost_lane_marking=500.0)

    def test_class_costs(self):
        p = CostParams()
        assert p.class_cost("building") == p.cost_building
        assert p.class_cost("tree") == p.cost_tree
        with pytest.raises(KeyError):
            p.class_cost("ufo")
