import math
import random

import pytest

from featurekit import Feature, Geometry, make_collection
from featurekit.errors import EmptySunList, MissingHeight
from featurekit.shadow import (
    SunDirection,
    ray_triangle,
    resample_polyline,
    run_shadow_kernel,
    sun_from_azimuth_altitude,
)

from reference import ref_segment_shadow_hours


def building(x0=0.0, y0=0.0, size=1.0, height=10.0, fid=100):
    ring = [(x0, y0), (x0 + size, y0), (x0 + size, y0 + size),
            (x0, y0 + size), (x0, y0)]
    return Feature(fid, Geometry("Polygon", [ring]), {"height": height})


def segment(fid, pts):
    return Feature(fid, Geometry("Polyline", pts))


def sun(dx, dy, dz, label=""):
    n = math.sqrt(dx * dx + dy * dy + dz * dz)
    return SunDirection(dx / n, dy / n, dz / n, label)


ZENITH = SunDirection(0.0, 0.0, 1.0, "zenith")


class TestRayTriangle:
    TRI = ((0.0, 0.0, 5.0), (10.0, 0.0, 5.0), (0.0, 10.0, 5.0))

    def test_hit(self):
        t = ray_triangle((1.0, 1.0, 0.0), (0.0, 0.0, 1.0), *self.TRI)
        assert t == pytest.approx(5.0)

    def test_miss(self):
        assert ray_triangle((9.0, 9.0, 0.0), (0.0, 0.0, 1.0), *self.TRI) is None

    def test_behind_origin(self):
        assert ray_triangle((1.0, 1.0, 9.0), (0.0, 0.0, 1.0), *self.TRI) is None

    def test_parallel(self):
        assert ray_triangle((1.0, 1.0, 0.0), (1.0, 0.0, 0.0), *self.TRI) is None

    def test_epsilon_guard(self):
        t = ray_triangle((1.0, 1.0, 5.0 - 1e-12), (0.0, 0.0, 1.0), *self.TRI)
        assert t is None


class TestResample:
    def test_endpoints_always_included(self):
        samples = resample_polyline([(0, 0), (50, 0)], 20.0)
        assert samples[0] == (0.0, 0.0)
        assert samples[-1] == (50.0, 0.0)
        assert samples == [(0.0, 0.0), (20.0, 0.0), (40.0, 0.0), (50.0, 0.0)]

    def test_exact_multiple(self):
        samples = resample_polyline([(0, 0), (40, 0)], 20.0)
        assert samples == [(0.0, 0.0), (20.0, 0.0), (40.0, 0.0)]

    def test_multi_segment_arc_length(self):
        samples = resample_polyline([(0, 0), (10, 0), (10, 10)], 8.0)
        assert samples[0] == (0.0, 0.0)
        assert samples[1] == (8.0, 0.0)
        assert samples[2] == (10.0, 6.0)
        assert samples[-1] == (10.0, 10.0)

    def test_short_segment(self):
        samples = resample_polyline([(0, 0), (5, 0)], 20.0)
        assert samples == [(0.0, 0.0), (5.0, 0.0)]


class TestShadowKernel:
    def test_zenith_sun_zero_exact(self):
        segments = make_collection("roads", [
            segment(1, [(3.0, 0.0), (3.0, 1.0)])])
        out = run_shadow_kernel(segments, building(), [ZENITH],
                                sample_spacing=0.25)
        assert out.get(1).get_path("shadow.hours") == 0.0
        assert out.get(1).get_path("shadow.fraction") == 0.0

    def test_low_western_sun_blocks_east_segment(self):
        # unit-square building height 10 at origin; segment 2 m east;
        # sun low in the west so rays from the segment pass the prism
        segments = make_collection("roads", [
            segment(1, [(3.0, 0.1), (3.0, 0.9)])])
        out = run_shadow_kernel(segments, building(), [sun(-1, 0, 0.1)],
                                sample_spacing=0.25)
        assert out.get(1).get_path("shadow.hours") == 1.0

    def test_fraction_one_of_three(self):
        segments = make_collection("roads", [
            segment(1, [(3.0, 0.1), (3.0, 0.9)])])
        suns = [sun(-1, 0, 0.1), ZENITH, sun(1, 0, 0.1)]
        out = run_shadow_kernel(segments, building(), suns,
                                sample_spacing=0.25)
        assert out.get(1).get_path("shadow.hours") == 1.0
        assert out.get(1).get_path("shadow.fraction") == pytest.approx(1 / 3)

    def test_sample_under_building_is_shadowed(self):
        segments = make_collection("roads", [
            segment(1, [(0.2, 0.5), (0.8, 0.5)])])
        out = run_shadow_kernel(segments, building(), [ZENITH],
                                sample_spacing=0.25)
        assert out.get(1).get_path("shadow.hours") == 1.0

    def test_empty_sun_list(self):
        segments = make_collection("roads", [segment(1, [(0, 0), (1, 0)])])
        with pytest.raises(EmptySunList):
            run_shadow_kernel(segments, building(), [])

    def test_missing_height(self):
        b = Feature(1, building().geometry, {})
        segments = make_collection("roads", [segment(1, [(0, 0), (1, 0)])])
        with pytest.raises(MissingHeight):
            run_shadow_kernel(segments, b, [ZENITH])

    def test_unit_sun_enforced(self):
        with pytest.raises(ValueError):
            SunDirection(1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            SunDirection(0.0, 1.0, 0.0)

    def test_azimuth_altitude_helper(self):
        s = sun_from_azimuth_altitude(90.0, 45.0)
        assert s.dx == pytest.approx(math.cos(math.radians(45)))
        assert s.dy == pytest.approx(0.0, abs=1e-12)
        assert s.dz == pytest.approx(math.sin(math.radians(45)))

    def test_parallel_equals_sequential(self):
        rng = random.Random(5)
        segs = [segment(i + 1, [(rng.uniform(-8, 8), rng.uniform(-8, 8)),
                                (rng.uniform(-8, 8), rng.uniform(-8, 8))])
                for i in range(40)]
        segments = make_collection("roads", segs)
        suns = [sun(-1, 0.3, 0.2), sun(0.5, -1, 0.4), ZENITH]
        seq = run_shadow_kernel(segments, building(size=4.0), suns,
                                sample_spacing=1.0, workers=1)
        par = run_shadow_kernel(segments, building(size=4.0), suns,
                                sample_spacing=1.0, workers=6)
        for a, b in zip(seq, par):
            assert a.attributes == b.attributes


def random_placement(rng):
    size = rng.uniform(2.0, 8.0)
    height = rng.uniform(3.0, 40.0)
    b = building(rng.uniform(-3, 3), rng.uniform(-3, 3), size, height)
    # segment somewhere in the building's neighborhood
    cx = rng.uniform(-2, 2) + size * rng.choice([-1.2, 1.2, 0.0])
    cy = rng.uniform(-2, 2) + size * rng.choice([-1.2, 1.2])
    angle = rng.uniform(0, 2 * math.pi)
    half = rng.uniform(2.0, 10.0)
    p1 = (cx - half * math.cos(angle), cy - half * math.sin(angle))
    p2 = (cx + half * math.cos(angle), cy + half * math.sin(angle))
    return b, segment(1, [p1, p2])


def test_matches_ray_march_oracle_on_random_placements():
    rng = random.Random(20260808)
    for trial in range(50):
        b, seg = random_placement(rng)
        altitude = rng.uniform(5, 70)
        azimuth = rng.uniform(0, 360)
        s = sun_from_azimuth_altitude(azimuth, altitude)
        segments = make_collection("roads", [seg])
        out = run_shadow_kernel(segments, b, [s], sample_spacing=2.0)
        expected = ref_segment_shadow_hours(
            seg.geometry.coordinates, b.geometry.coordinates,
            b.attributes["height"], [s], spacing=2.0)
        assert out.get(1).get_path("shadow.hours") == float(expected), \
            f"trial {trial}"


def test_monotone_in_sun_directions():
    rng = random.Random(77)
    for _ in range(100):
        b, seg = random_placement(rng)
        segments = make_collection("roads", [seg])
        suns = [sun_from_azimuth_altitude(rng.uniform(0, 360),
                                          rng.uniform(5, 85))
                for _ in range(rng.randint(1, 5))]
        extra = suns + [sun_from_azimuth_altitude(rng.uniform(0, 360),
                                                  rng.uniform(5, 85))]
        base = run_shadow_kernel(segments, b, suns, sample_spacing=2.0)
        more = run_shadow_kernel(segments, b, extra, sample_spacing=2.0)
        assert (more.get(1).get_path("shadow.hours")
                >= base.get(1).get_path("shadow.hours"))
