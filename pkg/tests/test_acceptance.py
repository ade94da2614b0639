"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them). Tolerances are pinned here and
nowhere else."""

import math
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from featurekit import (
    Feature,
    Geometry,
    deserialize,
    make_collection,
    serialize,
    validate_geometry,
)
from featurekit.bench import run_bench, synth_points, synth_polygon_root
from featurekit.compute import make_program, run_analytical
from featurekit.coordination import brush_data_space, brush_map_rect, pick_at_point
from featurekit.core import BoundingBox
from featurekit.expr import linfit
from featurekit.mesh import LayerStyle, build_layer_mesh, export_mesh, import_mesh
from featurekit.overpass import assemble_rings
from featurekit.projection import WGS84_A, project_forward, project_inverse
from featurekit.shadow import run_shadow_kernel, sun_from_azimuth_altitude
from featurekit.spatial import (
    AggregateSpec,
    JoinPredicate,
    point_in_polygon,
    spatial_join,
)
from featurekit.triangulate import ring_vertices, triangulate_polygon

from geomgen import convex_polygon, ring_cycle, shrink_ring, split_ring, \
    star_polygon
from reference import ref_segment_shadow_hours, ref_spatial_join


@contextmanager
def criterion(name):
    try:
        yield
    except Exception:
        print(f"\nACCEPTANCE FAIL: {name}")
        raise
    print(f"\nACCEPTANCE PASS: {name}")


# 1 ---------------------------------------------------------------------------

def test_spatial_join_oracle_equivalence():
    """>= 20 randomized fixtures up to 10k points x 1k polygons, exact
    aggregate equality against the no-index reference, under 60 s."""
    with criterion("spatial-join oracle equivalence (20 fixtures, <60s)"):
        rng = random.Random(1881)
        start = time.perf_counter()
        shapes = [(1000, 10_000), (1000, 10_000)]
        shapes += [(rng.randint(3, 300), rng.randint(100, 4000))
                   for _ in range(18)]
        aggs = [AggregateSpec("count", "n"),
                AggregateSpec("avg", "v", column="value"),
                AggregateSpec("min", "v", column="value"),
                AggregateSpec("max", "v", column="value"),
                AggregateSpec("sum", "v", column="value")]
        for n_roots, n_points in shapes:
            roots = [Feature(i + 1, Geometry("Polygon", [star_polygon(
                rng, n=rng.randint(4, 9), cx=rng.uniform(0, 400),
                cy=rng.uniform(0, 400), rmin=1.0,
                rmax=rng.uniform(2, 12))])) for i in range(n_roots)]
            points = [Feature(i + 1,
                              Geometry("Point", (rng.uniform(-10, 410),
                                                 rng.uniform(-10, 410))),
                              {"value": rng.uniform(-50, 50)})
                      for i in range(n_points)]
            root = make_collection("roots", roots)
            join = make_collection("points", points)
            out = spatial_join(root, join, JoinPredicate("JOIN"), aggs)
            expected = ref_spatial_join(root, join, JoinPredicate("JOIN"),
                                        aggs)
            for f in out.features:
                for spec in aggs:
                    path = f"sjoin.{spec.fn}.{spec.result_field}"
                    assert f.get_path(path) == expected[f.id][path]
        elapsed = time.perf_counter() - start
        print(f"\n  20 fixtures in {elapsed:.1f}s")
        assert elapsed < 60.0


# 2 ---------------------------------------------------------------------------

def test_join_scaling_slope():
    """28 polygons vs 50k..500k points at 10% increments: log-log slope of
    wall time within [0.85, 1.15]. Absolute times are not asserted."""
    with criterion("join scaling slope in [0.85, 1.15] up to 500k points"):
        sizes = [50_000 * k for k in range(1, 11)]
        report = run_bench("join", sizes, reps=3)
        print(f"\n  join slope: {report.slope:.4f}  "
              f"(~{report.per_item_us()[sizes[-1]]:.2f} us/record at 500k, "
              "informational)")
        assert 0.85 <= report.slope <= 1.15


# 3 ---------------------------------------------------------------------------

def test_load_scaling_slope():
    """Ingestion+index over 2k..20k synthetic features: slope in
    [0.85, 1.15]; per-feature cost reported, not asserted."""
    with criterion("load scaling slope in [0.85, 1.15] over 2k..20k"):
        sizes = [2000 * k for k in range(1, 11)]
        report = run_bench("load", sizes, reps=3)
        per_feature_ms = report.mean_ms()[sizes[-1]] / sizes[-1]
        print(f"\n  load slope: {report.slope:.4f}  "
              f"(~{per_feature_ms:.4f} ms/feature at 20k, informational)")
        assert 0.85 <= report.slope <= 1.15


# 4 ---------------------------------------------------------------------------

def test_triangulation_area_conservation():
    """1000 randomized simple polygons, with and without holes: triangle
    areas sum to the shoelace area within 1e-9 relative, no degenerate
    triangles."""
    with criterion("triangulation area conservation (1000 polygons, 1e-9)"):
        rng = random.Random(4242)
        from featurekit.core import signed_area

        def check(rings):
            tris = triangulate_polygon(rings)
            vertices = ring_vertices(rings)
            total = 0.0
            for a, b, c in tris:
                (ax, ay), (bx, by), (cx, cy) = (vertices[i][:2]
                                                for i in (a, b, c))
                area = 0.5 * abs((bx - ax) * (cy - ay)
                                 - (by - ay) * (cx - ax))
                assert area > 1e-12
                total += area
            expected = (abs(signed_area(rings[0]))
                        - sum(abs(signed_area(r)) for r in rings[1:]))
            assert total == pytest.approx(expected, rel=1e-9)

        for _ in range(500):
            check([star_polygon(rng, n=rng.randint(4, 24))])
        for _ in range(250):
            check([convex_polygon(rng, n=rng.randint(3, 24))])
        for _ in range(250):
            outer = star_polygon(rng, n=rng.randint(5, 18))
            check([outer, shrink_ring(outer, rng.uniform(0.2, 0.5))])


# 5 ---------------------------------------------------------------------------

def test_projection_criteria():
    """Round trip within 1e-9 degrees on 1000 points; origin exact;
    antimeridian within 1e-6 m; latitude-45 against the independently
    computed EPSG:3395 value."""
    with criterion("projection: round-trip 1e-9 deg, origin exact, "
                   "antimeridian 1e-6 m, lat-45 oracle"):
        assert project_forward(0.0, 0.0) == (0.0, 0.0)
        x, y = project_forward(180.0, 0.0)
        assert abs(x - WGS84_A * math.pi) < 1e-6
        assert y == 0.0
        # frozen from a 50-digit mpmath evaluation of the isometric
        # latitude, matching the published EPSG:3395 sample
        _, y45 = project_forward(0.0, 45.0)
        assert y45 == pytest.approx(5591295.9185533984, abs=1e-6)
        rng = random.Random(3395)
        for _ in range(1000):
            lon = rng.uniform(-180, 180)
            lat = rng.uniform(-85, 85)
            lon2, lat2 = project_inverse(*project_forward(lon, lat))
            assert abs(lon2 - lon) < 1e-9
            assert abs(lat2 - lat) < 1e-9


# 6 ---------------------------------------------------------------------------

def test_compute_determinism_and_linfit():
    """Parallel runAnalytical bit-identical to sequential on a 100k-feature
    collection for the product program and a linfit program; linfit within
    1e-9 relative of a least-squares oracle on 1000 random series."""
    with criterion("compute determinism on 100k features + linfit oracle"):
        rng = random.Random(99)
        feats = []
        for i in range(100_000):
            feats.append(Feature(
                i + 1, Geometry("Point", (0.0, 0.0)),
                {"area": rng.uniform(1, 1000), "height": rng.uniform(1, 300),
                 "xs": [float(k) for k in range(6)],
                 "ys": [rng.uniform(0, 50) for _ in range(6)]}))
        collection = make_collection("city", feats)

        product = make_program("x * y", {"x": "area", "y": "height"},
                               ["volume"])
        fit = make_program("linfit(xs, ys)", {"xs": "xs", "ys": "ys"},
                           ["slope", "intercept"], array_vars={"xs", "ys"})
        for program in (product, fit):
            seq = run_analytical(collection, program, workers=1)
            par = run_analytical(collection, program, workers=8)
            assert serialize(seq) == serialize(par)  # bit-identical

        oracle_rng = np.random.default_rng(7)
        for _ in range(1000):
            n = int(oracle_rng.integers(3, 40))
            xs = np.sort(oracle_rng.normal(0, 10, n))
            while np.ptp(xs) < 0.5:
                xs = np.sort(oracle_rng.normal(0, 10, n))
            ys = oracle_rng.normal(0, 10, n)
            slope, intercept = linfit(xs.tolist(), ys.tolist())
            want = np.polyfit(xs, ys, 1)
            assert slope == pytest.approx(want[0], rel=1e-9, abs=1e-12)
            assert intercept == pytest.approx(want[1], rel=1e-9, abs=1e-12)


# 7 ---------------------------------------------------------------------------

def test_shadow_kernel_criteria():
    """Zenith zero exact; 50 randomized placements against the fine-sampled
    ray-march oracle; monotone in appended sun directions on 100 cases."""
    with criterion("shadow kernel: zenith exact, 50-placement oracle, "
                   "monotonicity x100"):
        def building(rng):
            size = rng.uniform(2.0, 8.0)
            height = rng.uniform(3.0, 40.0)
            x0, y0 = rng.uniform(-3, 3), rng.uniform(-3, 3)
            ring = [(x0, y0), (x0 + size, y0), (x0 + size, y0 + size),
                    (x0, y0 + size), (x0, y0)]
            return Feature(1, Geometry("Polygon", [ring]),
                           {"height": height}), size

        def segment(rng, size):
            cx = rng.uniform(-2, 2) + size * rng.choice([-1.2, 1.2, 0.0])
            cy = rng.uniform(-2, 2) + size * rng.choice([-1.2, 1.2])
            angle = rng.uniform(0, 2 * math.pi)
            half = rng.uniform(2.0, 10.0)
            return Feature(1, Geometry("Polyline", [
                (cx - half * math.cos(angle), cy - half * math.sin(angle)),
                (cx + half * math.cos(angle), cy + half * math.sin(angle))]))

        zenith = sun_from_azimuth_altitude(0.0, 90.0 - 1e-9)
        rng = random.Random(2468)
        b, _ = building(rng)
        away = make_collection("roads", [
            Feature(1, Geometry("Polyline", [(500.0, 500.0),
                                             (510.0, 500.0)]))])
        out = run_shadow_kernel(away, b, [sun_from_azimuth_altitude(0, 89.0)],
                                sample_spacing=2.0)
        assert out.get(1).get_path("shadow.hours") == 0.0

        for trial in range(50):
            b, size = building(rng)
            seg = segment(rng, size)
            sun = sun_from_azimuth_altitude(rng.uniform(0, 360),
                                            rng.uniform(5, 70))
            segments = make_collection("roads", [seg])
            got = run_shadow_kernel(segments, b, [sun], sample_spacing=2.0)
            want = ref_segment_shadow_hours(
                seg.geometry.coordinates, b.geometry.coordinates,
                b.attributes["height"], [sun], spacing=2.0)
            assert got.get(1).get_path("shadow.hours") == float(want), \
                f"placement {trial}"

        for _ in range(100):
            b, size = building(rng)
            seg = segment(rng, size)
            segments = make_collection("roads", [seg])
            suns = [sun_from_azimuth_altitude(rng.uniform(0, 360),
                                              rng.uniform(5, 85))
                    for _ in range(rng.randint(1, 4))]
            extra = suns + [sun_from_azimuth_altitude(
                rng.uniform(0, 360), rng.uniform(5, 85))]
            hours = run_shadow_kernel(segments, b, suns, sample_spacing=2.0
                                      ).get(1).get_path("shadow.hours")
            hours_more = run_shadow_kernel(segments, b, extra,
                                           sample_spacing=2.0
                                           ).get(1).get_path("shadow.hours")
            assert hours_more >= hours


# 8 ---------------------------------------------------------------------------

def test_interaction_model_criteria():
    """1000 random (collection, event) pairs: selections stay inside the
    collection's id space; picking matches the point-in-geometry oracle;
    data brushes match a linear scan; map brushes are monotone."""
    with criterion("interaction model: subset invariant, pick/brush "
                   "oracles, brush monotonicity (1000 events)"):
        rng = random.Random(555)

        def random_collection():
            feats = []
            fid = 1
            for _ in range(rng.randint(1, 12)):
                kind = rng.choice(["poly", "point", "line"])
                attrs = {"a": rng.uniform(0, 100), "b": rng.uniform(0, 1)}
                if rng.random() < 0.2:
                    attrs.pop("b")
                if kind == "poly":
                    g = Geometry("Polygon", [star_polygon(
                        rng, n=rng.randint(4, 9), cx=rng.uniform(0, 60),
                        cy=rng.uniform(0, 60))])
                elif kind == "point":
                    g = Geometry("Point", (rng.uniform(0, 60),
                                           rng.uniform(0, 60)))
                else:
                    g = Geometry("Polyline",
                                 [(rng.uniform(0, 60), rng.uniform(0, 60))
                                  for _ in range(rng.randint(2, 5))])
                feats.append(Feature(fid, g, attrs))
                fid += 1
            return make_collection("layer", feats)

        def seg_distance(px, py, a, b):
            ax, ay, bx, by = a[0], a[1], b[0], b[1]
            dx, dy = bx - ax, by - ay
            n2 = dx * dx + dy * dy
            t = 0.0 if n2 == 0 else max(
                0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / n2))
            return math.hypot(px - ax - t * dx, py - ay - t * dy)

        for _ in range(1000):
            c = random_collection()
            ids = c.ids()
            x, y = rng.uniform(-10, 70), rng.uniform(-10, 70)
            tol = rng.choice([0.0, rng.uniform(0.1, 3.0)])
            picked = pick_at_point(c, x, y, tolerance=tol)
            assert picked.ids <= ids
            expected = set()
            for f in c.features:
                g = f.geometry
                if g.kind == "Polygon":
                    if point_in_polygon((x, y), g):
                        expected.add(f.id)
                elif g.kind == "Point":
                    if math.hypot(g.coordinates[0] - x,
                                  g.coordinates[1] - y) <= tol:
                        expected.add(f.id)
                else:
                    if any(seg_distance(x, y, a, b) <= tol for a, b in
                           zip(g.coordinates, g.coordinates[1:])):
                        expected.add(f.id)
            assert picked.ids == expected

            a0, a1 = sorted((rng.uniform(0, 100), rng.uniform(0, 100)))
            b0, b1 = sorted((rng.uniform(0, 1), rng.uniform(0, 1)))
            data_sel = brush_data_space(c, "a", "b", a0, a1, b0, b1)
            assert data_sel.ids <= ids
            scan = {f.id for f in c.features
                    if isinstance(f.attributes.get("a"), float)
                    and isinstance(f.attributes.get("b"), float)
                    and a0 <= f.attributes["a"] <= a1
                    and b0 <= f.attributes["b"] <= b1}
            assert data_sel.ids == scan

            x0, y0 = rng.uniform(0, 50), rng.uniform(0, 50)
            w, h = rng.uniform(1, 15), rng.uniform(1, 15)
            inner = BoundingBox(x0, y0, x0 + w, y0 + h)
            outer = BoundingBox(x0 - rng.uniform(0, 8),
                                y0 - rng.uniform(0, 8),
                                x0 + w + rng.uniform(0, 8),
                                y0 + h + rng.uniform(0, 8))
            inner_sel = brush_map_rect(c, inner)
            outer_sel = brush_map_rect(c, outer)
            assert inner_sel.ids <= ids
            assert inner_sel.ids <= outer_sel.ids


# 9 ---------------------------------------------------------------------------

def test_ring_assembly_criteria():
    """500 random simple polygons split into <= 8 shuffled/reversed
    fragments reconstruct the vertex cycle up to rotation/direction and
    always validate."""
    with criterion("ring assembly: 500 fragmented polygons reconstructed"):
        rng = random.Random(808)
        for trial in range(500):
            ring = star_polygon(rng, n=rng.randint(4, 16))
            frags = split_ring(rng, ring, rng.randint(2, 8))
            g = assemble_rings([(f, "outer") for f in frags],
                               crs="mercator-3395")
            assert validate_geometry(g) == [], f"trial {trial}"
            assert ring_cycle(g.coordinates[0]) == ring_cycle(ring), \
                f"trial {trial}"


# 10 --------------------------------------------------------------------------

def test_round_trip_criteria():
    """Interchange serialize/deserialize identity including arrays and
    nested maps; FKMESH01 export/import exact on every array."""
    with criterion("round-trips: interchange identity + FKMESH01 exact"):
        rng = random.Random(1010)
        feats = []
        for i in range(200):
            attrs = {
                "series": [rng.uniform(-50, 50) for _ in range(12)],
                "nested": {"deep": {"value": rng.uniform(0, 1)},
                           "label": f"f{i}", "flag": rng.random() < 0.5},
                "maybe": None,
                "height": rng.uniform(1, 100),
            }
            feats.append(Feature(i + 1, Geometry("Polygon", [star_polygon(
                rng, n=rng.randint(4, 10), cx=rng.uniform(0, 500),
                cy=rng.uniform(0, 500))]), attrs))
        c = make_collection("round", feats)
        again = deserialize(serialize(c))
        assert again.name == c.name and again.crs == c.crs
        assert [f.id for f in again] == [f.id for f in c]
        for a, b in zip(again, c):
            assert a.geometry == b.geometry
            assert a.attributes == b.attributes
        assert serialize(again) == serialize(c)

        mesh = build_layer_mesh(c, LayerStyle(extrude_by="height",
                                              base_color=(10, 99, 7, 200)))
        again_mesh = import_mesh(export_mesh(mesh))
        assert again_mesh.layer == mesh.layer
        assert again_mesh.origin == mesh.origin
        assert np.array_equal(again_mesh.positions, mesh.positions)
        assert np.array_equal(again_mesh.indices, mesh.indices)
        assert np.array_equal(again_mesh.triangle_feature,
                              mesh.triangle_feature)
        assert again_mesh.colors == mesh.colors
