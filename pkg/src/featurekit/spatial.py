"""Collection-to-collection data operations: indexed spatial joins,
nearest-neighbor aggregation, where/what/when filtering, raster sampling.

Every operation returns a new collection; root ids and geometries pass
through unchanged (enrichment contract). Aggregates are reduced in
join-feature id order so parallel and sequential evaluation are
bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CRS_MERCATOR,
    BoundingBox,
    Diagnostics,
    Feature,
    FeatureCollection,
    Geometry,
    geometry_bbox,
    merge_attributes,
    point_in_ring,
    point_on_segment,
    signed_area,
)
from .errors import CrsMismatch, EmptyRaster, InvalidRange, MissingRadius
from .geotiff import RasterGrid
from .projection import project_inverse
from .rtree import SpatialIndex, build_index

JOIN = "JOIN"
NEAREST = "NEAREST"

AGGREGATE_FNS = ("count", "min", "max", "avg", "sum")


@dataclass(frozen=True)
class JoinPredicate:
    kind: str
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in (JOIN, NEAREST):
            raise ValueError(f"unknown predicate kind {self.kind!r}")
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class AggregateSpec:
    fn: str
    result_field: str
    column: str | None = None  # ignored for count

    def __post_init__(self):
        if self.fn not in AGGREGATE_FNS:
            raise ValueError(f"unknown aggregate fn {self.fn!r}")
        if not self.result_field:
            raise ValueError("result_field must be non-empty")


@dataclass(frozen=True)
class TemporalSpec:
    column: str
    t0: float | None = None
    t1: float | None = None
    bin: float | None = None

    def __post_init__(self):
        if self.t0 is not None and self.t1 is not None and self.t0 >= self.t1:
            raise InvalidRange(f"need t0 < t1, got ({self.t0}, {self.t1})")
        if self.bin is not None and self.bin <= 0:
            raise InvalidRange("bin width must be positive")


# -- geometry kernels ---------------------------------------------------------


def point_in_polygon(p, poly: Geometry) -> bool:
    """Even-odd containment; boundary points count as inside, holes do not."""
    x, y = p[0], p[1]
    inside = False
    for rings in poly.polygons():
        for ring in rings:
            for i in range(len(ring) - 1):
                if point_on_segment(x, y, ring[i], ring[i + 1]):
                    return True
            if point_in_ring(x, y, ring):
                inside = not inside
    return inside


def representative_point(g: Geometry) -> tuple[float, float]:
    """Point for a point; centroid for anything else.

    Polylines use the length-weighted segment centroid, polygons the
    area-weighted (shoelace) centroid with holes subtracted; degenerate
    cases fall back to the vertex mean.
    """
    if g.kind == "Point":
        return g.coordinates[0], g.coordinates[1]
    if g.kind == "MultiPoint":
        xs = [p[0] for p in g.coordinates]
        ys = [p[1] for p in g.coordinates]
        return sum(xs) / len(xs), sum(ys) / len(ys)
    if g.kind == "Polyline":
        wx = wy = total = 0.0
        for a, b in zip(g.coordinates, g.coordinates[1:]):
            length = math.hypot(b[0] - a[0], b[1] - a[1])
            wx += (a[0] + b[0]) / 2 * length
            wy += (a[1] + b[1]) / 2 * length
            total += length
        if total > 0:
            return wx / total, wy / total
        return g.coordinates[0][0], g.coordinates[0][1]
    # Polygon / MultiPolygon: shoelace centroid over all rings; hole rings
    # are clockwise so their terms subtract.
    cx = cy = area = 0.0
    for rings in g.polygons():
        for ring in rings:
            for i in range(len(ring) - 1):
                x1, y1 = ring[i][0], ring[i][1]
                x2, y2 = ring[i + 1][0], ring[i + 1][1]
                cross = x1 * y2 - x2 * y1
                cx += (x1 + x2) * cross
                cy += (y1 + y2) * cross
                area += cross
    if area != 0.0:
        return cx / (3 * area), cy / (3 * area)
    pts = list(g.positions())
    return (sum(p[0] for p in pts) / len(pts),
            sum(p[1] for p in pts) / len(pts))


def _points_in_polygon_bulk(xs: np.ndarray, ys: np.ndarray,
                            poly: Geometry) -> np.ndarray:
    """Vectorized boundary-inclusive even-odd test for many points."""
    inside = np.zeros(len(xs), dtype=bool)
    boundary = np.zeros(len(xs), dtype=bool)
    for rings in poly.polygons():
        for ring in rings:
            r = np.asarray(ring, dtype=np.float64)[:, :2]
            x1, y1 = r[:-1, 0][:, None], r[:-1, 1][:, None]
            x2, y2 = r[1:, 0][:, None], r[1:, 1][:, None]
            straddle = (y1 > ys) != (y2 > ys)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (x2 - x1) * (ys - y1) / (y2 - y1) + x1
            inside ^= (straddle & (xs < t)).sum(axis=0) % 2 == 1
            cross = (x2 - x1) * (ys - y1) - (y2 - y1) * (xs - x1)
            on = ((cross == 0.0)
                  & (xs >= np.minimum(x1, x2)) & (xs <= np.maximum(x1, x2))
                  & (ys >= np.minimum(y1, y2)) & (ys <= np.maximum(y1, y2)))
            boundary |= on.any(axis=0)
    return inside | boundary


# -- spatial join ----------------------------------------------------------------


def _require_mercator(*collections: FeatureCollection) -> None:
    for c in collections:
        if c.crs != CRS_MERCATOR:
            raise CrsMismatch(f"{c.name!r} is in {c.crs}, expected mercator-3395")


def _rep_arrays(collection: FeatureCollection):
    n = len(collection.features)
    xs = np.empty(n)
    ys = np.empty(n)
    ids = np.empty(n, dtype=np.int64)
    for k, f in enumerate(collection.features):
        xs[k], ys[k] = representative_point(f.geometry)
        ids[k] = f.id
    return xs, ys, ids


def _aggregate(root: FeatureCollection, join: FeatureCollection,
               matches: dict[int, list[int]],
               aggregates: list[AggregateSpec]) -> dict[int, dict]:
    updates: dict[int, dict] = {}
    for root_feature in root.features:
        matched = sorted(matches.get(root_feature.id, ()))
        patch = {}
        for spec in aggregates:
            path = f"sjoin.{spec.fn}.{spec.result_field}"
            if spec.fn == "count":
                patch[path] = float(len(matched))
                continue
            total = 0.0
            used = 0
            best = None
            for jid in matched:
                value = join.get(jid).get_path(spec.column or "")
                if not isinstance(value, float):
                    continue
                used += 1
                total += value
                if spec.fn == "min":
                    best = value if best is None else min(best, value)
                elif spec.fn == "max":
                    best = value if best is None else max(best, value)
            if used == 0:
                patch[path] = None
            elif spec.fn == "sum":
                patch[path] = total
            elif spec.fn == "avg":
                patch[path] = total / used
            else:
                patch[path] = best
        updates[root_feature.id] = patch
    return updates


def spatial_join(root: FeatureCollection, join: FeatureCollection,
                 predicate: JoinPredicate,
                 aggregates: list[AggregateSpec]) -> FeatureCollection:
    """Aggregate join-features onto root features by spatial predicate.

    JOIN matches a join-feature to every root polygon containing its
    representative point. NEAREST matches it to the single root whose
    representative point is nearest within ``radius`` (ties to the smaller
    root id). Results land at "sjoin.<fn>.<result_field>"; count writes 0
    on zero matches, the other aggregates write null.
    """
    _require_mercator(root, join)
    matches: dict[int, list[int]] = {}

    if predicate.kind == JOIN:
        jx, jy, jids = _rep_arrays(join)
        row_of = {int(i): k for k, i in enumerate(jids)}
        index = build_index(join)
        for root_feature in root.features:
            if root_feature.geometry.kind not in ("Polygon", "MultiPolygon"):
                raise ValueError(
                    f"JOIN requires polygon roots, feature {root_feature.id} "
                    f"is {root_feature.geometry.kind}")
            candidates = index.query_box(geometry_bbox(root_feature.geometry))
            if not candidates:
                continue
            rows = np.fromiter((row_of[c] for c in candidates),
                               dtype=np.intp, count=len(candidates))
            hits = _points_in_polygon_bulk(jx[rows], jy[rows],
                                           root_feature.geometry)
            matched = [candidates[k] for k in np.nonzero(hits)[0]]
            if matched:
                matches[root_feature.id] = matched
    else:
        if predicate.radius is None:
            raise MissingRadius("NEAREST requires a radius")
        radius = predicate.radius
        rx, ry, rids = _rep_arrays(root)
        row_of = {int(i): k for k, i in enumerate(rids)}
        boxes = np.column_stack([rx, ry, rx, ry])
        index = SpatialIndex(boxes, rids)
        for join_feature in join.features:
            px, py = representative_point(join_feature.geometry)
            candidates = index.query_box(
                BoundingBox(px - radius, py - radius, px + radius, py + radius))
            best_id = None
            best_d = radius
            for rid in candidates:
                k = row_of[rid]
                d = math.hypot(rx[k] - px, ry[k] - py)
                if d < best_d or (d == best_d and
                                  (best_id is None or rid < best_id)):
                    best_d = d
                    best_id = rid
            if best_id is not None:
                matches.setdefault(best_id, []).append(join_feature.id)

    updates = _aggregate(root, join, matches, aggregates)
    return merge_attributes(root, updates)


# -- where / what / when ----------------------------------------------------------


def _subset(collection: FeatureCollection, keep: list[Feature]) -> FeatureCollection:
    return FeatureCollection(collection.name, collection.crs, keep,
                             {f.id: k for k, f in enumerate(keep)})


def filter_where(collection: FeatureCollection,
                 region: BoundingBox | Geometry) -> FeatureCollection:
    """Subset whose representative points fall inside the region."""
    if isinstance(region, Geometry):
        if region.crs != collection.crs:
            raise CrsMismatch(
                f"region is in {region.crs}, collection in {collection.crs}")
        test = lambda x, y: point_in_polygon((x, y), region)
    else:
        test = region.contains_point
    keep = []
    for f in collection.features:
        x, y = representative_point(f.geometry)
        if test(x, y):
            keep.append(f)
    return _subset(collection, keep)


_OPS = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "in-set": lambda a, b: a in b,
}


def filter_what(collection: FeatureCollection,
                predicates: list[tuple[str, str, object]]) -> FeatureCollection:
    """Conjunction of (column, op, value) comparisons over attributes.

    Features missing a column fail that comparison. Ops: = != < <= > >=
    in-set. An empty predicate list keeps everything.
    """
    comparators = []
    for column, op, value in predicates:
        if op not in _OPS:
            raise ValueError(f"unknown comparison op {op!r}")
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = float(value)
        comparators.append((column, _OPS[op], value))

    keep = []
    for f in collection.features:
        ok = True
        for column, fn, value in comparators:
            have = f.get_path(column)
            if have is None:
                ok = False
                break
            try:
                if not fn(have, value):
                    ok = False
                    break
            except TypeError:
                ok = False
                break
        if ok:
            keep.append(f)
    return _subset(collection, keep)


def slice_when(collection: FeatureCollection, spec: TemporalSpec,
               diag: Diagnostics | None = None):
    """Range-filter and/or bin features by a numeric timestamp attribute.

    Range (t0, t1] is half-open at the left. With ``bin``, returns a sorted
    list of (bin_start, collection) over half-open bins anchored at t0 (or
    at the minimum timestamp); otherwise returns the filtered collection.
    Features lacking the column are dropped and counted.
    """
    stamped = []
    dropped = 0
    for f in collection.features:
        t = f.get_path(spec.column)
        if isinstance(t, float):
            stamped.append((t, f))
        else:
            dropped += 1
    if diag is not None and dropped:
        diag.add("missing_timestamp", dropped)

    if spec.t0 is not None and spec.t1 is not None:
        stamped = [(t, f) for t, f in stamped if spec.t0 < t <= spec.t1]

    if spec.bin is None:
        return _subset(collection, [f for _, f in stamped])

    if not stamped:
        return []
    anchor = spec.t0 if spec.t0 is not None else min(t for t, _ in stamped)
    bins: dict[int, list[Feature]] = {}
    for t, f in stamped:
        bins.setdefault(math.floor((t - anchor) / spec.bin), []).append(f)
    return [(anchor + k * spec.bin, _subset(collection, feats))
            for k, feats in sorted(bins.items())]


# -- raster join ---------------------------------------------------------------------


def raster_join(collection: FeatureCollection, raster: RasterGrid,
                result_field: str,
                diag: Diagnostics | None = None) -> FeatureCollection:
    """Enrich each feature with per-band means sampled at its vertices.

    Every geometry vertex is sampled at its containing pixel; nodata and
    out-of-raster vertices are skipped per band. The result is a number
    array of one mean per band, or null when no band collects a sample.
    """
    _require_mercator(collection)
    if not raster.bands or raster.width * raster.height == 0:
        raise EmptyRaster("raster has no samples")

    geographic = raster.crs != CRS_MERCATOR
    updates = {}
    for f in collection.features:
        sums = [0.0] * len(raster.bands)
        counts = [0] * len(raster.bands)
        for pos in f.geometry.positions():
            x, y = pos[0], pos[1]
            if geographic:
                x, y = project_inverse(x, y)
            pixel = raster.pixel_of(x, y)
            if pixel is None:
                continue
            row, col = pixel
            for b, band in enumerate(raster.bands):
                value = float(band[row, col])
                if raster.nodata is not None and value == raster.nodata:
                    continue
                sums[b] += value
                counts[b] += 1
        if all(c == 0 for c in counts):
            updates[f.id] = {result_field: None}
            if diag is not None:
                diag.add("raster_join_no_samples")
        elif any(c == 0 for c in counts):
            # mixed per-band coverage cannot be expressed in a homogeneous
            # number array; treat as no data
            updates[f.id] = {result_field: None}
            if diag is not None:
                diag.add("raster_join_partial_coverage")
        else:
            updates[f.id] = {result_field: [s / c for s, c in
                                            zip(sums, counts)]}
    return merge_attributes(collection, updates)
