"""Per-segment shadow estimation against a single extruded building.

Road segments are resampled at a fixed spacing; each sample casts a ray
toward every sun direction and tests occlusion against the building prism
(Moller-Trumbore against two wall triangles per footprint edge plus the
triangulated top). A segment counts as shadowed for a sun direction when at
least half of its samples are shadowed. The estimate covers only the given
building, so it never understates that building's own contribution.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .core import Diagnostics, Feature, FeatureCollection, merge_attributes
from .errors import EmptySunList, MissingHeight
from .mesh import extrude_footprint

RAY_EPSILON = 1e-9


@dataclass(frozen=True)
class SunDirection:
    """Unit vector from the ground toward the sun; dz > 0."""

    dx: float
    dy: float
    dz: float
    label: str = ""

    def __post_init__(self):
        norm = math.sqrt(self.dx ** 2 + self.dy ** 2 + self.dz ** 2)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"sun direction must be unit length, |d|={norm}")
        if self.dz <= 0:
            raise ValueError("sun direction must point upward (dz > 0)")


def sun_from_azimuth_altitude(azimuth_deg: float, altitude_deg: float,
                              label: str = "") -> SunDirection:
    """Azimuth clockwise from north (+y), altitude above the horizon."""
    az = math.radians(azimuth_deg)
    alt = math.radians(altitude_deg)
    c = math.cos(alt)
    d = (math.sin(az) * c, math.cos(az) * c, math.sin(alt))
    norm = math.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2)
    return SunDirection(d[0] / norm, d[1] / norm, d[2] / norm, label)


def ray_triangle(origin, direction, v0, v1, v2,
                 epsilon: float = RAY_EPSILON) -> float | None:
    """Moller-Trumbore; returns the ray parameter t > epsilon or None."""
    e1 = (v1[0] - v0[0], v1[1] - v0[1], v1[2] - v0[2])
    e2 = (v2[0] - v0[0], v2[1] - v0[1], v2[2] - v0[2])
    px = direction[1] * e2[2] - direction[2] * e2[1]
    py = direction[2] * e2[0] - direction[0] * e2[2]
    pz = direction[0] * e2[1] - direction[1] * e2[0]
    det = e1[0] * px + e1[1] * py + e1[2] * pz
    if abs(det) < 1e-15:
        return None
    inv = 1.0 / det
    tx = origin[0] - v0[0]
    ty = origin[1] - v0[1]
    tz = origin[2] - v0[2]
    u = (tx * px + ty * py + tz * pz) * inv
    if u < 0.0 or u > 1.0:
        return None
    qx = ty * e1[2] - tz * e1[1]
    qy = tz * e1[0] - tx * e1[2]
    qz = tx * e1[1] - ty * e1[0]
    v = (direction[0] * qx + direction[1] * qy + direction[2] * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return None
    t = (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv
    return t if t > epsilon else None


def prism_triangles(footprint, height: float):
    """World-space triangles of the extruded footprint (walls + top)."""
    frag = extrude_footprint(footprint, height)
    return [(frag.positions[a], frag.positions[b], frag.positions[c])
            for a, b, c in frag.triangles]


def resample_polyline(coords, spacing: float):
    """Sample points every ``spacing`` meters of arc length, always
    including both endpoints."""
    pts = [(p[0], p[1]) for p in coords]
    cumulative = [0.0]
    for a, b in zip(pts, pts[1:]):
        cumulative.append(cumulative[-1] + math.dist(a, b))
    total = cumulative[-1]
    if total == 0.0:
        return [pts[0]]

    targets = [k * spacing for k in range(math.floor(total / spacing) + 1)]
    if targets[-1] < total:
        targets.append(total)

    samples = []
    seg = 0
    for d in targets:
        while seg < len(pts) - 2 and cumulative[seg + 1] < d:
            seg += 1
        a, b = pts[seg], pts[seg + 1]
        length = cumulative[seg + 1] - cumulative[seg]
        t = 0.0 if length == 0.0 else (d - cumulative[seg]) / length
        samples.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    return samples


def _segment_hours(feature: Feature, triangles, suns, spacing: float) -> int:
    samples = resample_polyline(feature.geometry.coordinates, spacing)
    n = len(samples)
    hours = 0
    for sun in suns:
        direction = (sun.dx, sun.dy, sun.dz)
        shadowed = 0
        for x, y in samples:
            origin = (x, y, 0.0)
            if any(ray_triangle(origin, direction, *tri) is not None
                   for tri in triangles):
                shadowed += 1
        if 2 * shadowed >= n:
            hours += 1
    return hours


def run_shadow_kernel(segments: FeatureCollection, building: Feature,
                      suns: list[SunDirection], sample_spacing: float = 20.0,
                      height_attr: str = "height", workers: int = 1,
                      diag: Diagnostics | None = None) -> FeatureCollection:
    """Count, per segment, the sun directions occluded by the building.

    Writes "shadow.hours" (count) and "shadow.fraction" (hours / number of
    suns). Appending sun directions can only grow shadow.hours.
    """
    if not suns:
        raise EmptySunList("need at least one sun direction")
    if sample_spacing <= 0:
        raise ValueError("sample_spacing must be positive")
    height = building.get_path(height_attr)
    if not isinstance(height, float) or height <= 0:
        raise MissingHeight(
            f"building {building.id} lacks a positive {height_attr!r}")
    if building.geometry.kind not in ("Polygon", "MultiPolygon"):
        raise ValueError("building must be a polygon")

    triangles = []
    for rings in building.geometry.polygons():
        triangles.extend(prism_triangles(rings, height))

    def evaluate(feats):
        out = []
        for f in feats:
            if f.geometry.kind != "Polyline":
                raise ValueError(f"segment {f.id} is {f.geometry.kind}, "
                                 "expected Polyline")
            hours = _segment_hours(f, triangles, suns, sample_spacing)
            out.append((f.id, {"shadow.hours": float(hours),
                               "shadow.fraction": hours / len(suns)}))
        return out

    features = segments.features
    if workers <= 1 or len(features) < 2 * workers:
        results = evaluate(features)
    else:
        step = -(-len(features) // workers)
        parts = [features[i:i + step] for i in range(0, len(features), step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = [item for chunk in pool.map(evaluate, parts)
                       for item in chunk]

    return merge_attributes(segments, dict(results))
