"""Feature-centric primitives: features, collections, selections, interchange.

Everything downstream (spatial queries, compute, meshes, interaction)
exchanges data as :class:`FeatureCollection` values. Collections are treated
as immutable after construction; enrichment operations return new collections
that keep ids and geometries unchanged.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Iterator

from .errors import (
    DuplicateId,
    EmptyCollection,
    MalformedJson,
    MixedCrs,
    UnknownId,
    UnsupportedGeometry,
)

CRS_GEOGRAPHIC = "geographic-wgs84"
CRS_MERCATOR = "mercator-3395"

POINT = "Point"
MULTIPOINT = "MultiPoint"
POLYLINE = "Polyline"
POLYGON = "Polygon"
MULTIPOLYGON = "MultiPolygon"

GEOMETRY_KINDS = (POINT, MULTIPOINT, POLYLINE, POLYGON, MULTIPOLYGON)

Position = tuple[float, ...]


class Diagnostics:
    """Counter for non-fatal issues (dropped rows, skipped features, ...)."""

    def __init__(self):
        self.counts: dict[str, int] = {}

    def add(self, key: str, n: int = 1) -> None:
        self.counts[key] = self.counts.get(key, 0) + n

    def __getitem__(self, key: str) -> int:
        return self.counts.get(key, 0)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __repr__(self):
        return f"Diagnostics({self.counts})"


def signed_area(ring: Iterable[Position]) -> float:
    """Shoelace signed area; positive for counter-clockwise rings."""
    pts = list(ring)
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts = pts[:-1]
    n = len(pts)
    if n < 3:
        return 0.0
    acc = 0.0
    for i in range(n):
        x1, y1 = pts[i][0], pts[i][1]
        x2, y2 = pts[(i + 1) % n][0], pts[(i + 1) % n][1]
        acc += x1 * y2 - x2 * y1
    return acc / 2.0


def point_in_ring(x: float, y: float, ring) -> bool:
    """Even-odd ray-crossing test against one ring (boundary not special)."""
    inside = False
    n = len(ring)
    j = n - 1
    for i in range(n):
        x1, y1 = ring[i][0], ring[i][1]
        x2, y2 = ring[j][0], ring[j][1]
        if (y1 > y) != (y2 > y):
            t = (x2 - x1) * (y - y1) / (y2 - y1) + x1
            if x < t:
                inside = not inside
        j = i
    return inside


def point_on_segment(x: float, y: float, p1, p2) -> bool:
    """Exact collinearity + bbox containment test."""
    x1, y1 = p1[0], p1[1]
    x2, y2 = p2[0], p2[1]
    cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
    if cross != 0.0:
        return False
    return (min(x1, x2) <= x <= max(x1, x2)
            and min(y1, y2) <= y <= max(y1, y2))


def _as_position(pos) -> Position:
    return tuple(float(c) for c in pos)


def _orient_ring(ring: tuple[Position, ...], ccw: bool) -> tuple[Position, ...]:
    area = signed_area(ring)
    if area == 0.0:
        return ring
    if (area > 0) != ccw:
        return tuple(reversed(ring))
    return ring


@dataclass
class Geometry:
    """Geometry value: kind tag, nested coordinate tuples, crs tag.

    Coordinate nesting by kind: Point is one position; MultiPoint and
    Polyline are sequences of positions; Polygon is a sequence of closed
    rings (exterior first); MultiPolygon is a sequence of polygons.
    Polygon ring orientation is normalized at construction (exterior
    counter-clockwise, holes clockwise); closure is checked by
    :func:`validate_geometry`, not repaired here.
    """

    kind: str
    coordinates: Any
    crs: str = CRS_MERCATOR

    def __post_init__(self):
        if self.kind not in GEOMETRY_KINDS:
            raise UnsupportedGeometry(self.kind)
        self.coordinates = self._normalize(self.coordinates)

    def _normalize(self, coords):
        if self.kind == POINT:
            return _as_position(coords)
        if self.kind in (MULTIPOINT, POLYLINE):
            return tuple(_as_position(p) for p in coords)
        if self.kind == POLYGON:
            return self._normalize_polygon(coords)
        return tuple(self._normalize_polygon(poly) for poly in coords)

    @staticmethod
    def _normalize_polygon(rings):
        out = []
        for i, ring in enumerate(rings):
            ring = tuple(_as_position(p) for p in ring)
            out.append(_orient_ring(ring, ccw=(i == 0)))
        return tuple(out)

    def positions(self) -> Iterator[Position]:
        """Yield every coordinate position of this geometry."""
        if self.kind == POINT:
            yield self.coordinates
        elif self.kind in (MULTIPOINT, POLYLINE):
            yield from self.coordinates
        elif self.kind == POLYGON:
            for ring in self.coordinates:
                yield from ring
        else:
            for poly in self.coordinates:
                for ring in poly:
                    yield from ring

    def polygons(self) -> Iterator[tuple[tuple[Position, ...], ...]]:
        """Yield each polygon (tuple of rings) of a Polygon/MultiPolygon."""
        if self.kind == POLYGON:
            yield self.coordinates
        elif self.kind == MULTIPOLYGON:
            yield from self.coordinates


def point(x: float, y: float, *coords: float, crs: str = CRS_MERCATOR) -> Geometry:
    return Geometry(POINT, (x, y) + coords, crs)


def polyline(positions, crs: str = CRS_MERCATOR) -> Geometry:
    return Geometry(POLYLINE, positions, crs)


def polygon(rings, crs: str = CRS_MERCATOR) -> Geometry:
    return Geometry(POLYGON, rings, crs)


def _normalize_value(value):
    """Coerce an attribute value to the canonical model.

    Numbers become 64-bit floats, homogeneous numeric sequences become
    float lists, maps recurse. Booleans, None and text pass through.
    """
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, dict):
        return {str(k): _normalize_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    raise TypeError(f"unsupported attribute value type: {type(value).__name__}")


@dataclass
class Feature:
    """Atomic unit: unique id + geometry + named attributes."""

    id: int | None
    geometry: Geometry
    attributes: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        attrs = {}
        for name, value in self.attributes.items():
            if not name:
                raise ValueError("attribute names must be non-empty")
            attrs[name] = _normalize_value(value)
        self.attributes = attrs

    def get_path(self, path: str):
        """Read an attribute by dotted path; None when any hop is missing."""
        node: Any = self.attributes
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                return None
            node = node[part]
        return node


def _set_path(attrs: dict, path: str, value) -> None:
    parts = path.split(".")
    if any(not p for p in parts):
        raise ValueError(f"invalid attribute path: {path!r}")
    node = attrs
    for part in parts[:-1]:
        nxt = node.get(part)
        if not isinstance(nxt, dict):
            nxt = {}
            node[part] = nxt
        node = nxt
    node[parts[-1]] = value


@dataclass
class FeatureCollection:
    """Named, id-indexed, ordered set of features sharing one crs."""

    name: str
    crs: str
    features: list[Feature]
    index: dict[int, int] = field(default_factory=dict)

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def get(self, feature_id: int) -> Feature:
        try:
            return self.features[self.index[feature_id]]
        except KeyError:
            raise UnknownId(feature_id) from None

    def ids(self) -> set[int]:
        return set(self.index)


@dataclass(frozen=True)
class Selection:
    """Set of feature ids scoped to one collection's id space."""

    collection: str
    ids: frozenset[int]


def make_selection(collection: FeatureCollection, ids: Iterable[int]) -> Selection:
    """Build a Selection, enforcing ids are drawn from the collection."""
    ids = frozenset(ids)
    stray = ids - collection.index.keys()
    if stray:
        raise UnknownId(min(stray))
    return Selection(collection.name, ids)


@dataclass(frozen=True)
class BoundingBox:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        if self.min_x > self.max_x or self.min_y > self.max_y:
            raise ValueError("bounding box min must not exceed max")

    def intersects(self, other: "BoundingBox") -> bool:
        return not (other.max_x < self.min_x or other.min_x > self.max_x
                    or other.max_y < self.min_y or other.min_y > self.max_y)

    def contains_point(self, x: float, y: float) -> bool:
        return self.min_x <= x <= self.max_x and self.min_y <= y <= self.max_y

    def expanded(self, margin: float) -> "BoundingBox":
        return BoundingBox(self.min_x - margin, self.min_y - margin,
                           self.max_x + margin, self.max_y + margin)


def make_collection(name: str, features: Iterable[Feature],
                    crs: str | None = None) -> FeatureCollection:
    """Assemble a collection with a consistent id index.

    Features without an id get sequential ids starting at max(present)+1.
    Raises DuplicateId for id collisions and MixedCrs when geometries carry
    different crs tags (or disagree with an explicit ``crs``).
    """
    feats = list(features)
    tags = {f.geometry.crs for f in feats}
    if crs is not None:
        tags.add(crs)
    if len(tags) > 1:
        raise MixedCrs(f"conflicting crs tags: {sorted(tags)}")
    if not tags:
        tags = {CRS_MERCATOR}

    seen: set[int] = set()
    for f in feats:
        if f.id is None:
            continue
        if f.id in seen:
            raise DuplicateId(f.id)
        seen.add(f.id)

    next_id = max(seen, default=0) + 1
    out: list[Feature] = []
    for f in feats:
        if f.id is None:
            f = replace(f, id=next_id, attributes=f.attributes)
            next_id += 1
        out.append(f)

    index = {f.id: pos for pos, f in enumerate(out)}
    return FeatureCollection(name, tags.pop(), out, index)


def merge_attributes(collection: FeatureCollection,
                     updates: dict[int, dict[str, Any]]) -> FeatureCollection:
    """Enrich features with new attributes; ids/geometries/order unchanged.

    New entries win on name collision. Dotted names ("a.b.c") create or
    extend nested maps. Idempotent for identical updates.
    """
    for feature_id in updates:
        if feature_id not in collection.index:
            raise UnknownId(feature_id)
    out = []
    for f in collection.features:
        patch = updates.get(f.id)
        if not patch:
            out.append(f)
            continue
        attrs = copy.deepcopy(f.attributes)
        for name, value in patch.items():
            _set_path(attrs, name, _normalize_value(value))
        out.append(Feature(f.id, f.geometry, attrs))
    return FeatureCollection(collection.name, collection.crs, out,
                             dict(collection.index))


def bbox(collection: FeatureCollection) -> BoundingBox:
    """Tight axis-aligned bounds over all coordinates of all features."""
    if not collection.features:
        raise EmptyCollection(collection.name)
    min_x = min_y = math.inf
    max_x = max_y = -math.inf
    for f in collection.features:
        for pos in f.geometry.positions():
            x, y = pos[0], pos[1]
            min_x = min(min_x, x)
            min_y = min(min_y, y)
            max_x = max(max_x, x)
            max_y = max(max_y, y)
    return BoundingBox(min_x, min_y, max_x, max_y)


def geometry_bbox(g: Geometry) -> BoundingBox:
    xs, ys = [], []
    for pos in g.positions():
        xs.append(pos[0])
        ys.append(pos[1])
    return BoundingBox(min(xs), min(ys), max(xs), max(ys))


def validate_geometry(g: Geometry) -> list[str]:
    """Return one diagnostic per invariant violation; empty when valid."""
    diags: list[str] = []
    for pos in g.positions():
        if any(not math.isfinite(c) for c in pos):
            diags.append(f"NonFiniteCoordinate: {pos}")
            break
    for pi, rings in enumerate(g.polygons()):
        for ri, ring in enumerate(rings):
            label = f"polygon {pi} ring {ri}"
            if len(ring) < 4:
                diags.append(f"DegenerateRing: {label} has {len(ring)} positions")
                continue
            if ring[0] != ring[-1]:
                diags.append(f"OpenRing: {label} first != last")
            if len(set(ring[:-1])) < 3:
                diags.append(f"DegenerateRing: {label} has <3 distinct vertices")
                continue
            area = signed_area(ring)
            want_ccw = ri == 0
            if area == 0.0:
                diags.append(f"DegenerateRing: {label} has zero area")
            elif (area > 0) != want_ccw:
                orientation = "counter-clockwise" if want_ccw else "clockwise"
                diags.append(f"WrongOrientation: {label} should be {orientation}")
    return diags


# -- canonical interchange (GeoJSON-compatible) ----------------------------

_KIND_TO_GEOJSON = {
    POINT: "Point",
    MULTIPOINT: "MultiPoint",
    POLYLINE: "LineString",
    POLYGON: "Polygon",
    MULTIPOLYGON: "MultiPolygon",
}
_GEOJSON_TO_KIND = {v: k for k, v in _KIND_TO_GEOJSON.items()}


def _coords_to_jsonable(kind: str, coords):
    if kind == POINT:
        return list(coords)
    if kind in (MULTIPOINT, POLYLINE):
        return [list(p) for p in coords]
    if kind == POLYGON:
        return [[list(p) for p in ring] for ring in coords]
    return [[[list(p) for p in ring] for ring in poly] for poly in coords]


def to_interchange(collection: FeatureCollection) -> dict:
    """Collection as a GeoJSON-compatible document with ids and a crs tag."""
    features = []
    for f in collection.features:
        features.append({
            "type": "Feature",
            "id": f.id,
            "geometry": {
                "type": _KIND_TO_GEOJSON[f.geometry.kind],
                "coordinates": _coords_to_jsonable(f.geometry.kind,
                                                   f.geometry.coordinates),
            },
            "properties": f.attributes,
        })
    return {
        "type": "FeatureCollection",
        "name": collection.name,
        "crs-tag": collection.crs,
        "features": features,
    }


def from_interchange(doc: dict) -> FeatureCollection:
    """Inverse of :func:`to_interchange`."""
    if doc.get("type") != "FeatureCollection":
        raise MalformedJson("expected a FeatureCollection document")
    crs = doc.get("crs-tag", CRS_MERCATOR)
    feats = []
    for raw in doc.get("features", []):
        geom = raw.get("geometry") or {}
        gtype = geom.get("type")
        if gtype not in _GEOJSON_TO_KIND:
            raise UnsupportedGeometry(gtype)
        geometry = Geometry(_GEOJSON_TO_KIND[gtype], geom["coordinates"], crs)
        fid = raw.get("id")
        feats.append(Feature(int(fid) if fid is not None else None, geometry,
                             raw.get("properties") or {}))
    return make_collection(doc.get("name", ""), feats, crs=crs)


def serialize(collection: FeatureCollection) -> bytes:
    """UTF-8 JSON bytes; floats in shortest round-trippable decimal form."""
    doc = to_interchange(collection)
    return (json.dumps(doc, ensure_ascii=False, separators=(",", ":"))
            + "\n").encode("utf-8")


def deserialize(data: bytes | str) -> FeatureCollection:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise MalformedJson(e.msg, e.pos) from None
    return from_interchange(doc)
