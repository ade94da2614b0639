"""Interaction resolution and selection broadcast between views.

Interactions map a collection plus a user event to a Selection (a set of
feature ids); the bus rebroadcasts selections to listeners in registration
order so coordinated views stay consistent without a central broker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .core import (
    BoundingBox,
    Diagnostics,
    FeatureCollection,
    Geometry,
    Selection,
    geometry_bbox,
    make_selection,
    merge_attributes,
)
from .errors import CollectionMismatch
from .spatial import point_in_polygon


class EventKind(Enum):
    PICKING = "picking"
    CLICK = "click"
    BRUSH = "brush"


@dataclass(frozen=True)
class ClickMap:
    x: float
    y: float


@dataclass(frozen=True)
class BrushMap:
    rect: BoundingBox

    def __post_init__(self):
        if self.rect.min_x == self.rect.max_x or self.rect.min_y == self.rect.max_y:
            raise ValueError("brush rectangle must have positive extent")


@dataclass(frozen=True)
class BrushData:
    x_attr: str
    y_attr: str
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if self.x0 >= self.x1 or self.y0 >= self.y1:
            raise ValueError("brush rectangle must have positive extent")


def _point_segment_distance(px, py, a, b) -> float:
    ax, ay = a[0], a[1]
    bx, by = b[0], b[1]
    dx, dy = bx - ax, by - ay
    norm2 = dx * dx + dy * dy
    if norm2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / norm2))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def pick_at_point(collection: FeatureCollection, x: float, y: float,
                  tolerance: float = 0.0) -> Selection:
    """Ids of all features under a point.

    Polygons containing the point, point features within tolerance, and
    polylines whose nearest segment is within tolerance. Every containing
    feature is selected; the engine has no z-order.
    """
    hit = set()
    for f in collection.features:
        g = f.geometry
        if g.kind in ("Polygon", "MultiPolygon"):
            if point_in_polygon((x, y), g):
                hit.add(f.id)
        elif g.kind in ("Point", "MultiPoint"):
            pts = [g.coordinates] if g.kind == "Point" else g.coordinates
            if any(math.hypot(p[0] - x, p[1] - y) <= tolerance for p in pts):
                hit.add(f.id)
        else:
            segs = zip(g.coordinates, g.coordinates[1:])
            if any(_point_segment_distance(x, y, a, b) <= tolerance
                   for a, b in segs):
                hit.add(f.id)
    return make_selection(collection, hit)


def _segments_cross(a1, a2, b1, b2) -> bool:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    d1 = orient(b1, b2, a1)
    d2 = orient(b1, b2, a2)
    d3 = orient(a1, a2, b1)
    d4 = orient(a1, a2, b2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    return False


def _rect_edges(rect: BoundingBox):
    c = [(rect.min_x, rect.min_y), (rect.max_x, rect.min_y),
         (rect.max_x, rect.max_y), (rect.min_x, rect.max_y)]
    return [(c[0], c[1]), (c[1], c[2]), (c[2], c[3]), (c[3], c[0])]


def _geometry_intersects_rect(g: Geometry, rect: BoundingBox) -> bool:
    # any vertex inside the rect
    for p in g.positions():
        if rect.contains_point(p[0], p[1]):
            return True
    # any rect corner inside a polygon
    if g.kind in ("Polygon", "MultiPolygon"):
        for cx, cy in [(rect.min_x, rect.min_y), (rect.max_x, rect.min_y),
                       (rect.max_x, rect.max_y), (rect.min_x, rect.max_y)]:
            if point_in_polygon((cx, cy), g):
                return True
    # any edge crossing
    edges = []
    if g.kind == "Polyline":
        edges = list(zip(g.coordinates, g.coordinates[1:]))
    else:
        for rings in g.polygons():
            for ring in rings:
                edges.extend(zip(ring, ring[1:]))
    rect_edges = _rect_edges(rect)
    for a, b in edges:
        for r1, r2 in rect_edges:
            if _segments_cross((a[0], a[1]), (b[0], b[1]), r1, r2):
                return True
    return False


def brush_map_rect(collection: FeatureCollection,
                   rect: BoundingBox) -> Selection:
    """Ids of features whose geometry intersects a scene-space rectangle."""
    hit = set()
    for f in collection.features:
        if not geometry_bbox(f.geometry).intersects(rect):
            continue
        if _geometry_intersects_rect(f.geometry, rect):
            hit.add(f.id)
    return make_selection(collection, hit)


def brush_data_space(collection: FeatureCollection, x_attr: str, y_attr: str,
                     x0: float, x1: float, y0: float, y1: float) -> Selection:
    """Ids whose (x_attr, y_attr) values are numbers inside the inclusive
    value-space rectangle; features missing either attribute never match."""
    hit = set()
    for f in collection.features:
        vx = f.get_path(x_attr)
        vy = f.get_path(y_attr)
        if not isinstance(vx, float) or not isinstance(vy, float):
            continue
        if x0 <= vx <= x1 and y0 <= vy <= y1:
            hit.add(f.id)
    return make_selection(collection, hit)


class EventBus:
    """Synchronous dispatch; listeners run in registration order."""

    def __init__(self):
        self._listeners: list[tuple[EventKind, Callable[[Selection], None]]] = []
        self.diagnostics = Diagnostics()

    def add_listener(self, kind: EventKind,
                     callback: Callable[[Selection], None]) -> None:
        self._listeners.append((kind, callback))

    def emit(self, kind: EventKind, selection: Selection) -> None:
        """Deliver to every listener of ``kind``; listener exceptions are
        counted and do not block later listeners."""
        for listener_kind, callback in self._listeners:
            if listener_kind is not kind:
                continue
            try:
                callback(selection)
            except Exception:
                self.diagnostics.add("listener_error")


def apply_selection(collection: FeatureCollection,
                    selection: Selection) -> FeatureCollection:
    """Write boolean "selected" onto every feature; membership transfers."""
    if selection.collection != collection.name:
        raise CollectionMismatch(
            f"selection is scoped to {selection.collection!r}, "
            f"collection is {collection.name!r}")
    updates = {f.id: {"selected": f.id in selection.ids}
               for f in collection.features}
    return merge_attributes(collection, updates)
