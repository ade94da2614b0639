"""Static R-tree over feature bounding boxes, bulk-loaded with
sort-tile-recursive packing (max node fan-out 16)."""

from __future__ import annotations

import math

import numpy as np

from .core import CRS_MERCATOR, BoundingBox, FeatureCollection, geometry_bbox
from .errors import CrsMismatch

FANOUT = 16


class _Node:
    __slots__ = ("box", "children", "entries")

    def __init__(self, box, children=None, entries=None):
        self.box = box          # (min_x, min_y, max_x, max_y)
        self.children = children
        self.entries = entries  # leaf: list of (min_x, min_y, max_x, max_y, id)


def _str_order(boxes: np.ndarray) -> np.ndarray:
    """STR packing order: x-sorted slices, y-sorted within each slice."""
    n = len(boxes)
    cx = (boxes[:, 0] + boxes[:, 2]) / 2.0
    cy = (boxes[:, 1] + boxes[:, 3]) / 2.0
    pages = math.ceil(n / FANOUT)
    slices = math.ceil(math.sqrt(pages))
    per_slice = slices * FANOUT
    by_x = np.argsort(cx, kind="stable")
    order = np.empty(n, dtype=np.intp)
    for start in range(0, n, per_slice):
        chunk = by_x[start:start + per_slice]
        order[start:start + len(chunk)] = chunk[np.argsort(cy[chunk],
                                                           kind="stable")]
    return order


def _pack_level(boxes: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Group boxes into FANOUT-sized runs; return parent boxes + index runs."""
    order = _str_order(boxes)
    runs = [order[i:i + FANOUT] for i in range(0, len(order), FANOUT)]
    parents = np.empty((len(runs), 4))
    for k, run in enumerate(runs):
        sub = boxes[run]
        parents[k] = (sub[:, 0].min(), sub[:, 1].min(),
                      sub[:, 2].max(), sub[:, 3].max())
    return parents, runs


class SpatialIndex:
    """Query-only index mapping boxes to the feature ids intersecting them."""

    def __init__(self, boxes: np.ndarray, ids: np.ndarray):
        self._size = len(ids)
        if self._size == 0:
            self._root = None
            return
        leaf_boxes, leaf_runs = _pack_level(boxes)
        nodes = [
            _Node(tuple(leaf_boxes[k]),
                  entries=[(boxes[i, 0], boxes[i, 1], boxes[i, 2],
                            boxes[i, 3], int(ids[i])) for i in run])
            for k, run in enumerate(leaf_runs)
        ]
        level_boxes = leaf_boxes
        while len(nodes) > 1:
            parent_boxes, runs = _pack_level(level_boxes)
            nodes = [_Node(tuple(parent_boxes[k]),
                           children=[nodes[i] for i in run])
                     for k, run in enumerate(runs)]
            level_boxes = parent_boxes
        self._root = nodes[0]

    def __len__(self):
        return self._size

    def query_box(self, box: BoundingBox) -> list[int]:
        """Ids of entries whose bounding box intersects ``box``."""
        if self._root is None:
            return []
        qx0, qy0, qx1, qy1 = box.min_x, box.min_y, box.max_x, box.max_y
        out: list[int] = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            bx0, by0, bx1, by1 = node.box
            if bx1 < qx0 or bx0 > qx1 or by1 < qy0 or by0 > qy1:
                continue
            if node.entries is not None:
                for ex0, ey0, ex1, ey1, eid in node.entries:
                    if not (ex1 < qx0 or ex0 > qx1 or ey1 < qy0 or ey0 > qy1):
                        out.append(eid)
            else:
                stack.extend(node.children)
        return out


def collection_boxes(collection: FeatureCollection) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature bounding boxes and ids as arrays (feature order)."""
    n = len(collection.features)
    boxes = np.empty((n, 4))
    ids = np.empty(n, dtype=np.int64)
    for k, f in enumerate(collection.features):
        b = geometry_bbox(f.geometry)
        boxes[k] = (b.min_x, b.min_y, b.max_x, b.max_y)
        ids[k] = f.id
    return boxes, ids


def build_index(collection: FeatureCollection) -> SpatialIndex:
    """Bulk-load an index over the collection's per-feature bounding boxes."""
    if collection.crs != CRS_MERCATOR:
        raise CrsMismatch(
            f"index requires mercator-3395, got {collection.crs}")
    boxes, ids = collection_boxes(collection)
    return SpatialIndex(boxes, ids)
