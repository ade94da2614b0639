"""Ear-clipping polygon triangulation with hole bridging.

Works on the normalized ring convention (exterior counter-clockwise, holes
clockwise). Each hole is joined at its rightmost vertex to the nearest
visible exterior vertex (Eberly bridge, ray cast toward +x), then the
combined cycle is clipped ear by ear. Returned triangles are index triples
into the concatenated ring vertex list (closing duplicates removed),
ordered counter-clockwise.
"""

from __future__ import annotations

import math

from .core import Geometry, signed_area
from .errors import TriangulationStall


class _Node:
    __slots__ = ("i", "x", "y", "prev", "next")

    def __init__(self, i, x, y):
        self.i = i
        self.x = x
        self.y = y
        self.prev = None
        self.next = None


def _area2(a, b, c) -> float:
    """Twice the signed area; positive when (a, b, c) turns counter-clockwise."""
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)


def _equals(a, b) -> bool:
    return a.x == b.x and a.y == b.y


def _point_in_triangle(a, b, c, p) -> bool:
    """Boundary-inclusive test; (a, b, c) must be counter-clockwise."""
    return (_area2(a, b, p) >= 0 and _area2(b, c, p) >= 0
            and _area2(c, a, p) >= 0)


def _insert_node(i, x, y, last):
    node = _Node(i, x, y)
    if last is None:
        node.prev = node
        node.next = node
    else:
        node.next = last.next
        node.prev = last
        last.next.prev = node
        last.next = node
    return node


def _remove_node(node):
    node.next.prev = node.prev
    node.prev.next = node.next


def _linked_list(points, base_index, ccw: bool):
    """Circular list over an open ring, traversed in the requested winding."""
    area = signed_area(list(points) + [points[0]])
    order = range(len(points))
    if (area > 0) != ccw:
        order = reversed(order)
    last = None
    for k in order:
        last = _insert_node(base_index + k, points[k][0], points[k][1], last)
    if last is not None and _equals(last, last.next):
        _remove_node(last)
        last = last.next
    return last


def _filter_points(start, end=None):
    """Drop duplicate and collinear nodes."""
    if start is None:
        return None
    if end is None:
        end = start
    p = start
    while True:
        again = False
        if _equals(p, p.next) or _area2(p.prev, p, p.next) == 0:
            _remove_node(p)
            p = end = p.prev
            if p == p.next:
                return None
            again = True
        else:
            p = p.next
        if not again and p == end:
            break
    return end


def _locally_inside(a, b) -> bool:
    if _area2(a.prev, a, a.next) > 0:
        return _area2(a, b, a.next) <= 0 and _area2(a, a.prev, b) <= 0
    return _area2(a, b, a.prev) > 0 or _area2(a, a.next, b) > 0


def _sector_contains_sector(m, p) -> bool:
    return _area2(m.prev, m, p.prev) > 0 and _area2(p.next, m, m.next) > 0


def _find_hole_bridge(hole, outer):
    """Nearest visible exterior vertex for the hole's rightmost vertex.

    Casts a ray from the hole vertex toward +x, takes the closest
    intersected exterior edge, then resolves visibility among reflex
    vertices inside the ray triangle (minimum angle to the ray, distance
    tie-break).
    """
    p = outer
    hx = hole.x
    hy = hole.y
    qx = math.inf
    m = None
    # a +x ray from inside a CCW ring first crosses an ascending edge
    while True:
        if p.y <= hy and hy <= p.next.y and p.next.y != p.y:
            x = p.x + (hy - p.y) * (p.next.x - p.x) / (p.next.y - p.y)
            if hx <= x < qx:
                qx = x
                m = p if p.x > p.next.x else p.next
                if x == hx:
                    return m  # ray touches the outer ring at a vertex
        p = p.next
        if p == outer:
            break
    if m is None:
        return None

    # look for reflex vertices inside the (hole, intersection, endpoint)
    # triangle; the visible one minimizes the angle to the ray
    stop = m
    mx = m.x
    my = m.y
    tan_min = math.inf
    hole_corner = _Node(-1, hx, hy)
    ray_corner = _Node(-1, qx, hy)
    tri_a, tri_b = ((hole_corner, ray_corner) if my > hy
                    else (ray_corner, hole_corner))
    tri_c = _Node(-1, mx, my)
    p = m
    while True:
        if (hx < p.x <= mx
                and _point_in_triangle(tri_a, tri_b, tri_c, p)):
            tan = abs(hy - p.y) / (p.x - hx)
            if _locally_inside(p, hole) and (
                    tan < tan_min
                    or (tan == tan_min
                        and (p.x < m.x
                             or (p.x == m.x and _sector_contains_sector(m, p))))):
                m = p
                tan_min = tan
        p = p.next
        if p == stop:
            break
    return m


def _split_polygon(a, b):
    """Bridge two nodes with duplicated endpoints, keeping one cycle."""
    a2 = _Node(a.i, a.x, a.y)
    b2 = _Node(b.i, b.x, b.y)
    an = a.next
    bp = b.prev
    a.next = b
    b.prev = a
    a2.next = an
    an.prev = a2
    b2.next = a2
    a2.prev = b2
    bp.next = b2
    b2.prev = bp
    return b2


def _eliminate_holes(rings, outer, base_indices):
    queue = []
    for k, ring in enumerate(rings[1:], start=1):
        lst = _linked_list(ring, base_indices[k], ccw=False)
        if lst is None:
            continue
        queue.append(_rightmost(lst))
    queue.sort(key=lambda node: -node.x)
    for hole in queue:
        bridge = _find_hole_bridge(hole, outer)
        if bridge is None:
            continue
        reverse_side = _split_polygon(bridge, hole)
        _filter_points(reverse_side, reverse_side.next)
        outer = _filter_points(bridge, bridge.next)
    return outer


def _rightmost(start):
    p = start
    best = start
    while True:
        if p.x > best.x or (p.x == best.x and p.y < best.y):
            best = p
        p = p.next
        if p == start:
            break
    return best


def _is_ear(ear) -> bool:
    a, b, c = ear.prev, ear, ear.next
    if _area2(a, b, c) <= 0:
        return False  # reflex or collinear
    x0 = min(a.x, b.x, c.x)
    y0 = min(a.y, b.y, c.y)
    x1 = max(a.x, b.x, c.x)
    y1 = max(a.y, b.y, c.y)
    p = c.next
    while p != a:
        if (x0 <= p.x <= x1 and y0 <= p.y <= y1
                and _point_in_triangle(a, b, c, p)
                and _area2(p.prev, p, p.next) <= 0):
            return False
        p = p.next
    return True


def _clip_ears(ear, triangles, attempts=2):
    if ear is None:
        return
    stop = ear
    while ear.prev != ear.next:
        if _is_ear(ear):
            triangles.append((ear.prev.i, ear.i, ear.next.i))
            _remove_node(ear)
            ear = ear.next.next
            stop = ear
            continue
        ear = ear.next
        if ear == stop:
            if attempts > 0:
                _clip_ears(_filter_points(ear), triangles, attempts - 1)
                return
            raise TriangulationStall(
                f"no ear found with {_cycle_len(ear)} vertices left")
    return


def _cycle_len(node):
    n = 1
    p = node.next
    while p != node:
        n += 1
        p = p.next
    return n


def triangulate_polygon(poly) -> list[tuple[int, int, int]]:
    """Triangulate one polygon (Geometry or ring list) by ear clipping.

    Index triples refer to the concatenation of all rings with each ring's
    closing duplicate removed. Hole-free polygons with v distinct vertices
    yield exactly v - 2 triangles; total triangle area equals exterior area
    minus hole areas.
    """
    rings = poly.coordinates if isinstance(poly, Geometry) else poly
    open_rings = []
    base_indices = []
    base = 0
    for ring in rings:
        ring = list(ring)
        if len(ring) > 1 and ring[0] == ring[-1]:
            ring = ring[:-1]
        open_rings.append(ring)
        base_indices.append(base)
        base += len(ring)

    outer = _linked_list(open_rings[0], 0, ccw=True)
    if outer is None or outer.next == outer.prev:
        return []
    if len(open_rings) > 1:
        outer = _eliminate_holes(open_rings, outer, base_indices)
    outer = _filter_points(outer)
    if outer is None:
        return []

    triangles: list[tuple[int, int, int]] = []
    _clip_ears(outer, triangles)
    return triangles


def ring_vertices(poly) -> list[tuple[float, ...]]:
    """Concatenated ring vertices matching triangulate_polygon's indexing."""
    rings = poly.coordinates if isinstance(poly, Geometry) else poly
    out = []
    for ring in rings:
        ring = list(ring)
        if len(ring) > 1 and tuple(ring[0]) == tuple(ring[-1]):
            ring = ring[:-1]
        out.extend(tuple(p) for p in ring)
    return out
