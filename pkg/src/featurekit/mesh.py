"""Triangle meshes with a per-triangle feature-id channel.

Scene coordinates are mercator meters translated so the layer bbox center
sits at the origin (mercator magnitudes exceed float32 precision); the
offset is kept in the mesh header so picking can map back. The binary
format (FKMESH01) and its JSON sidecar round-trip every array exactly.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Diagnostics, FeatureCollection, Geometry, bbox
from .errors import DegenerateLine, FeatureKitError, NonPositiveHeight, StyleMismatch
from .triangulate import ring_vertices, triangulate_polygon

MAGIC = b"FKMESH01"
NEUTRAL_RGBA = (160, 160, 160, 255)
MIN_TRIANGLE_AREA = 1e-12


@dataclass
class Mesh:
    layer: str
    origin: tuple[float, float]
    positions: np.ndarray        # float32, flat x,y,z per vertex
    indices: np.ndarray          # uint32, flat triple per triangle
    triangle_feature: np.ndarray  # uint64, one feature id per triangle
    colors: dict[int, tuple[int, int, int, int]] | None = None

    @property
    def vertex_count(self) -> int:
        return len(self.positions) // 3

    @property
    def triangle_count(self) -> int:
        return len(self.indices) // 3


@dataclass(frozen=True)
class ColorScale:
    """Piecewise-linear RGBA ramp over a value domain."""

    kind: str                      # sequential | diverging
    domain: tuple[float, ...]      # (min, max) or (min, mid, max)
    stops: tuple[tuple[int, int, int, int], ...]
    neutral: tuple[int, int, int, int] = NEUTRAL_RGBA

    def __post_init__(self):
        if self.kind not in ("sequential", "diverging"):
            raise ValueError(f"unknown scale kind {self.kind!r}")
        want = 2 if self.kind == "sequential" else 3
        if len(self.domain) != want:
            raise ValueError(f"{self.kind} scale needs {want} domain values")
        if list(self.domain) != sorted(self.domain):
            raise ValueError("domain must be ordered")
        if len(self.stops) < 2:
            raise ValueError("need at least 2 stops")

    def evaluate(self, value: float) -> tuple[int, int, int, int]:
        lo, hi = self.domain[0], self.domain[-1]
        if self.kind == "sequential":
            t = 0.5 if hi == lo else (value - lo) / (hi - lo)
        else:
            mid = self.domain[1]
            if value <= mid:
                t = 0.5 if mid == lo else 0.5 * (value - lo) / (mid - lo)
            else:
                t = 1.0 if hi == mid else 0.5 + 0.5 * (value - mid) / (hi - mid)
        t = min(1.0, max(0.0, t))
        pos = t * (len(self.stops) - 1)
        k = min(int(math.floor(pos)), len(self.stops) - 2)
        frac = pos - k
        a, b = self.stops[k], self.stops[k + 1]
        return tuple(round(a[i] + (b[i] - a[i]) * frac) for i in range(4))


@dataclass
class MeshFragment:
    positions: list[tuple[float, float, float]] = field(default_factory=list)
    triangles: list[tuple[int, int, int]] = field(default_factory=list)


@dataclass(frozen=True)
class LayerStyle:
    base_color: tuple[int, int, int, int] = NEUTRAL_RGBA
    extrude_by: str | None = None
    stroke_width: float | None = None


def _dedupe_ring(ring):
    out = []
    for p in ring:
        if not out or (p[0], p[1]) != (out[-1][0], out[-1][1]):
            out.append((p[0], p[1]))
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def triangulate_flat(poly_rings) -> MeshFragment:
    """Polygon rings at z=0 as a fragment."""
    triangles = triangulate_polygon(poly_rings)
    vertices = ring_vertices(poly_rings)
    return MeshFragment([(v[0], v[1], 0.0) for v in vertices],
                        list(triangles))


def extrude_footprint(poly_rings, height: float) -> MeshFragment:
    """Prism: triangulated top cap at z=height, two wall triangles per ring
    edge, no bottom cap. Wall winding faces outward for CCW exteriors."""
    if height <= 0:
        raise NonPositiveHeight(f"height must be positive, got {height}")
    rings = poly_rings.coordinates if isinstance(poly_rings, Geometry) \
        else poly_rings
    top = triangulate_polygon(rings)
    vertices = ring_vertices(rings)
    n = len(vertices)

    positions = [(v[0], v[1], 0.0) for v in vertices]
    positions += [(v[0], v[1], height) for v in vertices]
    triangles = [(a + n, b + n, c + n) for a, b, c in top]

    base = 0
    for ring in rings:
        m = len(_dedupe_open_ring(ring))
        for k in range(m):
            a = base + k
            b = base + (k + 1) % m
            if positions[a][:2] == positions[b][:2]:
                continue
            triangles.append((a, b, b + n))
            triangles.append((a, b + n, a + n))
        base += m
    return MeshFragment(positions, triangles)


def _dedupe_open_ring(ring):
    ring = list(ring)
    if len(ring) > 1 and tuple(ring[0]) == tuple(ring[-1]):
        ring = ring[:-1]
    return ring


def stroke_polyline(line, width: float) -> MeshFragment:
    """Constant-width ribbon at z=0 with miter joints.

    Per-vertex offset along the averaged segment normals; miter length is
    clamped to 4x the half-width so sharp angles bevel instead of spiking.
    Two triangles per segment.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    pts = line.coordinates if isinstance(line, Geometry) else line
    path = []
    for p in pts:
        if not path or (p[0], p[1]) != path[-1]:
            path.append((p[0], p[1]))
    if len(path) < 2:
        raise DegenerateLine("polyline has no extent")

    half = width / 2.0
    normals = []
    for a, b in zip(path, path[1:]):
        dx, dy = b[0] - a[0], b[1] - a[1]
        length = math.hypot(dx, dy)
        normals.append((-dy / length, dx / length))

    positions = []
    for k, p in enumerate(path):
        if k == 0:
            nx, ny = normals[0]
            scale = half
        elif k == len(path) - 1:
            nx, ny = normals[-1]
            scale = half
        else:
            ax, ay = normals[k - 1]
            bx, by = normals[k]
            mx, my = ax + bx, ay + by
            norm = math.hypot(mx, my)
            if norm < 1e-12:
                # 180 degree turnback: fall back to the incoming normal
                nx, ny = ax, ay
                scale = half
            else:
                nx, ny = mx / norm, my / norm
                cos_half = nx * ax + ny * ay
                miter = half / cos_half if cos_half > 0.25 else 4.0 * half
                scale = min(miter, 4.0 * half)
        positions.append((p[0] + nx * scale, p[1] + ny * scale, 0.0))  # left
        positions.append((p[0] - nx * scale, p[1] - ny * scale, 0.0))  # right

    triangles = []
    for k in range(len(path) - 1):
        left_a, right_a = 2 * k, 2 * k + 1
        left_b, right_b = 2 * k + 2, 2 * k + 3
        triangles.append((left_a, right_a, right_b))
        triangles.append((left_a, right_b, left_b))
    return MeshFragment(positions, triangles)


def _triangle_area_3d(p0, p1, p2) -> float:
    ux, uy, uz = (p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2])
    vx, vy, vz = (p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2])
    cx = uy * vz - uz * vy
    cy = uz * vx - ux * vz
    cz = ux * vy - uy * vx
    return 0.5 * math.sqrt(cx * cx + cy * cy + cz * cz)


def build_layer_mesh(collection: FeatureCollection, style: LayerStyle,
                     diag: Diagnostics | None = None) -> Mesh:
    """Concatenate per-feature fragments into one picked-back mesh."""
    center = None
    if collection.features:
        b = bbox(collection)
        center = ((b.min_x + b.max_x) / 2.0, (b.min_y + b.max_y) / 2.0)
    origin = center or (0.0, 0.0)

    positions: list[float] = []
    indices: list[int] = []
    triangle_feature: list[int] = []
    colors = {}

    for f in collection.features:
        kind = f.geometry.kind
        if kind in ("Polygon", "MultiPolygon"):
            if style.stroke_width is not None:
                raise StyleMismatch(kind)
            fragments = []
            for rings in f.geometry.polygons():
                local = [[(p[0] - origin[0], p[1] - origin[1]) for p in ring]
                         for ring in rings]
                if style.extrude_by is not None:
                    height = f.get_path(style.extrude_by)
                    if isinstance(height, float) and height > 0:
                        fragments.append(extrude_footprint(local, height))
                        continue
                    if diag is not None:
                        diag.add("extrude_height_missing")
                fragments.append(triangulate_flat(local))
        elif kind == "Polyline":
            if style.extrude_by is not None or style.stroke_width is None:
                raise StyleMismatch(kind)
            local = [(p[0] - origin[0], p[1] - origin[1])
                     for p in f.geometry.coordinates]
            try:
                fragments = [stroke_polyline(local, style.stroke_width)]
            except DegenerateLine:
                if diag is not None:
                    diag.add("degenerate_polyline_skipped")
                fragments = []
        else:
            raise StyleMismatch(kind)

        for frag in fragments:
            base = len(positions) // 3
            for p in frag.positions:
                positions.extend(p)
            for a, b, c in frag.triangles:
                if _triangle_area_3d(frag.positions[a], frag.positions[b],
                                     frag.positions[c]) <= MIN_TRIANGLE_AREA:
                    if diag is not None:
                        diag.add("degenerate_triangle_dropped")
                    continue
                indices.extend((base + a, base + b, base + c))
                triangle_feature.append(f.id)
        colors[f.id] = style.base_color

    return Mesh(
        layer=collection.name,
        origin=origin,
        positions=np.asarray(positions, dtype=np.float32),
        indices=np.asarray(indices, dtype=np.uint32),
        triangle_feature=np.asarray(triangle_feature, dtype=np.uint64),
        colors=colors,
    )


def apply_thematic(mesh: Mesh, collection: FeatureCollection,
                   value_path: str, scale: ColorScale,
                   diag: Diagnostics | None = None) -> Mesh:
    """Recolor per feature from a (possibly nested) attribute value.

    Features with a missing or non-numeric value get the scale's neutral
    color; geometry is untouched.
    """
    colors = {}
    for f in collection.features:
        value = f.get_path(value_path)
        if isinstance(value, float) and math.isfinite(value):
            colors[f.id] = scale.evaluate(value)
        else:
            colors[f.id] = scale.neutral
            if diag is not None:
                diag.add("thematic_value_missing")
    return replace(mesh, colors=colors)


# -- binary format + JSON sidecar ---------------------------------------------


def export_mesh(mesh: Mesh) -> bytes:
    """FKMESH01 little-endian encoding; see import_mesh for the inverse."""
    name = mesh.layer.encode("utf-8")
    color_items = sorted((mesh.colors or {}).items())
    head = struct.pack("<8sddI", MAGIC, mesh.origin[0], mesh.origin[1],
                       len(name))
    head += name
    head += struct.pack("<III", mesh.vertex_count, mesh.triangle_count,
                        len(color_items))
    body = (mesh.positions.astype("<f4").tobytes()
            + mesh.indices.astype("<u4").tobytes()
            + mesh.triangle_feature.astype("<u8").tobytes())
    table = b"".join(struct.pack("<QBBBB", fid, *rgba)
                     for fid, rgba in color_items)
    return head + body + table


def import_mesh(data: bytes) -> Mesh:
    if data[:8] != MAGIC:
        raise FeatureKitError("not an FKMESH01 payload")
    ox, oy, name_len = struct.unpack_from("<ddI", data, 8)
    pos = 28
    name = data[pos:pos + name_len].decode("utf-8")
    pos += name_len
    vertex_count, triangle_count, table_len = struct.unpack_from("<III",
                                                                 data, pos)
    pos += 12
    positions = np.frombuffer(data, dtype="<f4", count=3 * vertex_count,
                              offset=pos).copy()
    pos += 12 * vertex_count
    indices = np.frombuffer(data, dtype="<u4", count=3 * triangle_count,
                            offset=pos).copy()
    pos += 12 * triangle_count
    triangle_feature = np.frombuffer(data, dtype="<u8", count=triangle_count,
                                     offset=pos).copy()
    pos += 8 * triangle_count
    colors = {}
    for _ in range(table_len):
        fid, r, g, b, a = struct.unpack_from("<QBBBB", data, pos)
        colors[fid] = (r, g, b, a)
        pos += 12
    return Mesh(layer=name, origin=(ox, oy), positions=positions,
                indices=indices, triangle_feature=triangle_feature,
                colors=colors or None)


def mesh_sidecar(mesh: Mesh) -> dict:
    """JSON-shaped carbon copy of the binary payload for the browser demo."""
    return {
        "format": MAGIC.decode(),
        "layer": mesh.layer,
        "origin": list(mesh.origin),
        "positions": [float(v) for v in mesh.positions],
        "indices": [int(v) for v in mesh.indices],
        "triangleFeature": [int(v) for v in mesh.triangle_feature],
        "colors": {str(fid): list(rgba)
                   for fid, rgba in sorted((mesh.colors or {}).items())},
    }


def write_mesh_files(mesh: Mesh, path) -> None:
    """Write <path> (binary) and <path>.json (sidecar)."""
    from pathlib import Path

    path = Path(path)
    path.write_bytes(export_mesh(mesh))
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(mesh_sidecar(mesh)) + "\n", encoding="utf-8")
