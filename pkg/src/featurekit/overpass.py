"""Overpass API response parsing and OSM geometry reconstruction.

Ways that reference absent nodes are dropped whole (never kept partially);
multipolygon relations are assembled from their member way fragments into
closed, oriented rings before becoming features.
"""

from __future__ import annotations

import json
import math
import os
import threading
import time
from dataclasses import dataclass, field

from .core import (
    CRS_GEOGRAPHIC,
    BoundingBox,
    Diagnostics,
    Feature,
    FeatureCollection,
    Geometry,
    make_collection,
    point_in_ring,
)
from .errors import AmbiguousChain, MalformedJson, MissingElementsArray, UnclosableRing
from .projection import project_forward, project_geometry

LAYERS = ("surface", "parks", "water", "roads", "buildings")

# Tag mapping is configuration, not contract; adjust per deployment.
LAYER_TAGS: dict[str, dict[str, set[str] | None]] = {
    "buildings": {"building": None},          # None: any value but "no"
    "roads": {"highway": None},
    "parks": {"leisure": {"park"}, "landuse": {"grass"}},
    "water": {"natural": {"water"}, "landuse": {"basin", "reservoir"}},
}

DEFAULT_OVERPASS_URL = "https://overpass-api.de/api/interpreter"
OVERPASS_URL_ENV = "FEATUREKIT_OVERPASS_URL"


@dataclass
class OverpassDocument:
    """Indexed view of an Overpass JSON response."""

    nodes: dict[int, tuple[float, float]] = field(default_factory=dict)
    ways: dict[int, tuple[list[int], dict[str, str]]] = field(default_factory=dict)
    relations: dict[int, tuple[list[tuple[str, int, str]], dict[str, str]]] = \
        field(default_factory=dict)
    diagnostics: Diagnostics = field(default_factory=Diagnostics)


def parse_overpass(data: bytes | str) -> OverpassDocument:
    """Parse an Overpass API JSON response into an indexed document."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise MalformedJson(e.msg, e.pos) from None
    elements = doc.get("elements")
    if not isinstance(elements, list):
        raise MissingElementsArray("response has no 'elements' array")

    out = OverpassDocument()
    raw_ways = {}
    for el in elements:
        etype = el.get("type")
        if etype == "node":
            out.nodes[int(el["id"])] = (float(el["lon"]), float(el["lat"]))
        elif etype == "way":
            raw_ways[int(el["id"])] = (list(el.get("nodes", [])),
                                       dict(el.get("tags", {})))
        elif etype == "relation":
            members = [(m.get("type", ""), int(m.get("ref", 0)),
                        m.get("role", "")) for m in el.get("members", [])]
            out.relations[int(el["id"])] = (members, dict(el.get("tags", {})))
        else:
            out.diagnostics.add("unknown_element")

    for way_id, (node_ids, tags) in raw_ways.items():
        if all(n in out.nodes for n in node_ids):
            out.ways[way_id] = (node_ids, tags)
        else:
            out.diagnostics.add("dropped_way_missing_node")
    return out


# -- ring assembly -----------------------------------------------------------


def _chain_rings(fragments: list[list[tuple[float, float]]],
                 diag: Diagnostics | None = None) -> list[list[tuple[float, float]]]:
    """Chain way fragments sharing endpoints into closed rings.

    Fragments may need end-to-end reversal. A walk that reaches an endpoint
    shared by more than one unused fragment is ambiguous: the ring is
    dropped and reported. A walk that runs out of candidates before closing
    raises UnclosableRing.
    """
    frags = [[tuple(p) for p in f] for f in fragments if len(f) >= 2]
    used = [False] * len(frags)
    endpoints: dict[tuple, list[tuple[int, int]]] = {}
    for i, f in enumerate(frags):
        endpoints.setdefault(f[0], []).append((i, 0))
        endpoints.setdefault(f[-1], []).append((i, 1))

    rings = []
    for start in range(len(frags)):
        if used[start]:
            continue
        used[start] = True
        ring = list(frags[start])
        ambiguous = False
        while ring[0] != ring[-1]:
            tail = ring[-1]
            candidates = [(i, end) for i, end in endpoints.get(tail, ())
                          if not used[i]]
            if not candidates:
                raise UnclosableRing(f"no fragment continues from {tail}")
            if len(candidates) > 1:
                ambiguous = True
                break
            i, end = candidates[0]
            used[i] = True
            nxt = frags[i] if end == 0 else list(reversed(frags[i]))
            ring.extend(nxt[1:])
        if ambiguous:
            if diag is not None:
                diag.add("ambiguous_chain_ring_dropped")
            continue
        rings.append(ring)
    return rings


def assemble_rings(members: list[tuple[list[tuple[float, float]], str]],
                   crs: str = CRS_GEOGRAPHIC,
                   diag: Diagnostics | None = None) -> Geometry:
    """Assemble (fragment, role) members into a Polygon or MultiPolygon.

    Outer rings become exteriors; each inner ring is attached to the
    exterior containing its first vertex. Orientation is normalized by
    Geometry construction. Raises UnclosableRing when an outer chain cannot
    close and AmbiguousChain when ambiguity leaves no usable exterior.
    """
    outer_frags = [coords for coords, role in members if role == "outer"]
    inner_frags = [coords for coords, role in members if role == "inner"]

    local = Diagnostics() if diag is None else diag
    outers = _chain_rings(outer_frags, local)
    inners = _chain_rings(inner_frags, local) if inner_frags else []
    if not outers:
        raise AmbiguousChain("no exterior ring could be assembled")

    polys: list[list[list[tuple[float, float]]]] = [[ring] for ring in outers]
    for hole in inners:
        x, y = hole[0]
        home = None
        for poly in polys:
            if point_in_ring(x, y, poly[0]):
                home = poly
                break
        if home is None:
            local.add("hole_outside_every_exterior")
            continue
        home.append(hole)

    if len(polys) == 1:
        return Geometry("Polygon", polys[0], crs)
    return Geometry("MultiPolygon", polys, crs)


# -- layer extraction -----------------------------------------------------------


def _tag_attributes(tags: dict[str, str]) -> dict:
    """Tags as attributes, numeric parsing attempted first (CSV convention);
    keeps height-like tags usable for extrusion."""
    out = {}
    for key, value in tags.items():
        try:
            number = float(value)
            out[key] = number if math.isfinite(number) else value
        except ValueError:
            out[key] = value
    return out


def _tags_match(tags: dict[str, str], wanted: dict[str, set[str] | None]) -> bool:
    for key, values in wanted.items():
        value = tags.get(key)
        if value is None or value == "no":
            continue
        if values is None or value in values:
            return True
    return False


def _way_coords(doc: OverpassDocument, node_ids: list[int]):
    return [doc.nodes[n] for n in node_ids]


def _polygon_features(doc: OverpassDocument, wanted, diag: Diagnostics):
    """Closed matching ways plus assembled matching relations, as features."""
    feats = []
    for way_id, (node_ids, tags) in doc.ways.items():
        if not _tags_match(tags, wanted):
            continue
        if len(node_ids) < 4 or node_ids[0] != node_ids[-1]:
            diag.add("open_way_skipped")
            continue
        geom = Geometry("Polygon", [_way_coords(doc, node_ids)], CRS_GEOGRAPHIC)
        feats.append(Feature(way_id, geom, _tag_attributes(tags)))
    for rel_id, (members, tags) in doc.relations.items():
        if not _tags_match(tags, wanted):
            continue
        frags = []
        for mtype, ref, role in members:
            if mtype != "way" or ref not in doc.ways:
                diag.add("relation_member_unresolved")
                continue
            frags.append((_way_coords(doc, doc.ways[ref][0]),
                          role if role in ("outer", "inner") else "outer"))
        if not frags:
            diag.add("relation_skipped")
            continue
        try:
            geom = assemble_rings(frags, CRS_GEOGRAPHIC, diag)
        except (UnclosableRing, AmbiguousChain):
            diag.add("relation_skipped")
            continue
        feats.append(Feature(rel_id, geom, _tag_attributes(tags)))
    return feats


def extract_layers(doc: OverpassDocument, layers, area: BoundingBox,
                   diag: Diagnostics | None = None) -> dict[str, FeatureCollection]:
    """Reconstruct the requested layers as mercator-3395 collections.

    ``area`` is in geographic degrees. The surface layer is the projected
    area rectangle with fully contained water exteriors as even-odd holes
    (coastline polygonization is out of scope).
    """
    layers = set(layers)
    unknown = layers - set(LAYERS)
    if unknown or not layers:
        raise ValueError(f"unknown or empty layer set: {sorted(unknown)}")
    diag = diag if diag is not None else Diagnostics()

    out: dict[str, FeatureCollection] = {}
    water_feats: list[Feature] = []
    if "water" in layers or "surface" in layers:
        water_feats = _polygon_features(doc, LAYER_TAGS["water"], diag)

    for layer in sorted(layers):
        if layer == "roads":
            feats = []
            for way_id, (node_ids, tags) in doc.ways.items():
                if not _tags_match(tags, LAYER_TAGS["roads"]):
                    continue
                if len(node_ids) < 2:
                    diag.add("degenerate_road_skipped")
                    continue
                geom = Geometry("Polyline", _way_coords(doc, node_ids),
                                CRS_GEOGRAPHIC)
                feats.append(Feature(way_id, geom, _tag_attributes(tags)))
        elif layer == "water":
            feats = water_feats
        elif layer == "surface":
            feats = [_surface_feature(area, water_feats, diag)]
        else:
            feats = _polygon_features(doc, LAYER_TAGS[layer], diag)

        projected = [Feature(f.id, project_geometry(f.geometry), f.attributes)
                     for f in feats]
        out[layer] = make_collection(layer, projected)
    return out


def _surface_feature(area: BoundingBox, water: list[Feature],
                     diag: Diagnostics) -> Feature:
    rect = [(area.min_x, area.min_y), (area.max_x, area.min_y),
            (area.max_x, area.max_y), (area.min_x, area.max_y),
            (area.min_x, area.min_y)]
    rings = [rect]
    for f in water:
        for poly in f.geometry.polygons():
            exterior = poly[0]
            if all(area.contains_point(p[0], p[1]) for p in exterior):
                rings.append(list(exterior))
            else:
                diag.add("water_outside_surface_rect")
    return Feature(1, Geometry("Polygon", rings, CRS_GEOGRAPHIC), {})


# -- fetch client (used by the CLI) ----------------------------------------------

_fetch_lock = threading.Lock()
_last_fetch = 0.0
MIN_REQUEST_SPACING = 1.0  # seconds, API politeness


def overpass_query_for_bbox(area: BoundingBox) -> str:
    """Overpass QL fetching the tag families of all extractable layers."""
    bbox = f"({area.min_y},{area.min_x},{area.max_y},{area.max_x})"
    clauses = []
    for wanted in LAYER_TAGS.values():
        for key, values in wanted.items():
            selector = f'["{key}"]' if values is None else \
                f'["{key}"~"^({"|".join(sorted(values))})$"]'
            clauses.append(f"way{selector}{bbox};")
            clauses.append(f"relation{selector}{bbox};")
    body = "".join(clauses)
    return f"[out:json][timeout:120];({body});(._;>;);out body;"


def fetch_overpass(area: BoundingBox, url: str | None = None,
                   timeout: float = 180.0) -> bytes:
    """Fetch raw Overpass JSON for a bbox; one in-flight request, >=1s apart."""
    import requests

    global _last_fetch
    endpoint = url or os.environ.get(OVERPASS_URL_ENV) or DEFAULT_OVERPASS_URL
    query = overpass_query_for_bbox(area)
    with _fetch_lock:
        wait = MIN_REQUEST_SPACING - (time.monotonic() - _last_fetch)
        if wait > 0:
            time.sleep(wait)
        try:
            resp = requests.post(endpoint, data={"data": query}, timeout=timeout)
        finally:
            _last_fetch = time.monotonic()
    resp.raise_for_status()
    return resp.content
