"""GeoJSON ingestion into feature collections."""

from __future__ import annotations

import json

from .core import (
    CRS_GEOGRAPHIC,
    CRS_MERCATOR,
    Diagnostics,
    Feature,
    FeatureCollection,
    Geometry,
    make_collection,
)
from .errors import MalformedJson, UnsupportedGeometry
from .projection import project_collection, project_forward

_GEOJSON_KINDS = {
    "Point": "Point",
    "MultiPoint": "MultiPoint",
    "LineString": "Polyline",
    "Polygon": "Polygon",
    "MultiPolygon": "MultiPolygon",
}


def parse_geojson(data: bytes | str, to_mercator: bool = False,
                  name: str | None = None,
                  diag: Diagnostics | None = None) -> FeatureCollection:
    """Parse a GeoJSON FeatureCollection.

    Properties become attributes; a top-level "id" member (or properties.id)
    becomes the feature id, otherwise ids are assigned by make_collection.
    Coordinates are geographic degrees unless the document carries a
    "crs-tag"; set ``to_mercator`` to project into the working CRS.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise MalformedJson(e.msg, e.pos) from None
    if doc.get("type") != "FeatureCollection":
        raise MalformedJson("expected a FeatureCollection document")

    crs = doc.get("crs-tag", CRS_GEOGRAPHIC)
    project = to_mercator and crs == CRS_GEOGRAPHIC
    feats = []
    for raw in doc.get("features", []):
        geom = raw.get("geometry") or {}
        gtype = geom.get("type")
        if gtype not in _GEOJSON_KINDS:
            raise UnsupportedGeometry(gtype)
        kind = _GEOJSON_KINDS[gtype]
        coords = geom["coordinates"]
        if project:
            # project raw coordinates so each geometry is built only once
            coords = _walk(coords, _DEPTH[kind])
        geometry = Geometry(kind, coords, CRS_MERCATOR if project else crs)

        props = dict(raw.get("properties") or {})
        fid = raw.get("id")
        if fid is None and isinstance(props.get("id"), (int, float)):
            fid = props.pop("id")
        feats.append(Feature(int(fid) if fid is not None else None,
                             geometry, props))

    collection = make_collection(name or doc.get("name", "geojson"), feats,
                                 crs=CRS_MERCATOR if project else crs)
    if to_mercator and not project:
        collection = project_collection(collection)
    return collection


_DEPTH = {"Point": 0, "MultiPoint": 1, "Polyline": 1, "Polygon": 2,
          "MultiPolygon": 3}


def _walk(node, depth):
    if depth == 0:
        x, y = project_forward(node[0], node[1])
        return (x, y) + tuple(node[2:])
    return [_walk(child, depth - 1) for child in node]
