"""World Mercator (EPSG:3395) forward/inverse transforms on WGS84."""

from __future__ import annotations

import math

from .core import CRS_GEOGRAPHIC, CRS_MERCATOR, Feature, FeatureCollection, Geometry
from .errors import LatitudeOutOfRange, NonConvergence

WGS84_A = 6378137.0
WGS84_E2 = 0.00669437999014
_E = math.sqrt(WGS84_E2)

MAX_LATITUDE = 89.5  # singularity guard: urban data never approaches the poles


def project_forward(lon: float, lat: float) -> tuple[float, float]:
    """(lon, lat) degrees -> (x, y) meters, ellipsoidal Mercator.

    y is computed as a*(atanh(sin p) - e*atanh(e*sin p)), the isometric
    latitude times a. This is algebraically identical to
    a*ln(tan(pi/4 + p/2) * ((1-e*sin p)/(1+e*sin p))**(e/2)) but is exact
    at the equator and exactly odd in latitude.
    """
    if abs(lat) >= MAX_LATITUDE:
        raise LatitudeOutOfRange(lat)
    lam = math.radians(lon)
    s = math.sin(math.radians(lat))
    y = WGS84_A * (math.atanh(s) - _E * math.atanh(_E * s))
    return WGS84_A * lam, y


def project_inverse(x: float, y: float) -> tuple[float, float]:
    """(x, y) meters -> (lon, lat) degrees.

    Latitude is recovered by fixed-point iteration to |dphi| < 1e-12 rad;
    NonConvergence after 50 iterations signals a numerical bug.
    """
    lon = math.degrees(x / WGS84_A)
    t = math.exp(-y / WGS84_A)
    phi = math.pi / 2.0 - 2.0 * math.atan(t)
    for _ in range(50):
        s = math.sin(phi)
        con = ((1.0 - _E * s) / (1.0 + _E * s)) ** (_E / 2.0)
        nxt = math.pi / 2.0 - 2.0 * math.atan(t * con)
        if abs(nxt - phi) < 1e-12:
            return lon, math.degrees(nxt)
        phi = nxt
    raise NonConvergence(f"inverse Mercator did not converge for y={y}")


def project_geometry(g: Geometry) -> Geometry:
    """Reproject a geographic geometry into mercator-3395."""
    if g.crs == CRS_MERCATOR:
        return g

    def conv(pos):
        x, y = project_forward(pos[0], pos[1])
        return (x, y) + tuple(pos[2:])

    def walk(node, depth):
        if depth == 0:
            return conv(node)
        return tuple(walk(child, depth - 1) for child in node)

    depth = {"Point": 0, "MultiPoint": 1, "Polyline": 1,
             "Polygon": 2, "MultiPolygon": 3}[g.kind]
    return Geometry(g.kind, walk(g.coordinates, depth), CRS_MERCATOR)


def project_collection(collection: FeatureCollection) -> FeatureCollection:
    """Reproject a geographic collection into mercator-3395."""
    if collection.crs == CRS_MERCATOR:
        return collection
    if collection.crs != CRS_GEOGRAPHIC:
        raise ValueError(f"cannot project from crs {collection.crs!r}")
    feats = [Feature(f.id, project_geometry(f.geometry), f.attributes)
             for f in collection.features]
    return FeatureCollection(collection.name, CRS_MERCATOR, feats,
                             dict(collection.index))
