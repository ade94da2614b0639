import json

import pytest

from featurekit.core import Diagnostics
from featurekit.csvpoints import parse_csv_points
from featurekit.errors import (
    EmptyInput,
    MalformedJson,
    MissingColumn,
    UnsupportedGeometry,
)
from featurekit.geojson import parse_geojson


def geojson_doc(features):
    return json.dumps({"type": "FeatureCollection", "features": features})


class TestParseGeojson:
    def test_polygon_with_properties(self):
        doc = geojson_doc([{
            "type": "Feature",
            "geometry": {"type": "Polygon",
                         "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]]},
            "properties": {"name": "X"},
        }])
        c = parse_geojson(doc)
        assert len(c) == 1
        f = c.features[0]
        assert f.geometry.kind == "Polygon"
        assert f.attributes == {"name": "X"}
        assert c.crs == "geographic-wgs84"

    def test_missing_id_assigned_after_max(self):
        doc = geojson_doc([
            {"type": "Feature", "id": 10,
             "geometry": {"type": "Point", "coordinates": [0, 0]},
             "properties": {}},
            {"type": "Feature",
             "geometry": {"type": "Point", "coordinates": [1, 1]},
             "properties": {}},
        ])
        c = parse_geojson(doc)
        assert sorted(c.ids()) == [10, 11]

    def test_properties_id_promoted(self):
        doc = geojson_doc([{
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [0, 0]},
            "properties": {"id": 77, "v": 1},
        }])
        c = parse_geojson(doc)
        assert c.get(77).attributes == {"v": 1.0}

    def test_geometrycollection_rejected(self):
        doc = geojson_doc([{
            "type": "Feature",
            "geometry": {"type": "GeometryCollection", "geometries": []},
            "properties": {},
        }])
        with pytest.raises(UnsupportedGeometry):
            parse_geojson(doc)

    def test_malformed(self):
        with pytest.raises(MalformedJson):
            parse_geojson(b'{"type": "FeatureCollection", "features": [')

    def test_projection_flag(self):
        doc = geojson_doc([{
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [180, 0]},
            "properties": {},
        }])
        c = parse_geojson(doc, to_mercator=True)
        assert c.crs == "mercator-3395"
        x, y = c.features[0].geometry.coordinates[:2]
        assert x == pytest.approx(20037508.342789243)
        assert y == 0.0

    def test_linestring_becomes_polyline(self):
        doc = geojson_doc([{
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": [[0, 0], [1, 1]]},
            "properties": {},
        }])
        assert parse_geojson(doc).features[0].geometry.kind == "Polyline"


CSV = "lon,lat,noise_key\n-73.9,40.7,12\n-74.0,40.8,9\n-73.8,40.6,highish\n"


class TestParseCsvPoints:
    def test_three_rows(self):
        c = parse_csv_points(CSV, "lon", "lat")
        assert len(c) == 3
        assert c.features[0].geometry.kind == "Point"
        assert c.features[0].attributes["noise_key"] == 12.0
        assert c.features[2].attributes["noise_key"] == "highish"

    def test_bad_coordinate_skipped_and_counted(self):
        diag = Diagnostics()
        data = "lon,lat,v\n1.0,2.0,a\nxx,2.0,b\n3.0,abc,c\n"
        c = parse_csv_points(data, "lon", "lat", diag=diag)
        assert len(c) == 1
        assert diag["csv_row_skipped"] == 2

    def test_missing_column(self):
        with pytest.raises(MissingColumn):
            parse_csv_points(CSV, "lon", "latitude")

    def test_header_only(self):
        with pytest.raises(EmptyInput):
            parse_csv_points("lon,lat\n", "lon", "lat")

    def test_ids_sequential(self):
        c = parse_csv_points(CSV, "lon", "lat")
        assert [f.id for f in c] == [1, 2, 3]

    def test_quoted_cells(self):
        data = 'lon,lat,name\n1.0,2.0,"a, b"\n'
        c = parse_csv_points(data, "lon", "lat")
        assert c.features[0].attributes["name"] == "a, b"
