"""CSV point-set ingestion (comma separated, double-quoted, UTF-8)."""

from __future__ import annotations

import csv
import io
import math

from .core import (
    CRS_GEOGRAPHIC,
    Diagnostics,
    Feature,
    FeatureCollection,
    Geometry,
    make_collection,
)
from .errors import EmptyInput, MissingColumn
from .projection import project_collection


def _parse_cell(text: str):
    try:
        value = float(text)
        return value if math.isfinite(value) else text
    except ValueError:
        return text


def parse_csv_points(data: bytes | str, lon_column: str, lat_column: str,
                     to_mercator: bool = False, name: str = "points",
                     diag: Diagnostics | None = None) -> FeatureCollection:
    """One Point feature per data row; other columns become attributes.

    Numeric parsing is attempted per cell, falling back to text. Rows whose
    coordinates do not parse are skipped and counted.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.DictReader(io.StringIO(data))
    if reader.fieldnames is None:
        raise EmptyInput("no header row")
    for column in (lon_column, lat_column):
        if column not in reader.fieldnames:
            raise MissingColumn(column)

    feats = []
    skipped = 0
    for row in reader:
        try:
            lon = float(row[lon_column])
            lat = float(row[lat_column])
        except (TypeError, ValueError):
            skipped += 1
            continue
        if not (math.isfinite(lon) and math.isfinite(lat)):
            skipped += 1
            continue
        attrs = {key: _parse_cell(value)
                 for key, value in row.items()
                 if key not in (lon_column, lat_column) and value is not None}
        feats.append(Feature(None, Geometry("Point", (lon, lat),
                                            CRS_GEOGRAPHIC), attrs))
    if not feats and skipped == 0:
        raise EmptyInput("no data rows")
    if diag is not None and skipped:
        diag.add("csv_row_skipped", skipped)

    collection = make_collection(name, feats, crs=CRS_GEOGRAPHIC)
    if to_mercator:
        collection = project_collection(collection)
    return collection
