"""Baseline TIFF 6.0 / GeoTIFF decoder.

Scope: little- or big-endian, strip- or tile-organized, compression none or
Deflate, samples uint8/uint16/int16/float32, chunky or planar layout, one or
more IFDs (extra IFDs of the same shape append bands). Georeferencing is
read from ModelPixelScale (33550) and ModelTiepoint (33922); nodata from the
GDAL ASCII tag (42113).
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .core import CRS_GEOGRAPHIC, CRS_MERCATOR
from .errors import (
    FeatureKitError,
    MissingGeoTags,
    UnsupportedCompression,
    UnsupportedSampleFormat,
)

_TAG_WIDTH = 256
_TAG_HEIGHT = 257
_TAG_BITS = 258
_TAG_COMPRESSION = 259
_TAG_STRIP_OFFSETS = 273
_TAG_SPP = 277
_TAG_ROWS_PER_STRIP = 278
_TAG_STRIP_COUNTS = 279
_TAG_PLANAR = 284
_TAG_PREDICTOR = 317
_TAG_TILE_WIDTH = 322
_TAG_TILE_HEIGHT = 323
_TAG_TILE_OFFSETS = 324
_TAG_TILE_COUNTS = 325
_TAG_SAMPLE_FORMAT = 339
_TAG_PIXEL_SCALE = 33550
_TAG_TIEPOINT = 33922
_TAG_GEO_KEYS = 34735
_TAG_GDAL_NODATA = 42113

_FIELD_SIZES = {1: 1, 2: 1, 3: 2, 4: 4, 5: 8, 6: 1, 7: 1, 8: 2, 9: 4,
                10: 8, 11: 4, 12: 8}
_FIELD_FMT = {1: "B", 3: "H", 4: "L", 6: "b", 8: "h", 9: "l", 11: "f", 12: "d"}


@dataclass
class RasterGrid:
    """Decoded raster: float64 bands plus georeferencing."""

    width: int
    height: int
    bands: list[np.ndarray]                      # each (height, width) float64
    pixel_scale: tuple[float, float]             # (sx, sy), model units/pixel
    tiepoint: tuple[float, float, float, float]  # raster (i, j) <-> model (x, y)
    nodata: float | None = None
    crs: str = CRS_GEOGRAPHIC

    def pixel_of(self, x: float, y: float) -> tuple[int, int] | None:
        """Containing (row, col) for model coordinates, None outside."""
        i0, j0, x0, y0 = self.tiepoint
        sx, sy = self.pixel_scale
        col = math.floor(i0 + (x - x0) / sx)
        row = math.floor(j0 + (y0 - y) / sy)
        if 0 <= col < self.width and 0 <= row < self.height:
            return row, col
        return None


def _read_ifd(buf: bytes, offset: int, bo: str) -> tuple[dict, int]:
    if offset + 2 > len(buf):
        raise FeatureKitError("truncated TIFF: IFD offset out of range")
    (count,) = struct.unpack_from(bo + "H", buf, offset)
    entries = {}
    pos = offset + 2
    for _ in range(count):
        tag, ftype, n = struct.unpack_from(bo + "HHL", buf, pos)
        if ftype not in _FIELD_SIZES:
            pos += 12
            continue
        size = _FIELD_SIZES[ftype] * n
        if size <= 4:
            raw = buf[pos + 8: pos + 8 + size]
        else:
            (value_offset,) = struct.unpack_from(bo + "L", buf, pos + 8)
            raw = buf[value_offset: value_offset + size]
        if ftype == 2:
            entries[tag] = raw.split(b"\0")[0].decode("ascii", "replace")
        elif ftype in (5, 10):
            fmt = bo + ("LL" if ftype == 5 else "ll") * n
            parts = struct.unpack(fmt, raw)
            entries[tag] = tuple(parts[i] / (parts[i + 1] or 1)
                                 for i in range(0, 2 * n, 2))
        elif ftype == 7:
            entries[tag] = raw
        else:
            entries[tag] = struct.unpack(bo + _FIELD_FMT[ftype] * n, raw)
        pos += 12
    (next_offset,) = struct.unpack_from(bo + "L", buf, pos)
    return entries, next_offset


def _dtype_for(bits: int, fmt: int, bo: str) -> np.dtype:
    table = {(8, 1): "u1", (16, 1): "u2", (16, 2): "i2", (32, 3): "f4"}
    key = (bits, fmt)
    if key not in table:
        raise UnsupportedSampleFormat(
            f"{bits}-bit sample format {fmt} not in supported matrix")
    return np.dtype(bo + table[key])


def _undo_predictor(block: np.ndarray, predictor: int) -> np.ndarray:
    if predictor == 1:
        return block
    if predictor == 2 and block.dtype.kind in "ui":
        # horizontal differencing: cumulative sum along each row, wraparound
        return np.cumsum(block, axis=1, dtype=block.dtype)
    raise FeatureKitError(f"unsupported TIFF predictor {predictor}")


def _decompress(raw: bytes, compression: int) -> bytes:
    if compression == 1:
        return raw
    if compression in (8, 32946):  # Adobe deflate / old deflate
        return zlib.decompress(raw)
    raise UnsupportedCompression(compression)


def _decode_ifd(buf: bytes, tags: dict, bo: str) -> list[np.ndarray]:
    width = tags[_TAG_WIDTH][0]
    height = tags[_TAG_HEIGHT][0]
    spp = tags.get(_TAG_SPP, (1,))[0]
    bits = tags.get(_TAG_BITS, (1,) * spp)
    if len(set(bits)) != 1:
        raise UnsupportedSampleFormat("heterogeneous bits per sample")
    fmts = tags.get(_TAG_SAMPLE_FORMAT, (1,) * spp)
    dtype = _dtype_for(bits[0], fmts[0], bo)
    compression = tags.get(_TAG_COMPRESSION, (1,))[0]
    planar = tags.get(_TAG_PLANAR, (1,))[0]
    predictor = tags.get(_TAG_PREDICTOR, (1,))[0]

    chunk_spp = spp if planar == 1 else 1
    planes = 1 if planar == 1 else spp

    if _TAG_TILE_OFFSETS in tags:
        tw = tags[_TAG_TILE_WIDTH][0]
        th = tags[_TAG_TILE_HEIGHT][0]
        offsets = tags[_TAG_TILE_OFFSETS]
        counts = tags[_TAG_TILE_COUNTS]
        tiles_x = -(-width // tw)
        tiles_y = -(-height // th)
        image = np.zeros((planes, height, width, chunk_spp), dtype=dtype)
        idx = 0
        for plane in range(planes):
            for ty in range(tiles_y):
                for tx in range(tiles_x):
                    raw = _decompress(
                        buf[offsets[idx]: offsets[idx] + counts[idx]],
                        compression)
                    tile = np.frombuffer(raw, dtype=dtype)
                    tile = tile.reshape(th, tw, chunk_spp)
                    if predictor != 1:
                        tile = _undo_predictor(tile, predictor)
                    y0, x0 = ty * th, tx * tw
                    ys, xs = min(th, height - y0), min(tw, width - x0)
                    image[plane, y0:y0 + ys, x0:x0 + xs] = tile[:ys, :xs]
                    idx += 1
    else:
        if _TAG_STRIP_OFFSETS not in tags:
            raise FeatureKitError("TIFF has neither strips nor tiles")
        offsets = tags[_TAG_STRIP_OFFSETS]
        counts = tags[_TAG_STRIP_COUNTS]
        rows_per_strip = tags.get(_TAG_ROWS_PER_STRIP, (height,))[0]
        strips_per_plane = -(-height // rows_per_strip)
        image = np.zeros((planes, height, width, chunk_spp), dtype=dtype)
        idx = 0
        for plane in range(planes):
            for s in range(strips_per_plane):
                raw = _decompress(
                    buf[offsets[idx]: offsets[idx] + counts[idx]], compression)
                strip = np.frombuffer(raw, dtype=dtype)
                strip = strip.reshape(-1, width, chunk_spp)
                if predictor != 1:
                    strip = _undo_predictor(strip, predictor)
                y0 = s * rows_per_strip
                image[plane, y0:y0 + strip.shape[0]] = strip
                idx += 1

    bands = []
    if planar == 1:
        for s in range(spp):
            bands.append(image[0, :, :, s].astype(np.float64))
    else:
        for plane in range(planes):
            bands.append(image[plane, :, :, 0].astype(np.float64))
    return bands


def _crs_from_geokeys(tags: dict) -> str:
    directory = tags.get(_TAG_GEO_KEYS)
    if directory:
        keys = list(directory)
        for i in range(4, len(keys) - 3, 4):
            key_id, _, _, value = keys[i: i + 4]
            if key_id == 3072 and value == 3395:
                return CRS_MERCATOR
    return CRS_GEOGRAPHIC


def parse_geotiff(data: bytes) -> RasterGrid:
    """Decode a GeoTIFF into a RasterGrid with float64 bands."""
    if len(data) < 8:
        raise FeatureKitError("not a TIFF: too short")
    order = data[:2]
    if order == b"II":
        bo = "<"
    elif order == b"MM":
        bo = ">"
    else:
        raise FeatureKitError("not a TIFF: bad byte-order mark")
    (magic, first_ifd) = struct.unpack_from(bo + "HL", data, 2)
    if magic != 42:
        raise FeatureKitError("not a TIFF: bad magic")

    bands: list[np.ndarray] = []
    first_tags: dict | None = None
    offset = first_ifd
    while offset:
        tags, offset = _read_ifd(data, offset, bo)
        if first_tags is None:
            first_tags = tags
        elif (tags[_TAG_WIDTH] != first_tags[_TAG_WIDTH]
              or tags[_TAG_HEIGHT] != first_tags[_TAG_HEIGHT]):
            raise FeatureKitError("IFD pages differ in shape")
        bands.extend(_decode_ifd(data, tags, bo))
    if first_tags is None:
        raise FeatureKitError("TIFF has no IFD")

    if _TAG_PIXEL_SCALE not in first_tags or _TAG_TIEPOINT not in first_tags:
        raise MissingGeoTags("ModelPixelScale/ModelTiepoint required")
    scale = first_tags[_TAG_PIXEL_SCALE]
    tie = first_tags[_TAG_TIEPOINT]
    if scale[0] == 0 or scale[1] == 0:
        raise MissingGeoTags("zero pixel scale")

    nodata = None
    raw_nodata = first_tags.get(_TAG_GDAL_NODATA)
    if isinstance(raw_nodata, str):
        try:
            nodata = float(raw_nodata.strip())
        except ValueError:
            nodata = None

    return RasterGrid(
        width=first_tags[_TAG_WIDTH][0],
        height=first_tags[_TAG_HEIGHT][0],
        bands=bands,
        pixel_scale=(float(scale[0]), float(scale[1])),
        tiepoint=(float(tie[0]), float(tie[1]), float(tie[3]), float(tie[4])),
        nodata=nodata,
        crs=_crs_from_geokeys(first_tags),
    )
