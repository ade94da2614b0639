"""featurekit: a feature-centric engine for urban spatial analytics.

Features (geometry + attributes + id) are the unit of every module:
parsers produce feature collections, spatial and compute operations enrich
them, meshes carry per-triangle feature ids, and interactions resolve to
selections of feature ids.
"""

from .compute import ComputeProgram, make_program, run_analytical
from .coordination import (
    EventBus,
    EventKind,
    apply_selection,
    brush_data_space,
    brush_map_rect,
    pick_at_point,
)
from .core import (
    BoundingBox,
    Diagnostics,
    Feature,
    FeatureCollection,
    Geometry,
    Selection,
    bbox,
    deserialize,
    from_interchange,
    make_collection,
    make_selection,
    merge_attributes,
    serialize,
    to_interchange,
    validate_geometry,
)
from .csvpoints import parse_csv_points
from .expr import compile_expression
from .geojson import parse_geojson
from .geotiff import RasterGrid, parse_geotiff
from .mesh import (
    ColorScale,
    LayerStyle,
    Mesh,
    apply_thematic,
    build_layer_mesh,
    export_mesh,
    import_mesh,
)
from .overpass import assemble_rings, extract_layers, parse_overpass
from .projection import project_forward, project_inverse
from .rtree import SpatialIndex, build_index
from .shadow import SunDirection, run_shadow_kernel
from .spatial import (
    AggregateSpec,
    JoinPredicate,
    TemporalSpec,
    filter_what,
    filter_where,
    point_in_polygon,
    raster_join,
    slice_when,
    spatial_join,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateSpec",
    "BoundingBox",
    "ColorScale",
    "ComputeProgram",
    "Diagnostics",
    "EventBus",
    "EventKind",
    "Feature",
    "FeatureCollection",
    "Geometry",
    "JoinPredicate",
    "LayerStyle",
    "Mesh",
    "RasterGrid",
    "Selection",
    "SpatialIndex",
    "SunDirection",
    "TemporalSpec",
    "apply_selection",
    "apply_thematic",
    "assemble_rings",
    "bbox",
    "brush_data_space",
    "brush_map_rect",
    "build_index",
    "build_layer_mesh",
    "compile_expression",
    "deserialize",
    "export_mesh",
    "extract_layers",
    "filter_what",
    "filter_where",
    "from_interchange",
    "import_mesh",
    "make_collection",
    "make_program",
    "make_selection",
    "merge_attributes",
    "parse_csv_points",
    "parse_geojson",
    "parse_geotiff",
    "parse_overpass",
    "pick_at_point",
    "point_in_polygon",
    "project_forward",
    "project_inverse",
    "raster_join",
    "run_analytical",
    "run_shadow_kernel",
    "serialize",
    "slice_when",
    "spatial_join",
    "to_interchange",
    "validate_geometry",
    "__version__",
]
