"""Command-line driver: ingestion, queries, compute, mesh export, benchmarks.

Exit codes: 0 success, 1 data error, 2 usage error. Identical inputs and
flags produce byte-identical output files.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .bench import SCENARIOS, run_bench
from .compute import make_program, run_analytical
from .core import BoundingBox, Diagnostics, deserialize, serialize
from .csvpoints import parse_csv_points
from .errors import ExpressionSyntaxError, FeatureKitError, StyleMismatch
from .geojson import parse_geojson
from .geotiff import parse_geotiff
from .mesh import ColorScale, LayerStyle, apply_thematic, build_layer_mesh, \
    write_mesh_files
from .overpass import LAYERS, extract_layers, fetch_overpass, parse_overpass
from .spatial import (
    AGGREGATE_FNS,
    AggregateSpec,
    JoinPredicate,
    filter_what,
    filter_where,
    spatial_join,
)


def _parse_bbox(text: str) -> BoundingBox:
    try:
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError
        return BoundingBox(*parts)
    except ValueError:
        raise click.UsageError(
            f"--bbox expects min_x,min_y,max_x,max_y, got {text!r}")


def _parse_rgba(text: str):
    parts = [int(p) for p in text.split(",")]
    if len(parts) == 3:
        parts.append(255)
    if len(parts) != 4 or not all(0 <= p <= 255 for p in parts):
        raise click.UsageError(f"--color expects r,g,b[,a], got {text!r}")
    return tuple(parts)


def _load_collection(path: str):
    return deserialize(Path(path).read_bytes())


def _write_collection(collection, path: str) -> None:
    Path(path).write_bytes(serialize(collection))


@click.group()
def main():
    """featurekit: feature-centric urban spatial analytics."""


# -- ingest -------------------------------------------------------------------

@main.group()
def ingest():
    """Parse raw urban data into canonical interchange files."""


@ingest.command("overpass-file")
@click.argument("path", type=click.Path(exists=True))
@click.option("--layers", default=",".join(LAYERS),
              help="comma-separated subset of " + ",".join(LAYERS))
@click.option("--bbox", "bbox_text", required=True,
              help="geographic degrees: min_lon,min_lat,max_lon,max_lat")
@click.option("--out", "out_dir", required=True, type=click.Path())
def ingest_overpass_file(path, layers, bbox_text, out_dir):
    """Extract layers from a saved Overpass JSON response."""
    requested = {l.strip() for l in layers.split(",") if l.strip()}
    unknown = requested - set(LAYERS)
    if unknown or not requested:
        raise click.UsageError(f"unknown layers: {sorted(unknown)}")
    area = _parse_bbox(bbox_text)
    diag = Diagnostics()
    doc = parse_overpass(Path(path).read_bytes())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for layer, collection in extract_layers(doc, requested, area,
                                            diag=diag).items():
        target = out / f"{layer}.json"
        _write_collection(collection, target)
        click.echo(f"{layer}: {len(collection)} features -> {target}")
    if doc.diagnostics.total or diag.total:
        click.echo(f"diagnostics: {doc.diagnostics.counts | diag.counts}")


@ingest.command("overpass-fetch")
@click.option("--bbox", "bbox_text", required=True,
              help="geographic degrees: min_lon,min_lat,max_lon,max_lat")
@click.option("--layers", default=",".join(LAYERS))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--url", default=None,
              help="Overpass endpoint (default: FEATUREKIT_OVERPASS_URL)")
def ingest_overpass_fetch(bbox_text, layers, out_dir, url):
    """Fetch from the Overpass API, save the raw response, then ingest."""
    area = _parse_bbox(bbox_text)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    raw_path = out / "overpass-raw.json"
    try:
        raw = fetch_overpass(area, url=url)
    except Exception as e:  # HTTP errors surface status + retry advice
        raise click.ClickException(f"overpass fetch failed: {e}")
    raw_path.write_bytes(raw)
    click.echo(f"raw response saved -> {raw_path}")
    ctx = click.get_current_context()
    ctx.invoke(ingest_overpass_file, path=str(raw_path), layers=layers,
               bbox_text=bbox_text, out_dir=out_dir)


@ingest.command("geojson")
@click.argument("path", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--name", default=None)
@click.option("--keep-geographic", is_flag=True,
              help="skip projection into mercator-3395")
def ingest_geojson(path, out, name, keep_geographic):
    collection = parse_geojson(Path(path).read_bytes(),
                               to_mercator=not keep_geographic, name=name)
    _write_collection(collection, out)
    click.echo(f"{collection.name}: {len(collection)} features -> {out}")


@ingest.command("csv")
@click.argument("path", type=click.Path(exists=True))
@click.option("--lon-column", required=True)
@click.option("--lat-column", required=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--name", default="points")
def ingest_csv(path, lon_column, lat_column, out, name):
    diag = Diagnostics()
    collection = parse_csv_points(Path(path).read_bytes(), lon_column,
                                  lat_column, to_mercator=True, name=name,
                                  diag=diag)
    _write_collection(collection, out)
    click.echo(f"{name}: {len(collection)} features -> {out}")
    if diag.total:
        click.echo(f"skipped rows: {diag['csv_row_skipped']}")


@ingest.command("geotiff")
@click.argument("path", type=click.Path(exists=True))
def ingest_geotiff(path):
    """Validate a GeoTIFF and print its manifest and band summary."""
    grid = parse_geotiff(Path(path).read_bytes())
    click.echo(f"size: {grid.width} x {grid.height}  bands: {len(grid.bands)}")
    click.echo(f"pixel scale: {grid.pixel_scale}  tiepoint: {grid.tiepoint}")
    click.echo(f"crs: {grid.crs}  nodata: {grid.nodata}")
    for k, band in enumerate(grid.bands):
        click.echo(f"band {k}: min {band.min():.6g} max {band.max():.6g} "
                   f"mean {band.mean():.6g}")


# -- query ------------------------------------------------------------------------

@main.command("query")
@click.option("--root", "root_path", required=True, type=click.Path(exists=True))
@click.option("--join", "join_path", default=None, type=click.Path(exists=True))
@click.option("--predicate", type=click.Choice(["JOIN", "NEAREST"]),
              default="JOIN")
@click.option("--radius", type=float, default=None)
@click.option("--agg", "aggs", multiple=True,
              help="fn:result_field[:column], fn in " + ",".join(AGGREGATE_FNS))
@click.option("--where", "where_bbox", default=None,
              help="mercator meters: min_x,min_y,max_x,max_y")
@click.option("--what", "whats", multiple=True,
              help="column,op,value with op in = != < <= > >=")
@click.option("--out", required=True, type=click.Path())
def query(root_path, join_path, predicate, radius, aggs, where_bbox, whats,
          out):
    """Spatial join and/or where-what filtering over collection files."""
    collection = _load_collection(root_path)
    if where_bbox:
        collection = filter_where(collection, _parse_bbox(where_bbox))
    if whats:
        predicates = []
        for item in whats:
            parts = item.split(",", 2)
            if len(parts) != 3:
                raise click.UsageError(f"--what expects column,op,value: {item!r}")
            column, op, value = parts
            try:
                typed_value = float(value)
            except ValueError:
                typed_value = value
            predicates.append((column, op, typed_value))
        collection = filter_what(collection, predicates)
    if join_path:
        if predicate == "NEAREST" and radius is None:
            raise click.UsageError("NEAREST requires --radius")
        specs = []
        for item in aggs:
            parts = item.split(":")
            if len(parts) == 2:
                fn, result_field, column = parts[0], parts[1], None
            elif len(parts) == 3:
                fn, result_field, column = parts
            else:
                raise click.UsageError(f"--agg expects fn:result[:column]: {item!r}")
            if fn not in AGGREGATE_FNS:
                raise click.UsageError(f"unknown aggregate fn {fn!r}")
            specs.append(AggregateSpec(fn, result_field, column=column))
        collection = spatial_join(collection, _load_collection(join_path),
                                  JoinPredicate(predicate, radius=radius),
                                  specs)
    _write_collection(collection, out)
    click.echo(f"{len(collection)} features -> {out}")


# -- compute ------------------------------------------------------------------------

@main.command("compute")
@click.argument("path", type=click.Path(exists=True))
@click.option("--map", "mappings", multiple=True, required=True,
              help="var=attribute (repeatable)")
@click.option("--expr", "source", required=True)
@click.option("--out-field", "out_fields", multiple=True, required=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--workers", type=int, default=1)
def compute_cmd(path, mappings, source, out_fields, out, workers):
    """Evaluate an expression per feature and write results back."""
    collection = _load_collection(path)
    mapping = {}
    for item in mappings:
        if "=" not in item:
            raise click.UsageError(f"--map expects var=attribute: {item!r}")
        var, attr = item.split("=", 1)
        mapping[var.strip()] = attr.strip()

    # variables bound to array attributes (on the first feature that has
    # them) are treated as array-typed
    array_vars = set()
    for var, attr in mapping.items():
        for f in collection.features:
            value = f.get_path(attr)
            if value is not None:
                if isinstance(value, list):
                    array_vars.add(var)
                break

    try:
        program = make_program(source, mapping, list(out_fields),
                               array_vars=array_vars)
    except ExpressionSyntaxError as e:
        click.echo(f"error: {e}", err=True)
        click.echo(f"  {source}", err=True)
        click.echo(f"  {' ' * e.position}^", err=True)
        sys.exit(2)

    diag = Diagnostics()
    enriched = run_analytical(collection, program, workers=workers, diag=diag)
    _write_collection(enriched, out)
    click.echo(f"{len(enriched)} features -> {out}")
    if diag.total:
        click.echo(f"diagnostics: {diag.counts}")


# -- mesh ------------------------------------------------------------------------

@main.command("mesh")
@click.argument("path", type=click.Path(exists=True))
@click.option("--extrude-by", default=None)
@click.option("--stroke-width", type=float, default=None)
@click.option("--color", default="160,160,160,255")
@click.option("--thematic", default=None,
              help="dotted attribute path for color mapping")
@click.option("--domain", default=None, help="min,max for the thematic scale")
@click.option("--out", required=True, type=click.Path())
def mesh_cmd(path, extrude_by, stroke_width, color, thematic, domain, out):
    """Build a triangle mesh file (FKMESH01 + JSON sidecar)."""
    collection = _load_collection(path)
    style = LayerStyle(base_color=_parse_rgba(color), extrude_by=extrude_by,
                       stroke_width=stroke_width)
    try:
        mesh = build_layer_mesh(collection, style)
    except StyleMismatch as e:
        raise click.UsageError(str(e))
    if thematic:
        if not domain:
            raise click.UsageError("--thematic requires --domain min,max")
        lo, hi = (float(v) for v in domain.split(","))
        scale = ColorScale("sequential", (lo, hi),
                           ((49, 54, 149, 255), (255, 255, 191, 255),
                            (165, 0, 38, 255)))
        mesh = apply_thematic(mesh, collection, thematic, scale)
    write_mesh_files(mesh, out)
    click.echo(f"{mesh.triangle_count} triangles -> {out} (+ .json sidecar)")


# -- bench ------------------------------------------------------------------------

@main.command("bench")
@click.option("--scenario", type=click.Choice(SCENARIOS), required=True)
@click.option("--sizes", required=True, help="comma-separated input sizes")
@click.option("--reps", type=int, default=3)
@click.option("--csv", "csv_path", default=None, type=click.Path())
@click.option("--seed", type=int, default=0)
def bench_cmd(scenario, sizes, reps, csv_path, seed):
    """Run a scaling benchmark and report the fitted log-log slope."""
    try:
        size_list = [int(s) for s in sizes.split(",") if s.strip()]
    except ValueError:
        raise click.UsageError(f"--sizes expects integers, got {sizes!r}")
    if not size_list:
        raise click.UsageError("need at least one size")
    if reps < 2:
        click.echo("warning: with --reps 1 run-to-run variance is unreported",
                   err=True)
    report = run_bench(scenario, size_list, reps=reps, seed=seed)
    click.echo(report.table())
    if csv_path:
        Path(csv_path).write_text(report.to_csv(), encoding="utf-8")
        click.echo(f"csv -> {csv_path}")


def run():
    try:
        main(standalone_mode=False)
    except click.UsageError as e:
        click.echo(f"usage error: {e.format_message()}", err=True)
        sys.exit(2)
    except click.exceptions.Exit as e:
        sys.exit(e.exit_code)
    except click.ClickException as e:
        e.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except FeatureKitError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    run()
