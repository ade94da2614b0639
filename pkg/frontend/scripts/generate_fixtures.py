"""Build the demo fixtures with the engine: a neighborhood grid joined with
synthetic bike stations, its mesh sidecar, and the engine-computed
selections the UI tests must reproduce."""

import json
import random
import sys
from pathlib import Path

from featurekit import (
    AggregateSpec,
    Feature,
    Geometry,
    JoinPredicate,
    LayerStyle,
    make_collection,
    serialize,
    spatial_join,
)
from featurekit.coordination import brush_data_space, pick_at_point
from featurekit.mesh import ColorScale, apply_thematic, build_layer_mesh, \
    mesh_sidecar

OUT = Path(__file__).resolve().parent.parent / "fixtures"

GRID = 3
SIZE = 500.0  # meters per neighborhood


def build_neighborhoods():
    feats = []
    fid = 1
    for row in range(GRID):
        for col in range(GRID):
            x0, y0 = col * SIZE, row * SIZE
            ring = [(x0, y0), (x0 + SIZE, y0), (x0 + SIZE, y0 + SIZE),
                    (x0, y0 + SIZE), (x0, y0)]
            feats.append(Feature(fid, Geometry("Polygon", [ring]),
                                 {"name": f"district-{fid}"}))
            fid += 1
    return make_collection("neighborhoods", feats)


def build_stations(rng):
    feats = []
    for i in range(120):
        feats.append(Feature(
            i + 1,
            Geometry("Point", (rng.uniform(0, GRID * SIZE),
                               rng.uniform(0, GRID * SIZE))),
            {"capacity": rng.uniform(5, 40), "ratio": rng.uniform(0, 1)}))
    return make_collection("stations", feats)


def main():
    rng = random.Random(2026)
    neighborhoods = build_neighborhoods()
    stations = build_stations(rng)
    enriched = spatial_join(
        neighborhoods, stations, JoinPredicate("JOIN"),
        [AggregateSpec("avg", "capacity", column="capacity"),
         AggregateSpec("avg", "ratio", column="ratio"),
         AggregateSpec("count", "stations")])

    mesh = build_layer_mesh(enriched, LayerStyle(base_color=(70, 90, 120, 255)))
    scale = ColorScale("sequential", (5.0, 40.0),
                       ((49, 54, 149, 255), (255, 255, 191, 255),
                        (165, 0, 38, 255)))
    mesh = apply_thematic(mesh, enriched, "sjoin.avg.capacity", scale)

    click = (1.5 * SIZE - 40.0, 1.5 * SIZE + 25.0)  # inside district 5
    picked = pick_at_point(enriched, click[0], click[1])
    brush = {"xAttr": "sjoin.avg.capacity", "yAttr": "sjoin.avg.ratio",
             "x0": 15.0, "x1": 30.0, "y0": 0.0, "y1": 0.55}
    brushed = brush_data_space(enriched, brush["xAttr"], brush["yAttr"],
                               brush["x0"], brush["x1"], brush["y0"],
                               brush["y1"])

    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "neighborhoods.json").write_bytes(serialize(enriched))
    (OUT / "neighborhoods.mesh.json").write_text(
        json.dumps(mesh_sidecar(mesh)) + "\n")
    (OUT / "expected.json").write_text(json.dumps({
        "click": {"scene": list(click), "ids": sorted(picked.ids)},
        "brush": {**brush, "ids": sorted(brushed.ids)},
    }, indent=2) + "\n")
    print(f"fixtures -> {OUT}")
    print(f"  click at {click} picks {sorted(picked.ids)}")
    print(f"  value brush selects {sorted(brushed.ids)}")
    if not picked.ids or not brushed.ids:
        print("fixture degenerate: empty selection", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
