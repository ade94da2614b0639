"""Scaling benchmarks over synthetic fixtures.

Scenarios time ingestion+indexing, spatial joins against a fixed 28-polygon
root, and per-feature compute over growing inputs, then fit the log-log
slope of wall time versus input size. Only the scaling exponent is a
portable claim; absolute times are hardware-specific and reported
informationally.
"""

from __future__ import annotations

import gc
import json
import math
import random
import time
from dataclasses import dataclass

from .compute import make_program, run_analytical
from .core import Feature, FeatureCollection, Geometry, make_collection
from .expr import linfit
from .geojson import parse_geojson
from .rtree import build_index
from .spatial import AggregateSpec, JoinPredicate, spatial_join

SCENARIOS = ("load", "join", "compute")
ROOT_POLYGON_COUNT = 28
_EXTENT = 10_000.0  # meters, synthetic city extent


@dataclass
class BenchReport:
    scenario: str
    rows: list[tuple[int, int, float]]   # (n, rep, wall_ms)
    repetitions: int

    def mean_ms(self) -> dict[int, float]:
        sums: dict[int, list[float]] = {}
        for n, _, ms in self.rows:
            sums.setdefault(n, []).append(ms)
        return {n: sum(v) / len(v) for n, v in sorted(sums.items())}

    @property
    def slope(self) -> float:
        """Fitted log-log slope of mean wall time versus size."""
        means = self.mean_ms()
        xs = [math.log(n) for n in means]
        ys = [math.log(ms) for ms in means.values()]
        return linfit(xs, ys)[0]

    def per_item_us(self) -> dict[int, float]:
        return {n: 1000.0 * ms / n for n, ms in self.mean_ms().items()}

    def to_csv(self) -> str:
        lines = ["scenario,n,rep,wall_ms"]
        for n, rep, ms in self.rows:
            lines.append(f"{self.scenario},{n},{rep},{ms:.6f}")
        return "\n".join(lines) + "\n"

    def table(self) -> str:
        lines = [f"scenario: {self.scenario}   reps: {self.repetitions}",
                 f"{'n':>10} {'mean ms':>12} {'per item us':>12}"]
        per = self.per_item_us()
        for n, ms in self.mean_ms().items():
            lines.append(f"{n:>10} {ms:>12.3f} {per[n]:>12.3f}")
        lines.append(f"log-log slope: {self.slope:.4f}")
        return "\n".join(lines)


def synth_points(n: int, seed: int = 0, name: str = "points") -> FeatureCollection:
    """Uniform random point records with numeric and category columns."""
    rng = random.Random(seed)
    feats = []
    for i in range(n):
        feats.append(Feature(
            i + 1,
            Geometry("Point", (rng.uniform(0, _EXTENT), rng.uniform(0, _EXTENT))),
            {"value": rng.uniform(0, 100.0),
             "category": rng.choice(("noise", "parking", "waste"))}))
    return make_collection(name, feats)


def synth_polygon_root(count: int = ROOT_POLYGON_COUNT,
                       name: str = "districts") -> FeatureCollection:
    """Grid of district-like rectangles spanning the synthetic extent."""
    cols = 7
    rows = -(-count // cols)
    w = _EXTENT / cols
    h = _EXTENT / rows
    feats = []
    for k in range(count):
        x0 = (k % cols) * w
        y0 = (k // cols) * h
        ring = [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h),
                (x0, y0)]
        feats.append(Feature(k + 1, Geometry("Polygon", [ring])))
    return make_collection(name, feats)


def synth_geojson_bytes(n: int, seed: int = 0) -> bytes:
    """Point FeatureCollection document for load benchmarks."""
    rng = random.Random(seed)
    feats = []
    for i in range(n):
        feats.append({
            "type": "Feature",
            "id": i + 1,
            "geometry": {"type": "Point",
                         "coordinates": [rng.uniform(-0.1, 0.1),
                                         rng.uniform(-0.1, 0.1)]},
            "properties": {"value": rng.uniform(0, 100)},
        })
    return json.dumps({"type": "FeatureCollection",
                       "features": feats}).encode()


def _time_ms(fn) -> float:
    # GC is disabled around the timed region (as timeit does): collector
    # passes scale with the live object graph, not with the work measured
    was_enabled = gc.isenabled()
    gc.collect()
    gc.disable()
    try:
        start = time.perf_counter()
        fn()
        return (time.perf_counter() - start) * 1000.0
    finally:
        if was_enabled:
            gc.enable()


def run_bench(scenario: str, sizes: list[int], reps: int = 3,
              seed: int = 0) -> BenchReport:
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    rows: list[tuple[int, int, float]] = []

    if scenario == "load":
        payloads = {n: synth_geojson_bytes(n, seed) for n in sizes}
        for n in sizes:
            for rep in range(reps):
                def work(data=payloads[n]):
                    collection = parse_geojson(data, to_mercator=True)
                    build_index(collection)
                rows.append((n, rep, _time_ms(work)))
    elif scenario == "join":
        root = synth_polygon_root()
        aggs = [AggregateSpec("count", "n"),
                AggregateSpec("avg", "v", column="value")]
        joins = {n: synth_points(n, seed) for n in sizes}
        for n in sizes:
            for rep in range(reps):
                def work(j=joins[n]):
                    spatial_join(root, j, JoinPredicate("JOIN"), aggs)
                rows.append((n, rep, _time_ms(work)))
    else:
        program = make_program("x * y", {"x": "value", "y": "value"},
                               ["squared"])
        inputs = {n: synth_points(n, seed) for n in sizes}
        for n in sizes:
            for rep in range(reps):
                def work(c=inputs[n]):
                    run_analytical(c, program)
                rows.append((n, rep, _time_ms(work)))

    return BenchReport(scenario, rows, reps)
