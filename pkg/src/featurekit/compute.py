"""Deterministic data-parallel evaluation of per-feature programs.

Each feature is evaluated independently with variables bound per the
program's variable mapping; results are written back as new attributes in a
single merge, so parallel execution is bit-identical to sequential.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .core import Diagnostics, Feature, FeatureCollection, merge_attributes
from .errors import ExpressionTypeError, TypeMismatch
from .expr import ARRAY, Expression, compile_expression

__all__ = ["ComputeProgram", "run_analytical", "compile_expression"]


@dataclass(frozen=True)
class ComputeProgram:
    """Variable bindings + expression + output attribute names."""

    variable_mapping: dict[str, str]
    result_fields: tuple[str, ...]
    body: Expression

    def __post_init__(self):
        missing = self.body.free_vars - self.variable_mapping.keys()
        if missing:
            raise ExpressionTypeError(
                f"unmapped variables: {sorted(missing)}")
        if len(self.result_fields) != self.body.arity:
            raise ExpressionTypeError(
                f"body produces {self.body.arity} values, "
                f"{len(self.result_fields)} result fields given")


def make_program(source: str, variable_mapping: dict[str, str],
                 result_fields, array_vars=()) -> ComputeProgram:
    """Compile ``source`` and wrap it with its bindings."""
    body = compile_expression(source, array_vars=array_vars)
    return ComputeProgram(dict(variable_mapping), tuple(result_fields), body)


def _bind(feature: Feature, program: ComputeProgram) -> dict | None:
    """Environment for one feature; None when an input is missing."""
    env = {}
    for var in program.body.free_vars:
        value = feature.get_path(program.variable_mapping[var])
        if value is None:
            return None
        if var in program.body.array_vars:
            if not isinstance(value, list):
                raise TypeMismatch(feature.id, var)
        elif not isinstance(value, float):
            raise TypeMismatch(feature.id, var)
        env[var] = value
    return env


def _writeback_value(value):
    """NaN results (scalars, tuple elements, array elements) become null."""
    if isinstance(value, float) and math.isnan(value):
        return None, 1
    if isinstance(value, list):
        if any(isinstance(v, float) and math.isnan(v) for v in value):
            return None, 1
    return value, 0


def _evaluate_chunk(features, program: ComputeProgram):
    fields = program.result_fields
    nulls = {name: None for name in fields}
    patches = []
    nan_count = 0
    missing_count = 0
    for f in features:
        env = _bind(f, program)
        if env is None:
            patches.append((f.id, dict(nulls)))
            missing_count += 1
            continue
        result = program.body.evaluate(env)
        if len(fields) == 1:
            result = (result,)
        patch = {}
        for name, value in zip(fields, result):
            value, flagged = _writeback_value(value)
            nan_count += flagged
            patch[name] = value
        patches.append((f.id, patch))
    return patches, missing_count, nan_count


def run_analytical(collection: FeatureCollection, program: ComputeProgram,
                   workers: int = 1,
                   diag: Diagnostics | None = None) -> FeatureCollection:
    """Evaluate the program once per feature and write results back.

    Features missing a mapped input get null in all result fields and are
    counted; NaN results are written as null and counted. A mapped input
    of the wrong type raises TypeMismatch. ``workers`` > 1 shards the
    feature list across threads; output is bit-identical to sequential.
    """
    features = collection.features
    if workers <= 1 or len(features) < 2 * workers:
        chunks = [_evaluate_chunk(features, program)]
    else:
        step = -(-len(features) // workers)
        parts = [features[i:i + step] for i in range(0, len(features), step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda part: _evaluate_chunk(part, program),
                                   parts))

    updates = {}
    missing = nans = 0
    for patches, missing_count, nan_count in chunks:
        missing += missing_count
        nans += nan_count
        for fid, patch in patches:
            updates[fid] = patch
    if diag is not None:
        if missing:
            diag.add("missing_input", missing)
        if nans:
            diag.add("nan_result", nans)
    return merge_attributes(collection, updates)
