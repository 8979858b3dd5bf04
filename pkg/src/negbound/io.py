"""JSON documents read and written by the command line.

Moments document::

    {"range": {"a": -0.5, "b": 1.0},
     "moments": [{"order": 1, "value": 1.0},
                 {"order": 2, "value": 0.5833333, "stderr": 0.001}, ...]}

``range`` is optional (defaults ``[-0.5, 1.0]``); orders must be contiguous
from 1. Extra top-level keys are ignored, so ``oracle`` output can be fed
straight back to ``estimate``.

State document::

    {"dim_a": 2, "dim_b": 2, "entries": [[re, im], ...]}

with ``(dim_a*dim_b)**2`` pairs in row-major order of the composite index
``i_A * dim_b + i_B``.
"""

from __future__ import annotations

import json

import jsonschema
import numpy as np

from .errors import InputError
from .moments import MomentSequence, SpectralRange
from .spectral import DensityMatrix

_NUMBER = {"type": "number"}

MOMENTS_SCHEMA = {
    "type": "object",
    "required": ["moments"],
    "properties": {
        "range": {
            "type": "object",
            "properties": {"a": _NUMBER, "b": _NUMBER},
            "additionalProperties": False,
        },
        "moments": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "required": ["order", "value"],
                "properties": {
                    "order": {"type": "integer", "minimum": 1},
                    "value": _NUMBER,
                    "stderr": {"type": "number", "minimum": 0},
                },
                "additionalProperties": False,
            },
        },
    },
}

STATE_SCHEMA = {
    "type": "object",
    "required": ["dim_a", "dim_b", "entries"],
    "properties": {
        "dim_a": {"type": "integer", "minimum": 1},
        "dim_b": {"type": "integer", "minimum": 1},
        "entries": {
            "type": "array",
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": _NUMBER},
        },
    },
}


def _check(doc, schema):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        raise InputError(f"schema error: {exc.message}") from exc


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def parse_moments(doc) -> tuple[MomentSequence, SpectralRange | None]:
    """Validate a moments document; the range is ``None`` when absent."""
    _check(doc, MOMENTS_SCHEMA)
    entries = []
    for m in doc["moments"]:
        rec = (m["order"], m["value"])
        if "stderr" in m:
            rec += (m["stderr"],)
        entries.append(rec)
    seq = MomentSequence.from_orders(entries)
    rng = None
    if "range" in doc:
        r = doc["range"]
        rng = SpectralRange(r.get("a", -0.5), r.get("b", 1.0))
    return seq, rng


def moments_document(seq: MomentSequence, rng: SpectralRange = SpectralRange()) -> dict:
    moments = []
    for k in range(1, seq.n_max + 1):
        rec = {"order": k, "value": seq[k]}
        if seq.stderr is not None:
            rec["stderr"] = seq.stderr[k - 1]
        moments.append(rec)
    return {"range": {"a": rng.a, "b": rng.b}, "moments": moments}


def parse_state(doc) -> DensityMatrix:
    _check(doc, STATE_SCHEMA)
    da, db = doc["dim_a"], doc["dim_b"]
    d = da * db
    if len(doc["entries"]) != d * d:
        raise InputError(f"expected {d * d} entries for a {da}x{db} state, got {len(doc['entries'])}")
    arr = np.array([complex(re, im) for re, im in doc["entries"]]).reshape(d, d)
    return DensityMatrix(da, db, arr)


def state_document(rho: DensityMatrix) -> dict:
    flat = rho.entries.reshape(-1)
    return {"dim_a": rho.dim_a, "dim_b": rho.dim_b,
            "entries": [[float(z.real), float(z.imag)] for z in flat]}


def load_moments(path):
    return parse_moments(_load(path))


def load_state(path):
    return parse_state(_load(path))


def dumps(doc) -> str:
    """Canonical serialization: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
