"""Python bindings for the proxilab simulator."""

import json

from ._proxilab import (
    FormatError,
    GeoPoint,
    InsufficientCoverage,
    RegistryError,
    Service,
    cell_size,
    classify,
    destination,
    distance,
    ks_uniform,
    max_localization_error,
    snap,
    sweep,
    tile_size,
)
from . import _proxilab


def attack(lat=0.0, lon=0.0, seed=1, max_queries=1000):
    """Run one collection against a target at (lat, lon).

    Returns a dict with the run summary, the transitions as JSONL text and
    the parsed privacy report (None when coverage was insufficient).
    """
    out = _proxilab.attack(lat, lon, seed, max_queries)
    if out["report"] is not None:
        out["report"] = json.loads(out["report"])
    return out


def analyze(jsonl, anchor_lat, anchor_lon):
    """Privacy report for a transitions JSONL document."""
    return json.loads(_proxilab.analyze(jsonl, anchor_lat, anchor_lon))


__all__ = [
    "FormatError",
    "GeoPoint",
    "InsufficientCoverage",
    "RegistryError",
    "Service",
    "analyze",
    "attack",
    "cell_size",
    "classify",
    "destination",
    "distance",
    "ks_uniform",
    "max_localization_error",
    "snap",
    "sweep",
    "tile_size",
]
