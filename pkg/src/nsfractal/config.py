"""JSON run configuration: schema 1.

Top level: {"schema": 1, "mode": "trajectory"|"sfs"|"cifs"|"fif"|"verify", ...}
plus mode-specific sections. Parsing errors raise ConfigError carrying the
dotted path of the offending field so the CLI can exit 2 with a precise
message.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .comparison import phi_from_config
from .errors import ConfigError, InvalidInputError, NsfractalError
from .fif import InterpolationData, StageSequence, UniformGrid
from .maps import Affine1D, Affine2D, Box, ContractiveMap, MapSequence, Mobius, Reciprocal
from .metric import CompactSet, read_points_csv, sample_box, sample_interval
from .sfs import CifsSystem, FunctionSystem, SfsSequence

SCHEMA_VERSION = 1
MODES = ("trajectory", "sfs", "cifs", "fif", "verify")


@dataclass
class RunConfig:
    mode: str
    tol: float = 1e-9
    kmax: int = 10_000
    seed: int = 0
    outputs: dict = field(default_factory=dict)
    payload: dict = field(default_factory=dict)

    def validate_knobs(self) -> None:
        if not (np.isfinite(self.tol) and self.tol > 0):
            raise ConfigError("tol", f"must be positive, got {self.tol}")
        if self.kmax < 1:
            raise ConfigError("kmax", f"must be >= 1, got {self.kmax}")


_REQUIRED = object()


def _get(doc: dict, field_path: str, key: str, default=_REQUIRED) -> Any:
    if key not in doc:
        if default is _REQUIRED:
            raise ConfigError(f"{field_path}{key}", "missing required field")
        return default
    return doc[key]


def _wrap(field_path: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (NsfractalError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(field_path, str(exc)) from exc


def box_from_config(doc: Any, field_path: str) -> Box:
    if not isinstance(doc, dict) or "lo" not in doc or "hi" not in doc:
        raise ConfigError(field_path, "expected an object with 'lo' and 'hi'")
    return _wrap(field_path, Box, doc["lo"], doc["hi"])


def map_from_config(doc: Any, domain: Box, field_path: str) -> ContractiveMap:
    if not isinstance(doc, dict):
        raise ConfigError(field_path, "expected a map descriptor object")
    kind = _get(doc, f"{field_path}.", "kind")
    phi = None
    if "phi" in doc:
        phi = _wrap(f"{field_path}.phi", phi_from_config, doc["phi"])
    if kind == "affine1d":
        a = _get(doc, f"{field_path}.", "a")
        b = _get(doc, f"{field_path}.", "b")
        return _wrap(field_path, Affine1D, a, b, domain=domain, phi=phi)
    if kind == "affine2d":
        m = _get(doc, f"{field_path}.", "matrix")
        v = _get(doc, f"{field_path}.", "shift")
        return _wrap(field_path, Affine2D, m, v, domain=domain, phi=phi)
    if kind == "reciprocal":
        return _wrap(field_path, Reciprocal, domain=domain, phi=phi)
    if kind == "mobius":
        return _wrap(field_path, Mobius, domain=domain, phi=phi)
    raise ConfigError(f"{field_path}.kind", f"unknown map kind {kind!r}")


def _prefix_tail(doc: Any, field_path: str, parse_one) -> tuple[tuple, tuple]:
    if not isinstance(doc, dict):
        raise ConfigError(field_path, "expected an object with 'prefix' and 'tail.repeat'")
    prefix_doc = doc.get("prefix", [])
    tail_doc = doc.get("tail")
    if not isinstance(tail_doc, dict) or "repeat" not in tail_doc:
        raise ConfigError(f"{field_path}.tail", "expected an object with 'repeat'")
    prefix = tuple(
        parse_one(d, f"{field_path}.prefix[{i}]") for i, d in enumerate(prefix_doc)
    )
    tail = tuple(
        parse_one(d, f"{field_path}.tail.repeat[{i}]") for i, d in enumerate(tail_doc["repeat"])
    )
    if not tail:
        raise ConfigError(f"{field_path}.tail.repeat", "must be nonempty")
    return prefix, tail


def map_sequence_from_config(doc: Any, domain: Box, field_path: str) -> MapSequence:
    prefix, tail = _prefix_tail(doc, field_path, lambda d, p: map_from_config(d, domain, p))
    return _wrap(field_path, MapSequence, prefix, tail)


def system_from_config(doc: Any, domain: Box, field_path: str) -> FunctionSystem:
    if not isinstance(doc, dict) or "maps" not in doc:
        raise ConfigError(field_path, "expected an object with 'maps'")
    maps = [
        map_from_config(d, domain, f"{field_path}.maps[{i}]") for i, d in enumerate(doc["maps"])
    ]
    return _wrap(field_path, FunctionSystem, maps)


def sfs_sequence_from_config(doc: Any, domain: Box, field_path: str) -> SfsSequence:
    prefix, tail = _prefix_tail(doc, field_path, lambda d, p: system_from_config(d, domain, p))
    return _wrap(field_path, SfsSequence, prefix, tail)


def initial_set_from_config(doc: Any, field_path: str) -> CompactSet:
    if not isinstance(doc, dict):
        raise ConfigError(field_path, "expected an initial-set object")
    if "points" in doc:
        return _wrap(f"{field_path}.points", CompactSet, doc["points"])
    if "csv" in doc:
        return _wrap(f"{field_path}.csv", read_points_csv, doc["csv"])
    if "interval" in doc:
        iv = doc["interval"]
        pitch = _get(doc, f"{field_path}.", "pitch")
        if not (isinstance(iv, (list, tuple)) and len(iv) == 2):
            raise ConfigError(f"{field_path}.interval", "expected [lo, hi]")
        return _wrap(f"{field_path}.interval", sample_interval, iv[0], iv[1], pitch)
    if "box" in doc:
        bx = doc["box"]
        pitch = _get(doc, f"{field_path}.", "pitch")
        if not (isinstance(bx, (list, tuple)) and len(bx) == 2):
            raise ConfigError(f"{field_path}.box", "expected [lo, hi] corner pair")
        return _wrap(f"{field_path}.box", sample_box, bx[0], bx[1], pitch)
    raise ConfigError(field_path, "need one of 'points', 'csv', 'interval', 'box'")


def cifs_from_config(doc: Any, field_path: str) -> CifsSystem:
    if not isinstance(doc, dict):
        raise ConfigError(field_path, "expected a generator object")
    kind = _get(doc, f"{field_path}.", "kind")
    if kind != "affine_geometric":
        raise ConfigError(f"{field_path}.kind", f"unknown generator kind {kind!r}")
    domain = box_from_config(_get(doc, f"{field_path}.", "domain"), f"{field_path}.domain")
    return _wrap(
        field_path,
        CifsSystem.geometric,
        float(_get(doc, f"{field_path}.", "scale")),
        float(_get(doc, f"{field_path}.", "scale_ratio")),
        float(doc.get("shift", 0.0)),
        float(doc.get("shift_ratio", 0.0)),
        domain=domain,
    )


def fif_payload_from_config(doc: dict) -> dict:
    data_doc = _get(doc, "", "data")
    if not isinstance(data_doc, dict):
        raise ConfigError("data", "expected an object with 'nodes' or 'csv'")
    margin = data_doc.get("margin")
    if "nodes" in data_doc:
        data = _wrap("data.nodes", InterpolationData.from_pairs, data_doc["nodes"], margin=margin)
    elif "csv" in data_doc:
        data = _wrap("data.csv", InterpolationData.from_csv, data_doc["csv"], margin=margin)
    else:
        raise ConfigError("data", "need 'nodes' or 'csv'")

    scales_doc = _get(doc, "", "scales")

    def parse_scale(d, path):
        if isinstance(d, (int, float)):
            return float(d)
        if isinstance(d, list):
            return [float(v) for v in d]
        raise ConfigError(path, "scale entries must be numbers or per-segment lists")

    prefix, tail = _prefix_tail(scales_doc, "scales", parse_scale)
    stages = _wrap("scales", StageSequence.affine_schedule, data, prefix, tail)
    intervals = doc.get("grid_intervals")
    grid = _wrap(
        "grid_intervals",
        UniformGrid.for_data,
        data,
        intervals=int(intervals) if intervals is not None else None,
    )
    return {"data": data, "stages": stages, "grid": grid}


def parse_config(doc: Any) -> RunConfig:
    """Validate a parsed JSON document into a RunConfig with typed payload."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    schema = doc.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError("schema", f"unsupported schema version {schema!r}")
    mode = _get(doc, "", "mode")
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}, got {mode!r}")

    cfg = RunConfig(
        mode=mode,
        tol=float(doc.get("tol", 1e-9)),
        kmax=int(doc.get("kmax", 10_000)),
        seed=int(doc.get("seed", 0)),
        outputs=doc.get("outputs", {}),
    )
    cfg.validate_knobs()
    if not isinstance(cfg.outputs, dict):
        raise ConfigError("outputs", "must be an object of artifact names to paths")

    if mode == "trajectory":
        domain = box_from_config(_get(doc, "", "domain"), "domain")
        direction = doc.get("direction", "forward")
        if direction not in ("forward", "backward"):
            raise ConfigError("direction", f"must be 'forward' or 'backward', got {direction!r}")
        cfg.payload = {
            "sequence": map_sequence_from_config(_get(doc, "", "maps"), domain, "maps"),
            "x0": _wrap("x0", np.asarray, _get(doc, "", "x0"), dtype=np.float64),
            "direction": direction,
        }
    elif mode == "sfs":
        domain = box_from_config(_get(doc, "", "domain"), "domain")
        direction = doc.get("direction", "backward")
        if direction not in ("forward", "backward"):
            raise ConfigError("direction", f"must be 'forward' or 'backward', got {direction!r}")
        pitch = doc.get("decimation_pitch")
        if pitch is not None and not (np.isfinite(pitch) and pitch > 0):
            raise ConfigError("decimation_pitch", f"must be positive, got {pitch}")
        raster = doc.get("raster", {})
        if not isinstance(raster, dict):
            raise ConfigError("raster", "must be an object")
        cfg.payload = {
            "sequence": sfs_sequence_from_config(_get(doc, "", "systems"), domain, "systems"),
            "initial_set": initial_set_from_config(_get(doc, "", "initial_set"), "initial_set"),
            "direction": direction,
            "decimation_pitch": pitch,
            "raster": raster,
            "domain": domain,
        }
    elif mode == "cifs":
        cifs = cifs_from_config(_get(doc, "", "generator"), "generator")
        eps = _get(doc, "", "eps")
        if not (np.isfinite(eps) and eps > 0):
            raise ConfigError("eps", f"must be positive, got {eps}")
        cfg.payload = {
            "system": cifs,
            "initial_set": initial_set_from_config(_get(doc, "", "initial_set"), "initial_set"),
            "eps": float(eps),
        }
    elif mode == "fif":
        cfg.payload = fif_payload_from_config(doc)
    # verify mode carries no payload
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<config>", f"cannot read {p}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<config>", f"invalid JSON in {p}: {exc}") from exc
    return parse_config(doc)
