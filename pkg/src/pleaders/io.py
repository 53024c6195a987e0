"""Reading and writing signals, fields and pyramids.

Signals and fields travel either as CSV (one value per line, row-major for
fields) or as raw little-endian float64 binary next to a small JSON header
with fields ``dims``, ``length`` (1D) or ``side`` (2D) and ``dtype``.
Pyramids serialize to a directory holding an ``index.json`` plus one flat
binary array per stored band, which is what the golden tests diff.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .leaders import LeaderOctave, LeaderPyramid
from .wavelet import CoefficientOctave, CoefficientPyramid


# -- signals -------------------------------------------------------------------

def read_signal(path: str | Path) -> np.ndarray:
    """Load a 1D signal or 2D field from .csv, .json (header) or .bin."""
    path = Path(path)
    if path.suffix == ".csv":
        data = np.loadtxt(path, dtype=float, ndmin=1)
        return data
    header = path if path.suffix == ".json" else path.with_suffix(".json")
    if not header.exists():
        raise InvalidInputError(f"no JSON header found for {path}")
    meta = json.loads(header.read_text())
    binpath = header.with_suffix(".bin")
    raw = np.fromfile(binpath, dtype="<f8")
    if meta["dims"] == 1:
        if raw.size != meta["length"]:
            raise InvalidInputError(
                f"{binpath}: expected {meta['length']} samples, got {raw.size}")
        return raw
    side = meta["side"]
    if raw.size != side * side:
        raise InvalidInputError(
            f"{binpath}: expected {side}x{side} field, got {raw.size} values")
    return raw.reshape(side, side)


def write_signal(data: np.ndarray, path: str | Path,
                 sidecar: dict | None = None) -> Path:
    """Write CSV when the path ends in .csv, binary + JSON header otherwise.

    ``sidecar`` entries are merged into the JSON header (binary mode) or
    written to ``<stem>.json`` (CSV mode).  Returns the data path.
    """
    data = np.asarray(data, dtype=float)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".csv":
        np.savetxt(path, data.reshape(-1, data.shape[-1]) if data.ndim == 2
                   else data, fmt="%.17g")
        if sidecar:
            path.with_suffix(".json").write_text(
                json.dumps(sidecar, indent=2, default=_jsonify))
        return path
    header = {"dims": data.ndim, "dtype": "float64"}
    if data.ndim == 1:
        header["length"] = int(data.size)
    elif data.ndim == 2 and data.shape[0] == data.shape[1]:
        header["side"] = int(data.shape[0])
    else:
        raise InvalidInputError(f"unsupported data shape {data.shape}")
    if sidecar:
        header.update(sidecar)
    binpath = path.with_suffix(".bin")
    data.astype("<f8").tofile(binpath)
    binpath.with_suffix(".json").write_text(
        json.dumps(header, indent=2, default=_jsonify))
    return binpath


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    raise TypeError(f"cannot serialize {type(obj)}")


# -- pyramids ------------------------------------------------------------------

def _encode_p(p: float) -> str | float:
    return "inf" if math.isinf(p) else float(p)


def _decode_p(p) -> float:
    return math.inf if p == "inf" else float(p)


def save_pyramid(pyr: CoefficientPyramid | LeaderPyramid,
                 directory: str | Path) -> Path:
    """Serialize a pyramid into ``directory`` (created if needed)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    is_leader = isinstance(pyr, LeaderPyramid)
    index: dict = {
        "kind": "leader" if is_leader else "coefficient",
        "dim": pyr.dim,
        "octaves": [],
        "meta": {k: _jsonify(v) if isinstance(v, (np.ndarray, np.floating,
                                                  np.integer)) else v
                 for k, v in pyr.meta.items()},
    }
    if is_leader:
        index["p"] = _encode_p(pyr.p)
        index["mode"] = pyr.mode
    else:
        index["n_samples"] = pyr.n_samples
        index["normalization"] = "L1"
        if pyr.filter is not None:
            index["filter"] = {"name": pyr.filter.name,
                               "n_vanishing_moments":
                                   pyr.filter.n_vanishing_moments}
        if pyr.approx is not None:
            pyr.approx.astype("<f8").tofile(directory / "approx.bin")
            index["approx_shape"] = list(pyr.approx.shape)
    for oct_ in pyr.octaves:
        data = oct_.bands if not is_leader else oct_.values
        entry = {"j": oct_.j, "shape": list(data.shape)}
        np.asarray(data, dtype="<f8").tofile(directory / f"j{oct_.j:02d}.bin")
        np.asarray(oct_.valid, dtype="<u1").tofile(
            directory / f"j{oct_.j:02d}.valid.bin")
        index["octaves"].append(entry)
    (directory / "index.json").write_text(json.dumps(index, indent=2))
    return directory


def load_pyramid(directory: str | Path) -> CoefficientPyramid | LeaderPyramid:
    directory = Path(directory)
    index = json.loads((directory / "index.json").read_text())
    octaves = []
    for entry in index["octaves"]:
        j = entry["j"]
        shape = tuple(entry["shape"])
        data = np.fromfile(directory / f"j{j:02d}.bin",
                           dtype="<f8").reshape(shape)
        spatial = shape[1:] if index["kind"] == "coefficient" else shape
        valid = np.fromfile(directory / f"j{j:02d}.valid.bin",
                            dtype="<u1").astype(bool).reshape(spatial)
        if index["kind"] == "coefficient":
            octaves.append(CoefficientOctave(j=j, bands=data, valid=valid))
        else:
            octaves.append(LeaderOctave(j=j, values=data, valid=valid))
    if index["kind"] == "leader":
        return LeaderPyramid(p=_decode_p(index["p"]), dim=index["dim"],
                             mode=index["mode"], octaves=octaves,
                             meta=index.get("meta", {}))
    approx = None
    if "approx_shape" in index:
        approx = np.fromfile(directory / "approx.bin", dtype="<f8").reshape(
            tuple(index["approx_shape"]))
    filt = None
    if "filter" in index:
        from .wavelet import daubechies_filter
        filt = daubechies_filter(index["filter"]["n_vanishing_moments"])
    return CoefficientPyramid(dim=index["dim"], n_samples=index["n_samples"],
                              octaves=octaves, approx=approx, filter=filt,
                              meta=index.get("meta", {}))
