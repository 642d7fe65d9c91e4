"""File formats: long-form paths CSV, labels CSV, model JSON, and INI configs.

Paths CSV is long format with header ``path_id,tau,value``, rows sorted by
(path_id, tau) and 1-based path ids matching the observation order.  Labels
CSV has header ``path_id,state`` with 1-based states.  Model JSON stores the
family, state count, grid resolution, Markov parameters, per-state emission
parameters, and the final log-likelihood.  Floats are written with repr so
a written file reads back to the exact same values.
"""

from __future__ import annotations

import configparser
import json
from pathlib import Path as FsPath

import numpy as np

from .emissions import (
    BmDriftEmission,
    EuclideanEmission,
    FbmDriftEmission,
    NonparametricEmission,
    OuEmission,
)
from .engine import ThmmModel
from .errors import ConfigError, DataFormatError
from .paths import Grid, Path, make_path


# ---------------------------------------------------------------------------
# CSV


def write_paths_csv(paths: list[Path], file: FsPath | str):
    lines = ["path_id,tau,value"]
    for t, p in enumerate(paths, start=1):
        for tau, value in zip(p.grid.taus, p.values):
            lines.append(f"{t},{float(tau)!r},{float(value)!r}")
    FsPath(file).write_text("\n".join(lines) + "\n")


def read_paths_csv(file: FsPath | str, n_points: int | None = None) -> list[Path]:
    """Load a long-form paths CSV, resampling to ``n_points`` when given."""
    rows = _read_csv_rows(file, ("path_id", "tau", "value"))
    by_id: dict[int, list[tuple[float, float]]] = {}
    for raw_id, raw_tau, raw_value in rows:
        try:
            by_id.setdefault(int(raw_id), []).append((float(raw_tau), float(raw_value)))
        except ValueError as exc:
            raise DataFormatError(f"{file}: bad row {raw_id},{raw_tau},{raw_value}") from exc
    ids = sorted(by_id)
    if ids != list(range(1, len(ids) + 1)):
        raise DataFormatError(f"{file}: path ids must be 1..T, got {ids[:5]}...")
    paths = []
    for t in ids:
        taus = np.array([tau for tau, _ in by_id[t]])
        values = np.array([v for _, v in by_id[t]])
        if np.any(np.diff(taus) <= 0):
            raise DataFormatError(f"{file}: path {t} rows are not sorted by tau")
        paths.append(make_path(taus, values, n_points if n_points is not None else taus.size))
    return paths


def write_labels_csv(states, file: FsPath | str):
    lines = ["path_id,state"]
    for t, s in enumerate(states, start=1):
        lines.append(f"{t},{int(s)}")
    FsPath(file).write_text("\n".join(lines) + "\n")


def read_labels_csv(file: FsPath | str) -> np.ndarray:
    rows = _read_csv_rows(file, ("path_id", "state"))
    try:
        pairs = sorted((int(i), int(s)) for i, s in rows)
    except ValueError as exc:
        raise DataFormatError(f"{file}: labels must be integers") from exc
    if [i for i, _ in pairs] != list(range(1, len(pairs) + 1)):
        raise DataFormatError(f"{file}: path ids must be 1..T")
    return np.array([s for _, s in pairs], dtype=int)


def _read_csv_rows(file, expected_header):
    try:
        text = FsPath(file).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {file}: {exc}") from exc
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise DataFormatError(f"{file} is empty")
    header = tuple(h.strip() for h in lines[0].split(","))
    if header != expected_header:
        raise DataFormatError(
            f"{file}: expected header {','.join(expected_header)}, got {lines[0]!r}"
        )
    rows = []
    for line in lines[1:]:
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != len(expected_header):
            raise DataFormatError(f"{file}: malformed row {line!r}")
        rows.append(parts)
    return rows


# ---------------------------------------------------------------------------
# Model JSON

_FAMILY_OF_EMISSION = {
    EuclideanEmission: "euclidean",
    BmDriftEmission: "bm",
    OuEmission: "ou",
    FbmDriftEmission: "fbm",
    NonparametricEmission: "nonparametric",
}


def family_name(model: ThmmModel) -> str:
    return _FAMILY_OF_EMISSION[type(model.emissions[0])]


def model_to_json(model: ThmmModel, grid_points: int, loglik: float | None) -> dict:
    family = family_name(model)
    states = []
    for e in model.emissions:
        if isinstance(e, BmDriftEmission):
            states.append({"drift": e.drift})
        elif isinstance(e, OuEmission):
            states.append({"b0": e.b0, "b1": e.b1})
        elif isinstance(e, FbmDriftEmission):
            states.append({"drift": e.drift, "hurst": e.hurst})
        elif isinstance(e, NonparametricEmission):
            states.append({"mean": e.mean_path.values.tolist()})
        else:
            states.append({"mean": e.mean.tolist(), "precision": e.precision.tolist()})
    return {
        "family": family,
        "p": model.n_states,
        "grid_points": grid_points,
        "eta": model.eta.tolist(),
        "trans": model.trans.tolist(),
        "states": states,
        "loglik": loglik,
    }


def write_model_json(model: ThmmModel, grid_points: int, loglik: float | None, file):
    FsPath(file).write_text(
        json.dumps(model_to_json(model, grid_points, loglik), indent=2) + "\n"
    )


def model_from_json(doc: dict) -> tuple[ThmmModel, int]:
    try:
        family = doc["family"]
        p = int(doc["p"])
        grid_points = int(doc["grid_points"])
        eta = np.array(doc["eta"], dtype=float)
        trans = np.array(doc["trans"], dtype=float)
        states = doc["states"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"model JSON is missing or has malformed keys: {exc}") from exc
    if len(states) != p:
        raise DataFormatError(f"model JSON declares p={p} but has {len(states)} states")
    grid = Grid(grid_points)
    emissions = []
    try:
        for s in states:
            if family == "bm":
                emissions.append(BmDriftEmission(float(s["drift"])))
            elif family == "ou":
                emissions.append(OuEmission(float(s["b0"]), float(s["b1"])))
            elif family == "fbm":
                emissions.append(FbmDriftEmission(float(s["drift"]), float(s["hurst"])))
            elif family == "nonparametric":
                emissions.append(
                    NonparametricEmission(
                        Path(grid, np.array(s["mean"], dtype=float)), int(s.get("order", 1))
                    )
                )
            elif family == "euclidean":
                emissions.append(
                    EuclideanEmission(
                        np.array(s["mean"], dtype=float),
                        np.array(s["precision"], dtype=float),
                    )
                )
            else:
                raise DataFormatError(f"unknown model family {family!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"model JSON state block malformed: {exc}") from exc
    try:
        model = ThmmModel(eta, trans, emissions)
    except ValueError as exc:
        raise DataFormatError(f"model JSON parameters invalid: {exc}") from exc
    return model, grid_points


def read_model_json(file) -> tuple[ThmmModel, int]:
    try:
        doc = json.loads(FsPath(file).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"cannot parse model JSON {file}: {exc}") from exc
    return model_from_json(doc)


# ---------------------------------------------------------------------------
# Config

_SECTIONS = ("data", "model", "fit", "simulate")

_SCHEMA = {
    "data": {"grid_points": "int", "bandwidth": "float"},
    "model": {
        "family": "family",
        "states": "int",
        "hurst": "float",
        "sobolev_order": "order",
    },
    "fit": {
        "init": "init",
        "tol": "float",
        "max_iter": "int",
        "restarts": "int",
        "seed": "int",
    },
    "simulate": {
        "family": "simfamily",
        "t": "int",
        "grid_points": "int",
        "seed": "int",
        "drifts": "floats",
        "means": "floats",
        "rates": "floats",
        "hurst": "float",
        "eta": "floats",
        "trans": "matrix",
        "trans_diag": "float",
    },
}


def _parse_value(kind: str, raw: str, where: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "floats":
            return [float(x) for x in raw.replace(",", " ").split()]
        if kind == "matrix":
            return [[float(x) for x in row.replace(",", " ").split()] for row in raw.split(";")]
        if kind == "order":
            order = int(raw)
            if order not in (1, 2):
                raise ValueError("sobolev_order must be 1 or 2")
            return order
        if kind == "family":
            if raw not in ("euclidean", "bm", "ou", "fbm", "nonparametric"):
                raise ValueError(f"unknown family {raw!r}")
            return raw
        if kind == "simfamily":
            if raw not in ("bm", "ou", "fbm"):
                raise ValueError(f"cannot simulate family {raw!r}")
            return raw
        if kind == "init":
            if raw not in ("kmeans", "random", "spread"):
                raise ValueError(f"unknown init strategy {raw!r}")
            return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unhandled kind {kind}")


def read_config(file) -> dict:
    """Parse and validate an INI config; unknown sections or keys are errors."""
    parser = configparser.ConfigParser()
    try:
        with open(file) as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {file}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {file}: {exc}") from exc
    config: dict[str, dict] = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"[{section}]: unknown section")
        config[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"[{section}] {key}: unknown key")
            config[section][key] = _parse_value(_SCHEMA[section][key], raw, f"[{section}] {key}")
    return config
