"""JSON and CSV persistence for the core types.

JSON uses the repr of Python floats, CSV uses %.17g formatting; both round-trip
finite doubles bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import (
    DiscreteMeasure,
    DistanceMatrix,
    Embedding,
    MultiViewDataset,
    TransportPlan,
    measure_from_weights,
    validate_distance_matrix,
)
from .errors import DataValidationError

FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------------------
# JSON dict forms


def distance_matrix_to_dict(dm: DistanceMatrix) -> dict:
    return {"size": dm.size, "values": dm.values.tolist()}


def distance_matrix_from_dict(d: dict) -> DistanceMatrix:
    dm = validate_distance_matrix(d["values"])
    if dm.size != d.get("size", dm.size):
        raise DataValidationError("size field disagrees with the values array")
    return dm


def measure_to_dict(m: DiscreteMeasure) -> dict:
    return {"weights": m.weights.tolist()}


def measure_from_dict(d: dict) -> DiscreteMeasure:
    return measure_from_weights(d["weights"])


def plan_to_dict(p: TransportPlan) -> dict:
    return {
        "rows": p.rows,
        "cols": p.cols,
        "mass": p.mass.tolist(),
        "semirelaxed": p.semirelaxed,
    }


def plan_from_dict(d: dict) -> TransportPlan:
    return TransportPlan(np.asarray(d["mass"]), semirelaxed=bool(d.get("semirelaxed", False)))


def embedding_to_dict(e: Embedding) -> dict:
    return {"points": e.points.tolist(), "dim": e.dim}


def embedding_from_dict(d: dict) -> Embedding:
    e = Embedding(np.asarray(d["points"], dtype=np.float64))
    if e.dim != d.get("dim", e.dim):
        raise DataValidationError("dim field disagrees with the points array")
    return e


def dataset_to_dict(ds: MultiViewDataset) -> dict:
    out = {
        "n": ds.n,
        "views": [distance_matrix_to_dict(v) for v in ds.views],
        "labels": None if ds.labels is None else ds.labels.tolist(),
    }
    return out


def dataset_from_dict(d: dict) -> MultiViewDataset:
    views = [distance_matrix_from_dict(v) for v in d["views"]]
    return MultiViewDataset(tuple(views), labels=d.get("labels"))


def write_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# CSV


def write_distance_csv(dm: DistanceMatrix, path) -> None:
    """n x n values, comma separated, no header."""
    np.savetxt(path, dm.values, fmt=FLOAT_FMT, delimiter=",")


def read_distance_csv(path) -> DistanceMatrix:
    values = np.loadtxt(path, delimiter=",", ndmin=2)
    return validate_distance_matrix(values)


def write_coords_csv(points, path, labels=None) -> None:
    """n x d coordinates; an integer label column is appended under a
    ``# labels`` header row when labels are given."""
    pts = np.asarray(points, dtype=np.float64)
    if labels is None:
        np.savetxt(path, pts, fmt=FLOAT_FMT, delimiter=",")
        return
    labels = np.asarray(labels, dtype=np.int64)
    with open(path, "w") as fh:
        fh.write("# labels\n")
        for row, lab in zip(pts, labels):
            fh.write(",".join(FLOAT_FMT % v for v in row) + f",{int(lab)}\n")


def read_coords_csv(path):
    """Returns (points, labels-or-None)."""
    with open(path) as fh:
        first = fh.readline()
        has_labels = first.strip().startswith("# labels")
        if not has_labels:
            fh.seek(0)
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if has_labels:
        return np.ascontiguousarray(data[:, :-1]), data[:, -1].astype(np.int64)
    return data, None


def write_labels_csv(labels, path) -> None:
    np.savetxt(path, np.asarray(labels, dtype=np.int64)[:, None], fmt="%d", delimiter=",")


def read_labels_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=1)


def write_matrix_csv(values, path) -> None:
    np.savetxt(path, np.asarray(values, dtype=np.float64), fmt=FLOAT_FMT, delimiter=",")


def read_matrix_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)
