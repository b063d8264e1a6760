"""JSON and CSV documents.

Every JSON document is an object with ``schema_version`` and ``kind``.
Subsets are written as label arrays sorted by their string form, never as
masks; labels that are tuples (product frames) are written as arrays.
Output uses sorted keys, so equal objects serialize to identical bytes.

Kinds: ``mass``, ``refining``, ``total-belief-problem``, ``dataset``,
``features``, ``pac-scenario`` and ``report``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import SchemaError
from .frames import Frame, MassFunction
from .maxent import FeatureSet
from .multivariate import Refining
from .regression import RegressionData
from .total_belief import TotalBeliefProblem

SCHEMA_VERSION = "1.0"
KINDS = ("mass", "refining", "total-belief-problem", "dataset", "features", "pac-scenario", "report")


@dataclass
class Report:
    """Free-form result document."""

    name: str
    data: dict = field(default_factory=dict)


@dataclass
class PacScenario:
    """Hypothesis label table with one or more data distributions."""

    hypotheses: np.ndarray
    distributions: list
    epsilon: float
    delta: float
    n: int | None = None
    trials: int = 10000


# labels and sets ---------------------------------------------------------------


def _label_out(label):
    return list(_label_out(v) for v in label) if isinstance(label, tuple) else label


def _label_in(value, path: str):
    if isinstance(value, list):
        return tuple(_label_in(v, path) for v in value)
    if isinstance(value, (str, int)) and not isinstance(value, bool):
        return value
    raise SchemaError("labels must be strings, integers or arrays of them", path)


def _set_out(frame: Frame, mask: int) -> list:
    return sorted((_label_out(lab) for lab in frame.labels_of(mask)), key=lambda v: json.dumps(v))


def _set_in(frame: Frame, labels, path: str) -> int:
    if not isinstance(labels, list):
        raise SchemaError("a set must be an array of labels", path)
    labs = [_label_in(v, path) for v in labels]
    if len(set(labs)) != len(labs):
        raise SchemaError("repeated label in set", path)
    for lab in labs:
        if lab not in frame:
            raise SchemaError(f"unknown label {lab!r}", path)
    return frame.mask(labs)


def _float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("expected a number", path)
    v = float(value)
    if not math.isfinite(v):
        raise SchemaError("number must be finite", path)
    return v


def _keys(doc: Mapping, required: set, optional: set, path: str, strict: bool) -> None:
    if not isinstance(doc, Mapping):
        raise SchemaError("expected an object", path or "<root>")
    missing = required - set(doc)
    if missing:
        raise SchemaError(f"missing field(s) {sorted(missing)}", path or "<root>")
    extra = set(doc) - required - optional
    if strict and extra:
        name = sorted(extra)[0]
        raise SchemaError("unknown field", f"{path}.{name}" if path else name)


# per-kind encoders ------------------------------------------------------------------


def _frame_out(frame: Frame) -> list:
    return [_label_out(lab) for lab in frame.labels]


def _frame_in(labels, path: str) -> Frame:
    if not isinstance(labels, list) or not labels:
        raise SchemaError("frame must be a nonempty array of labels", path)
    return Frame(_label_in(v, path) for v in labels)


def _focal_out(m: MassFunction) -> list:
    return [{"set": _set_out(m.frame, k), "mass": v} for k, v in m.items()]


def _focal_in(frame: Frame, items, path: str, normalized: bool, strict: bool) -> MassFunction:
    if not isinstance(items, list):
        raise SchemaError("focal must be an array", path)
    masses: dict[int, float] = {}
    for i, item in enumerate(items):
        p = f"{path}[{i}]"
        _keys(item, {"set", "mass"}, set(), p, strict)
        k = _set_in(frame, item["set"], p + ".set")
        if k in masses:
            raise SchemaError("subset listed twice", p + ".set")
        masses[k] = _float(item["mass"], p + ".mass")
    return MassFunction(frame, masses, normalized=normalized)


def mass_to_doc(m: MassFunction) -> dict:
    return {"frame": _frame_out(m.frame), "normalized": m.normalized, "focal": _focal_out(m)}


def mass_from_doc(doc: Mapping, strict: bool = True, path: str = "") -> MassFunction:
    _keys(doc, {"frame", "focal"}, {"normalized", "schema_version", "kind"}, path, strict)
    frame = _frame_in(doc["frame"], _join(path, "frame"))
    normalized = doc.get("normalized", True)
    if not isinstance(normalized, bool):
        raise SchemaError("normalized must be a boolean", _join(path, "normalized"))
    return _focal_in(frame, doc["focal"], _join(path, "focal"), normalized, strict)


def _join(path: str, name: str) -> str:
    return f"{path}.{name}" if path else name


def refining_to_doc(rho: Refining) -> dict:
    return {
        "coarse": _frame_out(rho.coarse),
        "fine": _frame_out(rho.fine),
        "cells": [
            {"outcome": _label_out(w), "cell": _set_out(rho.fine, rho.cells[i])} for i, w in enumerate(rho.coarse.labels)
        ],
    }


def refining_from_doc(doc: Mapping, strict: bool = True, path: str = "") -> Refining:
    _keys(doc, {"coarse", "fine", "cells"}, {"schema_version", "kind"}, path, strict)
    coarse = _frame_in(doc["coarse"], _join(path, "coarse"))
    fine = _frame_in(doc["fine"], _join(path, "fine"))
    cells_doc = doc["cells"]
    if not isinstance(cells_doc, list):
        raise SchemaError("cells must be an array", _join(path, "cells"))
    cells = {}
    for i, item in enumerate(cells_doc):
        p = f"{_join(path, 'cells')}[{i}]"
        _keys(item, {"outcome", "cell"}, set(), p, strict)
        w = _label_in(item["outcome"], p + ".outcome")
        if w in cells:
            raise SchemaError("outcome listed twice", p + ".outcome")
        cells[w] = fine.labels_of(_set_in(fine, item["cell"], p + ".cell"))
    return Refining(coarse, fine, cells)


def problem_to_doc(problem: TotalBeliefProblem) -> dict:
    rho = problem.refining
    return {
        "refining": refining_to_doc(rho),
        "prior": _focal_out(problem.prior),
        "conditionals": [
            {"outcome": _label_out(w), "focal": _focal_out(problem.conditionals[i])}
            for i, w in enumerate(rho.coarse.labels)
        ],
    }


def problem_from_doc(doc: Mapping, strict: bool = True) -> TotalBeliefProblem:
    _keys(doc, {"refining", "prior", "conditionals"}, {"schema_version", "kind"}, "", strict)
    rho = refining_from_doc(doc["refining"], strict, "refining")
    prior = _focal_in(rho.coarse, doc["prior"], "prior", True, strict)
    items = doc["conditionals"]
    if not isinstance(items, list):
        raise SchemaError("conditionals must be an array", "conditionals")
    by_outcome = {}
    for i, item in enumerate(items):
        p = f"conditionals[{i}]"
        _keys(item, {"outcome", "focal"}, set(), p, strict)
        w = _label_in(item["outcome"], p + ".outcome")
        if w not in rho.coarse:
            raise SchemaError(f"unknown coarse outcome {w!r}", p + ".outcome")
        frame = rho.cell_frame(rho.coarse.index(w))
        by_outcome[w] = _focal_in(frame, item["focal"], p + ".focal", True, strict)
    missing = [w for w in rho.coarse.labels if w not in by_outcome]
    if missing:
        raise SchemaError(f"no conditional for {missing}", "conditionals")
    return TotalBeliefProblem(rho, prior, tuple(by_outcome[w] for w in rho.coarse.labels))


def dataset_to_doc(data: RegressionData) -> dict:
    return {"x": [float(v) for v in data.x], "y": [None if np.isnan(v) else int(v) for v in data.y]}


def dataset_from_doc(doc: Mapping, strict: bool = True) -> RegressionData:
    _keys(doc, {"x", "y"}, {"schema_version", "kind"}, "", strict)
    xs, ys = doc["x"], doc["y"]
    if not isinstance(xs, list) or not isinstance(ys, list):
        raise SchemaError("x and y must be arrays", "x")
    x = [_float(v, f"x[{i}]") for i, v in enumerate(xs)]
    y = [np.nan if v is None else _float(v, f"y[{i}]") for i, v in enumerate(ys)]
    return RegressionData(np.array(x), np.array(y))


def features_to_doc(fs: FeatureSet) -> dict:
    return {
        "x": [_label_out(v) for v in fs.x_labels],
        "classes": [_label_out(v) for v in fs.classes],
        "features": [
            {"name": name, "values": fs.values[m].tolist()} for m, name in enumerate(fs.names)
        ],
    }


def features_from_doc(doc: Mapping, strict: bool = True) -> FeatureSet:
    """Feature tables as ``values[i][k] = φ(x_i, C_k)`` arrays."""
    _keys(doc, {"x", "classes", "features"}, {"schema_version", "kind"}, "", strict)
    xs = tuple(_label_in(v, "x") for v in doc["x"])
    cs = tuple(_label_in(v, "classes") for v in doc["classes"])
    names, values = [], []
    for i, item in enumerate(doc["features"]):
        p = f"features[{i}]"
        _keys(item, {"name", "values"}, set(), p, strict)
        table = item["values"]
        if not isinstance(table, list) or len(table) != len(xs) or any(
            not isinstance(r, list) or len(r) != len(cs) for r in table
        ):
            raise SchemaError(f"values must be a {len(xs)} x {len(cs)} array", p + ".values")
        values.append([[_float(v, f"{p}.values[{a}][{b}]") for b, v in enumerate(r)] for a, r in enumerate(table)])
        names.append(str(item["name"]))
    return FeatureSet(xs, cs, tuple(names), np.array(values).reshape(len(names), len(xs), len(cs)))


def scenario_to_doc(sc: PacScenario) -> dict:
    doc = {
        "hypotheses": np.asarray(sc.hypotheses).tolist(),
        "distributions": [np.asarray(d).tolist() for d in sc.distributions],
        "epsilon": sc.epsilon,
        "delta": sc.delta,
        "trials": sc.trials,
    }
    if sc.n is not None:
        doc["n"] = sc.n
    return doc


def scenario_from_doc(doc: Mapping, strict: bool = True) -> PacScenario:
    _keys(doc, {"hypotheses", "distributions", "epsilon", "delta"}, {"n", "trials", "schema_version", "kind"}, "", strict)
    H = np.asarray(doc["hypotheses"])
    if H.ndim != 2 or not np.issubdtype(H.dtype, np.integer):
        raise SchemaError("hypotheses must be an integer label table", "hypotheses")
    dists = []
    for i, d in enumerate(doc["distributions"]):
        a = np.asarray(d, dtype=float)
        if a.ndim != 2 or a.shape[0] != H.shape[1]:
            raise SchemaError("distribution must be an |X| x |Y| table", f"distributions[{i}]")
        dists.append(a)
    if not dists:
        raise SchemaError("at least one distribution is required", "distributions")
    n = doc.get("n")
    return PacScenario(
        H,
        dists,
        _float(doc["epsilon"], "epsilon"),
        _float(doc["delta"], "delta"),
        None if n is None else int(n),
        int(doc.get("trials", 10000)),
    )


def _plain(value):
    """Convert numpy containers and scalars into JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, MassFunction):
        return mass_to_doc(value)
    return value


# public entry points ---------------------------------------------------------------------

_ENCODERS = {
    MassFunction: ("mass", mass_to_doc),
    Refining: ("refining", refining_to_doc),
    TotalBeliefProblem: ("total-belief-problem", problem_to_doc),
    RegressionData: ("dataset", dataset_to_doc),
    FeatureSet: ("features", features_to_doc),
    PacScenario: ("pac-scenario", scenario_to_doc),
}


def to_document(obj) -> dict:
    """Envelope dictionary for a typed object."""
    if isinstance(obj, Report):
        body = {"name": obj.name, "data": _plain(obj.data)}
        kind = "report"
    else:
        for cls, (kind, enc) in _ENCODERS.items():
            if isinstance(obj, cls):
                body = enc(obj)
                break
        else:
            raise TypeError(f"cannot serialize {type(obj).__name__}")
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **body}


def serialize(obj) -> str:
    """Deterministic JSON text (sorted keys, shortest round-trip floats)."""
    return json.dumps(to_document(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def from_document(doc: Mapping, strict: bool = True, kind: str | None = None):
    """Typed object from an envelope dictionary."""
    if not isinstance(doc, Mapping):
        raise SchemaError("document must be a JSON object")
    version = doc.get("schema_version")
    if version is None:
        raise SchemaError("missing field", "schema_version")
    if str(version).split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise SchemaError(f"unsupported schema version {version!r}", "schema_version")
    got = doc.get("kind")
    if got not in KINDS:
        raise SchemaError(f"unknown kind {got!r}; expected one of {list(KINDS)}", "kind")
    if kind is not None and got != kind:
        raise SchemaError(f"expected a {kind!r} document, got {got!r}", "kind")
    if got == "mass":
        return mass_from_doc(doc, strict)
    if got == "refining":
        return refining_from_doc(doc, strict)
    if got == "total-belief-problem":
        return problem_from_doc(doc, strict)
    if got == "dataset":
        return dataset_from_doc(doc, strict)
    if got == "features":
        return features_from_doc(doc, strict)
    if got == "pac-scenario":
        return scenario_from_doc(doc, strict)
    _keys(doc, {"name", "data"}, {"schema_version", "kind"}, "", strict)
    return Report(str(doc["name"]), dict(doc["data"]))


def parse(text: str, strict: bool = True, kind: str | None = None):
    """Typed object from JSON text, with line numbers on syntax errors."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return from_document(doc, strict, kind)


def read_json(path, strict: bool = True, kind: str | None = None):
    return parse(Path(path).read_text(encoding="utf-8"), strict, kind)


def write_json(obj, path) -> None:
    Path(path).write_text(serialize(obj), encoding="utf-8")


# CSV ---------------------------------------------------------------------------------------


def _read_rows(text: str, columns: tuple[str, ...]) -> list[dict]:
    reader = csv.DictReader(_io.StringIO(text))
    if reader.fieldnames is None or any(c not in reader.fieldnames for c in columns):
        raise SchemaError(f"CSV header must contain {list(columns)}", line=1)
    return [(i + 2, row) for i, row in enumerate(reader)]


MISSING = ("", "NA", "NAN")


def dataset_from_csv(text: str) -> RegressionData:
    """Columns ``x`` and ``y``; an empty or ``NA`` cell marks a missing outcome."""
    xs, ys = [], []
    for line, row in _read_rows(text, ("x", "y")):
        try:
            xs.append(float(row["x"]))
            cell = (row["y"] or "").strip()
            ys.append(np.nan if cell.upper() in MISSING else float(cell))
        except ValueError:
            raise SchemaError("non-numeric value", "x" if not xs or len(xs) == len(ys) else "y", line) from None
    return RegressionData(np.array(xs), np.array(ys))


def samples_from_csv(text: str) -> list[tuple[str, str]]:
    """``(x, class)`` pairs from columns ``x`` and ``class``."""
    out = []
    for line, row in _read_rows(text, ("x", "class")):
        x, c = (row["x"] or "").strip(), (row["class"] or "").strip()
        if not x or not c:
            raise SchemaError("empty cell", "x" if not x else "class", line)
        out.append((x, c))
    return out


def rows_to_csv(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()
