"""On-disk JSON documents for structured spaces.

A space document declares points, a metric (full matrix or coordinates
with a p-norm), an optional origin, named mark spaces, and a list of
structure records.  An empty structure list means a bare space, a single
record is used directly, and several records combine into a max-tuple.

Parsing validates everything and reports the JSON path of the first
offending node; the machine-readable schema ships as
``space_document.schema.json`` next to this module.
"""

import json
import math

import numpy as np

from .errors import DanglingLabel, SchemaError
from .spaces import validate_metric
from .structures import (
    Curve,
    MarkedMeasure,
    MarkedSubset,
    MarkSpace,
    Measure,
    Point,
    StructuredSpace,
    Subset,
    TupleStructure,
)

FORMAT_VERSION = "1"
NORMS = {1: 1, 2: 2, "inf": math.inf}


def _need(doc, key, path, kind=None):
    if key not in doc:
        raise SchemaError(f"{path}.{key}", "missing required field")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(f"{path}.{key}", f"expected {kind}, got {type(value).__name__}")
    return value


def _metric_matrix(spec, n, path):
    if not isinstance(spec, dict):
        raise SchemaError(path, "metric must be an object")
    if "matrix" in spec:
        matrix = spec["matrix"]
        if not isinstance(matrix, list) or len(matrix) != n:
            raise SchemaError(f"{path}.matrix", f"expected {n} rows")
        for i, row in enumerate(matrix):
            if not isinstance(row, list) or len(row) != n:
                raise SchemaError(f"{path}.matrix[{i}]", f"expected {n} entries")
        return np.asarray(matrix, dtype=float)
    if "coordinates" in spec:
        coords = spec["coordinates"]
        if not isinstance(coords, list) or len(coords) != n:
            raise SchemaError(f"{path}.coordinates", f"expected {n} coordinate rows")
        norm = spec.get("norm", 2)
        if norm not in NORMS:
            raise SchemaError(f"{path}.norm", "norm must be 1, 2 or \"inf\"")
        p = NORMS[norm]
        pts = np.asarray(coords, dtype=float)
        if pts.ndim != 2:
            raise SchemaError(f"{path}.coordinates", "coordinate rows must have equal length")
        diff = np.abs(pts[:, None, :] - pts[None, :, :])
        if p == 1:
            mat = diff.sum(-1)
        elif p == 2:
            mat = np.sqrt((diff**2).sum(-1))
        else:
            mat = diff.max(-1)
        return mat
    raise SchemaError(path, "metric needs either \"matrix\" or \"coordinates\"")


def _index_of(label, labels, path):
    try:
        return labels.index(label)
    except ValueError:
        raise DanglingLabel(path, label) from None


def _parse_structure(rec, labels, mark_spaces, path):
    if not isinstance(rec, dict):
        raise SchemaError(path, "structure record must be an object")
    kind = _need(rec, "kind", path, str)
    if kind == "point":
        return Point(_index_of(_need(rec, "label", path), labels, f"{path}.label"))
    if kind == "measure":
        weights = _need(rec, "weights", path, dict)
        out = {}
        for lab, w in weights.items():
            if not isinstance(w, (int, float)) or w < 0:
                raise SchemaError(f"{path}.weights[{lab}]", "weights must be nonnegative numbers")
            out[_index_of(lab, labels, f"{path}.weights")] = float(w)
        return Measure(out)
    if kind == "subset":
        members = _need(rec, "members", path, list)
        return Subset(
            frozenset(_index_of(lab, labels, f"{path}.members[{k}]") for k, lab in enumerate(members))
        )
    if kind in ("marked_measure", "marked_subset"):
        k = _need(rec, "k", path, int)
        name = _need(rec, "mark_space", path, str)
        if name not in mark_spaces:
            raise SchemaError(f"{path}.mark_space", f"unknown mark space {name!r}")
        marks = mark_spaces[name]

        def tup(entry, epath):
            pts = _need(entry, "points", epath, list)
            if len(pts) != k:
                raise SchemaError(f"{epath}.points", f"expected {k} points")
            return tuple(_index_of(lab, labels, f"{epath}.points") for lab in pts)

        def mark(entry, epath):
            return _index_of(_need(entry, "mark", epath), marks.space.labels, f"{epath}.mark")

        if kind == "marked_measure":
            atoms = _need(rec, "atoms", path, list)
            parsed = []
            for idx, entry in enumerate(atoms):
                epath = f"{path}.atoms[{idx}]"
                w = _need(entry, "weight", epath, (int, float))
                parsed.append((tup(entry, epath), mark(entry, epath), float(w)))
            return MarkedMeasure(k, marks, tuple(parsed))
        members = _need(rec, "members", path, list)
        parsed = set()
        for idx, entry in enumerate(members):
            epath = f"{path}.members[{idx}]"
            parsed.add((tup(entry, epath), mark(entry, epath)))
        return MarkedSubset(k, marks, frozenset(parsed))
    if kind == "curve":
        times = _need(rec, "times", path, list)
        labs = _need(rec, "labels", path, list)
        if len(times) != len(labs):
            raise SchemaError(path, "curve times and labels must have equal length")
        values = tuple(_index_of(lab, labels, f"{path}.labels[{k}]") for k, lab in enumerate(labs))
        try:
            return Curve(tuple(float(t) for t in times), values)
        except ValueError as exc:
            raise SchemaError(f"{path}.times", str(exc)) from None
    if kind == "tuple":
        combinator = rec.get("combinator", "max")
        if combinator not in ("max", "weighted"):
            raise SchemaError(f"{path}.combinator", "combinator must be \"max\" or \"weighted\"")
        children = _need(rec, "children", path, list)
        parsed = tuple(
            _parse_structure(c, labels, mark_spaces, f"{path}.children[{k}]")
            for k, c in enumerate(children)
        )
        return TupleStructure(parsed, combinator)
    raise SchemaError(f"{path}.kind", f"unknown structure kind {kind!r}")


def parse_space(document):
    """Parse and validate a space document (bytes, str, or parsed dict)."""
    if isinstance(document, (bytes, bytearray)):
        document = document.decode("utf-8")
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise SchemaError("$", "document must be a JSON object")
    version = document.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise SchemaError("$.format_version", f"unsupported version {version!r}")
    labels = _need(document, "points", "$", list)
    if not labels or len(set(labels)) != len(labels):
        raise SchemaError("$.points", "points must be a nonempty list of distinct labels")
    labels = [str(p) for p in labels]
    matrix = _metric_matrix(_need(document, "metric", "$"), len(labels), "$.metric")
    space = validate_metric(matrix, labels=labels)

    mark_spaces = {}
    for name, spec in document.get("mark_spaces", {}).items():
        mpath = f"$.mark_spaces.{name}"
        mlabels = _need(spec, "points", mpath, list)
        if not mlabels or len(set(mlabels)) != len(mlabels):
            raise SchemaError(f"{mpath}.points", "mark points must be distinct and nonempty")
        mmatrix = _metric_matrix(_need(spec, "metric", mpath), len(mlabels), f"{mpath}.metric")
        mark_spaces[name] = MarkSpace(validate_metric(mmatrix, labels=[str(x) for x in mlabels]))

    origin = document.get("origin")
    origin_idx = None if origin is None else _index_of(origin, labels, "$.origin")

    records = document.get("structures", [])
    if not isinstance(records, list):
        raise SchemaError("$.structures", "structures must be a list")
    parsed = [
        _parse_structure(rec, labels, mark_spaces, f"$.structures[{k}]")
        for k, rec in enumerate(records)
    ]
    if not parsed:
        structure = None
    elif len(parsed) == 1:
        structure = parsed[0]
    else:
        structure = TupleStructure(tuple(parsed), "max")
    return StructuredSpace(space, structure, origin_idx)


# ---------------------------------------------------------------------------
# serialization


def _collect_mark_spaces(s, registry):
    if s is None:
        return
    if isinstance(s, (MarkedMeasure, MarkedSubset)):
        key = s.marks.fingerprint()
        if key not in registry:
            registry[key] = (f"marks{len(registry)}", s.marks)
    if isinstance(s, TupleStructure):
        for c in s.children:
            _collect_mark_spaces(c, registry)


def _serialize_structure(s, labels, names):
    if isinstance(s, Point):
        if s.is_grave:
            raise ValueError("cannot serialize the grave point")
        return {"kind": "point", "label": labels[s.index]}
    if isinstance(s, Measure):
        return {"kind": "measure", "weights": {labels[i]: w for i, w in s.weights}}
    if isinstance(s, Subset):
        return {"kind": "subset", "members": [labels[i] for i in sorted(s.members)]}
    if isinstance(s, MarkedMeasure):
        name, marks = names[s.marks.fingerprint()]
        return {
            "kind": "marked_measure",
            "k": s.k,
            "mark_space": name,
            "atoms": [
                {
                    "points": [labels[i] for i in tup],
                    "mark": marks.space.labels[mk],
                    "weight": w,
                }
                for tup, mk, w in s.atoms
            ],
        }
    if isinstance(s, MarkedSubset):
        name, marks = names[s.marks.fingerprint()]
        return {
            "kind": "marked_subset",
            "k": s.k,
            "mark_space": name,
            "members": [
                {"points": [labels[i] for i in tup], "mark": marks.space.labels[mk]}
                for tup, mk in sorted(s.members)
            ],
        }
    if isinstance(s, Curve):
        return {
            "kind": "curve",
            "times": list(s.times),
            "labels": [labels[v] for v in s.values],
        }
    if isinstance(s, TupleStructure):
        return {
            "kind": "tuple",
            "combinator": s.combinator,
            "children": [_serialize_structure(c, labels, names) for c in s.children],
        }
    raise ValueError(f"cannot serialize {type(s).__name__}")


def serialize_space(S):
    """StructuredSpace back to a document dict; inverse of parse_space."""
    labels = list(S.space.labels)
    registry = {}
    _collect_mark_spaces(S.structure, registry)
    doc = {
        "format_version": FORMAT_VERSION,
        "points": labels,
        "metric": {"matrix": [[float(v) for v in row] for row in S.space.dist]},
    }
    if S.origin is not None:
        doc["origin"] = labels[S.origin]
    if registry:
        doc["mark_spaces"] = {
            name: {
                "points": list(marks.space.labels),
                "metric": {"matrix": [[float(v) for v in row] for row in marks.space.dist]},
            }
            for name, marks in registry.values()
        }
    if S.structure is not None:
        doc["structures"] = [_serialize_structure(S.structure, labels, registry)]
    else:
        doc["structures"] = []
    return doc
