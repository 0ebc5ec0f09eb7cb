"""CSV ingestion with mean imputation, seeded splits and model files."""

from __future__ import annotations

import csv
import json
import logging
import math
from typing import Dict, Optional, Sequence

import numpy as np

from .core import CoefVector, Dataset

log = logging.getLogger(__name__)

MISSING = frozenset({"", "na", "nan", "null", "none", "."})


class IngestError(ValueError):
    """Input file cannot be turned into a numeric dataset."""


def _parse(cell: str) -> float:
    if cell.strip().lower() in MISSING:
        return math.nan
    return float(cell)


def _impute(M: np.ndarray, names, where: str) -> np.ndarray:
    M = M.copy()
    for j in range(M.shape[1]):
        col = M[:, j]
        miss = np.isnan(col)
        if miss.all():
            raise IngestError(f"column {names[j]!r} has no values{where}")
        if miss.any():
            col[miss] = col[~miss].mean()
    return M


def ingest_csv(path, response: str, group: Optional[str] = None, drop: Sequence[str] = ()):
    """Read a header-first CSV into a :class:`Dataset`, or one per group.

    Every column other than ``response``, ``group`` and ``drop`` is a
    predictor.  Missing predictor cells are replaced by the column mean
    (within the group when grouped); rows with a missing response are
    dropped.  Returns a ``Dataset`` or, with ``group``, a dict keyed by
    group label in sorted order.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not any(c.strip() for c in rows[0]):
        raise IngestError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    if not body:
        raise IngestError(f"{path}: no data rows")
    if response not in header:
        raise IngestError(f"response column {response!r} not found")
    if group is not None and group not in header:
        raise IngestError(f"group column {group!r} not found")
    skip = {response, group, *drop}
    features = [h for h in header if h not in skip]
    if not features:
        raise IngestError("no predictor columns")
    pos = {h: i for i, h in enumerate(header)}
    values = np.full((len(body), len(header)), np.nan)
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise IngestError(f"row {r}: expected {len(header)} fields, got {len(row)}")
    for name in [response, *features]:
        j = pos[name]
        bad = []
        for r, row in enumerate(body):
            try:
                values[r, j] = _parse(row[j])
            except ValueError:
                bad.append(r)
        if bad:
            nonmissing = sum(1 for row in body if row[j].strip().lower() not in MISSING)
            if len(bad) == nonmissing:
                raise IngestError(f"column {name!r} is not numeric")
            raise IngestError(f"row {bad[0] + 2}, column {name!r}: cannot parse {body[bad[0]][j]!r}")
    y_all = values[:, pos[response]]
    X_all = values[:, [pos[f] for f in features]]
    keep = ~np.isnan(y_all)
    if not keep.all():
        log.warning("dropping %d rows with missing response", int((~keep).sum()))
    labels = np.array([row[pos[group]] for row in body]) if group is not None else None

    def build(mask, where):
        X = _impute(X_all[mask & keep], features, where)
        y = y_all[mask & keep]
        if y.size == 0:
            raise IngestError(f"no rows with a response{where}")
        const = [f for f, c in zip(features, np.ptp(X, axis=0)) if c == 0]
        if const:
            log.warning("constant columns%s: %s", where, ", ".join(const))
        return Dataset(X, y, tuple(features))

    if group is None:
        return build(np.ones(len(body), dtype=bool), "")
    return {g: build(labels == g, f" in group {g!r}") for g in sorted(set(labels.tolist()))}


def constant_columns(data) -> list:
    return [name for name, c in zip(data.column_names, np.ptp(data.X, axis=0)) if c == 0]


def split_sizes(n: int, fractions=(0.5, 0.25, 0.25)):
    if len(fractions) != 3 or any(f <= 0 for f in fractions) or sum(fractions) > 1 + 1e-12:
        raise ValueError("fractions must be three positive numbers summing to at most 1")
    n_val = int(math.floor(n * fractions[1]))
    n_test = int(math.floor(n * fractions[2]))
    return n - n_val - n_test, n_val, n_test


def split(data, fractions=(0.5, 0.25, 0.25), seed: int = 0):
    """Seeded random partition into (train, validation, test); train takes the remainder."""
    n_train, n_val, _ = split_sizes(data.n, fractions)
    perm = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed))).permutation(data.n)
    tr, va, te = perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]
    return data.take_rows(np.sort(tr)), data.take_rows(np.sort(va)), data.take_rows(np.sort(te))


def save_model(path, method: str, coef: CoefVector, column_names, meta: Optional[Dict] = None) -> None:
    """JSON model file; numbers stored as hex floats so reloading is exact."""
    doc = {
        "format": "lassoboost-model-1",
        "method": method,
        "columns": list(column_names),
        "intercept": float(coef.intercept).hex(),
        "coefficients": [float(v).hex() for v in coef.values],
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path):
    """Returns ``(method, CoefVector, column_names, meta)``."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "lassoboost-model-1":
        raise ValueError(f"{path}: not a model file")
    coef = CoefVector(np.array([float.fromhex(v) for v in doc["coefficients"]]), float.fromhex(doc["intercept"]))
    return doc["method"], coef, tuple(doc["columns"]), doc.get("meta", {})


def align_columns(data, names) -> Dataset:
    """Reorder ``data`` columns to ``names``; missing columns are an error."""
    pos = {c: i for i, c in enumerate(data.column_names)}
    missing = [c for c in names if c not in pos]
    if missing:
        raise IngestError(f"columns missing from input: {missing}")
    idx = [pos[c] for c in names]
    return Dataset(data.X[:, idx], data.y, tuple(names))


def read_features(path, names, response: Optional[str] = None):
    """Columns ``names`` from a CSV (mean-imputed) and the response if present.

    Returns ``(X, y)`` with ``y=None`` when ``response`` is absent from the
    header.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise IngestError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if response is not None and response in header:
        data = ingest_csv(path, response, drop=[h for h in header if h not in names and h != response])
        return align_columns(data, names).X, data.y
    pos = {h: i for i, h in enumerate(header)}
    missing = [c for c in names if c not in pos]
    if missing:
        raise IngestError(f"columns missing from input: {missing}")
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    X = np.full((len(body), len(names)), np.nan)
    for r, row in enumerate(body):
        for j, c in enumerate(names):
            try:
                X[r, j] = _parse(row[pos[c]])
            except (ValueError, IndexError):
                raise IngestError(f"row {r + 2}, column {c!r}: cannot parse") from None
    return _impute(X, list(names), ""), None
