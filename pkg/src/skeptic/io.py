"""File formats: dense matrix CSV, edge lists, JSON manifests, data CSV."""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError
from .graph import GraphSpec


@dataclass
class Dataset:
    matrix: np.ndarray
    column_labels: list
    source: str = ""
    transform_log: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.column_labels) != self.matrix.shape[1]:
            raise InputError(
                f"{len(self.column_labels)} labels for {self.matrix.shape[1]} columns"
            )
        if len(set(self.column_labels)) != len(self.column_labels):
            raise InputError("duplicate column labels")

    @property
    def provenance(self):
        return {"source": self.source, "transforms": list(self.transform_log)}


def _looks_numeric(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def ingest_csv(path, header=None, delimiter=","):
    """Read a rectangular numeric table; columns become variables.

    ``header=None`` sniffs the first row: it is taken as a header when any
    of its cells fails to parse as a number, or when it reads exactly
    ``1, 2, ..., d`` (the index header written by ``write_data_csv``).  Non-finite or non-numeric
    cells, ragged rows and empty files raise InputError naming the line.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh, delimiter=delimiter), start=1) if r]
    if not rows:
        raise InputError(f"{path}: empty file")
    if header is None:
        first = [c.strip() for c in rows[0][1]]
        index_row = first == [str(j + 1) for j in range(len(first))]
        header = index_row or not all(_looks_numeric(c) for c in first)
    if header:
        labels = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    else:
        labels = None
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(labels) if labels else len(rows[0][1])
    values = np.empty((len(rows), width))
    for r, (lineno, cells) in enumerate(rows):
        if len(cells) != width:
            raise InputError(f"{path}:{lineno}: expected {width} fields, found {len(cells)}")
        for c, cell in enumerate(cells):
            try:
                v = float(cell)
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric value {cell!r} in column {c + 1}") from None
            if not math.isfinite(v):
                raise InputError(f"{path}:{lineno}: non-finite value {cell!r} in column {c + 1}")
            values[r, c] = v
    if labels is None:
        labels = [f"V{j + 1}" for j in range(width)]
    return Dataset(values, labels, str(path), [])


def write_data_csv(path, data, labels=None):
    data = np.asarray(data, dtype=float)
    labels = labels or [str(j + 1) for j in range(data.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(labels)
        for row in data:
            w.writerow([f"{v:.17g}" for v in row])


def write_matrix_csv(path, matrix):
    """Full d x d matrix, one row per line, 17 significant digits."""
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        for row in matrix:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_matrix_csv(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_edge_list(path, edges, omega=None):
    """Tab-separated ``j<TAB>k[<TAB>omega_jk]``, 1-indexed with j < k."""
    with open(path, "w", encoding="utf-8") as fh:
        for j, k in sorted(edges.edges if isinstance(edges, GraphSpec) else edges):
            if omega is None:
                fh.write(f"{j + 1}\t{k + 1}\n")
            else:
                fh.write(f"{j + 1}\t{k + 1}\t{omega[j, k]:.17g}\n")


def read_edge_list(path, d):
    edges = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            try:
                j, k = int(parts[0]), int(parts[1])
            except (ValueError, IndexError):
                raise InputError(f"{path}:{lineno}: malformed edge line {line!r}") from None
            if not (1 <= j <= d and 1 <= k <= d) or j == k:
                raise InputError(f"{path}:{lineno}: edge ({j}, {k}) invalid for d={d}")
            edges.add((j - 1, k - 1))
    return GraphSpec(d, frozenset(edges))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_correlation(directory, S, stem="correlation"):
    directory = Path(directory)
    write_matrix_csv(directory / f"{stem}.csv", S.entries)
    write_json(directory / f"{stem}.json", S.summary())


def write_estimate(directory, est, stem=""):
    """omega CSV, edge list and diagnostics JSON for a PrecisionEstimate."""
    directory = Path(directory)
    prefix = f"{stem}_" if stem else ""
    write_matrix_csv(directory / f"{prefix}omega.csv", est.omega)
    write_edge_list(directory / f"{prefix}edges.tsv", est.edge_set, est.omega)
    write_json(directory / f"{prefix}diagnostics.json", est.diagnostics())
