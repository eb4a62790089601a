"""Dataset container and file ingestion.

Two on-disk formats are read:

* a dense ARFF subset (numeric and nominal attributes, '%' comments); label
  columns are the last n_labels attributes, the usual distribution layout;
* CSV with a header row, where label columns either carry a "label:" name
  prefix or are the last n_labels columns.

Numeric attributes pass through; nominal/categorical attributes are one-hot
encoded (ARFF uses the declared category order, CSV the sorted distinct
values). Labels must be 0/1. Missing values, sparse ARFF rows and string
attributes are errors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .validation import as_binary_matrix, as_float_matrix


class DatasetFormatError(ValueError):
    """Raised for unreadable dataset files; includes file and line context."""

    def __init__(self, path, message, line=None):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


@dataclass
class Dataset:
    """Feature matrix, binary label matrix and column names."""

    X: np.ndarray
    Y: np.ndarray
    feature_names: list = field(default_factory=list)
    label_names: list = field(default_factory=list)
    name: str = "dataset"

    def __post_init__(self):
        self.X = as_float_matrix(self.X)
        self.Y = as_binary_matrix(self.Y)
        if self.X.shape[0] != self.Y.shape[0]:
            raise ValueError("X and Y must have the same number of rows")
        if self.Y.shape[1] < 2:
            raise ValueError("a multi-label dataset needs at least 2 labels")
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(self.X.shape[1])]
        if not self.label_names:
            self.label_names = [f"y{j}" for j in range(self.Y.shape[1])]
        if len(self.feature_names) != self.X.shape[1]:
            raise ValueError("feature_names length does not match X columns")
        if len(self.label_names) != self.Y.shape[1]:
            raise ValueError("label_names length does not match Y columns")
        if len(set(self.label_names)) != len(self.label_names):
            raise ValueError("duplicate label names")

    @property
    def n_instances(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_labels(self) -> int:
        return self.Y.shape[1]


# --------------------------------------------------------------------------
# Parsing helpers


def _split_line(text: str):
    return next(csv.reader([text], skipinitialspace=True))


def _parse_label_value(value, path, line):
    v = value.strip().strip("'\"")
    if v in ("0", "1"):
        return int(v)
    try:
        f = float(v)
    except ValueError:
        raise DatasetFormatError(path, f"non-binary label value {value!r}", line) from None
    if f in (0.0, 1.0):
        return int(f)
    raise DatasetFormatError(path, f"non-binary label value {value!r}", line)


def _check_missing(value, path, line):
    v = value.strip()
    if v == "?" or v == "":
        raise DatasetFormatError(
            path, "missing feature values are not supported", line
        )
    return v


def _parse_arff(path):
    """Return (relation, attributes, rows, row_lines); attributes are
    (name, kind, categories) with kind in {'numeric', 'nominal'}."""
    attributes = []
    rows = []
    row_lines = []
    relation = None
    in_data = False
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            if not in_data:
                lowered = line.lower()
                if lowered.startswith("@relation"):
                    relation = line[len("@relation"):].strip().strip("'\"")
                elif lowered.startswith("@attribute"):
                    attributes.append(_parse_attribute(line, path, lineno))
                elif lowered.startswith("@data"):
                    in_data = True
                else:
                    raise DatasetFormatError(path, f"unrecognized directive: {line}", lineno)
            else:
                if line.startswith("{"):
                    raise DatasetFormatError(path, "sparse ARFF rows are not supported", lineno)
                values = _split_line(line)
                if len(values) != len(attributes):
                    raise DatasetFormatError(
                        path,
                        f"row has {len(values)} values, expected {len(attributes)}",
                        lineno,
                    )
                rows.append(values)
                row_lines.append(lineno)
    if not attributes:
        raise DatasetFormatError(path, "no @attribute declarations found")
    if not rows:
        raise DatasetFormatError(path, "no data rows found")
    return relation, attributes, rows, row_lines


def _parse_attribute(line, path, lineno):
    rest = line[len("@attribute"):].strip()
    if rest.startswith(("'", '"')):
        quote = rest[0]
        end = rest.find(quote, 1)
        if end < 0:
            raise DatasetFormatError(path, "unterminated attribute name", lineno)
        name = rest[1:end]
        type_text = rest[end + 1:].strip()
    else:
        parts = rest.split(None, 1)
        if len(parts) != 2:
            raise DatasetFormatError(path, f"malformed attribute: {line}", lineno)
        name, type_text = parts
    type_lower = type_text.strip().lower()
    if type_lower in ("numeric", "real", "integer"):
        return (name, "numeric", None)
    if type_text.strip().startswith("{") and type_text.strip().endswith("}"):
        inner = type_text.strip()[1:-1]
        categories = [c.strip().strip("'\"") for c in _split_line(inner)]
        if not categories:
            raise DatasetFormatError(path, "empty nominal category set", lineno)
        return (name, "nominal", categories)
    raise DatasetFormatError(
        path, f"unsupported attribute type {type_text!r} (numeric or nominal only)", lineno
    )


def _encode_feature_column(name, kind, cats, raw, row_lines, path):
    """One attribute's raw strings -> list of (column name, float column)."""
    if kind == "numeric":
        col = np.empty(len(raw))
        for r, v in enumerate(raw):
            try:
                col[r] = float(v)
            except ValueError:
                raise DatasetFormatError(
                    path, f"non-numeric value {v!r} in attribute {name!r}", row_lines[r]
                ) from None
        return [(name, col)]
    index = {c: i for i, c in enumerate(cats)}
    onehot = np.zeros((len(raw), len(cats)))
    for r, v in enumerate(raw):
        v = v.strip().strip("'\"")
        if v not in index:
            raise DatasetFormatError(
                path, f"value {v!r} not among categories of {name!r}", row_lines[r]
            )
        onehot[r, index[v]] = 1.0
    return [(f"{name}={c}", onehot[:, i]) for i, c in enumerate(cats)]


def _encode_columns(columns, label_idx, rows, row_lines, path):
    """Encode parsed cells into X, Y and names.

    columns is a list of (name, kind, categories) across all file columns;
    label_idx the indices treated as labels (each must be binary).
    """
    label_set = set(label_idx)
    feature_cols = []
    feature_names = []
    for i, (name, kind, cats) in enumerate(columns):
        if i in label_set:
            continue
        raw = [_check_missing(row[i], path, row_lines[r]) for r, row in enumerate(rows)]
        for col_name, col in _encode_feature_column(name, kind, cats, raw, row_lines, path):
            feature_names.append(col_name)
            feature_cols.append(col)

    label_matrix = np.empty((len(rows), len(label_idx)), dtype=np.int8)
    label_names = []
    for j, i in enumerate(label_idx):
        name, kind, cats = columns[i]
        if kind == "nominal" and not set(cats) <= {"0", "1"}:
            raise DatasetFormatError(
                path, f"label attribute {name!r} must be binary, got categories {cats}"
            )
        for r, row in enumerate(rows):
            value = _check_missing(row[i], path, row_lines[r])
            label_matrix[r, j] = _parse_label_value(value, path, row_lines[r])
        label_names.append(name[len("label:"):] if name.startswith("label:") else name)

    if not feature_cols:
        raise DatasetFormatError(path, "no feature columns left after label selection")
    X = np.column_stack(feature_cols)
    return X, label_matrix, feature_names, label_names


def _infer_csv_kinds(header, rows):
    """CSV columns are numeric if every cell parses as float, else nominal
    with sorted distinct values as categories."""
    columns = []
    for i, name in enumerate(header):
        values = [row[i] for row in rows]
        try:
            for v in values:
                float(v.strip() or "x")
            columns.append((name, "numeric", None))
        except ValueError:
            columns.append((name, "nominal", sorted(set(v.strip() for v in values))))
    return columns


def _parse_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(path, "empty file") from None
        header = [h.strip() for h in header]
        rows = []
        row_lines = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DatasetFormatError(
                    path, f"row has {len(row)} values, expected {len(header)}", lineno
                )
            rows.append([c.strip() for c in row])
            row_lines.append(lineno)
    if not rows:
        raise DatasetFormatError(path, "no data rows found")
    return header, rows, row_lines


def _label_indices(path, suffix, columns, n_labels, require=True):
    names = [c[0] for c in columns]
    if suffix == ".csv":
        prefixed = [i for i, h in enumerate(names) if h.startswith("label:")]
        if prefixed:
            return prefixed
    if n_labels is None or n_labels == 0:
        if require:
            raise DatasetFormatError(
                path, "no label columns identified; pass the label count explicitly"
            )
        return []
    if not 1 <= n_labels < len(columns):
        raise DatasetFormatError(
            path, f"label count {n_labels} invalid for {len(columns)} columns"
        )
    return list(range(len(columns) - n_labels, len(columns)))


def _read_table(path):
    """Parse either format into (columns, rows, row_lines, default_name)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    suffix = path.suffix.lower()
    if suffix == ".arff":
        relation, attributes, rows, row_lines = _parse_arff(path)
        return suffix, attributes, rows, row_lines, relation or path.stem
    if suffix == ".csv":
        header, rows, row_lines = _parse_csv(path)
        columns = _infer_csv_kinds(header, rows)
        return suffix, columns, rows, row_lines, path.stem
    raise DatasetFormatError(path, f"unsupported dataset format {suffix!r}")


# --------------------------------------------------------------------------
# Public API


def load_dataset(path, n_labels: int | None = None, name: str | None = None) -> Dataset:
    """Load an ARFF or CSV multi-label dataset file.

    ARFF always needs n_labels (the last n_labels attributes are labels); CSV
    needs it only when the header carries no "label:" prefixes.
    """
    suffix, columns, rows, row_lines, default_name = _read_table(path)
    label_idx = _label_indices(path, suffix, columns, n_labels)
    if len(label_idx) < 2:
        raise DatasetFormatError(path, "a multi-label dataset needs at least 2 labels")
    X, Y, feature_names, label_names = _encode_columns(
        columns, label_idx, rows, row_lines, path
    )
    return Dataset(
        X=X, Y=Y, feature_names=feature_names, label_names=label_names,
        name=name or default_name,
    )


def load_features(path, n_labels: int | None = None):
    """Load only the feature matrix of a file, dropping any label columns.

    Used for prediction inputs: the file may be fully unlabeled (no "label:"
    headers and n_labels omitted) or a labeled file whose label columns are
    stripped. Returns (X, feature_names).
    """
    suffix, columns, rows, row_lines, _ = _read_table(path)
    label_idx = _label_indices(path, suffix, columns, n_labels, require=False)
    label_set = set(label_idx)
    feature_cols = []
    feature_names = []
    for i, (col_name, kind, cats) in enumerate(columns):
        if i in label_set:
            continue
        raw = [_check_missing(row[i], path, row_lines[r]) for r, row in enumerate(rows)]
        for enc_name, col in _encode_feature_column(col_name, kind, cats, raw, row_lines, path):
            feature_names.append(enc_name)
            feature_cols.append(col)
    if not feature_cols:
        raise DatasetFormatError(path, "no feature columns found")
    return np.column_stack(feature_cols), feature_names


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset as CSV with "label:" prefixed label columns.

    Floats are written with repr so a reload reproduces the matrices exactly.
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(dataset.feature_names)
                        + [f"label:{name}" for name in dataset.label_names])
        for i in range(dataset.n_instances):
            writer.writerow(
                [repr(float(v)) for v in dataset.X[i]]
                + [str(int(v)) for v in dataset.Y[i]]
            )
