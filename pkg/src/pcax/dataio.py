"""Loading numeric tables from CSV, and the registry of known datasets.

Files hold one object per row and one feature per column, with a header row.
``load_csv`` keeps only numeric, complete columns and hands back a
``DataMatrix`` in the features x objects layout, the class labels if a class
column is named, and an ``IngestReport`` listing everything that was thrown
away and why.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DataError
from .stats import DataMatrix

MISSING_TOKENS = frozenset({"", "na", "?", "nan"})
MISSING_POLICIES = ("drop_row", "drop_column")
DATA_DIR_ENV = "PCAX_DATA_DIR"

# reasons recorded in IngestReport.dropped_columns
NON_NUMERIC = "non-numeric"
MISSING = "missing values"
ZERO_VARIANCE = "zero variance"
EXCLUDED = "excluded"


@dataclass(frozen=True)
class DatasetManifest:
    """What a dataset file is expected to contain once cleaned."""

    name: str
    source: str
    expected_samples: int
    expected_measurements: int
    class_column: str | None = None
    expected_classes: int | None = None
    # identifier-like columns that are numeric but are not measurements
    exclude_columns: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise DataError("manifest needs a name")
        object.__setattr__(self, "exclude_columns", tuple(self.exclude_columns))
        for key in ("expected_samples", "expected_measurements", "expected_classes"):
            value = getattr(self, key)
            if value is not None and (int(value) != value or value < 1):
                raise DataError(f"{self.name}: {key} must be a positive integer, got {value!r}")

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["exclude_columns"] = list(self.exclude_columns)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "DatasetManifest":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise DataError(f"unknown manifest fields: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise DataError(f"bad manifest entry {doc.get('name')!r}: {exc}") from None


@dataclass(frozen=True)
class IngestReport:
    path: str
    feature_names: tuple[str, ...]
    n_features: int
    n_objects: int
    dropped_columns: tuple[tuple[str, str], ...] = ()
    dropped_rows: int = 0
    n_classes: int | None = None

    def dropped(self, reason: str) -> list[str]:
        return [name for name, why in self.dropped_columns if why == reason]


class LoadedDataset(NamedTuple):
    data: DataMatrix
    labels: tuple[str, ...] | None
    report: IngestReport


def _parse_cell(cell: str) -> float | None:
    """Float value, NaN for a missing cell, None if the cell is not a number."""
    text = cell.strip()
    if text.lower() in MISSING_TOKENS:
        return math.nan
    try:
        value = float(text)
    except ValueError:
        return None
    # infinities carry no usable measurement
    return value if math.isfinite(value) else math.nan


def _read_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh, strict=True) if row]
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise DataError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names in header")
    body = rows[1:]
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {lineno} has {len(row)} cells, header has {len(header)}")
    return header, body


def load_csv(
    path,
    manifest: DatasetManifest | None = None,
    missing_policy: str = "drop_row",
    class_column: str | None = None,
    drop_constant: bool = False,
) -> LoadedDataset:
    """Read ``path`` and clean it into a numeric ``DataMatrix``.

    Columns with any non-numeric cell are dropped. Missing cells ("", "NA",
    "?", "NaN", or an infinity) either drop their row or their column,
    depending on ``missing_policy``. ``class_column`` (or the manifest's) is
    split off as string labels; rows without a label are dropped. With
    ``drop_constant`` zero-variance columns are removed as well.
    """
    if missing_policy not in MISSING_POLICIES:
        raise ValueError(f"missing_policy must be one of {MISSING_POLICIES}, got {missing_policy!r}")
    path = Path(path)
    header, body = _read_rows(path)

    if class_column is None and manifest is not None:
        class_column = manifest.class_column
    excluded = set(manifest.exclude_columns) if manifest is not None else set()
    wanted = ([class_column] if class_column else []) + sorted(excluded)
    absent = [c for c in wanted if c not in header]
    if absent:
        raise DataError(f"{path}: header has no column(s) {absent}")

    dropped: list[tuple[str, str]] = []
    label_cells = None
    columns: list[tuple[str, list[str]]] = []
    for j, name in enumerate(header):
        cells = [row[j] for row in body]
        if name == class_column:
            label_cells = [c.strip() for c in cells]
        elif name in excluded:
            dropped.append((name, EXCLUDED))
        else:
            columns.append((name, cells))

    numeric: list[tuple[str, np.ndarray]] = []
    for name, cells in columns:
        parsed = [_parse_cell(c) for c in cells]
        if any(v is None for v in parsed):
            dropped.append((name, NON_NUMERIC))
            continue
        values = np.array(parsed, dtype=float)
        if values.size and np.all(np.isnan(values)):
            dropped.append((name, MISSING))
            continue
        numeric.append((name, values))

    keep_rows = np.ones(len(body), dtype=bool)
    if label_cells is not None:
        keep_rows &= np.array([c.lower() not in MISSING_TOKENS for c in label_cells], dtype=bool)
    if missing_policy == "drop_column":
        complete = []
        for name, values in numeric:
            if np.any(np.isnan(values[keep_rows])):
                dropped.append((name, MISSING))
            else:
                complete.append((name, values))
        numeric = complete
    else:
        for _, values in numeric:
            keep_rows &= ~np.isnan(values)

    if drop_constant and keep_rows.sum() > 0:
        varying = []
        for name, values in numeric:
            kept = values[keep_rows]
            if np.all(kept == kept[0]):
                dropped.append((name, ZERO_VARIANCE))
            else:
                varying.append((name, values))
        numeric = varying

    n_objects = int(keep_rows.sum())
    if not numeric or n_objects < 2:
        raise DataError(
            f"{path}: nothing usable left after cleaning "
            f"({len(numeric)} numeric columns, {n_objects} complete rows)"
        )
    names = tuple(name for name, _ in numeric)
    data = DataMatrix(np.vstack([values[keep_rows] for _, values in numeric]), names)
    labels = None
    if label_cells is not None:
        labels = tuple(c for c, k in zip(label_cells, keep_rows) if k)
    order = {name: i for i, name in enumerate(header)}
    report = IngestReport(
        path=str(path),
        feature_names=names,
        n_features=len(names),
        n_objects=n_objects,
        dropped_columns=tuple(sorted(dropped, key=lambda d: order[d[0]])),
        dropped_rows=len(body) - n_objects,
        n_classes=None if labels is None else len(set(labels)),
    )
    return LoadedDataset(data, labels, report)


def verify_manifest(report: IngestReport, manifest: DatasetManifest) -> list[str]:
    """Differences between what was loaded and what the manifest expects."""
    out = []
    if report.n_objects != manifest.expected_samples:
        out.append(f"{manifest.name}: samples {report.n_objects}, expected {manifest.expected_samples}")
    if report.n_features != manifest.expected_measurements:
        out.append(f"{manifest.name}: measurements {report.n_features}, "
                   f"expected {manifest.expected_measurements}")
    if manifest.expected_classes is not None:
        if report.n_classes is None:
            out.append(f"{manifest.name}: no class labels loaded, expected {manifest.expected_classes} classes")
        elif report.n_classes != manifest.expected_classes:
            out.append(f"{manifest.name}: classes {report.n_classes}, expected {manifest.expected_classes}")
    return out


def load_registry(path) -> list[DatasetManifest]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read manifest registry {path}: {exc}") from None
    if not isinstance(doc, list):
        raise DataError(f"{path}: registry must be a JSON list of manifests")
    manifests = [DatasetManifest.from_dict(d) for d in doc]
    names = [m.name for m in manifests]
    if len(set(names)) != len(names):
        raise DataError(f"{path}: duplicate dataset names")
    return manifests


def save_registry(path, manifests: Sequence[DatasetManifest]) -> None:
    atomic_write_text(path, json.dumps([m.to_dict() for m in manifests], indent=2) + "\n")


def resolve_source(manifest: DatasetManifest, root=None, registry_dir=None) -> Path | None:
    """Locate a manifest's file.

    Absolute sources are used as they are. Relative ones are looked up under
    ``root``, then ``$PCAX_DATA_DIR``, then the registry's own directory.
    Returns None if the file is nowhere to be found.
    """
    source = Path(manifest.source)
    if source.is_absolute():
        return source if source.is_file() else None
    bases = [root, os.environ.get(DATA_DIR_ENV), registry_dir]
    for base in bases:
        if base:
            candidate = Path(base) / source
            if candidate.is_file():
                return candidate
    return None


def atomic_write_text(path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def rows_to_csv(header: Sequence[str], rows) -> str:
    """CSV text in the loader's dialect; floats written with ``repr`` so they round-trip."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, data: DataMatrix, labels: Sequence[str] | None = None,
              label_column: str = "class") -> None:
    """Write ``data`` one object per row, optionally with a label column last."""
    header = list(data.feature_names)
    rows = data.values.T.tolist()
    if labels is not None:
        if len(labels) != data.n_objects:
            raise DataError(f"{len(labels)} labels for {data.n_objects} objects")
        if label_column in header:
            raise DataError(f"label column {label_column!r} clashes with a feature name")
        header.append(label_column)
        rows = [r + [lab] for r, lab in zip(rows, labels)]
    atomic_write_text(path, rows_to_csv(header, rows))
