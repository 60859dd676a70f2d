"""Raw flow-record CSVs -> clean numeric feature matrices.

The pipeline is: load_csv -> drop_identifiers -> deduplicate ->
encode_categoricals -> clean_values. Every step is a pure function on an
in-memory string table, so the cleaning rules (dash/NaN/Infinity -> 0,
Boolean tokens -> 0/1, label tokens -> {0,1}) operate on the exact cell
text the file carried.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, SchemaError
from .schema import DatasetSchema

log = logging.getLogger(__name__)

TRUE_TOKENS = frozenset({"1", "t", "true", "yes"})
FALSE_TOKENS = frozenset({"0", "f", "false", "no"})
MISSING_TOKENS = frozenset({"", "-", "nan", "inf", "infinity", "-inf", "-infinity"})


@dataclass
class RawTable:
    """A loaded CSV: column names plus rows of string cells."""

    columns: list[str]
    rows: list[list[str]]

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise SchemaError(f"column {name!r} not present in table") from None


@dataclass
class FeatureMatrix:
    """Numeric samples with names, binary labels and optional attack types.

    ``values`` is float64, finite everywhere; ``labels`` holds only 0 and 1.
    Arrays are frozen after construction so a matrix can be shared read-only.
    """

    values: np.ndarray
    feature_names: list[str]
    labels: np.ndarray
    attack_types: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        if len(self.feature_names) != self.values.shape[1]:
            raise ValueError("feature_names length must equal column count")
        if self.labels.shape != (self.values.shape[0],):
            raise ValueError("labels length must equal row count")
        if not np.isfinite(self.values).all():
            raise ValueError("values contain non-finite entries")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must contain only 0 and 1")
        if self.attack_types is not None:
            self.attack_types = np.asarray(self.attack_types, dtype=object)
            if self.attack_types.shape != (self.values.shape[0],):
                raise ValueError("attack_types length must equal row count")
            self.attack_types.setflags(write=False)
        self.values.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def take(self, indices) -> "FeatureMatrix":
        """New matrix holding the given rows (copies, original untouched)."""
        indices = np.asarray(indices)
        return FeatureMatrix(
            values=self.values[indices],
            feature_names=list(self.feature_names),
            labels=self.labels[indices],
            attack_types=None if self.attack_types is None else self.attack_types[indices],
        )

    def with_values(self, values, feature_names=None) -> "FeatureMatrix":
        """Same rows/labels with transformed feature values."""
        values = np.asarray(values, dtype=np.float64)
        if feature_names is None:
            feature_names = [f"z{i}" for i in range(values.shape[1])]
        return FeatureMatrix(
            values=values,
            feature_names=list(feature_names),
            labels=self.labels,
            attack_types=self.attack_types,
        )


def load_csv(path, schema: DatasetSchema) -> RawTable:
    """Read a comma-separated, header-first, UTF-8 flow file.

    Every declared non-identifier column must be present (identifiers may
    have been pre-stripped from distributed copies; their absence is only
    logged). Extra columns are fine. Ragged rows fail with their row index.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        required = [c for c in schema.declared_columns()
                    if c not in schema.identifier_columns]
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing declared column(s) {missing}")
        absent_ids = [c for c in schema.identifier_columns if c not in header]
        if absent_ids:
            log.info("%s: identifier column(s) %s not present", path, absent_ids)
        width = len(header)
        rows = []
        for i, row in enumerate(reader):
            if len(row) != width:
                raise DataFormatError(
                    f"ragged row: expected {width} cells, got {len(row)}", row=i
                )
            rows.append(row)
    return RawTable(columns=header, rows=rows)


def drop_identifiers(table: RawTable, schema: DatasetSchema) -> RawTable:
    """Remove flow-identifier columns (IPs, ports, timestamps, row ids)."""
    drop = set(schema.identifier_columns) & set(table.columns)
    skipped = set(schema.identifier_columns) - drop
    if skipped:
        log.info("identifier column(s) already absent: %s", sorted(skipped))
    keep = [i for i, c in enumerate(table.columns) if c not in drop]
    return RawTable(
        columns=[table.columns[i] for i in keep],
        rows=[[row[i] for i in keep] for row in table.rows],
    )


def deduplicate(table: RawTable) -> RawTable:
    """Keep the first occurrence of each distinct row, preserving order."""
    seen = set()
    rows = []
    for row in table.rows:
        key = tuple(row)
        if key not in seen:
            seen.add(key)
            rows.append(row)
    return RawTable(columns=list(table.columns), rows=rows)


@dataclass
class EncoderMap:
    """Per-column category -> integer code maps, in deterministic order."""

    maps: dict[str, dict[str, int]] = field(default_factory=dict)

    def code(self, column: str, category: str) -> int:
        cmap = self.maps[column]
        got = cmap.get(category)
        if got is None:
            # unseen at transform time: next free integer, total function
            return len(cmap)
        return got


def encode_categoricals(
    table: RawTable, schema: DatasetSchema, emap: EncoderMap | None = None
) -> tuple[RawTable, EncoderMap]:
    """Replace categorical strings with integer codes.

    Codes are assigned 0,1,2,... in lexicographic order of the category
    strings, so identical data always yields identical maps. Pass an
    existing map to re-apply a previous fit (unseen categories get the
    next free code).
    """
    cat_cols = [c for c in schema.categorical_columns if c in table.columns]
    if emap is None:
        emap = EncoderMap()
        for col in cat_cols:
            idx = table.column_index(col)
            cats = sorted({row[idx] for row in table.rows})
            emap.maps[col] = {cat: i for i, cat in enumerate(cats)}
    rows = [list(row) for row in table.rows]
    for col in cat_cols:
        idx = table.column_index(col)
        cmap = emap.maps.get(col, {})
        fallback = len(cmap)
        for row in rows:
            row[idx] = str(cmap.get(row[idx], fallback))
    return RawTable(columns=list(table.columns), rows=rows), emap


def _parse_numeric_cell(cell: str, row: int, column: str) -> float:
    text = cell.strip()
    if text.lower() in MISSING_TOKENS:
        return 0.0
    try:
        value = float(text)
    except ValueError:
        raise DataFormatError(
            f"non-numeric cell {cell!r}", row=row, column=column
        ) from None
    if not np.isfinite(value):
        return 0.0
    return value


def _parse_boolean_cell(cell: str, row: int, column: str) -> float:
    text = cell.strip().lower()
    if text in TRUE_TOKENS:
        return 1.0
    if text in FALSE_TOKENS or text in MISSING_TOKENS:
        return 0.0
    raise DataFormatError(f"unrecognised Boolean token {cell!r}", row=row, column=column)


def clean_values(table: RawTable, schema: DatasetSchema) -> FeatureMatrix:
    """Turn an encoded string table into a finite float64 FeatureMatrix.

    NaN/dash/infinity cells become 0.0, Boolean tokens become 1.0/0.0, and
    the label column maps to {0,1}. Attack-type strings, when declared, are
    carried through unchanged for the per-attack detection-rate breakdown.
    """
    label_idx = table.column_index(schema.label_column)
    attack_idx = None
    if schema.attack_type_column is not None and schema.attack_type_column in table.columns:
        attack_idx = table.column_index(schema.attack_type_column)
    bool_cols = {c for c in schema.boolean_columns if c in table.columns}

    feature_idx = []
    feature_names = []
    is_boolean = []
    for i, col in enumerate(table.columns):
        if i == label_idx or i == attack_idx:
            continue
        feature_idx.append(i)
        feature_names.append(col)
        is_boolean.append(col in bool_cols)

    n = table.n_rows
    values = np.empty((n, len(feature_idx)), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    attacks = np.empty(n, dtype=object) if attack_idx is not None else None

    for r, row in enumerate(table.rows):
        labels[r] = 1 if schema.is_attack_label(row[label_idx].strip()) else 0
        if attacks is not None:
            attacks[r] = row[attack_idx].strip()
        for j, (i, as_bool) in enumerate(zip(feature_idx, is_boolean)):
            if as_bool:
                values[r, j] = _parse_boolean_cell(row[i], r, table.columns[i])
            else:
                values[r, j] = _parse_numeric_cell(row[i], r, table.columns[i])

    return FeatureMatrix(
        values=values, feature_names=feature_names, labels=labels, attack_types=attacks
    )


def load_feature_matrix(
    path, schema: DatasetSchema
) -> tuple[FeatureMatrix, EncoderMap]:
    """Run the whole ingestion pipeline on one file."""
    table = load_csv(path, schema)
    table = drop_identifiers(table, schema)
    table = deduplicate(table)
    table, emap = encode_categoricals(table, schema)
    return clean_values(table, schema), emap


def dump_feature_matrix(fm: FeatureMatrix, path) -> None:
    """Write a cleaned matrix as CSV: features, then label and attack_type."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(fm.feature_names) + ["label", "attack_type"])
        types = fm.attack_types
        for i in range(fm.n_samples):
            row = [repr(v) for v in fm.values[i]]
            row.append(str(int(fm.labels[i])))
            row.append("" if types is None else str(types[i]))
            writer.writerow(row)
