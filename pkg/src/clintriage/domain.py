"""Domain types, CSV ingestion, and stratified splitting for labeled symptom datasets.

The expected file format is a UTF-8 CSV with a header row, a label column and
a free-text symptom column (names configurable), and optional vitals columns
``temperature, spo2, heart_rate, age, sex``. Datasets are immutable after
construction and safe for concurrent reads.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DatasetError, SchemaError, StratificationError, ValidationError

logger = logging.getLogger(__name__)

# Inclusive physiologic ranges used both for validation and min-max scaling.
VITALS_RANGES = {
    "temperature": (90.0, 110.0),
    "spo2": (50.0, 100.0),
    "heart_rate": (20.0, 250.0),
    "age": (0.0, 120.0),
}

SEX_VALUES = ("male", "female", "unspecified")

# Column names refused outright: this loader handles de-identified data only.
IDENTIFYING_COLUMNS = frozenset({
    "name", "first_name", "last_name", "full_name", "patient_name",
    "ssn", "social_security", "address", "street", "phone", "phone_number",
    "email", "mrn", "medical_record_number", "dob", "date_of_birth",
})


@dataclass(frozen=True)
class Vitals:
    """Structured vital signs; every field is optional."""

    temperature: Optional[float] = None
    spo2: Optional[float] = None
    heart_rate: Optional[float] = None
    age: Optional[float] = None
    sex: Optional[str] = None

    def validate(self) -> None:
        """Raise ValidationError naming the first out-of-range field."""
        for name, (lo, hi) in VITALS_RANGES.items():
            value = getattr(self, name)
            if value is None:
                continue
            if not np.isfinite(value) or not lo <= value <= hi:
                raise ValidationError(
                    f"vital '{name}' = {value!r} outside [{lo}, {hi}]")
        if self.sex is not None and self.sex not in SEX_VALUES:
            raise ValidationError(
                f"vital 'sex' = {self.sex!r} not one of {SEX_VALUES}")

    def present_fields(self) -> dict[str, object]:
        out: dict[str, object] = {}
        for name in (*VITALS_RANGES, "sex"):
            value = getattr(self, name)
            if value is not None and not (name == "sex" and value == "unspecified"):
                out[name] = value
        return out


@dataclass(frozen=True)
class PatientRecord:
    """One case: free-text symptoms plus optional structured vitals."""

    id: str
    symptom_text: str
    vitals: Vitals = field(default_factory=Vitals)

    def __post_init__(self) -> None:
        if not self.symptom_text or not self.symptom_text.strip():
            raise ValidationError(f"record {self.id!r}: empty symptom text")


@dataclass(frozen=True)
class DiseaseLabel:
    index: int
    name: str


@dataclass(frozen=True)
class LabeledDataset:
    """Immutable collection of (record, label) pairs with an ordered label set."""

    records: tuple[tuple[PatientRecord, DiseaseLabel], ...]
    label_set: tuple[str, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for record, label in self.records:
            if record.id in seen:
                raise DatasetError(f"duplicate record id {record.id!r}")
            seen.add(record.id)
            if not 0 <= label.index < len(self.label_set):
                raise DatasetError(
                    f"record {record.id!r}: label index {label.index} out of range")
            if self.label_set[label.index] != label.name:
                raise DatasetError(
                    f"record {record.id!r}: label {label.name!r} does not match "
                    f"label_set[{label.index}]")

    def __len__(self) -> int:
        return len(self.records)

    def class_counts(self) -> dict[str, int]:
        counts = {name: 0 for name in self.label_set}
        for _, label in self.records:
            counts[label.name] += 1
        return counts


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for ingestion. Vitals columns are used when present."""

    label: str = "label"
    text: str = "text"
    id: Optional[str] = None
    temperature: str = "temperature"
    spo2: str = "spo2"
    heart_rate: str = "heart_rate"
    age: str = "age"
    sex: str = "sex"


def _parse_float(raw: str, column: str, row_number: int) -> Optional[float]:
    raw = raw.strip()
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError:
        raise DatasetError(
            f"row {row_number}: column {column!r} value {raw!r} is not numeric")


def load_symptom2disease(path: str, schema: CsvSchema = CsvSchema()) -> LabeledDataset:
    """Load a labeled dataset from CSV.

    One record per row; the label set is the sorted unique labels. Rows with
    empty text are rejected with their row numbers. Row numbers are 1-based
    counting the header as row 0.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DatasetError(f"cannot read dataset file {path!r}: {exc}") from exc
    with fh:
        try:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            if header is None:
                raise DatasetError(f"dataset file {path!r} has no header row")
            refused = sorted(c for c in header
                             if c and c.strip().lower() in IDENTIFYING_COLUMNS)
            if refused:
                raise SchemaError(
                    f"refusing identifying column(s) {refused}; "
                    "remove them before ingestion")
            for required in (schema.label, schema.text):
                if required not in header:
                    raise SchemaError(
                        f"required column {required!r} missing from header {header}")
            if schema.id is not None and schema.id not in header:
                raise SchemaError(f"mapped id column {schema.id!r} missing")

            vitals_cols = {
                "temperature": schema.temperature if schema.temperature in header else None,
                "spo2": schema.spo2 if schema.spo2 in header else None,
                "heart_rate": schema.heart_rate if schema.heart_rate in header else None,
                "age": schema.age if schema.age in header else None,
                "sex": schema.sex if schema.sex in header else None,
            }

            rows: list[tuple[str, str, Vitals]] = []
            bad_rows: list[int] = []
            labels_seen: list[str] = []
            for row_number, row in enumerate(reader, start=1):
                text = (row.get(schema.text) or "").strip()
                if not text:
                    bad_rows.append(row_number)
                    continue
                label = (row.get(schema.label) or "").strip()
                if not label:
                    bad_rows.append(row_number)
                    continue
                kwargs: dict[str, object] = {}
                for vital, column in vitals_cols.items():
                    if column is None:
                        continue
                    raw = row.get(column) or ""
                    if vital == "sex":
                        raw = raw.strip().lower()
                        kwargs[vital] = raw if raw else None
                    else:
                        kwargs[vital] = _parse_float(raw, column, row_number)
                vitals = Vitals(**kwargs)
                vitals.validate()
                record_id = (row.get(schema.id) or "").strip() if schema.id else f"row{row_number:05d}"
                rows.append((record_id, text, vitals))
                labels_seen.append(label)

            if bad_rows:
                raise DatasetError(
                    f"rows with empty text or label rejected: rows {bad_rows}")
            if not rows:
                raise DatasetError(f"dataset file {path!r} contains zero usable rows")
        except csv.Error as exc:
            raise DatasetError(f"malformed CSV in {path!r}: {exc}") from exc

    label_set = tuple(sorted(set(labels_seen)))
    index_of = {name: i for i, name in enumerate(label_set)}
    records = tuple(
        (PatientRecord(id=rid, symptom_text=text, vitals=vitals),
         DiseaseLabel(index=index_of[name], name=name))
        for (rid, text, vitals), name in zip(rows, labels_seen))
    ds = LabeledDataset(records=records, label_set=label_set)
    logger.info("loaded %d records, %d classes from %s", len(ds), len(label_set), path)
    return ds


def save_dataset(ds: LabeledDataset, path: str, schema: CsvSchema = CsvSchema(id="id")) -> None:
    """Write a dataset back to CSV; reloading reproduces identical content."""
    if schema.id is None:
        raise SchemaError("save_dataset requires an id column mapping")
    columns = [schema.id, schema.label, schema.text, schema.temperature,
               schema.spo2, schema.heart_rate, schema.age, schema.sex]

    def fmt(value: Optional[float]) -> str:
        if value is None:
            return ""
        return repr(float(value))

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for record, label in ds.records:
            v = record.vitals
            writer.writerow([
                record.id, label.name, record.symptom_text,
                fmt(v.temperature), fmt(v.spo2), fmt(v.heart_rate), fmt(v.age),
                v.sex or "",
            ])


def stratified_split(ds: LabeledDataset, train_fraction: float,
                     seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Split per class: round(fraction * n_c) records to train, rest to validation.

    Deterministic for a fixed seed; the two halves partition the input.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction {train_fraction} not in (0, 1)")
    by_class: dict[int, list[int]] = {}
    for pos, (_, label) in enumerate(ds.records):
        by_class.setdefault(label.index, []).append(pos)
    for index, members in sorted(by_class.items()):
        if len(members) < 2:
            raise StratificationError(
                f"class {ds.label_set[index]!r} has {len(members)} record(s); "
                "need at least 2 to stratify")

    rng = np.random.default_rng(seed)
    train_pos: list[int] = []
    val_pos: list[int] = []
    for index in sorted(by_class):
        members = np.array(by_class[index])
        order = rng.permutation(len(members))
        # round half up so integer expectations like 0.8*50 -> 40 are exact
        n_train = int(np.floor(train_fraction * len(members) + 0.5))
        shuffled = members[order]
        train_pos.extend(shuffled[:n_train].tolist())
        val_pos.extend(shuffled[n_train:].tolist())

    train_pos.sort()
    val_pos.sort()
    train = LabeledDataset(records=tuple(ds.records[i] for i in train_pos),
                           label_set=ds.label_set)
    val = LabeledDataset(records=tuple(ds.records[i] for i in val_pos),
                         label_set=ds.label_set)
    return train, val


def relabel(ds: LabeledDataset, label_set: tuple[str, ...]) -> LabeledDataset:
    """Re-index a dataset against a (superset) label ordering."""
    index_of = {name: i for i, name in enumerate(label_set)}
    try:
        records = tuple(
            (record, replace(label, index=index_of[label.name]))
            for record, label in ds.records)
    except KeyError as exc:
        raise DatasetError(f"label {exc.args[0]!r} missing from label set") from exc
    return LabeledDataset(records=records, label_set=label_set)
