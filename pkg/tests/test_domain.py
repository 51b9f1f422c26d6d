import csv

import pytest

from clintriage.config import builtin_data_path
from clintriage.domain import (CsvSchema, DiseaseLabel, LabeledDataset,
                               PatientRecord, Vitals, load_symptom2disease,
                               save_dataset, stratified_split)
from clintriage.errors import (DatasetError, SchemaError, StratificationError,
                               ValidationError)


def write_csv(path, rows, header=("label", "text")):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


class TestLoader:
    def test_bundled_dataset_shape(self):
        ds = load_symptom2disease(builtin_data_path("symptom2disease_sample.csv"))
        assert len(ds) == 1200
        assert len(ds.label_set) == 24
        assert set(ds.class_counts().values()) == {50}

    def test_label_set_sorted(self):
        ds = load_symptom2disease(builtin_data_path("symptom2disease_sample.csv"))
        assert list(ds.label_set) == sorted(ds.label_set)

    def test_single_row(self, tmp_path):
        path = tmp_path / "one.csv"
        write_csv(path, [["flu", "fever and cough"]])
        ds = load_symptom2disease(str(path))
        assert len(ds) == 1
        assert ds.label_set == ("flu",)

    def test_empty_text_names_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        rows = [["flu", f"symptom text {i}"] for i in range(1, 7)]
        rows.append(["flu", "   "])  # data row 7
        write_csv(path, rows)
        with pytest.raises(DatasetError, match=r"\b7\b"):
            load_symptom2disease(str(path))

    def test_missing_column(self, tmp_path):
        path = tmp_path / "cols.csv"
        write_csv(path, [["flu", "fever"]], header=("label", "body"))
        with pytest.raises(SchemaError, match="text"):
            load_symptom2disease(str(path))

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(DatasetError, match="cannot read"):
            load_symptom2disease(str(tmp_path / "missing.csv"))

    def test_zero_rows(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv(path, [])
        with pytest.raises(DatasetError, match="zero"):
            load_symptom2disease(str(path))

    def test_refuses_identifying_columns(self, tmp_path):
        path = tmp_path / "phi.csv"
        write_csv(path, [["flu", "fever", "Jo"]], header=("label", "text", "name"))
        with pytest.raises(SchemaError, match="identifying"):
            load_symptom2disease(str(path))

    def test_vitals_columns_parsed(self, tmp_path):
        path = tmp_path / "vit.csv"
        write_csv(path, [["flu", "fever", "101.5", "", "88", "", "male"]],
                  header=("label", "text", "temperature", "spo2", "heart_rate",
                          "age", "sex"))
        ds = load_symptom2disease(str(path))
        vit = ds.records[0][0].vitals
        assert vit.temperature == 101.5
        assert vit.spo2 is None
        assert vit.heart_rate == 88
        assert vit.sex == "male"

    def test_out_of_range_vital_rejected(self, tmp_path):
        path = tmp_path / "vit.csv"
        write_csv(path, [["flu", "fever", "150"]],
                  header=("label", "text", "temperature"))
        with pytest.raises(ValidationError, match="temperature"):
            load_symptom2disease(str(path))

    def test_non_numeric_vital_rejected(self, tmp_path):
        path = tmp_path / "vit.csv"
        write_csv(path, [["flu", "fever", "hot"]],
                  header=("label", "text", "temperature"))
        with pytest.raises(DatasetError, match="not numeric"):
            load_symptom2disease(str(path))


class TestRoundTrip:
    def test_save_load_save_is_byte_identical(self, tmp_path):
        ds = load_symptom2disease(builtin_data_path("symptom2disease_sample.csv"))
        first = tmp_path / "first.csv"
        second = tmp_path / "second.csv"
        save_dataset(ds, str(first))
        reloaded = load_symptom2disease(str(first), CsvSchema(id="id"))
        save_dataset(reloaded, str(second))
        assert first.read_bytes() == second.read_bytes()
        assert len(reloaded) == len(ds)
        assert reloaded.label_set == ds.label_set


class TestStratifiedSplit:
    def test_bundled_80_20(self):
        ds = load_symptom2disease(builtin_data_path("symptom2disease_sample.csv"))
        train, val = stratified_split(ds, 0.8, seed=0)
        assert len(train) == 960 and len(val) == 240
        assert set(train.class_counts().values()) == {40}
        assert set(val.class_counts().values()) == {10}

    def test_deterministic(self):
        ds = load_symptom2disease(builtin_data_path("symptom2disease_sample.csv"))
        a = stratified_split(ds, 0.8, seed=11)
        b = stratified_split(ds, 0.8, seed=11)
        assert [r.id for r, _ in a[0].records] == [r.id for r, _ in b[0].records]
        assert [r.id for r, _ in a[1].records] == [r.id for r, _ in b[1].records]

    def test_two_classes_half(self, tmp_path):
        path = tmp_path / "two.csv"
        rows = [["a", f"alpha symptom {i}"] for i in range(10)]
        rows += [["b", f"beta symptom {i}"] for i in range(10)]
        write_csv(path, rows)
        ds = load_symptom2disease(str(path))
        train, val = stratified_split(ds, 0.5, seed=3)
        assert train.class_counts() == {"a": 5, "b": 5}
        assert val.class_counts() == {"a": 5, "b": 5}

    def test_partition(self):
        ds = load_symptom2disease(builtin_data_path("symptom2disease_sample.csv"))
        train, val = stratified_split(ds, 0.8, seed=4)
        train_ids = {r.id for r, _ in train.records}
        val_ids = {r.id for r, _ in val.records}
        assert not train_ids & val_ids
        assert len(train_ids | val_ids) == len(ds)

    def test_per_class_fraction_bound(self, tmp_path):
        path = tmp_path / "odd.csv"
        rows = []
        for cls, n in (("a", 7), ("b", 13), ("c", 29)):
            rows += [[cls, f"{cls} symptom {i}"] for i in range(n)]
        write_csv(path, rows)
        ds = load_symptom2disease(str(path))
        train, val = stratified_split(ds, 0.8, seed=0)
        val_counts = val.class_counts()
        for cls, n in (("a", 7), ("b", 13), ("c", 29)):
            assert abs(val_counts[cls] / n - 0.2) < 1.0 / n

    def test_small_class_rejected(self, tmp_path):
        path = tmp_path / "small.csv"
        write_csv(path, [["a", "one"], ["b", "two"], ["b", "three"]])
        ds = load_symptom2disease(str(path))
        with pytest.raises(StratificationError, match="'a'"):
            stratified_split(ds, 0.8, seed=0)

    def test_bad_fraction(self):
        ds = load_symptom2disease(builtin_data_path("symptom2disease_sample.csv"))
        with pytest.raises(ValidationError):
            stratified_split(ds, 1.0, seed=0)


class TestTypes:
    def test_empty_symptom_text_rejected(self):
        with pytest.raises(ValidationError):
            PatientRecord(id="x", symptom_text="   ")

    def test_vitals_ranges(self):
        Vitals(temperature=98.6, spo2=97, heart_rate=70, age=30, sex="female").validate()
        with pytest.raises(ValidationError, match="spo2"):
            Vitals(spo2=45).validate()
        with pytest.raises(ValidationError, match="sex"):
            Vitals(sex="other").validate()

    def test_duplicate_ids_rejected(self):
        rec = PatientRecord(id="dup", symptom_text="fever")
        label = DiseaseLabel(index=0, name="flu")
        with pytest.raises(DatasetError, match="duplicate"):
            LabeledDataset(records=((rec, label), (rec, label)), label_set=("flu",))
