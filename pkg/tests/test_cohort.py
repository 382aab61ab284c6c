import io
import itertools
import math

import numpy as np
import pandas as pd
import pytest

from stagesurv.cohort import (
    FeatureKind,
    FeatureSchema,
    FeatureSpec,
    LabeledRecord,
    RawRecord,
    Stage,
    SurvivalLabel,
    VitalStatus,
    cleaning_report,
    correlation_matrix,
    correlation_tsv,
    encode,
    label_records,
    label_survival,
    parse_dataset,
    split_by_stage,
    stage_distribution,
)
from stagesurv.exceptions import ConfigError, DataError, DataValidationError, SchemaMismatchError
from tests.conftest import CONFIG_DIR, STAGE_CODES, cohort_rows, outcome_columns


def _csv(schema: FeatureSchema, rows: list[dict[str, str]]) -> bytes:
    buffer = io.StringIO()
    pd.DataFrame(rows, columns=schema.required_columns).to_csv(buffer, index=False)
    return buffer.getvalue().encode("utf-8")


def _record(months: int, status: VitalStatus, cause: str, stage: str = "Localized", **values: str) -> RawRecord:
    return RawRecord(
        values=values, vital_status=status, survival_months=months, cause_of_death=cause, stage_code=stage
    )


def _labeled(stage: str, label: SurvivalLabel = SurvivalLabel.SURVIVED, **values: str) -> LabeledRecord:
    return LabeledRecord(record=_record(72, VitalStatus.ALIVE, "Alive", stage, **values), label=label)


def test_bundled_schemas_mirror_predictor_table():
    for name in ("colorectal", "stomach", "liver"):
        schema = FeatureSchema.load(CONFIG_DIR / f"{name}.json")
        assert schema.cancer_type == name
        assert len(schema.features) == 17
        assert "Summary Stage" not in schema.feature_names
        assert schema.names_of_kind(FeatureKind.NUMERIC) == [
            "Age",
            "Regional Nodes Examined",
            "Regional Nodes Positive",
            "Tumor Size",
        ]
        assert set(schema.stage_map.values()) == set(Stage)


def test_schema_rejects_duplicates_and_reserved_columns(tmp_path):
    with pytest.raises(ValueError, match="duplicate"):
        FeatureSchema(
            features=(FeatureSpec(name="Age", kind=FeatureKind.NUMERIC),) * 2,
            stage_map={"Localized": Stage.LOCALIZED},
            cancer_type="colorectal",
        )
    with pytest.raises(ValueError, match="predictors"):
        FeatureSchema(
            features=(FeatureSpec(name="Survival months", kind=FeatureKind.NUMERIC),),
            stage_map={"Localized": Stage.LOCALIZED},
            cancer_type="colorectal",
        )

    path = tmp_path / "schema.json"
    path.write_text('{"features": [], "stage_map": {}, "cancer_type": "liver"}', encoding="utf-8")
    with pytest.raises(ConfigError):
        FeatureSchema.load(path)
    with pytest.raises(ConfigError, match="not found"):
        FeatureSchema.load(tmp_path / "missing.json")


def test_parse_keeps_complete_rows_in_order(small_schema):
    rows = cohort_rows(np.random.default_rng(0), 3, Stage.LOCALIZED)
    parsed = parse_dataset(_csv(small_schema, rows), small_schema)

    assert [r.values["Age"] for r in parsed.records] == [row["Age"] for row in rows]
    assert [r.line for r in parsed.records] == [2, 3, 4]
    assert parsed.dropped_count == 0


def test_parse_drops_rows_with_missing_cells(small_schema):
    rows = cohort_rows(np.random.default_rng(0), 4, Stage.REGIONAL)
    rows[1]["Tumor Size"] = ""
    rows[3]["Grade"] = "high"

    parsed = parse_dataset(_csv(small_schema, rows), small_schema)

    assert len(parsed.records) == 2
    assert [line for line, _ in parsed.dropped] == [3, 5]
    assert "Tumor Size" in parsed.dropped[0][1]
    report = cleaning_report(parsed, excluded=0)
    assert report[0].startswith("line 3:")
    assert "rows dropped: 2" in report


def test_parse_rejects_negative_months(small_schema):
    rows = cohort_rows(np.random.default_rng(0), 2, Stage.LOCALIZED)
    rows[0]["Survival months"] = "-3"
    parsed = parse_dataset(_csv(small_schema, rows), small_schema)
    assert parsed.dropped == [(2, "negative survival months -3")]


def test_missing_header_column_is_named(small_schema):
    rows = cohort_rows(np.random.default_rng(0), 2, Stage.LOCALIZED)
    frame = pd.DataFrame(rows).drop(columns=["Age"])
    with pytest.raises(SchemaMismatchError) as e:
        parse_dataset(frame.to_csv(index=False).encode("utf-8"), small_schema)
    assert e.value.column == "Age"
    assert "Age" in str(e.value)


def test_row_longer_than_header_is_malformed(small_schema):
    header = ",".join(small_schema.required_columns).encode("utf-8")
    first = b"70,40,2,Male,Alive,72,Alive,Localized,extra"
    with pytest.raises(DataError, match="Malformed CSV"):
        parse_dataset(header + b"\n" + first + b"\n", small_schema)


def test_later_ragged_row_is_malformed(small_schema):
    data = _csv(small_schema, cohort_rows(np.random.default_rng(0), 3, Stage.LOCALIZED))
    with pytest.raises(DataError, match="Malformed CSV"):
        parse_dataset(data + b"1,2,3,4,5,6,7,8,9,10\n", small_schema)


@pytest.mark.parametrize(
    ("data", "message"),
    [
        (b"Age,Grade\n\xff\xfe,1\n", "UTF-8"),
        (b"", "empty"),
    ],
)
def test_unreadable_input_is_a_data_error(small_schema, data, message):
    with pytest.raises(DataError, match=message):
        parse_dataset(data, small_schema)


@pytest.mark.parametrize(
    "months,status,cause,expected",
    [
        (72, VitalStatus.ALIVE, "Alive", SurvivalLabel.SURVIVED),
        (30, VitalStatus.DEAD, "colorectal", SurvivalLabel.NOT_SURVIVED),
        (30, VitalStatus.ALIVE, "Alive", SurvivalLabel.EXCLUDED),
        (60, VitalStatus.DEAD, "colorectal", SurvivalLabel.EXCLUDED),
    ],
)
def test_label_survival_examples(months, status, cause, expected):
    assert label_survival(_record(months, status, cause), "colorectal") == expected


def test_label_survival_truth_table():
    causes = ["colorectal", "Colorectal ", "Heart disease", "Alive"]
    mismatches = []
    for months, status, cause in itertools.product([0, 59, 60, 61, 120], VitalStatus, causes):
        if months >= 60 and status == VitalStatus.ALIVE:
            expected = SurvivalLabel.SURVIVED
        elif months < 60 and cause.strip().lower() == "colorectal":
            expected = SurvivalLabel.NOT_SURVIVED
        else:
            expected = SurvivalLabel.EXCLUDED
        if label_survival(_record(months, status, cause), "colorectal") != expected:
            mismatches.append((months, status, cause))
    assert mismatches == []


def test_cause_of_death_matches_extend_the_cancer_type():
    record = _record(12, VitalStatus.DEAD, "Rectum and Rectosigmoid Junction")
    assert label_survival(record, "colorectal") == SurvivalLabel.EXCLUDED
    assert (
        label_survival(record, "colorectal", ["Colon excluding Rectum", "Rectum and Rectosigmoid Junction"])
        == SurvivalLabel.NOT_SURVIVED
    )


def test_label_survival_rejects_negative_months():
    with pytest.raises(DataValidationError):
        label_survival(_record(-1, VitalStatus.DEAD, "colorectal"), "colorectal")


def test_label_records_drops_excluded(small_schema):
    records = [
        _record(72, VitalStatus.ALIVE, "Alive"),
        _record(10, VitalStatus.DEAD, "Other"),
        _record(10, VitalStatus.DEAD, "colorectal"),
    ]
    labeled, excluded = label_records(records, small_schema)
    assert [r.label for r in labeled] == [SurvivalLabel.SURVIVED, SurvivalLabel.NOT_SURVIVED]
    assert excluded == 1


def test_split_by_stage_partitions(small_schema):
    codes = ["Localized"] * 2 + ["Regional"] * 3 + ["Distant"] * 5
    split = split_by_stage([_labeled(code) for code in codes], small_schema)

    assert {stage: len(records) for stage, records in split.items()} == {
        Stage.LOCALIZED: 2,
        Stage.REGIONAL: 3,
        Stage.DISTANT: 5,
    }
    assert stage_distribution(split, "colorectal") == [
        "Colorectal (n = 10)",
        "Localized 20.0% (n = 2)",
        "Regional 30.0% (n = 3)",
        "Distant 50.0% (n = 5)",
    ]


def test_split_by_stage_empty_and_unknown(small_schema):
    assert split_by_stage([], small_schema) == {stage: [] for stage in Stage}
    with pytest.raises(DataValidationError, match="Unstaged"):
        split_by_stage([_labeled("Unstaged")], small_schema)


def test_stage_distribution_groups_thousands():
    split = {Stage.LOCALIZED: [None] * 17582, Stage.REGIONAL: [], Stage.DISTANT: []}
    assert stage_distribution(split)[0] == "Localized 100.0% (n = 17,582)"  # type: ignore[arg-type]


def _numeric_schema(*names: str, nominal: tuple[str, ...] = ()) -> FeatureSchema:
    return FeatureSchema(
        features=(
            *(FeatureSpec(name=n, kind=FeatureKind.NUMERIC) for n in names),
            *(FeatureSpec(name=n, kind=FeatureKind.NOMINAL) for n in nominal),
        ),
        stage_map={code: stage for stage, code in STAGE_CODES.items()},
        cancer_type="colorectal",
    )


def test_encode_standardizes_numeric_columns():
    schema = _numeric_schema("Age")
    table = encode([_labeled("Localized", Age=v) for v in ("1", "2", "3")], schema)

    assert table.rows[:, 0] == pytest.approx([-1.2247449, 0.0, 1.2247449])
    assert table.raw_rows[:, 0].tolist() == [1.0, 2.0, 3.0]
    assert table.stats.means["Age"] == 2.0
    assert table.stats.stds["Age"] == pytest.approx(math.sqrt(2.0 / 3.0))
    assert not table.rows.flags.writeable


def test_encode_one_hot_and_unseen_categories():
    schema = _numeric_schema(nominal=("Sex",))
    table = encode([_labeled("Localized", Sex="M"), _labeled("Localized", Sex="F")], schema)

    assert table.column_names == ["Sex=F", "Sex=M"]
    assert table.rows.tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert [name for name, _ in table.groups] == ["Sex"]

    transformed = encode([_labeled("Regional", Sex="X")], schema, table.stats)
    assert transformed.rows.tolist() == [[0.0, 0.0]]
    assert transformed.stages == (Stage.REGIONAL,)


def test_encode_clamps_zero_variance(caplog):
    schema = _numeric_schema("Age")
    table = encode([_labeled("Localized", Age="50") for _ in range(3)], schema)
    assert table.stats.stds["Age"] == 1.0
    assert table.rows[:, 0].tolist() == [0.0, 0.0, 0.0]
    assert "zero variance" in caplog.text


def test_near_constant_column_counts_as_zero_variance(caplog):
    schema = _numeric_schema("Tumor Size", "Age")
    records = [_labeled("Localized", **{"Tumor Size": "0.1", "Age": age}) for age in ("40", "50", "60")]
    table = encode(records, schema)

    assert table.stats.stds["Tumor Size"] == 1.0
    assert table.rows[:, 0] == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)
    assert "zero variance" in caplog.text

    matrix = correlation_matrix(table)
    assert not matrix.is_defined("Tumor Size")
    assert matrix.is_defined("Age")
    assert np.isnan(matrix.values[0, 1])


def test_transform_mode_reproduces_the_fitted_matrix(small_schema):
    rows = cohort_rows(np.random.default_rng(4), 40, Stage.REGIONAL)
    labeled, _ = label_records(parse_dataset(_csv(small_schema, rows), small_schema).records, small_schema)

    fitted = encode(labeled, small_schema)
    transformed = encode(labeled, small_schema, fitted.stats)

    assert transformed.column_names == fitted.column_names
    assert np.array_equal(transformed.rows, fitted.rows)
    assert np.array_equal(transformed.labels, fitted.labels)


def test_encode_labels_and_excluded_records():
    schema = _numeric_schema("Age")
    table = encode(
        [
            _labeled("Localized", SurvivalLabel.SURVIVED, Age="1"),
            _labeled("Localized", SurvivalLabel.NOT_SURVIVED, Age="2"),
        ],
        schema,
    )
    assert table.labels.tolist() == [1, 0]

    with pytest.raises(DataValidationError):
        encode([_labeled("Localized", SurvivalLabel.EXCLUDED, Age="1")], schema, table.stats)


def test_correlation_matrix_values():
    schema = _numeric_schema("x", "neg", "y", "flat")
    records = [
        _labeled("Localized", x=str(x), neg=str(-x), y=str(y), flat="4") for x, y in ((1, 1), (2, 2), (3, 4))
    ]
    matrix = correlation_matrix(encode(records, schema))

    assert matrix.values[0, 0] == 1.0
    assert matrix.values[0, 1] == pytest.approx(-1.0)
    assert matrix.values[0, 2] == pytest.approx(9.0 / math.sqrt(84.0))
    assert matrix.values[0, 2] == pytest.approx(0.9820, abs=1e-4)
    assert np.allclose(matrix.values[:3, :3], matrix.values[:3, :3].T)
    assert not matrix.is_defined("flat")

    tsv = correlation_tsv(matrix).splitlines()
    assert tsv[0] == "feature\tx\tneg\ty\tflat"
    assert tsv[4].split("\t")[1:] == ["NA"] * 4


def test_correlation_needs_two_rows():
    schema = _numeric_schema("x")
    with pytest.raises(DataValidationError):
        correlation_matrix(encode([_labeled("Localized", x="1")], schema))


def test_outcome_columns_label_as_intended(small_schema):
    for survived, expected in ((True, SurvivalLabel.SURVIVED), (False, SurvivalLabel.NOT_SURVIVED)):
        columns = outcome_columns(survived, "colorectal")
        record = _record(
            int(columns["Survival months"]),
            VitalStatus.ALIVE if columns["Vital status recode"] == "Alive" else VitalStatus.DEAD,
            columns["Cause of death"],
        )
        assert label_survival(record, small_schema.cancer_type) == expected
