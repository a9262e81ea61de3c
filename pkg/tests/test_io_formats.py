import json
from pathlib import Path

import pytest

from sourcerank.discrepancy import build_report
from sourcerank.engine import compute_ranking
from sourcerank.io_formats import (
    InconsistentAnalystsError,
    OutOfScaleValueError,
    ParseError,
    criterion_chart_series,
    dumps_canonical,
    export_result,
    format_real,
    import_round,
    load_seed_catalog,
    ranking_chart_series,
    read_bundle,
    result_from_dict,
    result_to_dict,
    weight_chart_series,
    write_bundle,
)
from sourcerank.model import MISSING, MethodConfig, Session

from conftest import a2_matrices, a2_sheets
from test_model import build_session


def write_a2_round(directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "criteria_votes.csv").write_text(
        "analyst,c1,c2\nA1,1,1\nA2,1,1\n", encoding="utf-8"
    )
    (directory / "criteria_scores.csv").write_text(
        "analyst,c1,c2\nA1,3,5\nA2,4,2\n", encoding="utf-8"
    )
    (directory / "matrix_A1.csv").write_text(
        "source,c1,c2\nd1,4,1\nd2,2,3\n", encoding="utf-8"
    )
    (directory / "matrix_A2.csv").write_text(
        "source,c1,c2\nd1,5,5\nd2,0,5\n", encoding="utf-8"
    )


class TestCanonicalJson:
    def test_twelve_significant_digits(self):
        assert format_real(0.6197916666666666) == "0.619791666667"
        assert format_real(1.0) == "1.0"
        assert format_real(0.5) == "0.5"

    def test_deterministic_output(self):
        payload = {"b": 1, "a": [0.1, 0.2], "nested": {"x": True, "y": None}}
        assert dumps_canonical(payload) == dumps_canonical(payload)
        assert json.loads(dumps_canonical(payload)) == {
            "b": 1,
            "a": [0.1, 0.2],
            "nested": {"x": True, "y": None},
        }


class TestImport:
    def test_a2_round_accepted(self, tmp_path):
        write_a2_round(tmp_path)
        inputs = import_round(tmp_path)
        assert inputs.analyst_ids == ["A1", "A2"]
        assert inputs.criterion_ids == ["c1", "c2"]
        assert inputs.source_ids == ["d1", "d2"]
        assert inputs.matrices[0].cells[("d1", "c1")] == 4

    def test_out_of_scale_cell_coordinates(self, tmp_path):
        write_a2_round(tmp_path)
        (tmp_path / "matrix_A1.csv").write_text(
            "source,c1,c2\nd1,7,1\nd2,2,3\n", encoding="utf-8"
        )
        with pytest.raises(OutOfScaleValueError) as exc:
            import_round(tmp_path)
        assert exc.value.file == "matrix_A1.csv"
        assert exc.value.line == 2
        assert exc.value.column == 2

    def test_missing_matrix_file(self, tmp_path):
        write_a2_round(tmp_path)
        (tmp_path / "matrix_A2.csv").unlink()
        with pytest.raises(InconsistentAnalystsError):
            import_round(tmp_path)

    def test_extra_matrix_file(self, tmp_path):
        write_a2_round(tmp_path)
        (tmp_path / "matrix_A3.csv").write_text(
            "source,c1,c2\nd1,1,1\nd2,1,1\n", encoding="utf-8"
        )
        with pytest.raises(InconsistentAnalystsError):
            import_round(tmp_path)

    def test_empty_cell_is_missing(self, tmp_path):
        write_a2_round(tmp_path)
        (tmp_path / "matrix_A1.csv").write_text(
            "source,c1,c2\nd1,,1\nd2,2,3\n", encoding="utf-8"
        )
        inputs = import_round(tmp_path)
        assert inputs.matrices[0].cells[("d1", "c1")] is MISSING
        assert inputs.matrices[0].cells[("d2", "c1")] == 2

    def test_non_integer_cell(self, tmp_path):
        write_a2_round(tmp_path)
        (tmp_path / "criteria_scores.csv").write_text(
            "analyst,c1,c2\nA1,3,five\nA2,4,2\n", encoding="utf-8"
        )
        with pytest.raises(ParseError) as exc:
            import_round(tmp_path)
        assert exc.value.line == 2
        assert exc.value.column == 3


class TestExport:
    def test_round_trip_result(self, tmp_path):
        result = compute_ranking(a2_sheets(), a2_matrices(), MethodConfig())
        report = build_report(result)
        written = export_result(result, report, tmp_path)
        text = written["result.json"].read_text(encoding="utf-8")
        reloaded = result_from_dict(json.loads(text))
        assert dumps_canonical(result_to_dict(reloaded)) + "\n" == text

    def test_scaled_max_is_exactly_one(self, tmp_path):
        result = compute_ranking(a2_sheets(), a2_matrices(), MethodConfig())
        report = build_report(result)
        written = export_result(result, report, tmp_path)
        data = json.loads(written["result.json"].read_text(encoding="utf-8"))
        assert data["group_scaled"]["d1"] == 1.0

    def test_chart_series_shapes(self):
        result = compute_ranking(a2_sheets(), a2_matrices(), MethodConfig())
        ranking = ranking_chart_series(result)
        assert len(ranking["labels"]) == 2
        assert all(len(s["values"]) == 2 for s in ranking["series"])
        weights = weight_chart_series(result)
        assert len(weights["labels"]) == 2
        crit = criterion_chart_series(result, "c1")
        assert len(crit["group"]) == 2


class TestBundle:
    def test_bundle_round_trip(self, tmp_path, problem):
        session = build_session(problem)
        round_dir = tmp_path / "round"
        write_a2_round(round_dir)
        bundle = write_bundle(session, round_dir, tmp_path / "session.zip")
        restored = read_bundle(bundle, tmp_path / "extracted")
        assert restored == session
        assert (tmp_path / "extracted" / "matrix_A1.csv").exists()


class TestSeedCatalog:
    def test_criteria_categories(self):
        catalog = load_seed_catalog()
        names = [c["category"] for c in catalog.criteria]
        assert "Benefits in terms of knowledge" in names
        assert len(names) == 9
        knowledge = next(c for c in catalog.criteria if "knowledge" in c["category"])
        assert knowledge["high_level"] == "Level, type of knowledge"

    def test_source_categories(self):
        catalog = load_seed_catalog()
        names = [s["category"] for s in catalog.sources]
        assert names == [
            "Internal stakeholders",
            "External stakeholders",
            "Analytics",
            "Reports",
            "Environment",
        ]
        analytics = next(s for s in catalog.sources if s["category"] == "Analytics")
        assert "Telemetry data" in analytics["detailed"]

    def test_immutable_and_deterministic(self):
        assert load_seed_catalog() == load_seed_catalog()
