import io
import json

import numpy as np
import pytest

from mipxai.cli import main
from mipxai.exceptions import InputError, LabelError, ParseError, StructuralError
from mipxai.io import (
    RunConfig,
    bundled_trace,
    config_from_dict,
    dumps_report,
    format_trace,
    load_config,
    load_csv,
    parse_trace,
    read_coding,
    read_ranking,
    read_report,
    report_from_dict,
    report_to_dict,
    write_csv,
    write_report,
)
from mipxai.mip import EliminationTrace, report_from_trace
from mipxai.synth import SynthSpec, generate

MODIFIED_ORDER = ["LVM", "RVEDV", "RVESV", "LVEDV", "LVESV", "RVSV", "LVSV", "RVEF", "LVEF"]


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def csv_file(tmp_path):
    def make(text, name="d.csv"):
        p = tmp_path / name
        p.write_text(text)
        return p
    return make


class TestLoadCsv:
    def test_basic(self, csv_file):
        data = load_csv(csv_file("a,b,sex\n1,2,M\n3,4,F\n5,6,M\n"), "sex")
        assert data.feature_names == ("a", "b")
        assert data.n_rows == 3
        assert data.classes == ("F", "M")
        assert data.y.tolist() == [1, 0, 1]

    def test_missing_cell_is_addressed(self, csv_file):
        with pytest.raises(ParseError) as info:
            load_csv(csv_file("a,b,y\n1,2,0\n3,,1\n"), "y")
        assert (info.value.row, info.value.column) == (2, "b")

    def test_non_numeric(self, csv_file):
        with pytest.raises(ParseError, match="row 1"):
            load_csv(csv_file("a,y\nfoo,0\n1,1\n"), "y")

    def test_three_classes(self, csv_file):
        with pytest.raises(LabelError):
            load_csv(csv_file("a,y\n1,x\n2,y\n3,z\n"), "y")

    def test_numeric_labels_sorted_numerically(self, csv_file):
        data = load_csv(csv_file("a,y\n1,10\n2,2\n3,10\n"), "y")
        assert data.classes == ("2", "10")
        assert data.y.tolist() == [1, 0, 1]

    def test_unknown_target(self, csv_file):
        with pytest.raises(ParseError):
            load_csv(csv_file("a,b\n1,2\n"), "y")

    def test_write_read_round_trip(self, tmp_path):
        data = generate(SynthSpec.blocks(30, [1.0, 1.0, 1.0], seed=0))
        path = tmp_path / "s.csv"
        write_csv(data, path)
        back = load_csv(path, "label")
        assert np.array_equal(back.X, data.X) and np.array_equal(back.y, data.y)
        assert back.feature_names == data.feature_names


class TestTraceFiles:
    def test_parse_with_comments(self):
        trace = parse_trace("# header\na,b,c\n\nc,b\n")
        assert [r.names for r in trace.rankings] == [("a", "b", "c"), ("c", "b")]

    def test_format_round_trip(self):
        trace = bundled_trace()
        assert parse_trace(format_trace(trace)) == trace

    def test_unknown_name(self):
        with pytest.raises(StructuralError):
            parse_trace("a,b,c\nc,d\n")

    def test_unknown_bundle(self):
        with pytest.raises(InputError):
            bundled_trace("nope")

    def test_ranking_and_coding(self, tmp_path):
        (tmp_path / "r.txt").write_text("b\na\n")
        (tmp_path / "c.txt").write_text("a,2\nb,1\n")
        assert read_ranking(tmp_path / "r.txt") == ["b", "a"]
        assert read_coding(tmp_path / "c.txt") == {"a": 2, "b": 1}
        (tmp_path / "bad.txt").write_text("a;2\n")
        with pytest.raises(ParseError):
            read_coding(tmp_path / "bad.txt")


class TestReport:
    def test_round_trip(self, tmp_path):
        report = report_from_trace(bundled_trace(), {"version": "x", "seed": 1})
        path = tmp_path / "r.json"
        write_report(report, path)
        back = read_report(path)
        assert back.trace == report.trace
        assert back.scores.mip == report.scores.mip
        assert back.movements == report.movements
        assert (back.nmr, back.sd) == (report.nmr, report.sd)
        assert dumps_report(back) == dumps_report(report)

    def test_zero_nmr_serialised_exactly(self):
        trace = EliminationTrace.from_names([["a", "b", "c"], ["b", "c"]])
        doc = json.loads(dumps_report(report_from_trace(trace)))
        assert doc["nmr"] == 0 and isinstance(doc["nmr"], (int, float))

    def test_replay_mip_fields(self):
        doc = report_to_dict(report_from_trace(bundled_trace()))
        assert doc["mip"]["LVM"] == pytest.approx(1 / 9)
        assert doc["mip_ranking"] == MODIFIED_ORDER
        assert doc["schema"] == "mipxai.report/1"

    def test_schema_checked(self):
        with pytest.raises(ParseError):
            report_from_dict({"schema": "other"})

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError):
            write_report(report_from_trace(bundled_trace()), tmp_path / "missing" / "r.json")


class TestConfig:
    def test_unknown_key(self):
        with pytest.raises(InputError):
            config_from_dict({"colour": "blue"})

    def test_explainer_shorthand(self):
        cfg = config_from_dict({"explainer": "permutation", "seed": 4})
        assert cfg.explainer.kind == "permutation" and cfg.seed == 4

    def test_deterministic_forces_one_thread(self):
        assert RunConfig(threads=8, deterministic=True).validate().threads == 1

    def test_invalid_json(self, tmp_path):
        (tmp_path / "c.json").write_text("{nope")
        with pytest.raises(ParseError):
            load_config(tmp_path / "c.json")

    def test_grid_validated(self):
        with pytest.raises(InputError):
            RunConfig(model="decision_tree", grid=[{"C": 1}]).validate()


class TestCli:
    def test_replay_bundled(self):
        code, out, _ = run_cli("replay", "--example", "cardiac")
        assert code == 0
        assert f"modified ranking: {', '.join(MODIFIED_ORDER)}" in out
        assert "LVM" in out and "0.111111" in out

    def test_replay_file_with_report(self, tmp_path):
        (tmp_path / "t.txt").write_text("a,b,c\nc,b\n")
        code, _, _ = run_cli("replay", str(tmp_path / "t.txt"), "--out", str(tmp_path / "r.json"))
        assert code == 0
        assert json.loads((tmp_path / "r.json").read_text())["nmr"] == 1.0

    def test_replay_bad_trace_is_data_error(self, tmp_path):
        (tmp_path / "t.txt").write_text("a,b,c\na,b\n")
        code, _, err = run_cli("replay", str(tmp_path / "t.txt"))
        assert code == 2 and err.startswith("error[")

    def test_compare_identical(self, tmp_path):
        (tmp_path / "a.txt").write_text("x\ny\nz\nw\n")
        code, out, _ = run_cli("compare", str(tmp_path / "a.txt"), str(tmp_path / "a.txt"))
        assert code == 0
        assert "kendall_tau_b: 1.000000" in out and "pearson_r: 1.000000" in out

    def test_rank_missing_target(self, tmp_path):
        code, _, err = run_cli("rank", "--data", str(tmp_path / "d.csv"))
        assert code == 1
        assert "usage:" in err

    def test_unknown_subcommand(self):
        assert run_cli("frobnicate")[0] == 1

    def test_missing_file_is_data_error(self, tmp_path):
        code, _, err = run_cli("rank", "--data", str(tmp_path / "nope.csv"), "--target", "y")
        assert code == 2 and "error[E_IO]" in err

    def test_synth_and_rank(self, tmp_path):
        data_path = tmp_path / "d.csv"
        code, _, _ = run_cli("synth", "--n-rows", "300", "--weights", "2,1,0.5,0",
                             "--corr", "1,2,0.5", "--seed", "2", "--out", str(data_path))
        assert code == 0
        report_path = tmp_path / "r.json"
        code, out, err = run_cli("rank", "--data", str(data_path), "--target", "label",
                                 "--model", "logistic_regression", "--folds", "3",
                                 "--coalition-samples", "16", "--background-size", "20",
                                 "--out", str(report_path))
        assert code == 0, err
        doc = json.loads(report_path.read_text())
        assert doc["model"]["family"] == "logistic_regression"
        assert len(doc["trace"]["rankings"]) == 3

    def test_synth_bad_corr(self):
        assert run_cli("synth", "--n-rows", "10", "--weights", "1,1", "--corr", "1,3,0.5")[0] == 1

    def test_corr_matrix(self, tmp_path, csv_file):
        path = csv_file("a,b,y\n1,2,0\n2,4,1\n3,7,0\n")
        code, out, _ = run_cli("corr-matrix", "--data", str(path), "--target", "y")
        assert code == 0
        rows = [line.split(",") for line in out.strip().splitlines()]
        assert rows[0] == ["", "a", "b"]
        assert float(rows[1][1]) == 1.0

    def test_pca_validate(self, tmp_path):
        data_path = tmp_path / "d.csv"
        run_cli("synth", "--n-rows", "400", "--weights", "1.5,1,0.7,0.4", "--seed", "1",
                "--out", str(data_path))
        code, out, err = run_cli("pca-validate", "--data", str(data_path), "--target", "label",
                                 "--folds", "3", "--coalition-samples", "16",
                                 "--background-size", "20")
        assert code == 0, err
        assert "components kept: 4" in out
        assert "agreement:" in out


def test_version_flag():
    code, _, _ = run_cli("--version")
    assert code == 0


def test_dataset_labels_are_binary_ints(csv_file):
    data = load_csv(csv_file("a,y\n1,b\n2,a\n"), "y")
    assert data.y.dtype == np.int64
