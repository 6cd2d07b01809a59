import io
import json

import pytest

from freefield import coord, liecocycle
from freefield.cli import EXIT_FAILED, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE, RunConfig, build_parser, emit, main, run
from freefield.errors import NoConstant
from freefield.reports import Report

QUIET = RunConfig(quiet=True, workers=1)


class TestRun:
    def test_virasoro_passes(self):
        reports, code, diagnostics = run("system heis N = 1;\ncheck virasoro;\n", QUIET)
        assert code == EXIT_OK
        assert diagnostics == []
        assert len(reports) == 1 and reports[0].passed

    def test_ope_data(self):
        reports, code, _ = run("system heis N = 1; ope a1_{-1} x1;", QUIET)
        assert code == EXIT_OK
        assert reports[0].data["poles"] == {"1": "|0>"}

    def test_let_and_nproduct(self):
        source = """
            system omega N = 1;
            let s = x1 phi1_{0};
            nproduct a1_{-1} 0 s;
            print s;
        """
        reports, code, _ = run(source, QUIET)
        assert code == EXIT_OK
        assert reports[0].data["result"] == "phi1_{0} |0>"
        assert reports[1].data["weight"] == 0

    def test_user_virasoro_element_can_fail(self):
        source = "system heis N = 1; let L = 2 b1_{-1} a1_{-1}; check virasoro;"
        reports, code, _ = run(source, QUIET)
        assert code == EXIT_FAILED
        assert not reports[0].passed

    def test_parse_error(self):
        reports, code, diagnostics = run("system heis N = 1;\nlet = ;\n", QUIET)
        assert code == EXIT_USAGE
        assert reports == []
        assert (diagnostics[0]["line"], diagnostics[0]["column"]) == (2, 5)

    def test_second_system(self):
        _, code, diagnostics = run("system heis N = 1; system omega N = 1;", QUIET)
        assert code == EXIT_USAGE
        assert diagnostics[0]["message"] == "a script declares one system"

    def test_command_before_system(self):
        _, code, diagnostics = run("check virasoro;", QUIET)
        assert code == EXIT_USAGE
        assert diagnostics[0]["message"] == "no system declared"

    def test_domain_error_becomes_diagnostic(self):
        _, code, diagnostics = run("system heis N = 1; check topological;", QUIET)
        assert code == EXIT_USAGE
        assert diagnostics[0]["line"] == 1

    def test_truncation_is_a_resource_bound(self):
        source = 'system omega N = 1; transform map "x -> x + x^2" order 0 check-opes;'
        _, code, diagnostics = run(source, QUIET)
        assert code == EXIT_RESOURCE
        assert diagnostics[0]["kind"] == "TruncationUnderflow"

    def test_transform_apply(self):
        source = 'system omega N = 1; transform map "x -> x + x^2" order 4 apply phi1_{0};'
        reports, code, _ = run(source, QUIET)
        assert code == EXIT_OK
        assert reports[0].data["image"] == "(2*x1 + 1) * phi1_{0} |0>"
        assert reports[0].data["order"] == 4

    def test_p1_sections(self):
        reports, code, _ = run("p1 sections 2;", QUIET)
        assert code == EXIT_OK
        assert [row["rank"] for row in reports[0].data["rows"]] == [1, 3, 8]

    def test_cocycle_value(self):
        reports, code, _ = run('cocycle "c" "(x2^2, 0)" "(0, x1^2)";', QUIET)
        assert code == EXIT_OK
        assert reports[0].data["value"] == "[(4*x2)*dx1]"

    def test_cocycle_frame_comparison(self):
        reports, code, _ = run('cocycle "compare-frame";', QUIET)
        assert code == EXIT_FAILED
        assert reports[0].data["aligned"] == "-1/2"
        assert reports[0].data["raw_pair_shares_constant"] is False

    def test_no_constant_fails_one_statement_only(self, monkeypatch):
        def disagree(fields=None):
            raise NoConstant("two-cochain ratios disagree across samples")

        monkeypatch.setattr(liecocycle, "compare_report", disagree)
        source = 'cocycle "compare-frame"; cocycle "c" "(x2^2, 0)" "(0, x1^2)";'
        reports, code, diagnostics = run(source, QUIET)
        assert code == EXIT_FAILED
        assert diagnostics == []
        assert [report.passed for report in reports] == [False, True]
        assert reports[0].checks[0].name == "single constant"
        assert reports[1].data["value"] == "[(4*x2)*dx1]"

    def test_weight_bound_reaches_sampled_checks(self, monkeypatch):
        seen = []

        def record(change, wmax, seed):
            seen.append(wmax)
            return Report("ope preservation")

        monkeypatch.setattr(coord, "verify_ope_preservation", record)
        source = 'system omega N = 1; transform map "x -> x + x^2" order 4 check-opes;'
        _, code, _ = run(source, RunConfig(quiet=True, workers=1, max_weight=3))
        assert code == EXIT_OK
        assert seen == [3]

    def test_cocycle_wrong_field_count(self):
        _, code, _ = run('cocycle "discrepancy" "(x2^2, 0)";', QUIET)
        assert code == EXIT_USAGE


class TestEmit:
    def test_json_document(self):
        reports, code, diagnostics = run("system heis N = 1; check virasoro;", QUIET)
        out, err = io.StringIO(), io.StringIO()
        emit(reports, code, diagnostics, RunConfig(json=True), out, err)
        document = json.loads(out.getvalue())
        assert document["passed"] is True
        assert document["exit_code"] == 0
        assert document["reports"][0]["data"]["central_charge"] == 2
        assert err.getvalue() == ""

    def test_diagnostics_on_stderr(self):
        reports, code, diagnostics = run("let = ;", QUIET)
        out, err = io.StringIO(), io.StringIO()
        emit(reports, code, diagnostics, QUIET, out, err)
        assert out.getvalue() == ""
        assert err.getvalue() == "1:5: error: unexpected '='\n"


class TestMain:
    def test_defaults(self):
        args = build_parser().parse_args(["script.ffs"])
        assert (args.max_weight, args.series_order, args.degree_window) == (3, 8, 4)

    def test_script_file(self, tmp_path, capsys):
        script = tmp_path / "virasoro.ffs"
        script.write_text("system cliff N = 2;\ncheck virasoro;\n")
        code = main([str(script), "--json", "--quiet", "--workers", "1"])
        assert code == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document["reports"][0]["data"]["central_charge"] == -4

    def test_missing_file(self, tmp_path, capsys):
        assert main([str(tmp_path / "missing.ffs")]) == EXIT_USAGE
        assert "error:" in capsys.readouterr().err

    @pytest.mark.parametrize("flag", ["--seed", "--max-weight"])
    def test_integer_flags(self, flag):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["x.ffs", flag, "many"])
