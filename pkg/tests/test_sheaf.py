import pytest

from freefield.errors import DomainError
from freefield.sheaf import (
    cech_slice,
    euler_character,
    euler_report,
    flow,
    glue_check_p1,
    global_sections,
    h1_ranks,
    p1_charts,
    partition_pairs,
    reflection,
    reflection_report,
    sections_report,
    sections_series,
    sign_operator,
    sugawara_check,
    sugawara_state,
    wakimoto_check,
    wakimoto_fields,
)


class TestGluing:
    def test_glue(self):
        report = glue_check_p1(wmax=1)
        assert report.passed, report.render()

    def test_restrict(self, laurent1):
        charts = p1_charts()
        x = laurent1.ring.gen(1)
        section = charts.u1.system.b(1)
        assert charts.restrict("u1", section) == laurent1.function(laurent1.ring.one() / x)
        assert charts.restrict("u0", section) == laurent1.b(1)
        with pytest.raises(DomainError):
            charts.restrict("u2", section)


class TestWakimoto:
    def test_currents_at_critical_level(self):
        report = wakimoto_check()
        assert report.passed, report.render()
        assert report.data["level"] == "-2"

    def test_sugawara_vanishes(self):
        assert sugawara_state().is_zero()
        assert sugawara_check().passed

    def test_e11_grading(self, heis1):
        fields = wakimoto_fields(heis1)
        assert fields.sl2["h"] == fields.E11.scale(2)


class TestSignAndFlows:
    def test_sign_operator(self, heis1):
        assert sign_operator(heis1.b(1)) == -heis1.b(1)
        assert sign_operator(heis1.a(1)) == -heis1.a(1)
        assert sign_operator(heis1.vacuum()) == heis1.vacuum()

    def test_sign_operator_rank_one_only(self, heis2):
        with pytest.raises(DomainError):
            sign_operator(heis2.vacuum())

    def test_terminating_flow(self, laurent1):
        x = laurent1.ring.gen(1)
        translated = flow(wakimoto_fields(laurent1).E21, laurent1.function(x ** 3))
        assert translated == laurent1.function((x - 1) ** 3)

    def test_reflection_of_coordinate(self, laurent1):
        x = laurent1.ring.gen(1)
        assert reflection(laurent1.b(1)) == laurent1.function(laurent1.ring.one() / x)

    def test_reflection_matches_transition(self):
        report = reflection_report(wmax=1)
        assert report.passed, report.render()


class TestCech:
    def test_series(self):
        assert partition_pairs(5) == [1, 2, 5, 10, 20, 36]
        assert euler_character(5) == [1, 2, 5, 10, 20, 36]
        assert sections_series(3) == [1, 3, 8, 18]
        assert euler_report(5).passed

    def test_weight_zero_slice(self):
        row = cech_slice(0, 0)
        assert (row["u0"], row["u1"], row["u01"], row["rank"]) == (1, 1, 1, 1)
        assert row["sections"] == 1 and row["h1"] == 0

    def test_sections_and_h1(self):
        rows = global_sections(2)
        assert [row["rank"] for row in rows] == [1, 3, 8]
        assert [row["rank"] for row in h1_ranks(2)] == [0, 1, 3]

    @pytest.mark.slow
    def test_report(self):
        report = sections_report(3)
        assert report.passed, report.render()
        assert [row["h1"] for row in report.data["rows"]] == [0, 1, 3, 8]
