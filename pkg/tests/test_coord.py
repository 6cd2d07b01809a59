import random

import pytest

from freefield.coeffs import Mode
from freefield.coord import (
    CoordChange,
    check_structure_transform,
    compose_changes,
    filtration_report,
    random_change,
    structure_transform,
    transform_state,
    verify_composition,
    verify_ope_preservation,
)
from freefield.errors import DomainError, NotInvertibleChange
from freefield.states import ModeVar, System, normalize


@pytest.fixture
def quadratic(series_omega1):
    x = series_omega1.ring.gen(1)
    return CoordChange.make(series_omega1, [x + x * x])


class TestConstruction:
    def test_inverse_is_computed(self, quadratic, series_omega1):
        x = series_omega1.ring.gen(1)
        assert quadratic.f[0] == x - x ** 2 + x ** 3 * 2 - x ** 4 * 5 + x ** 5 * 14 - x ** 6 * 42
        assert quadratic.render() == "x -> (x1^2 + x1)"
        assert quadratic.correction == "fermion"

    def test_singular_change(self, series_omega1):
        x = series_omega1.ring.gen(1)
        with pytest.raises(NotInvertibleChange):
            CoordChange.make(series_omega1, [x * x])

    def test_component_count(self, series_omega1):
        x = series_omega1.ring.gen(1)
        with pytest.raises(DomainError):
            CoordChange.make(series_omega1, [x, x])

    def test_fermion_correction_needs_omega(self):
        system = System.make("heis", 1, Mode.SERIES, 4)
        with pytest.raises(DomainError):
            CoordChange.make(system, [system.ring.gen(1)], correction="fermion")

    def test_unknown_correction(self, series_omega1):
        with pytest.raises(DomainError):
            CoordChange.make(series_omega1, [series_omega1.ring.gen(1)], correction="other")


class TestTransform:
    def test_identity(self, series_omega1):
        cc = CoordChange.identity(series_omega1)
        state = series_omega1.monomial(ModeVar("a", 1, -1), ModeVar("phi", 1, 0))
        assert transform_state(cc, state) == state

    def test_coordinate(self, quadratic, series_omega1):
        x = series_omega1.ring.gen(1)
        assert transform_state(quadratic, series_omega1.b(1)) == series_omega1.function(x + x * x)

    def test_one_form(self, quadratic, series_omega1):
        x = series_omega1.ring.gen(1)
        expected = series_omega1.phi(1) * (x * 2 + 1)
        assert transform_state(quadratic, series_omega1.phi(1)) == expected

    def test_other_system(self, quadratic, omega1):
        with pytest.raises(DomainError):
            transform_state(quadratic, omega1.vacuum())


class TestVerification:
    def test_ope_preservation(self, quadratic):
        report = verify_ope_preservation(quadratic, wmax=1, samples=4)
        assert report.passed, report.render()
        assert report.data["correction"] == "fermion"

    def test_dropping_the_correction_breaks_opes(self, quadratic):
        report = verify_ope_preservation(quadratic.with_correction("none"), wmax=1, samples=2)
        assert not report.passed
        assert any(check.name == "a1~(z)a1~(w)" and not check.passed for check in report.checks)

    def test_structure_fields(self, quadratic):
        report = check_structure_transform(quadratic)
        assert report.passed, report.render()

    def test_filtration(self, quadratic):
        report = filtration_report(quadratic)
        assert report.passed, report.render()

    def test_composition(self, quadratic, series_omega1):
        x = series_omega1.ring.gen(1)
        second = CoordChange.make(series_omega1, [x - x ** 3])
        report = verify_composition(quadratic, second, samples=2)
        assert report.passed, report.render()

    def test_compose_changes_order(self, quadratic, series_omega1):
        x = series_omega1.ring.gen(1)
        second = CoordChange.make(series_omega1, [x * 2])
        composed = compose_changes(second, quadratic)
        assert composed.g[0] == x * 2 + x * x * 4

    @pytest.mark.slow
    def test_random_change_rank_two(self):
        system = System.make("omega", 2, Mode.SERIES, 4)
        cc = random_change(system, random.Random(3))
        report = verify_ope_preservation(cc, wmax=1, samples=2)
        assert report.passed, report.render()


class TestExplicitImages:
    def test_vector_field_image(self, quadratic, series_omega1):
        x = series_omega1.ring.gen(1)
        inverse_slope = 1 - x * 2 + x ** 2 * 4 - x ** 3 * 8 + x ** 4 * 16 - x ** 5 * 32 + x ** 6 * 64
        slope_derivative = -2 + x * 8 - x ** 2 * 24 + x ** 3 * 64 - x ** 4 * 160 + x ** 5 * 384
        image = transform_state(quadratic, series_omega1.a(1))
        assert image.coefficient([ModeVar("a", 1, -1)]) == inverse_slope
        expected = normalize(series_omega1, [
            (inverse_slope, [ModeVar("a", 1, -1)]),
            (slope_derivative, [ModeVar("phi", 1, 0), ModeVar("psi", 1, -1)]),
        ])
        assert image == expected

    @pytest.mark.slow
    def test_unimodular_change_fixes_structure_fields(self):
        system = System.make("omega", 2, Mode.SERIES, 5)
        x, y = system.ring.gen(1), system.ring.gen(2)
        cc = CoordChange.make(system, [x + y * y, y])
        assert cc.determinant() == 1
        deltas = structure_transform(cc)
        assert all(delta.is_zero() for delta in deltas.values()), deltas


class TestHeisenbergOnly:
    @pytest.fixture
    def heis_quadratic(self):
        system = System.make("heis", 1, Mode.SERIES, 6)
        x = system.ring.gen(1)
        return CoordChange.make(system, [x + x * x])

    def test_without_correction_the_table_breaks(self, heis_quadratic):
        assert heis_quadratic.correction == "none"
        report = verify_ope_preservation(heis_quadratic, wmax=1, samples=2)
        assert not report.passed
        failed = {check.name for check in report.checks if not check.passed}
        assert "a1~(z)a1~(w)" in failed
        assert "a1~(z)b1~(w)" not in failed

    def test_curve_correction_restores_the_table(self, heis_quadratic):
        report = verify_ope_preservation(heis_quadratic.with_correction("curve"), wmax=1, samples=2)
        assert report.passed, report.render()


class TestAcceptanceSizes:
    @pytest.mark.slow
    def test_quadratic_at_order_eight(self):
        system = System.make("omega", 1, Mode.SERIES, 8)
        x = system.ring.gen(1)
        cc = CoordChange.make(system, [x + x * x])
        report = verify_ope_preservation(cc, wmax=3)
        assert report.passed, report.render()
        assert report.data["order"] == 8

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", [3, 4])
    def test_random_rank_two_changes(self, seed):
        system = System.make("omega", 2, Mode.SERIES, 5)
        cc = random_change(system, random.Random(seed))
        report = verify_ope_preservation(cc, wmax=2, seed=seed)
        assert report.passed, report.render()

    @pytest.mark.slow
    def test_composition_at_order_eight(self):
        system = System.make("omega", 1, Mode.SERIES, 8)
        x = system.ring.gen(1)
        first = CoordChange.make(system, [x + x * x])
        second = CoordChange.make(system, [x - x ** 3])
        report = verify_composition(first, second, wmax=2)
        assert report.passed, report.render()
