import random

import pytest

from freefield.engine import (
    ModeOperator,
    OpeSingularPart,
    apply_generator_mode,
    binomial,
    borcherds_report,
    colored_partitions,
    commutator_formula,
    derivation_identity,
    nth_product,
    ope,
    random_state,
    supercommutator,
    taylor_field_mode,
    translation_identity,
)
from freefield.errors import DomainError, InvalidMode
from freefield.states import ModeVar, System


class TestCombinatorics:
    @pytest.mark.parametrize("n, k, expected", [(5, 2, 10), (2, 3, 0), (-1, 2, 1), (-2, 3, -4), (4, -1, 0)])
    def test_binomial(self, n, k, expected):
        assert binomial(n, k) == expected

    def test_colored_partitions(self):
        assert len(colored_partitions(2, 1)) == 2
        assert len(colored_partitions(2, 2)) == 5
        assert colored_partitions(0, 3) == ((),)


class TestGeneratorModes:
    def test_a_zero_mode_differentiates(self, heis1):
        x = heis1.ring.gen(1)
        state = heis1.function(x ** 3)
        assert apply_generator_mode(ModeVar("a", 1, 0), state) == heis1.function(x * x * 3)

    def test_b_positive_mode_removes_a(self, heis1):
        state = heis1.monomial(ModeVar("a", 1, -2))
        assert apply_generator_mode(ModeVar("b", 1, 2), state) == -heis1.vacuum()

    def test_unknown_family(self, heis1):
        with pytest.raises(InvalidMode):
            apply_generator_mode(ModeVar("phi", 1, 1), heis1.vacuum())

    def test_taylor_field(self, heis1):
        x = heis1.ring.gen(1)
        assert taylor_field_mode(x * x, 1, heis1.a(1)) == heis1.function(x * -2)
        assert taylor_field_mode(x * x, 0, heis1.vacuum()) == heis1.function(x * x)


class TestOpe:
    def test_a_with_coordinate(self, heis1):
        computed = ope(heis1.a(1), heis1.b(1))
        assert computed.to_dict() == {"1": "|0>"}

    def test_coordinate_with_a(self, heis1):
        assert ope(heis1.b(1), heis1.a(1)).get(1) == -heis1.vacuum()

    def test_a_with_b_current(self, heis1):
        computed = ope(heis1.a(1), heis1.monomial(ModeVar("b", 1, -1)))
        assert computed.poles == {2: heis1.vacuum()}

    def test_fermions(self, cliff1):
        assert ope(cliff1.psi(1), cliff1.phi(1)).poles == {1: cliff1.vacuum()}
        assert ope(cliff1.phi(1), cliff1.psi(1)).poles == {1: cliff1.vacuum()}
        assert ope(cliff1.phi(1), cliff1.phi(1)).is_regular()

    def test_regular_pairs(self, heis2):
        assert ope(heis2.a(1), heis2.a(2)).is_regular()
        assert ope(heis2.b(1), heis2.b(2)).is_regular()
        assert ope(heis2.a(1), heis2.b(2)).is_regular()

    def test_render(self, heis1):
        assert ope(heis1.a(1), heis1.b(1)).render() == "{pole 1: |0>}"
        assert OpeSingularPart().render() == "{}"


class TestProducts:
    def test_vacuum_is_identity(self, omega1):
        state = omega1.monomial(ModeVar("a", 1, -1), ModeVar("phi", 1, 0))
        assert nth_product(omega1.vacuum(), -1, state) == state
        assert nth_product(state, -1, omega1.vacuum()) == state

    def test_different_systems(self, heis1, heis2):
        with pytest.raises(DomainError):
            nth_product(heis1.a(1), 0, heis2.a(1))

    def test_mode_operator(self, heis1):
        x = heis1.ring.gen(1)
        operator = ModeOperator(heis1.a(1), 0)
        assert operator(heis1.function(x * x)) == heis1.function(x * 2)
        assert operator.weight_shift() == 0


class TestSoundness:
    @pytest.mark.parametrize("kind", ["heis", "cliff", "omega"])
    def test_random_identities(self, kind):
        system = System.make(kind, 1)
        rng = random.Random(7)
        for _ in range(3):
            a = random_state(system, 1, rng)
            b = random_state(system, 1, rng)
            s = random_state(system, 1, rng)
            if a.is_zero() or b.is_zero() or s.is_zero():
                continue
            assert supercommutator(a, 1, b, 0, s) == commutator_formula(a, 1, b, 0, s)
            lhs, rhs = translation_identity(a, 1, s)
            assert lhs == rhs
            lhs, rhs = derivation_identity(a, b, s, 1)
            assert lhs == rhs

    @pytest.mark.parametrize("kind, rank", [("heis", 1), ("omega", 1), ("heis", 2)])
    def test_borcherds_report(self, kind, rank):
        report = borcherds_report(System.make(kind, rank), seed=0, wmax=2, samples=3)
        assert report.passed, report.render()
