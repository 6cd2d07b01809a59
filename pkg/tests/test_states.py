import pytest
from sympy import QQ

from freefield.coeffs import partial
from freefield.errors import DomainError, InvalidMode
from freefield.states import ModeVar, System, basis, grade, normalize, top_symbol, translation

a1 = ModeVar("a", 1, -1)
a1_2 = ModeVar("a", 1, -2)
b1 = ModeVar("b", 1, -1)
b1_0 = ModeVar("b", 1, 0)
phi0 = ModeVar("phi", 1, 0)
phi1 = ModeVar("phi", 1, -1)
psi1 = ModeVar("psi", 1, -1)


class TestModeVar:
    def test_weight_and_charge(self):
        assert a1.weight == 1 and a1.charge == 0
        assert phi0.weight == 0 and phi0.charge == 1
        assert psi1.charge == -1
        assert phi0.odd and not b1.odd

    def test_creation_range(self):
        assert b1_0.is_creation() and phi0.is_creation()
        assert not ModeVar("a", 1, 0).is_creation()
        assert not ModeVar("psi", 1, 0).is_creation()

    def test_render(self):
        assert a1.render() == "a1_{-1}"


class TestNormalize:
    def test_b_zero_mode_lowers_into_coefficient(self, heis1):
        state = normalize(heis1, [(1, [b1_0, a1])])
        assert state == normalize(heis1, [(heis1.ring.gen(1), [a1])])

    def test_odd_square_vanishes(self, omega1):
        assert normalize(omega1, [(1, [phi1, phi1])]).is_zero()

    def test_koszul_sign(self, omega1):
        forward = normalize(omega1, [(1, [phi0, psi1])])
        backward = normalize(omega1, [(1, [psi1, phi0])])
        assert forward == -backward

    def test_annihilation_variable_rejected(self, heis1):
        with pytest.raises(InvalidMode):
            normalize(heis1, [(1, [ModeVar("a", 1, 0)])])

    def test_index_out_of_range(self, heis1):
        with pytest.raises(InvalidMode):
            normalize(heis1, [(1, [ModeVar("a", 2, -1)])])

    def test_family_outside_system(self, heis1):
        with pytest.raises(InvalidMode):
            normalize(heis1, [(1, [phi0])])

    def test_cancellation(self, heis1):
        state = normalize(heis1, [(1, [a1]), (-1, [a1])])
        assert state.is_zero()


class TestGradings:
    def test_weight_charge_parity(self, omega1):
        state = normalize(omega1, [(1, [a1, phi0])])
        assert state.weight() == 1
        assert state.charge() == 1
        assert state.parity() == 1

    def test_mixed_weight_rejected(self, heis1):
        state = normalize(heis1, [(1, [a1]), (1, [a1_2])])
        with pytest.raises(DomainError):
            state.weight()

    def test_grade_splits(self, heis1):
        state = normalize(heis1, [(1, [a1]), (1, [a1_2]), (1, [])])
        parts = grade(state)
        assert sorted(parts) == [(0, 0), (1, 0), (2, 0)]


class TestBasis:
    @pytest.mark.parametrize("weight, count", [(0, 1), (1, 2), (2, 5), (3, 10)])
    def test_heisenberg_counts(self, heis1, weight, count):
        assert len(basis(heis1, weight)) == count

    def test_fermion_zero_modes(self, omega1):
        assert len(basis(omega1, 0)) == 2
        assert basis(omega1, 0, charge=1) == ((phi0,),)
        assert basis(omega1, 0, zero_modes=False) == ((),)

    def test_rank_two(self, heis2):
        assert len(basis(heis2, 1)) == 4


class TestTranslation:
    def test_generators(self, omega1):
        assert translation(omega1.b(1)) == omega1.monomial(b1)
        assert translation(omega1.a(1)) == omega1.monomial(a1_2)
        assert translation(omega1.monomial(b1)) == omega1.monomial(ModeVar("b", 1, -2)) * 2
        assert translation(omega1.phi(1)) == omega1.monomial(phi1)

    def test_vacuum(self, heis1):
        assert translation(heis1.vacuum()).is_zero()

    def test_coefficient_chain_rule(self, heis2):
        x, y = heis2.ring.gen(1), heis2.ring.gen(2)
        image = translation(heis2.function(x * y))
        expected = normalize(heis2, [(y, [ModeVar("b", 1, -1)]), (x, [ModeVar("b", 2, -1)])])
        assert image == expected


class TestDisplay:
    def test_render(self, heis1):
        x = heis1.ring.gen(1)
        state = normalize(heis1, [(x * 2, [a1]), (1, [])])
        assert state.render() == "2*x1 * a1_{-1} |0> + |0>"

    def test_vacuum_render(self, heis1):
        assert str(heis1.vacuum()) == "|0>"
        assert str(heis1.zero()) == "0"

    def test_generators(self, omega1):
        assert sorted(omega1.generators()) == ["a1", "b1", "phi1", "psi1"]

    def test_central_charge(self):
        assert System.make("heis", 2).central_charge == 4
        assert System.make("cliff", 3).central_charge == -6
        assert System.make("omega", 2).central_charge == 0

    def test_top_symbol(self, heis1):
        state = normalize(heis1, [(1, [a1, a1]), (1, [a1_2])])
        assert top_symbol(state).weight() == 2


class TestHashing:
    def test_series_states_equal_across_orders_hash_alike(self, series_omega1):
        x = series_omega1.ring.gen(1)
        exact = series_omega1.a(1).scale(1 + x + x ** 6 * 7)
        lowered = series_omega1.a(1).scale(partial(x + x * x * QQ(1, 2), 1))
        assert lowered.order == 5
        assert exact == lowered
        assert hash(exact) == hash(lowered)

    def test_series_states_spread_over_buckets(self, series_omega1):
        states = [series_omega1.a(1), series_omega1.phi(1), series_omega1.psi(1), series_omega1.vacuum()]
        assert len({hash(state) for state in states}) == len(states)
        assert len(set(states)) == len(states)
