"""States of the free-field systems: polynomials in creation modes.

A state is a finite sum ``coefficient * monomial |0>`` where the coefficient is
a function of the zero modes x1..xN (the b^i_0) and the monomial is a
canonically ordered product of creation variables:

    a^i_{-n} (n >= 1), psi^i_{-n} (n >= 1), phi^i_{-n} (n >= 0), b^i_{-n} (n >= 1).

Canonical order is family-major (a, psi, phi, b), then the more negative mode,
then the index. Odd variables (phi, psi) appear at most once and carry Koszul
signs under reordering.
"""
import enum
import functools
import logging
from dataclasses import dataclass

from freefield.coeffs import FunctionRing, Mode
from freefield.errors import DomainError, InvalidMode

_logger = logging.getLogger(__name__)

FAMILIES = ("a", "psi", "phi", "b")
ODD_FAMILIES = frozenset(("phi", "psi"))

_FAMILY_RANK = {"a": 0, "psi": 1, "phi": 2, "b": 3}
# a > psi > phi > b in the filtration order
_FILTRATION_PRECEDENCE = {"a": 3, "psi": 2, "phi": 1, "b": 0}


@dataclass(frozen=True)
class ModeVar:
    """The mode ``family^index_mode``; as a state variable it must be a creation mode."""

    family: str
    index: int
    mode: int

    @property
    def odd(self):
        return self.family in ODD_FAMILIES

    @property
    def weight(self):
        return -self.mode

    @property
    def charge(self):
        if self.family == "phi":
            return 1
        if self.family == "psi":
            return -1
        return 0

    def key(self):
        return (_FAMILY_RANK[self.family], self.mode, self.index)

    def is_creation(self):
        if self.family in ("b", "phi"):
            return self.mode <= 0
        return self.mode <= -1

    def render(self):
        return "{0}{1}_{{{2}}}".format(self.family, self.index, self.mode)

    def __str__(self):
        return self.render()


def monomial_weight(monomial):
    return sum(var.weight for var in monomial)


def monomial_charge(monomial):
    return sum(var.charge for var in monomial)


def monomial_parity(monomial):
    return sum(1 for var in monomial if var.odd) % 2


def render_monomial(monomial):
    return " ".join(var.render() for var in monomial)


def filtration_key(monomial):
    """Index-free key; larger keys sit higher in the filtration."""
    letters = [(_FILTRATION_PRECEDENCE[var.family], -var.mode) for var in monomial]
    return tuple(sorted(letters, reverse=True))


def sort_with_sign(variables):
    """Sort variables canonically; return ``(sign, monomial)`` or ``(0, None)`` for an odd square."""
    odd_keys = [var.key() for var in variables if var.odd]
    sign = 1
    for i in range(len(odd_keys)):
        for j in range(i + 1, len(odd_keys)):
            if odd_keys[i] == odd_keys[j]:
                return 0, None
            if odd_keys[i] > odd_keys[j]:
                sign = -sign
    return sign, tuple(sorted(variables, key=ModeVar.key))


class Kind(enum.Enum):
    HEIS = "heis"
    CLIFF = "cliff"
    OMEGA = "omega"


@dataclass(frozen=True)
class System:
    """A free-field system: V_N (heis), Lambda_N (cliff) or Omega_N (omega) over a coefficient ring."""

    kind: Kind
    rank: int
    ring: FunctionRing

    @classmethod
    def make(cls, kind, rank, mode=Mode.POLY, order=None):
        if rank < 1:
            raise DomainError("systems need N >= 1")
        return cls(Kind(kind), rank, FunctionRing(rank, Mode(mode), order))

    @property
    def bosons(self):
        return self.kind in (Kind.HEIS, Kind.OMEGA)

    @property
    def fermions(self):
        return self.kind in (Kind.CLIFF, Kind.OMEGA)

    @property
    def families(self):
        families = []
        if self.bosons:
            families += ["a", "b"]
        if self.fermions:
            families += ["psi", "phi"]
        return tuple(sorted(families, key=_FAMILY_RANK.get))

    @property
    def central_charge(self):
        return {Kind.HEIS: 2 * self.rank, Kind.CLIFF: -2 * self.rank, Kind.OMEGA: 0}[self.kind]

    def with_ring(self, ring):
        return System(self.kind, self.rank, ring)

    def with_kind(self, kind):
        return System(Kind(kind), self.rank, self.ring)

    def check_var(self, var, creation=True):
        if var.family not in self.families:
            raise InvalidMode("{0} does not belong to a {1} system".format(var.render(), self.kind.value))
        if not 1 <= var.index <= self.rank:
            raise InvalidMode("{0} has index outside 1..{1}".format(var.render(), self.rank))
        if creation and not var.is_creation():
            raise InvalidMode("{0} is not a creation mode".format(var.render()))

    def coefficient(self, value):
        return self.ring.coerce(value)

    def zero(self):
        return State(self, {})

    def vacuum(self):
        return self.function(self.ring.one())

    def function(self, value):
        """The state ``f |0>`` of a coefficient."""
        return State.from_terms(self, [((), self.coefficient(value))])

    def monomial(self, *variables, coefficient=1):
        """The state of a product of creation variables listed in field order."""
        return normalize(self, [(coefficient, list(variables))])

    # generator states

    def a(self, i):
        return self.monomial(ModeVar("a", i, -1))

    def b(self, i):
        return self.function(self.ring.gen(i))

    def phi(self, i):
        return self.monomial(ModeVar("phi", i, 0))

    def psi(self, i):
        return self.monomial(ModeVar("psi", i, -1))

    def generators(self):
        """Name -> generator state for every field of the system."""
        out = {}
        for i in range(1, self.rank + 1):
            if self.bosons:
                out["a{0}".format(i)] = self.a(i)
                out["b{0}".format(i)] = self.b(i)
            if self.fermions:
                out["phi{0}".format(i)] = self.phi(i)
                out["psi{0}".format(i)] = self.psi(i)
        return out


def _min_order(first, second):
    if first is None:
        return second
    if second is None:
        return first
    return min(first, second)


class StateBuilder:
    """Mutable accumulator of ``monomial -> coefficient`` with order tracking."""

    def __init__(self, system):
        self.system = system
        self.terms = {}
        self.order = None

    def add(self, monomial, coefficient):
        if coefficient.mode is Mode.SERIES:
            self.order = _min_order(self.order, coefficient.order)
        previous = self.terms.get(monomial)
        self.terms[monomial] = coefficient if previous is None else previous + coefficient

    def add_state(self, state, scale=None):
        self.order = _min_order(self.order, state.order)
        for monomial, coefficient in state.terms.items():
            self.add(monomial, coefficient if scale is None else coefficient * scale)

    def build(self):
        terms = {m: c for m, c in self.terms.items() if not c.is_zero()}
        return State(self.system, terms, self.order)


class State:
    """An immutable state; equality is exact, or up to the known order for SERIES."""

    __slots__ = ("system", "terms", "order", "_hash")

    def __init__(self, system, terms, order=None):
        self.system = system
        self.terms = terms
        if order is None and system.ring.mode is Mode.SERIES:
            orders = [c.order for c in terms.values()]
            order = min(orders) if orders else None
        self.order = order
        self._hash = None

    @classmethod
    def from_terms(cls, system, pairs):
        builder = StateBuilder(system)
        for monomial, coefficient in pairs:
            builder.add(monomial, system.coefficient(coefficient))
        return builder.build()

    # -- arithmetic ----------------------------------------------------------

    def _check_system(self, other):
        if not isinstance(other, State):
            raise TypeError("expected a State, got {0!r}".format(other))
        if other.system != self.system:
            raise DomainError("states from different systems")

    def __add__(self, other):
        self._check_system(other)
        builder = StateBuilder(self.system)
        builder.add_state(self)
        builder.add_state(other)
        return builder.build()

    def __neg__(self):
        return State(self.system, {m: -c for m, c in self.terms.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        """Multiply every coefficient by a scalar or FunctionElem."""
        factor = self.system.coefficient(factor)
        builder = StateBuilder(self.system)
        builder.add_state(self, factor)
        if factor.mode is Mode.SERIES:
            builder.order = _min_order(builder.order, factor.order)
        return builder.build()

    def __mul__(self, factor):
        if isinstance(factor, State):
            return NotImplemented
        return self.scale(factor)

    __rmul__ = __mul__

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, State) or other.system != self.system:
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        # SERIES coefficients hash by their constant term, so this agrees with truncated equality
        if self._hash is None:
            self._hash = hash((self.system, frozenset(self.terms.items())))
        return self._hash

    def key(self):
        """Structural key, distinct for structurally distinct states."""
        return (self.system, self.order, frozenset((m, c.key()) for m, c in self.terms.items()))

    # -- gradings ------------------------------------------------------------

    def items(self):
        """Terms in canonical display order (the vacuum term last)."""
        return sorted(self.terms.items(), key=lambda item: (not item[0], [var.key() for var in item[0]]))

    def coefficient(self, monomial):
        return self.terms.get(tuple(monomial), self.system.ring.zero())

    def weights(self):
        return sorted({monomial_weight(m) for m in self.terms})

    def weight(self):
        """The conformal weight of a homogeneous state, None for zero."""
        weights = self.weights()
        if not weights:
            return None
        if len(weights) > 1:
            raise DomainError("state is not homogeneous in weight: {0}".format(weights))
        return weights[0]

    def charge(self):
        charges = {monomial_charge(m) for m in self.terms}
        if len(charges) > 1:
            raise DomainError("state is not homogeneous in charge")
        return charges.pop() if charges else None

    def parity(self):
        parities = {monomial_parity(m) for m in self.terms}
        if len(parities) > 1:
            raise DomainError("state has mixed parity")
        return parities.pop() if parities else 0

    def grade(self):
        return grade(self)

    # -- display -------------------------------------------------------------

    def render(self):
        if not self.terms:
            return "0"
        return " + ".join(_render_term(m, c) for m, c in self.items())

    def __str__(self):
        return self.render()

    def __repr__(self):
        return "State({0})".format(self.render())


def _render_coefficient(coefficient):
    if coefficient.mode is Mode.RATIONAL and coefficient.value.denom != 1:
        return coefficient.render()
    poly = coefficient.numerator()
    if len(poly) != 1:
        return "({0})".format(coefficient.render())
    [(monom, scalar)] = poly.items()
    if all(e == 0 for e in monom):
        text = coefficient.render()
        return text if scalar > 0 and "/" not in text else "({0})".format(text)
    if scalar == 1:
        return coefficient.render()
    unit = coefficient.ring.from_poly(poly.ring.from_dict({monom: poly.ring.domain.one}))
    scale = coefficient.ring.scalar(scalar)
    return "{0}*{1}".format(_render_coefficient(scale), unit.render())


def _render_term(monomial, coefficient):
    is_one = coefficient.is_scalar() and coefficient.constant() == 1
    if not monomial:
        return "|0>" if is_one else "{0} |0>".format(_render_coefficient(coefficient))
    if is_one:
        return "{0} |0>".format(render_monomial(monomial))
    return "{0} * {1} |0>".format(_render_coefficient(coefficient), render_monomial(monomial))


def normalize(system, raw_terms):
    """Canonical state from ``(coefficient, [ModeVar, ...])`` pairs in field order.

    b^i_0 factors are lowered into the coefficient as x_i.
    """
    builder = StateBuilder(system)
    for coefficient, variables in raw_terms:
        coefficient = system.coefficient(coefficient)
        kept = []
        for var in variables:
            system.check_var(var)
            if var.family == "b" and var.mode == 0:
                coefficient = coefficient * system.ring.gen(var.index)
            else:
                kept.append(var)
        sign, monomial = sort_with_sign(kept)
        if sign == 0:
            continue
        builder.add(monomial, coefficient if sign > 0 else -coefficient)
    return builder.build()


def grade(state):
    """Split a state into its (weight, charge)-homogeneous parts."""
    parts = {}
    for monomial, coefficient in state.terms.items():
        key = (monomial_weight(monomial), monomial_charge(monomial))
        parts.setdefault(key, {})[monomial] = coefficient
    return {key: State(state.system, terms, state.order) for key, terms in sorted(parts.items())}


def creation_vars(system, wmax, zero_modes=True):
    out = []
    for family in system.families:
        lowest = 1 if family in ("a", "psi", "b") else (0 if zero_modes else 1)
        for weight in range(lowest, wmax + 1):
            for i in range(1, system.rank + 1):
                out.append(ModeVar(family, i, -weight))
    return sorted(out, key=ModeVar.key)


@functools.lru_cache(maxsize=None)
def basis(system, weight, charge=None, zero_modes=True):
    """Canonical monomials of a given weight (and charge), as a tuple."""
    variables = creation_vars(system, weight, zero_modes)
    found = []

    def extend(position, remaining, chosen):
        if position == len(variables):
            if remaining == 0:
                found.append(tuple(chosen))
            return
        var = variables[position]
        if var.odd:
            limit = 1 if var.weight <= remaining else 0
        else:
            limit = remaining // var.weight
        for count in range(limit + 1):
            extend(position + 1, remaining - count * var.weight, chosen + [var] * count)

    extend(0, weight, [])
    if charge is not None:
        found = [m for m in found if monomial_charge(m) == charge]
    return tuple(found)


@functools.lru_cache(maxsize=None)
def _slice_keys(system, weight):
    return tuple(sorted({filtration_key(m) for m in basis(system, weight)}))


def filtration_level(system, monomial):
    """Position of the monomial's key among all keys of its weight slice."""
    keys = _slice_keys(system, monomial_weight(monomial))
    return keys.index(filtration_key(monomial))


def filtration_symbol(state, level):
    """The part of a weight-homogeneous state sitting exactly at filtration level ``level``."""
    state.weight()
    terms = {m: c for m, c in state.terms.items() if filtration_level(state.system, m) == level}
    return State(state.system, terms, state.order)


def top_level(state):
    if state.is_zero():
        return None
    return max(filtration_level(state.system, m) for m in state.terms)


def top_symbol(state):
    """The filtration symbol at the highest level present in the state."""
    level = top_level(state)
    if level is None:
        return state
    return filtration_symbol(state, level)


def translate_var(var):
    """T of a single creation variable: ``(factor, ModeVar)``."""
    if var.family in ("a", "psi"):
        return -var.mode, ModeVar(var.family, var.index, var.mode - 1)
    return 1 - var.mode, ModeVar(var.family, var.index, var.mode - 1)


def translation(state):
    """The translation operator T as an even derivation of the creation algebra."""
    system = state.system
    raw = []
    for monomial, coefficient in state.terms.items():
        for i in range(1, system.rank + 1):
            if system.bosons:
                derivative = coefficient.partial(i)
                if not derivative.is_zero():
                    raw.append((derivative, [ModeVar("b", i, -1)] + list(monomial)))
        for position, var in enumerate(monomial):
            factor, shifted = translate_var(var)
            variables = list(monomial)
            variables[position] = shifted
            raw.append((coefficient * factor, variables))
    result = normalize(system, raw)
    if state.order is None:
        return result
    return State(system, result.terms, _min_order(result.order, state.order - 1))
