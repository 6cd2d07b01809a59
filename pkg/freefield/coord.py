"""Coordinate changes x -> g(x) lifted to the free-field systems.

For a change with Jacobian Dg and H = (Dg)^-1 (so H_ji = df^j/dx~^i at g(x)),
the tilded generator states are

    b~^i   = g^i(x)
    phi~^i = sum_j d_j g^i phi^j_0
    a~^i   = sum_j H_ji a^j_-1 + sum_{k,r} d_r H_ki phi^r_0 psi^k_-1
    psi~^i = sum_j H_ji psi^j_-1

A state is transformed by composing its coefficient with g and applying the
matching modes of the tilded fields, rightmost variable first.

Without fermions the correction term of a~ is either dropped (``none``) or,
for one variable, replaced by h'^2/(2h) b_-1 with h = 1/g' (``curve``).
"""
import functools
import logging
import random
from dataclasses import dataclass

from sympy.polys.matrices import DomainMatrix

from freefield.coeffs import FunctionElem, FunctionRing, Mode, compose, compose_and_invert, jacobian, partial, ring_invert, ring_log
from freefield.engine import nth_product, ope
from freefield.errors import DomainError
from freefield.reports import Report
from freefield.states import Kind, ModeVar, basis, normalize, top_symbol, translation

_logger = logging.getLogger(__name__)

CORRECTIONS = ("fermion", "none", "curve")


def _domain(system):
    if system.ring.mode is Mode.SERIES:
        return system.ring.polys.to_domain()
    return system.ring.fractions.to_domain()


def _to_domain(system, elem):
    if system.ring.mode is Mode.SERIES:
        return elem.value
    return system.ring.fractions.new(elem.numerator(), elem.denominator())


def _from_domain(system, value, order=None):
    if system.ring.mode is Mode.SERIES:
        return FunctionRing(system.rank, Mode.SERIES, order).from_poly(value)
    return system.coefficient(FunctionElem(Mode.RATIONAL, value))


@dataclass(frozen=True)
class CoordChange:
    """An invertible change x -> g(x) over the coefficient ring of ``system``."""

    system: object
    g: tuple
    f: tuple | None = None
    correction: str = "fermion"

    def __post_init__(self):
        if len(self.g) != self.system.rank:
            raise DomainError("a change of {0} coordinates needs {0} components".format(self.system.rank))
        if self.correction not in CORRECTIONS:
            raise DomainError("unknown correction {0!r}".format(self.correction))
        if self.correction == "fermion" and self.system.kind is not Kind.OMEGA:
            raise DomainError("the fermion correction needs an omega system")
        if self.correction == "curve" and (self.system.kind is not Kind.HEIS or self.system.rank != 1):
            raise DomainError("the curve correction is defined for heis N=1")

    @classmethod
    def make(cls, system, g, f=None, correction=None):
        """Build a change; SERIES changes get their inverse computed and verified."""
        if correction is None:
            correction = "fermion" if system.kind is Kind.OMEGA else "none"
        g = tuple(system.coefficient(gi) for gi in g)
        if system.ring.mode is Mode.SERIES and f is None:
            _, f = compose_and_invert(g, system.ring.order)
        elif f is not None:
            f = tuple(system.coefficient(fi) for fi in f)
        change = cls(system, g, f, correction)
        if not change.determinant():
            raise DomainError("the Jacobian determinant of {0} vanishes".format(change.render()))
        return change

    @classmethod
    def identity(cls, system, correction=None):
        return cls.make(system, [system.ring.gen(i) for i in range(1, system.rank + 1)], correction=correction)

    @property
    def rank(self):
        return self.system.rank

    @property
    def order(self):
        return self.system.ring.order

    def render(self):
        return "x -> ({0})".format(", ".join(gi.render() for gi in self.g))

    def with_correction(self, correction):
        return CoordChange(self.system, self.g, self.f, correction)

    # -- Jacobian data ---------------------------------------------------------

    @functools.cached_property
    def dg(self):
        return jacobian(self.g)

    def _matrix(self):
        n = self.rank
        return DomainMatrix([[_to_domain(self.system, e) for e in row] for row in self.dg], (n, n), _domain(self.system))

    @functools.cached_property
    def det(self):
        order = min((e.order for row in self.dg for e in row), default=None)
        return _from_domain(self.system, self._matrix().det(), order)

    def determinant(self):
        return self.det

    @functools.cached_property
    def inverse_jacobian(self):
        """H with H[j][i] = df^j/dx~^i evaluated at g(x)."""
        n = self.rank
        if self.system.ring.mode is Mode.SERIES:
            return [[compose(partial(self.f[j], i + 1), list(self.g)) for i in range(n)] for j in range(n)]
        rows = self._matrix().inv().to_list()
        return [[_from_domain(self.system, rows[j][i]) for i in range(n)] for j in range(n)]

    def dlog_det(self):
        """The components d_i log det Dg."""
        if self.system.ring.mode is Mode.SERIES:
            log = ring_log(self.det)
            return [partial(log, i) for i in range(1, self.rank + 1)]
        return [partial(self.det, i) * ring_invert(self.det) for i in range(1, self.rank + 1)]

    @functools.cached_property
    def tilded(self):
        return tilded_generators(self)


@dataclass(frozen=True)
class TildedFields:
    """Images of the generator states, indexed by family then coordinate."""

    b: tuple
    a: tuple
    phi: tuple = ()
    psi: tuple = ()

    def get(self, family, index):
        return getattr(self, family)[index - 1]

    def items(self):
        for family in ("a", "b", "phi", "psi"):
            for i, state in enumerate(getattr(self, family)):
                yield "{0}{1}".format(family, i + 1), state


def tilded_generators(cc):
    system = cc.system
    n = cc.rank
    H = cc.inverse_jacobian
    b_images, a_images, phi_images, psi_images = [], [], [], []
    for i in range(1, n + 1):
        b_images.append(system.function(cc.g[i - 1]))
        raw = [(H[j][i - 1], [ModeVar("a", j + 1, -1)]) for j in range(n)]
        if cc.correction == "fermion":
            for k in range(n):
                for r in range(1, n + 1):
                    raw.append((partial(H[k][i - 1], r), [ModeVar("phi", r, 0), ModeVar("psi", k + 1, -1)]))
        elif cc.correction == "curve":
            h = H[0][0]
            slope = partial(h, 1)
            raw.append((slope * slope * ring_invert(h * 2), [ModeVar("b", 1, -1)]))
        a_images.append(normalize(system, raw))
        if system.fermions:
            phi_images.append(normalize(system, [(cc.dg[i - 1][j], [ModeVar("phi", j + 1, 0)]) for j in range(n)]))
            psi_images.append(normalize(system, [(H[j][i - 1], [ModeVar("psi", j + 1, -1)]) for j in range(n)]))
    return TildedFields(tuple(b_images), tuple(a_images), tuple(phi_images), tuple(psi_images))


def borcherds_index(var):
    """The product index n with var = X_(n) acting on the vacuum side."""
    if var.family in ("a", "psi"):
        return var.mode
    return var.mode - 1


def transform_state(cc, state):
    if state.system != cc.system:
        raise DomainError("state and coordinate change live over different systems")
    tilded = cc.tilded
    result = cc.system.zero()
    for monomial, coefficient in state.terms.items():
        image = cc.system.function(compose(coefficient, list(cc.g)))
        for var in reversed(monomial):
            image = nth_product(tilded.get(var.family, var.index), borcherds_index(var), image)
        result = result + image
    return result


def compose_changes(cc2, cc1):
    """The change acting as cc1 followed by cc2 on states: g = g1 o g2."""
    if cc1.system != cc2.system:
        raise DomainError("cannot compose changes over different systems")
    g = [compose(g1i, list(cc2.g)) for g1i in cc1.g]
    return CoordChange.make(cc1.system, g, correction=cc1.correction)


# -- classical transforms --------------------------------------------------------


def classical_vector_field_transform(cc, i):
    """The vector field d/dx~^i in old coordinates, as the state sum_j H_ji a^j_-1."""
    H = cc.inverse_jacobian
    return normalize(cc.system, [(H[j][i - 1], [ModeVar("a", j + 1, -1)]) for j in range(cc.rank)])


def classical_one_form_transform(cc, i):
    """The one-form dg^i as the state sum_j d_j g^i b^j_-1."""
    return normalize(cc.system, [(cc.dg[i - 1][j], [ModeVar("b", j + 1, -1)]) for j in range(cc.rank)])


# -- verification ----------------------------------------------------------------


def _sample_states(system, wmax, rng, limit):
    states = []
    for weight in range(1, wmax + 1):
        for monomial in basis(system, weight):
            states.append(normalize(system, [(1, list(monomial))]))
            states.append(normalize(system, [(system.ring.gen(1), list(monomial))]))
    if len(states) > limit:
        states = rng.sample(states, limit)
    return states


def _generator_states(system):
    return dict(sorted(system.generators().items()))


def _generator_key(name):
    family = name.rstrip("0123456789")
    return family, int(name[len(family):])


def compare_ope(report, name, computed, expected, zero):
    orders = sorted(set(computed.poles) | set(expected.poles), reverse=True)
    bad = [k for k in orders if computed.get(k, zero) != expected.get(k, zero)]
    if bad:
        report.add(name, False, "pole {0} differs".format(bad[0]), witness=computed.get(bad[0], zero))
    else:
        report.add(name, True)


def verify_ope_preservation(cc, wmax=2, seed=0, samples=6):
    """All OPEs among the tilded generators, then the mode-by-mode homomorphism on sampled states."""
    system = cc.system
    report = Report("OPE preservation under {0} ({1})".format(cc.render(), cc.correction))
    tilded = cc.tilded
    generators = _generator_states(system)
    zero = system.zero()
    for left in generators:
        for right in generators:
            computed = ope(tilded.get(*_generator_key(left)), tilded.get(*_generator_key(right)))
            expected = ope(generators[left], generators[right])
            compare_ope(report, "{0}~(z){1}~(w)".format(left, right), computed, expected, zero)
    rng = random.Random(seed)
    bad = None
    states = _sample_states(system, wmax, rng, samples)
    for state in states:
        image = transform_state(cc, state)
        for name, generator in generators.items():
            n = rng.randint(0, 1)
            lhs = transform_state(cc, nth_product(generator, n, state))
            rhs = nth_product(tilded.get(*_generator_key(name)), n, image)
            if lhs != rhs:
                bad = "{0}_({1}) on {2}".format(name, n, state)
                break
        if bad:
            break
    report.add("modes on {0} sampled states".format(len(states)), bad is None, witness=bad)
    report.data["order"] = cc.order
    report.data["correction"] = cc.correction
    _logger.info("ope preservation %s: passed=%s", cc.render(), report.passed)
    return report


def verify_composition(cc1, cc2, wmax=1, seed=0, samples=4):
    """transform(cc2 o cc1, s) = transform(cc2, transform(cc1, s)) on generators and sampled states."""
    system = cc1.system
    composed = compose_changes(cc2, cc1)
    report = Report("composition {0} then {1}".format(cc1.render(), cc2.render()))
    states = list(_generator_states(system).items())
    rng = random.Random(seed)
    states += [(str(s), s) for s in _sample_states(system, wmax, rng, samples)]
    for name, state in states:
        lhs = transform_state(composed, state)
        rhs = transform_state(cc2, transform_state(cc1, state))
        report.add(name, lhs == rhs, witness=None if lhs == rhs else lhs - rhs)
    report.data["order"] = cc1.order
    return report


def structure_transform(cc):
    """{name: tilded minus original} for L, J, Q, G."""
    from freefield.cdr import build_structure

    if cc.system.kind is not Kind.OMEGA:
        raise DomainError("structure fields live on omega systems")
    structure = build_structure(cc.system)
    return {name: transform_state(cc, state) - state for name, state in structure.items()}


def anomaly_closed_forms(cc):
    """J~ - J = T(log det Dg) and Q~ - Q = -T(d log det Dg)."""
    system = cc.system
    dlog = cc.dlog_det()
    j_delta = normalize(system, [(dlog[i], [ModeVar("b", i + 1, -1)]) for i in range(cc.rank)])
    one_form = normalize(system, [(dlog[i], [ModeVar("phi", i + 1, 0)]) for i in range(cc.rank)])
    return {"L": system.zero(), "J": j_delta, "Q": -translation(one_form), "G": system.zero()}


def check_structure_transform(cc):
    report = Report("structure fields under {0}".format(cc.render()))
    deltas = structure_transform(cc)
    expected = anomaly_closed_forms(cc)
    for name in ("L", "J", "Q", "G"):
        report.add("{0}~ - {0}".format(name), deltas[name] == expected[name],
                   "" if deltas[name] == expected[name] else "expected {0}".format(expected[name]),
                   witness=deltas[name])
    report.data["order"] = cc.order
    return report


def filtration_report(cc):
    """The top filtration symbols of a~ and b~_-1 are the classical transforms."""
    report = Report("filtration symbols under {0}".format(cc.render()))
    for i in range(1, cc.rank + 1):
        a_image = transform_state(cc, cc.system.a(i))
        report.expect_equal("a{0}: vector field".format(i), top_symbol(a_image), classical_vector_field_transform(cc, i))
        b_image = transform_state(cc, cc.system.monomial(ModeVar("b", i, -1)))
        report.expect_equal("b{0}_-1: one-form".format(i), top_symbol(b_image), classical_one_form_transform(cc, i))
    return report


def random_change(system, rng, degree=2):
    """x_i + (unipotent linear part) + small random terms of degree 2..degree."""
    n = system.rank
    gens = [system.ring.gen(i) for i in range(1, n + 1)]
    g = []
    for i in range(n):
        gi = gens[i]
        if i + 1 < n:
            gi = gi + gens[i + 1] * rng.choice([-1, 1, 2])
        for _ in range(2):
            term = system.ring.scalar(rng.choice([-2, -1, 1, 2]))
            for _ in range(rng.randint(2, degree)):
                term = term * rng.choice(gens)
            gi = gi + term
        g.append(gi)
    return CoordChange.make(system, g)
