"""The vertex-algebra kernel for free fields.

Mode conventions, with the brackets [a^i_m, b^j_n] = [phi^i_m, psi^j_n] = delta_ij delta_{m+n,0}:

    b(z) = sum b_n z^-n,        b_(k) = b_{k+1}
    a(z) = sum a_n z^(-n-1),    a_(k) = a_k
    phi(z) like b, psi(z) like a.

On states a_m (m > 0) is d/db_{-m}, a_0 is d/dx, b_n (n > 0) is -d/da_{-n},
b_0 multiplies by x, phi_n (n > 0) is the odd left derivative d/dpsi_{-n} and
psi_n (n >= 0) is d/dphi_{-n}.

The field of a state is built by the normal-ordered recursion

    (u_(-1) v)_(n) w = sum_j u_(-1-j) v_(n+j) w + (-1)^{|u||v|} sum_j v_(n-1-j) u_(j) w

peeling the first creation variable u off each monomial; the coefficient
f(x) sits innermost and acts through its Taylor field f(b(z)). Both sums stop
where the output weight would be negative.
"""
import bisect
import functools
import itertools
import logging
import math
import random
import threading
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from freefield.coeffs import partial_multi
from freefield.errors import DomainError
from freefield.reports import Report
from freefield.states import (
    Kind,
    ModeVar,
    State,
    StateBuilder,
    basis,
    monomial_parity,
    monomial_weight,
    normalize,
    translation,
)

_logger = logging.getLogger(__name__)

_DUAL = {"a": "b", "b": "a", "phi": "psi", "psi": "phi"}

_CACHE = {}
_CACHE_LOCK = threading.Lock()
_CACHE_LIMIT = 200000


def binomial(n, k):
    """C(n, k) for any integer n and k >= 0."""
    if k < 0:
        return 0
    numer = 1
    for i in range(k):
        numer *= n - i
    return numer // math.factorial(k)


def clear_cache():
    with _CACHE_LOCK:
        _CACHE.clear()


# -- generator modes -----------------------------------------------------------


def _odd_before(monomial, position):
    return sum(1 for var in monomial[:position] if var.odd)


def _insert(var, monomial, coefficient):
    if var.odd and var in monomial:
        return
    keys = [v.key() for v in monomial]
    position = bisect.bisect_right(keys, var.key())
    if var.odd and _odd_before(monomial, position) % 2:
        coefficient = -coefficient
    yield monomial[:position] + (var,) + monomial[position:], coefficient


def _derive(var, monomial, coefficient):
    count = monomial.count(var)
    if not count:
        return
    position = monomial.index(var)
    if var.odd:
        if _odd_before(monomial, position) % 2:
            coefficient = -coefficient
    else:
        coefficient = coefficient * count
    yield monomial[:position] + monomial[position + 1:], coefficient


def _act(var, monomial, coefficient, system):
    if var.family == "b" and var.mode == 0:
        yield monomial, coefficient * system.ring.gen(var.index)
    elif var.family == "a" and var.mode == 0:
        yield monomial, coefficient.partial(var.index)
    elif var.is_creation():
        yield from _insert(var, monomial, coefficient)
    else:
        target = ModeVar(_DUAL[var.family], var.index, -var.mode)
        yield from _derive(target, monomial, -coefficient if var.family == "b" else coefficient)


def apply_generator_mode(var, state):
    """Apply the generator mode ``var`` (any integer mode) to a state."""
    system = state.system
    system.check_var(var, creation=False)
    builder = StateBuilder(system)
    builder.order = state.order
    for monomial, coefficient in state.terms.items():
        for image, value in _act(var, monomial, coefficient, system):
            builder.add(image, value)
    return builder.build()


def variable_field_mode(var, k):
    """The Borcherds mode ``k`` of a creation variable's field as ``(scalar, generator mode)``.

    The variable a_{-1-m} (or b_{-m}) is the state T^(m) of its generator, whose
    modes are (-1)^m C(k, m) X_(k-m).
    """
    if var.family in ("a", "psi"):
        m, shift = -1 - var.mode, 0
    else:
        m, shift = -var.mode, 1
    scalar = (-1) ** m * binomial(k, m)
    if not scalar:
        return None
    return scalar, ModeVar(var.family, var.index, k - m + shift)


def apply_variable_mode(var, k, state):
    mode = variable_field_mode(var, k)
    if mode is None:
        return state.system.zero()
    scalar, op = mode
    result = apply_generator_mode(op, state)
    return result if scalar == 1 else result.scale(scalar)


# -- Taylor fields -------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def colored_partitions(total, colors):
    """Multisets of (index, m), m >= 1, with the m summing to ``total``, as ((i, m), multiplicity) tuples."""
    parts = [(i, m) for m in range(1, total + 1) for i in range(1, colors + 1)]
    found = []

    def extend(position, remaining, chosen):
        if remaining == 0:
            found.append(tuple(chosen))
            return
        if position == len(parts):
            return
        index, m = parts[position]
        for mult in range(remaining // m, -1, -1):
            extend(position + 1, remaining - mult * m, chosen + [((index, m), mult)] if mult else chosen)

    extend(0, total, [])
    return tuple(found)


def taylor_field_mode(f, k, state):
    """Coefficient of z^-k in f(b(z)) applied to ``state``.

    f(b(z)) expands around the zero modes: sum over multisets M of non-zero
    b-modes of (d^M f)(x) prod b_j / prod mult!. Positive modes hit the
    a-variables of the state, negative modes create b-variables.
    """
    system = state.system
    f = system.coefficient(f)
    if f.is_scalar():
        return state.scale(f) if k == 0 else State(system, {}, state.order)
    derivatives = {}
    builder = StateBuilder(system)
    builder.order = state.order
    for monomial, coefficient in state.terms.items():
        groups = list(Counter(var for var in monomial if var.family == "a").items())
        for choice in itertools.product(*[range(e + 1) for _, e in groups]):
            scale = 1
            annihilated = 0
            counts = [0] * system.rank
            removed = Counter()
            for (var, e), c in zip(groups, choice):
                if c:
                    scale *= (-1) ** c * math.comb(e, c)
                    annihilated += c * var.weight
                    counts[var.index - 1] += c
                    removed[var] = c
            remaining = annihilated - k
            if remaining < 0:
                continue
            reduced = []
            for var in monomial:
                if removed[var]:
                    removed[var] -= 1
                else:
                    reduced.append(var)
            for creation in colored_partitions(remaining, system.rank):
                total = list(counts)
                factor = Fraction(scale)
                created = []
                for (index, m), mult in creation:
                    total[index - 1] += mult
                    factor /= math.factorial(mult)
                    created += [ModeVar("b", index, -m)] * mult
                multi_index = tuple(total)
                if multi_index not in derivatives:
                    derivatives[multi_index] = partial_multi(f, multi_index)
                derivative = derivatives[multi_index]
                if derivative.is_zero():
                    continue
                image = tuple(sorted(reduced + created, key=ModeVar.key))
                builder.add(image, derivative * coefficient * factor)
    return builder.build()


# -- products ------------------------------------------------------------------


def _max_weight(state):
    return max(monomial_weight(m) for m in state.terms)


def _term_product(monomial, coefficient, n, b):
    system = b.system
    if not monomial:
        return taylor_field_mode(coefficient, n + 1, b)
    u, rest_vars = monomial[0], monomial[1:]
    rest = State(system, {rest_vars: coefficient})
    top = _max_weight(b)
    builder = StateBuilder(system)
    builder.order = b.order
    for j in range(monomial_weight(rest_vars) + top - n):
        inner = nth_product(rest, n + j, b)
        if inner:
            builder.add_state(apply_variable_mode(u, -1 - j, inner))
    sign = -1 if u.odd and monomial_parity(rest_vars) else 1
    for j in range(u.weight + top):
        inner = apply_variable_mode(u, j, b)
        if inner:
            builder.add_state(nth_product(rest, n - 1 - j, inner), sign)
    return builder.build()


def nth_product(a, n, b):
    """The Borcherds product a_(n) b."""
    if a.system != b.system:
        raise DomainError("nth_product of states from different systems")
    if a.is_zero() or b.is_zero():
        return State(a.system, {}, _order_of(a, b))
    key = (a.key(), n, b.key())
    cached = _CACHE.get(key)
    if cached is not None:
        return cached
    if len(a.terms) == 1:
        [(monomial, coefficient)] = a.terms.items()
        result = _term_product(monomial, coefficient, n, b)
    else:
        builder = StateBuilder(a.system)
        for monomial, coefficient in a.terms.items():
            builder.add_state(nth_product(State(a.system, {monomial: coefficient}), n, b))
        result = builder.build()
    with _CACHE_LOCK:
        if len(_CACHE) >= _CACHE_LIMIT:
            _CACHE.clear()
        _CACHE[key] = result
    return result


def _order_of(a, b):
    orders = [s.order for s in (a, b) if s.order is not None]
    return min(orders) if orders else None


@dataclass(frozen=True)
class ModeOperator:
    """The operator s -> source_(n) s."""

    source: State
    n: int

    def __call__(self, state):
        return nth_product(self.source, self.n, state)

    def weight_shift(self):
        return self.source.weight() - self.n - 1

    @property
    def parity(self):
        return self.source.parity()


def fourier_derivation(a):
    """The integral of the field a(z), i.e. the zero-th product a_(0)."""
    return ModeOperator(a, 0)


@dataclass
class OpeSingularPart:
    poles: dict = field(default_factory=dict)

    @property
    def max_order(self):
        return max(self.poles, default=0)

    def __getitem__(self, order):
        return self.poles[order]

    def get(self, order, default=None):
        return self.poles.get(order, default)

    def is_regular(self):
        return not self.poles

    def render(self):
        pieces = ["pole {0}: {1}".format(k, self.poles[k].render()) for k in sorted(self.poles, reverse=True)]
        return "{" + ", ".join(pieces) + "}"

    def to_dict(self):
        return {str(k): self.poles[k].render() for k in sorted(self.poles, reverse=True)}

    def __str__(self):
        return self.render()


def ope(a, b):
    """Singular part of a(z)b(w): pole k carries a_(k-1) b."""
    poles = {}
    if a.is_zero() or b.is_zero():
        return OpeSingularPart(poles)
    for k in range(1, _max_weight(a) + _max_weight(b) + 1):
        value = nth_product(a, k - 1, b)
        if value:
            poles[k] = value
    return OpeSingularPart(poles)


# -- soundness checks ----------------------------------------------------------


def supercommutator(a, m, b, n, s):
    """[a_(m), b_(n)] s with the Koszul sign of a and b."""
    first = nth_product(a, m, nth_product(b, n, s))
    second = nth_product(b, n, nth_product(a, m, s))
    if a.parity() and b.parity():
        return first + second
    return first - second


def commutator_formula(a, m, b, n, s):
    """sum_k C(m, k) (a_(k) b)_(m+n-k) s."""
    builder = StateBuilder(s.system)
    for k in range(_max_weight(a) + _max_weight(b)):
        product = nth_product(a, k, b)
        coefficient = binomial(m, k)
        if product and coefficient:
            builder.add_state(nth_product(product, m + n - k, s), coefficient)
    return builder.build()


def translation_identity(a, n, s):
    """Return both sides of (T a)_(n) s = -n a_(n-1) s."""
    return nth_product(translation(a), n, s), nth_product(a, n - 1, s).scale(-n)


def derivation_identity(a, b, c, n):
    """Return both sides of a_(0)(b_(n) c) = (a_(0) b)_(n) c + (-1)^{|a||b|} b_(n)(a_(0) c)."""
    lhs = nth_product(a, 0, nth_product(b, n, c))
    first = nth_product(nth_product(a, 0, b), n, c)
    second = nth_product(b, n, nth_product(a, 0, c))
    if a.parity() and b.parity():
        return lhs, first - second
    return lhs, first + second


def iterated_normal_product(states):
    """:s1 (s2 (... sk)): built right to left with (-1)-products."""
    result = states[-1]
    for state in reversed(states[:-1]):
        result = nth_product(state, -1, result)
    return result


def normal_ordering_independence(system, variables):
    """Compare the iterated normal product of generator fields in two nestings.

    Returns ``(forward, backward)`` with the Koszul sign of the reversal applied
    to ``backward``.
    """
    states = [normalize(system, [(1, [var])]) for var in variables]
    forward = iterated_normal_product(states)
    backward = iterated_normal_product(list(reversed(states)))
    odd = [var for var in variables if var.odd]
    swaps = len(odd) * (len(odd) - 1) // 2
    return forward, backward if swaps % 2 == 0 else -backward


def random_state(system, weight, rng, terms=2, parity=None):
    """A random weight-homogeneous state of fixed parity with small coefficients."""
    monomials = list(basis(system, weight))
    if parity is not None:
        monomials = [m for m in monomials if monomial_parity(m) == parity]
    if not monomials:
        return system.zero()
    first = rng.choice(monomials)
    same = [m for m in monomials if monomial_parity(m) == monomial_parity(first)]
    picked = [first] + [rng.choice(same) for _ in range(terms - 1)]
    raw = []
    for monomial in picked:
        coefficient = system.ring.scalar(rng.choice([-2, -1, 1, 2]))
        if system.bosons and rng.random() < 0.5:
            coefficient = coefficient * system.ring.gen(rng.randint(1, system.rank))
        raw.append((coefficient, list(monomial)))
    return normalize(system, raw)


def rehome(state, system):
    """The same state read in another system over the same ring."""
    return normalize(system, [(c, list(m)) for m, c in state.terms.items()])


def borcherds_report(system, seed=0, wmax=2, samples=4):
    """Seeded engine soundness suite: commutator formula, translation, derivation, nesting, tensor factors."""
    rng = random.Random(seed)
    report = Report("engine soundness ({0}, N={1})".format(system.kind.value, system.rank))
    for trial in range(samples):
        a = random_state(system, rng.randint(1, min(2, wmax)), rng)
        b = random_state(system, rng.randint(0, min(2, wmax)), rng)
        s = random_state(system, rng.randint(0, 1), rng)
        m, n = rng.randint(-2, 2), rng.randint(-2, 2)
        if a.is_zero() or b.is_zero() or s.is_zero():
            continue
        lhs, rhs = supercommutator(a, m, b, n, s), commutator_formula(a, m, b, n, s)
        report.add("commutator formula #{0} (m={1}, n={2})".format(trial, m, n), lhs == rhs,
                   witness="a={0}; b={1}; s={2}".format(a, b, s))
        lhs, rhs = translation_identity(a, n, s)
        report.add("translation #{0} (n={1})".format(trial, n), lhs == rhs, witness="a={0}; s={1}".format(a, s))
        lhs, rhs = derivation_identity(a, b, s, n)
        report.add("derivation #{0} (n={1})".format(trial, n), lhs == rhs,
                   witness="a={0}; b={1}; c={2}".format(a, b, s))
    generators = []
    for i in range(1, system.rank + 1):
        if system.bosons:
            generators += [ModeVar("a", i, -1), ModeVar("b", i, -1)]
        if system.fermions:
            generators += [ModeVar("psi", i, -1), ModeVar("phi", i, 0)]
    picked = rng.sample(generators, min(3, len(generators)))
    forward, backward = normal_ordering_independence(system, picked)
    report.add("normal ordering independence", forward == backward,
               witness=" ".join(var.render() for var in picked))
    if system.kind is Kind.OMEGA:
        for factor in ("heis", "cliff"):
            part = system.with_kind(factor)
            a = random_state(part, 1, rng)
            b = random_state(part, rng.randint(0, 2), rng)
            if a.is_zero() or b.is_zero():
                continue
            mixed = ope(rehome(a, system), rehome(b, system))
            alone = ope(a, b)
            same = sorted(mixed.poles) == sorted(alone.poles) and all(
                rehome(alone[k], system) == mixed[k] for k in alone.poles)
            report.add("tensor factor {0}".format(factor), same, witness="a={0}; b={1}".format(a, b))
    report.data["seed"] = seed
    _logger.info("engine soundness: %s checks, passed=%s", len(report.checks), report.passed)
    return report
