"""Exact coefficient rings for free-field states.

Coefficients are functions of the zero-mode symbols x1..xN. Three modes are
supported, all over QQ:

- POLY: sparse polynomials (``sympy.polys.rings``),
- RATIONAL: reduced rational functions (``sympy.polys.fields``), used for
  localizations such as the Laurent ring of the projective line,
- SERIES: truncated power series stored as polynomials of total degree at
  most the order to which they are known.

Every SERIES element carries its own ``order``; sums and products take the
minimum, partial derivatives lower it by one. A series that would be known to
no order at all raises ``TruncationUnderflow``.
"""
import enum
import functools
import logging
from dataclasses import dataclass
from fractions import Fraction

from sympy import QQ
from sympy.polys.fields import FracField
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyRing

from freefield.errors import DomainError, NotInvertible, NotInvertibleChange, TruncationUnderflow

_logger = logging.getLogger(__name__)


class Mode(enum.Enum):
    POLY = "poly"
    RATIONAL = "rat"
    SERIES = "series"


@functools.lru_cache(maxsize=None)
def poly_ring(nvars):
    """The polynomial ring QQ[x1..xN] with graded-lex term order."""
    names = ",".join("x{0}".format(i + 1) for i in range(max(nvars, 1)))
    return PolyRing(names, QQ, "grlex")


@functools.lru_cache(maxsize=None)
def frac_field(nvars):
    names = ",".join("x{0}".format(i + 1) for i in range(max(nvars, 1)))
    return FracField(names, QQ, "grlex")


def to_rational(value):
    """Convert an int, Fraction or QQ element to a QQ element."""
    if isinstance(value, QQ.dtype):
        return value
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    raise TypeError("not a rational scalar: {0!r}".format(value))


def render_rational(value):
    numer, denom = QQ.numer(value), QQ.denom(value)
    if denom == 1:
        return str(numer)
    return "{0}/{1}".format(numer, denom)


def _truncate(poly, order):
    return poly.ring.from_dict({monom: coeff for monom, coeff in poly.items() if sum(monom) <= order})


def _min_order(*orders):
    known = [order for order in orders if order is not None]
    if not known:
        return None
    return min(known)


@dataclass(frozen=True)
class FunctionRing:
    """A coefficient ring: number of zero-mode symbols, mode and nominal SERIES order."""

    nvars: int
    mode: Mode = Mode.POLY
    order: int | None = None

    def __post_init__(self):
        if self.mode is Mode.SERIES and (self.order is None or self.order < 0):
            raise DomainError("SERIES rings need a non-negative order")
        if self.mode is not Mode.SERIES and self.order is not None:
            raise DomainError("only SERIES rings carry an order")

    @property
    def polys(self):
        return poly_ring(self.nvars)

    @property
    def fractions(self):
        return frac_field(self.nvars)

    def from_poly(self, poly):
        if self.mode is Mode.RATIONAL:
            return FunctionElem(Mode.RATIONAL, self.fractions.new(poly.set_ring(self.polys)))
        if self.mode is Mode.SERIES:
            return FunctionElem(Mode.SERIES, _truncate(poly, self.order), self.order)
        return FunctionElem(Mode.POLY, poly)

    def scalar(self, value):
        return self.from_poly(self.polys.ground_new(to_rational(value)))

    def zero(self):
        return self.scalar(0)

    def one(self):
        return self.scalar(1)

    def gen(self, i):
        """The coordinate x_i, 1-based."""
        if not 1 <= i <= self.nvars:
            raise DomainError("coordinate x{0} outside 1..{1}".format(i, self.nvars))
        return self.from_poly(self.polys.gens[i - 1])

    def fraction(self, numer, denom):
        if self.mode is not Mode.RATIONAL:
            raise DomainError("fractions need a RATIONAL ring")
        if not denom:
            raise NotInvertible("zero denominator")
        return FunctionElem(Mode.RATIONAL, self.fractions.new(numer, denom))

    def coerce(self, value):
        """Bring a scalar or a FunctionElem into this ring."""
        if not isinstance(value, FunctionElem):
            return self.scalar(value)
        if value.nvars != self.nvars:
            raise DomainError("coefficient has {0} symbols, ring has {1}".format(value.nvars, self.nvars))
        if value.mode is self.mode:
            if self.mode is Mode.SERIES and value.order > self.order:
                return FunctionElem(Mode.SERIES, _truncate(value.value, self.order), self.order)
            return value
        if value.mode is Mode.POLY:
            return self.from_poly(value.value)
        if value.mode is Mode.RATIONAL and value.value.denom == 1:
            return self.from_poly(value.value.numer)
        raise DomainError("cannot bring a {0} coefficient into a {1} ring".format(value.mode.value, self.mode.value))


class FunctionElem:
    """An immutable coefficient: polynomial, rational function or truncated series."""

    __slots__ = ("mode", "value", "order", "_hash")

    def __init__(self, mode, value, order=None):
        if mode is Mode.SERIES and order is not None and order < 0:
            raise TruncationUnderflow("series coefficient known to no order")
        self.mode = mode
        self.value = value
        self.order = order if mode is Mode.SERIES else None
        self._hash = None

    @property
    def nvars(self):
        if self.mode is Mode.RATIONAL:
            return self.value.field.ngens
        return self.value.ring.ngens

    @property
    def ring(self):
        return FunctionRing(self.nvars, self.mode, self.order)

    def _new(self, value, order=None):
        return FunctionElem(self.mode, value, order)

    # -- promotion -----------------------------------------------------------

    def _align(self, other):
        if not isinstance(other, FunctionElem):
            try:
                other = self.ring.scalar(other)
            except TypeError:
                return None, None
        if other.nvars != self.nvars:
            raise DomainError("coefficients over different numbers of symbols")
        if self.mode is other.mode:
            return self, other
        if self.mode is Mode.POLY:
            return other.ring.coerce(self), other
        if other.mode is Mode.POLY:
            return self, self.ring.coerce(other)
        raise DomainError("cannot mix {0} and {1} coefficients".format(self.mode.value, other.mode.value))

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        if a.mode is Mode.SERIES:
            order = _min_order(a.order, b.order)
            return FunctionElem(Mode.SERIES, _truncate(a.value + b.value, order), order)
        return a._new(a.value + b.value)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.value, self.order)

    def __sub__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        if a.mode is Mode.SERIES:
            order = _min_order(a.order, b.order)
            return FunctionElem(Mode.SERIES, _truncate(a.value * b.value, order), order)
        return a._new(a.value * b.value)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        return a * ring_invert(b)

    def __rtruediv__(self, other):
        return ring_invert(self) * other

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return ring_invert(self) ** (-n)
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison ----------------------------------------------------------

    def is_zero(self):
        if self.mode is Mode.RATIONAL:
            return not self.value.numer
        return not self.value

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            a, b = self._align(other)
        except DomainError:
            return False
        if a is None:
            return NotImplemented
        return (a - b).is_zero()

    def __hash__(self):
        if self._hash is None:
            if self.mode is Mode.SERIES:
                self._hash = hash((self.nvars, self.constant()))
            elif self.mode is Mode.RATIONAL and self.value.denom == 1:
                self._hash = hash((self.nvars, frozenset(self.value.numer.items())))
            elif self.mode is Mode.RATIONAL:
                self._hash = hash((self.nvars, frozenset(self.value.numer.items()), frozenset(self.value.denom.items())))
            else:
                self._hash = hash((self.nvars, frozenset(self.value.items())))
        return self._hash

    def key(self):
        """Structural key for memoization (distinct representations give distinct keys)."""
        if self.mode is Mode.RATIONAL:
            return (self.mode, frozenset(self.value.numer.items()), frozenset(self.value.denom.items()))
        return (self.mode, frozenset(self.value.items()), self.order)

    # -- inspection -----------------------------------------------------------

    def numerator(self):
        if self.mode is Mode.RATIONAL:
            return self.value.numer
        return self.value

    def denominator(self):
        if self.mode is Mode.RATIONAL:
            return self.value.denom
        return self.value.ring.one

    def constant(self):
        """Value at the origin; DomainError if the denominator vanishes there."""
        zero = (0,) * self.nvars
        if self.mode is Mode.RATIONAL:
            denom = self.value.denom.get(zero, QQ(0))
            if not denom:
                raise DomainError("coefficient is singular at the origin")
            return self.value.numer.get(zero, QQ(0)) / denom
        return self.value.get(zero, QQ(0))

    def is_scalar(self):
        if self.mode is Mode.RATIONAL:
            return self.value.numer.is_ground and self.value.denom.is_ground
        return self.value.is_ground

    def degree(self):
        """Total degree of the numerator; -1 for zero."""
        numer = self.numerator()
        if not numer:
            return -1
        return max(sum(monom) for monom in numer.keys())

    def laurent_terms(self):
        """Exponent vector (negative entries allowed) -> QQ, for monomial denominators."""
        denom = self.denominator()
        if len(denom) != 1:
            raise DomainError("{0} is not a Laurent polynomial".format(self))
        [(shift, scale)] = denom.items()
        return {
            tuple(e - s for e, s in zip(monom, shift)): coeff / scale
            for monom, coeff in self.numerator().items()
        }

    def render(self):
        if self.mode is Mode.RATIONAL and self.value.denom != 1:
            return "({0})/({1})".format(render_poly(self.value.numer), render_poly(self.value.denom))
        return render_poly(self.numerator())

    def __str__(self):
        return self.render()

    def __repr__(self):
        if self.mode is Mode.SERIES:
            return "FunctionElem({0}, order={1})".format(self.render(), self.order)
        return "FunctionElem({0})".format(self.render())

    # -- calculus ------------------------------------------------------------

    def partial(self, i):
        return partial(self, i)

    def compose(self, values):
        return compose(self, values)


def render_poly(poly):
    """Render a polynomial as ``x1^2 + 3/2*x1*x2 - 1``, graded-lex descending."""
    if not poly:
        return "0"
    pieces = []
    for monom, coeff in poly.terms():
        factors = []
        for i, e in enumerate(monom):
            if e == 1:
                factors.append("x{0}".format(i + 1))
            elif e:
                factors.append("x{0}^{1}".format(i + 1, e))
        negative = coeff < 0
        size = -coeff if negative else coeff
        if not factors:
            body = render_rational(size)
        elif size == 1:
            body = "*".join(factors)
        else:
            body = render_rational(size) + "*" + "*".join(factors)
        if not pieces:
            pieces.append("-" + body if negative else body)
        else:
            pieces.append(("- " if negative else "+ ") + body)
    return " ".join(pieces)


def ring_arith(a, b, op):
    """Exact sum or product of two coefficients, promoting POLY when needed."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise DomainError("unknown ring operation {0!r}".format(op))


def ring_invert(a):
    """Multiplicative inverse.

    POLY inputs are promoted to RATIONAL unless they are non-zero scalars.
    SERIES inputs need a non-zero constant term and are inverted by the
    geometric series of the non-constant part.
    """
    if a.is_zero():
        raise NotInvertible("zero has no inverse")
    if a.mode is Mode.RATIONAL:
        field = a.value.field
        return FunctionElem(Mode.RATIONAL, field.new(a.value.denom, a.value.numer))
    if a.mode is Mode.POLY:
        if a.is_scalar():
            return FunctionElem(Mode.POLY, a.value.ring.ground_new(QQ(1) / a.constant()))
        return ring_invert(FunctionRing(a.nvars, Mode.RATIONAL).coerce(a))
    c = a.constant()
    if not c:
        raise NotInvertible("series {0} has zero constant term".format(a.render()))
    poly = a.value
    u = _truncate(poly * (QQ(1) / c) - poly.ring.one, a.order)
    result = poly.ring.one
    power = poly.ring.one
    for k in range(1, a.order + 1):
        power = _truncate(power * u, a.order)
        if not power:
            break
        result = result + power if k % 2 == 0 else result - power
    return FunctionElem(Mode.SERIES, _truncate(result * (QQ(1) / c), a.order), a.order)


def partial(a, i):
    """Partial derivative with respect to x_i (1-based)."""
    if not 1 <= i <= a.nvars:
        raise DomainError("coordinate x{0} outside 1..{1}".format(i, a.nvars))
    if a.mode is Mode.RATIONAL:
        return FunctionElem(Mode.RATIONAL, a.value.diff(a.value.field.gens[i - 1]))
    derivative = a.value.diff(a.value.ring.gens[i - 1])
    if a.mode is Mode.SERIES:
        return FunctionElem(Mode.SERIES, _truncate(derivative, a.order - 1), a.order - 1)
    return FunctionElem(Mode.POLY, derivative)


def partial_multi(a, counts):
    """Iterated partial derivative; ``counts[i]`` is the number of x_{i+1} derivatives."""
    for i, count in enumerate(counts):
        for _ in range(count):
            a = partial(a, i + 1)
    return a


def ring_log(a):
    """log of a SERIES unit, up to the additive constant log a(0)."""
    if a.mode is not Mode.SERIES:
        raise DomainError("log is only available for SERIES coefficients")
    c = a.constant()
    if not c:
        raise NotInvertible("log of a series with zero constant term")
    ring = a.ring
    u = a * ring.scalar(QQ(1) / c) - ring.one()
    result = ring.zero()
    power = ring.one()
    for k in range(1, a.order + 1):
        power = power * u
        if power.is_zero():
            break
        term = power * ring.scalar(QQ(1, k))
        result = result + term if k % 2 == 1 else result - term
    return result


def _substitute_poly(poly, values, one):
    """Evaluate a polynomial at arbitrary ring elements (FunctionElem values)."""
    result = one * 0
    cache = {}
    for monom, coeff in poly.items():
        term = one * coeff
        for i, e in enumerate(monom):
            if e:
                key = (i, e)
                if key not in cache:
                    cache[key] = values[i] ** e
                term = term * cache[key]
        result = result + term
    return result


def compose(a, values):
    """Substitute x_i -> values[i-1] in ``a``.

    SERIES substitutions need values with zero constant term. A RATIONAL
    coefficient is substituted in numerator and denominator separately.
    """
    if len(values) != a.nvars:
        raise DomainError("need {0} substitution values, got {1}".format(a.nvars, len(values)))
    modes = {value.mode for value in values}
    if Mode.SERIES in modes or a.mode is Mode.SERIES:
        values = [FunctionRing(a.nvars, Mode.SERIES, _series_order(a, values)).coerce(v) for v in values]
        if any(v.constant() for v in values):
            raise DomainError("series substitution needs values vanishing at the origin")
        order = _min_order(a.order, *[v.order for v in values])
        target = FunctionRing(a.nvars, Mode.SERIES, order)
        if a.mode is Mode.RATIONAL:
            numer_value = _substitute_poly(a.value.numer, values, target.one())
            denom_value = _substitute_poly(a.value.denom, values, target.one())
            return numer_value * ring_invert(denom_value)
        numer = a.value
        composed = numer.compose(list(zip(numer.ring.gens, [v.value for v in values])))
        return FunctionElem(Mode.SERIES, _truncate(composed, order), order)
    if Mode.RATIONAL in modes or a.mode is Mode.RATIONAL:
        target = FunctionRing(a.nvars, Mode.RATIONAL)
        values = [target.coerce(v) for v in values]
        numer_value = _substitute_poly(a.numerator(), values, target.one())
        denom_value = _substitute_poly(a.denominator(), values, target.one())
        if denom_value.is_zero():
            raise NotInvertible("substitution makes the denominator vanish")
        return numer_value / denom_value
    numer = a.value
    return FunctionElem(Mode.POLY, numer.compose(list(zip(numer.ring.gens, [v.value for v in values]))))


def _series_order(a, values):
    return _min_order(a.order, *[v.order for v in values if v.mode is Mode.SERIES])


def jacobian(g):
    """Matrix of FunctionElem with entries d g^i / d x^j."""
    return [[partial(gi, j + 1) for j in range(len(g))] for gi in g]


def compose_and_invert(g, order):
    """Compositional inverse of a SERIES coordinate change.

    Returns ``(substitute, f)`` where ``substitute(a)`` is ``a`` with
    x -> g(x) and ``f`` is the tuple of series with f(g(x)) = x modulo
    total degree order + 1, verified by back substitution.
    """
    n = len(g)
    ring = FunctionRing(n, Mode.SERIES, order)
    g = tuple(ring.coerce(gi) for gi in g)
    if any(gi.constant() for gi in g):
        raise DomainError("series coordinate changes must fix the origin")
    linear = [[partial(gi, j + 1).constant() for j in range(n)] for gi in g]
    matrix = DomainMatrix(linear, (n, n), QQ)
    if not matrix.det():
        raise NotInvertibleChange("Jacobian is singular at the origin")
    rows = matrix.inv().to_list()
    gens = [ring.gen(i + 1) for i in range(n)]
    higher = [gi - _linear_combination(linear[i], gens, ring) for i, gi in enumerate(g)]
    f = [_linear_combination(rows[i], gens, ring) for i in range(n)]
    for _ in range(order):
        shifted = [gens[i] - compose(higher[i], f) for i in range(n)]
        f = [_linear_combination(rows[i], shifted, ring) for i in range(n)]
    back = [compose(fi, list(g)) for fi in f]
    if any(back[i] != gens[i] for i in range(n)):
        raise NotInvertibleChange("back substitution failed at order {0}".format(order))
    _logger.debug("inverted coordinate change to order %s: %s", order, [fi.render() for fi in f])
    return functools.partial(compose, values=g), tuple(f)


def _linear_combination(scalars, elems, ring):
    result = ring.zero()
    for scalar, elem in zip(scalars, elems):
        if scalar:
            result = result + elem * scalar
    return result
