"""The chiral structure sheaf of the projective line from two charts.

U0 has ring Q[x], U1 has Q[x~] with x~ = 1/x, U01 has Q[x, 1/x]. Sections
over U1 enter U01 through the transition change x -> 1/x with the curve
correction a~ = -(x^2 a_-1 + 2 b_-1).

The integral of E11 = x a_-1 acts on m x^k by k + #b(m) - #a(m) and the
transition negates it, so the Cech complex at fixed weight splits into finite
slices indexed by that eigenvalue.
"""
import functools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from sympy.polys.matrices import DomainMatrix
from tqdm import tqdm

from freefield.coeffs import FunctionElem, Mode, compose
from freefield.coord import CoordChange, compare_ope, transform_state
from freefield.engine import OpeSingularPart, nth_product, ope, rehome
from freefield.errors import DomainError, FlowNotRational, WindowExhausted
from freefield.reports import Report
from freefield.states import ModeVar, System, basis, normalize

_logger = logging.getLogger(__name__)

MAX_WINDOW = 64


@dataclass(frozen=True)
class Chart:
    name: str
    system: System


@dataclass(frozen=True)
class P1Charts:
    u0: Chart
    u1: Chart
    u01: Chart
    transition: CoordChange

    def restrict(self, chart, state):
        """Image in U01 of a section over U0 or U1."""
        moved = rehome(state, self.u01.system)
        if chart == "u0":
            return moved
        if chart == "u1":
            return transform_state(self.transition, moved)
        raise DomainError("unknown chart {0!r}".format(chart))


@functools.lru_cache(maxsize=None)
def p1_charts(correction="curve"):
    polys = System.make("heis", 1)
    laurent = System.make("heis", 1, Mode.RATIONAL)
    inverse = laurent.ring.one() / laurent.ring.gen(1)
    transition = CoordChange.make(laurent, [inverse], f=[inverse], correction=correction)
    return P1Charts(Chart("U0", polys), Chart("U1", polys), Chart("U01", laurent), transition)


def printed_transition(system):
    """The pair b~ = 1/x, a~ = x^2 a_-1 + 2 b_-1 as written in the classical gluing formula."""
    x = system.ring.gen(1)
    a_tilde = normalize(system, [(x * x, [ModeVar("a", 1, -1)]), (2, [ModeVar("b", 1, -1)])])
    return system.function(system.ring.one() / x), a_tilde


def glue_check_p1(wmax=2):
    charts = p1_charts()
    laurent = charts.u01.system
    cc = charts.transition
    report = Report("P1 gluing (w<={0})".format(wmax))
    generators = {"a1": laurent.a(1), "b1": laurent.b(1)}
    zero = laurent.zero()
    for left in generators:
        for right in generators:
            computed = ope(cc.tilded.get(left[0], 1), cc.tilded.get(right[0], 1))
            compare_ope(report, "{0}~(z){1}~(w)".format(left, right), computed, ope(generators[left], generators[right]), zero)
    b_tilde, a_printed = printed_transition(laurent)
    printed = nth_product(a_printed, 0, b_tilde)
    report.add("printed sign pairs to -1 (negative control)", printed == -laurent.vacuum(),
               "a~_(0) b~ = {0}".format(printed))
    states = []
    for weight in range(wmax + 1):
        for monomial in basis(laurent, weight):
            for coefficient in (laurent.ring.one(), laurent.ring.gen(1), laurent.ring.one() / laurent.ring.gen(1)):
                states.append(normalize(laurent, [(coefficient, list(monomial))]))
    bad = next((s for s in states if transform_state(cc, transform_state(cc, s)) != s), None)
    report.add("transition is an involution on {0} states".format(len(states)), bad is None, witness=bad)
    report.data["a~"] = cc.tilded.get("a", 1).render()
    return report


# -- Wakimoto currents -----------------------------------------------------------


@dataclass(frozen=True)
class WakimotoFields:
    E21: object
    E12: object
    E11: object

    @property
    def sl2(self):
        """(e, f, h) = (E12, E21, 2 E11)."""
        return {"e": self.E12, "f": self.E21, "h": self.E11.scale(2)}


def wakimoto_fields(system):
    x = system.ring.gen(1)
    a = ModeVar("a", 1, -1)
    return WakimotoFields(
        E21=normalize(system, [(-1, [a])]),
        E12=normalize(system, [(x * x, [a]), (2, [ModeVar("b", 1, -1)])]),
        E11=normalize(system, [(x, [a])]),
    )


_SL2_BRACKET = {
    ("h", "e"): ("e", 2), ("h", "f"): ("f", -2), ("e", "f"): ("h", 1),
    ("e", "h"): ("e", -2), ("f", "h"): ("f", 2), ("f", "e"): ("h", -1),
}
_SL2_FORM = {("e", "f"): 1, ("f", "e"): 1, ("h", "h"): 2}


def wakimoto_check(system=None):
    """sl2 current relations at a single level read off h_(1) h, and the chart intertwining."""
    system = system or System.make("heis", 1)
    fields = wakimoto_fields(system)
    currents = fields.sl2
    report = Report("Wakimoto sl2 currents")
    level = nth_product(currents["h"], 1, currents["h"]).coefficient(()).constant() / 2
    zero = system.zero()
    for left in currents:
        for right in currents:
            target, scale = _SL2_BRACKET.get((left, right), (None, 0))
            expected = {}
            if target is not None:
                expected[1] = currents[target].scale(scale)
            pairing = _SL2_FORM.get((left, right), 0)
            if pairing:
                expected[2] = system.vacuum().scale(level * pairing)
            computed = ope(currents[left], currents[right])
            compare_ope(report, "{0}(z){1}(w)".format(left, right), computed, OpeSingularPart(expected), zero)
    report.add("critical level", level == -2, "k = {0}".format(level))
    report.expect_equal("E11_(0) E21 = -E21", nth_product(fields.E11, 0, fields.E21), -fields.E21)
    report.expect_equal("E11_(0) E12 = E12", nth_product(fields.E11, 0, fields.E12), fields.E12)
    charts = p1_charts()
    laurent_fields = wakimoto_fields(charts.u01.system)
    cc = charts.transition
    report.expect_equal("gluing E21 -> E12", transform_state(cc, laurent_fields.E21), laurent_fields.E12)
    report.expect_equal("gluing E12 -> E21", transform_state(cc, laurent_fields.E12), laurent_fields.E21)
    report.expect_equal("gluing E11 -> -E11", transform_state(cc, laurent_fields.E11), -laurent_fields.E11)
    report.data["level"] = str(level)
    return report


def sugawara_state(system=None):
    """:ef: + :fe: + 1/2 :hh: for the Wakimoto currents."""
    system = system or System.make("heis", 1)
    c = wakimoto_fields(system).sl2
    return (nth_product(c["e"], -1, c["f"]) + nth_product(c["f"], -1, c["e"])
            + nth_product(c["h"], -1, c["h"]).scale(Fraction(1, 2)))


def sugawara_check(system=None):
    system = system or System.make("heis", 1)
    report = Report("Sugawara state at the critical level")
    state = sugawara_state(system)
    report.add("S = 0", state.is_zero(), witness=state)
    currents = wakimoto_fields(system).sl2
    central = all(nth_product(current, n, state).is_zero() for current in currents.values() for n in range(3))
    report.add("S is central", central)
    return report


# -- sign operator and flows -----------------------------------------------------


def e11_eigenvalue(monomial, exponent):
    bs = sum(1 for var in monomial if var.family == "b")
    as_ = sum(1 for var in monomial if var.family == "a")
    return exponent + bs - as_


def sign_operator(state):
    """exp(pi i * integral of E11): x -> -x times (-1)^(#b - #a) per monomial."""
    system = state.system
    if system.rank != 1:
        raise DomainError("the sign operator is defined on the rank-one chart")
    minus_x = [-system.ring.gen(1)]
    raw = []
    for monomial, coefficient in state.terms.items():
        sign = -1 if e11_eigenvalue(monomial, 0) % 2 else 1
        raw.append((compose(coefficient, minus_x) * sign, list(monomial)))
    return normalize(system, raw)


def _field_domain(system):
    return system.ring.fractions.to_domain()


def _as_fraction(system, elem):
    return system.ring.fractions.new(elem.numerator(), elem.denominator())


def pade_at_one(system, sequence, order):
    """Fit a rational function of t to the Taylor coefficients ``sequence`` and evaluate at t = 1.

    Degrees (n, m) with n, m <= order // 2 are tried by increasing n + m; a fit
    counts only if it reproduces every coefficient of the sequence.
    """
    domain = _field_domain(system)
    c = [_as_fraction(system, elem) for elem in sequence]
    zero = domain.zero
    if all(not value for value in c):
        return system.ring.zero()
    top = len(c) - 1
    half = order // 2

    def at(k):
        return c[k] if 0 <= k <= top else zero

    for total in range(0, 2 * half + 1):
        for m in range(max(0, total - half), min(half, total) + 1):
            n = total - m
            q = [domain.one]
            if m:
                rows = [[at(k - j) for j in range(1, m + 1)] for k in range(n + 1, n + m + 1)]
                matrix = DomainMatrix(rows, (m, m), domain)
                if matrix.rank() < m:
                    continue
                rhs = DomainMatrix([[-at(k)] for k in range(n + 1, n + m + 1)], (m, 1), domain)
                q += [row[0] for row in matrix.lu_solve(rhs).to_list()]
            residual = [sum((q[j] * at(k - j) for j in range(m + 1)), zero) for k in range(top + 1)]
            if any(residual[k] for k in range(n + 1, top + 1)):
                continue
            numer = sum(residual[: n + 1], zero)
            denom = sum(q, zero)
            if not denom:
                raise FlowNotRational("the fitted flow has a pole at t = 1")
            _logger.debug("flow coefficient fitted with [%s/%s]", n, m)
            return system.coefficient(FunctionElem(Mode.RATIONAL, numer / denom))
    raise FlowNotRational("no rational fit of degree <= {0} reproduces {1} terms".format(half, len(c)))


@dataclass(frozen=True)
class FlowOperator:
    """exp(t * integral of X) for a weight-one state X, evaluated at t = 1."""

    generator: object
    order: int = 16

    def series(self, state):
        """Terms X_(0)^k s / k! for k = 0 .. order + 2, and whether the flow terminated."""
        terms = [state]
        current = state
        for k in range(1, self.order + 3):
            current = nth_product(self.generator, 0, current)
            if current.is_zero():
                return terms, True
            terms.append(current.scale(Fraction(1, math.factorial(k))))
        return terms, False

    def __call__(self, state):
        if self.generator.weight() != 1:
            raise DomainError("flows are generated by weight-one states")
        terms, terminated = self.series(state)
        system = state.system
        if terminated:
            result = system.zero()
            for term in terms:
                result = result + term
            return result
        monomials = sorted({m for term in terms for m in term.terms}, key=lambda m: [v.key() for v in m])
        raw = []
        for monomial in monomials:
            sequence = [term.coefficient(monomial) for term in terms]
            raw.append((pade_at_one(system, sequence, self.order), list(monomial)))
        return normalize(system, raw)


def flow(generator, state, order=16):
    return FlowOperator(generator, order)(state)


def reflection(state, order=16):
    """r(1) = sign . exp(E21) . exp(-E12) . exp(E21)."""
    fields = wakimoto_fields(state.system)
    forward = FlowOperator(fields.E21, order)
    backward = FlowOperator(-fields.E12, order)
    return sign_operator(forward(backward(forward(state))))


def reflection_report(wmax=2, order=16):
    charts = p1_charts()
    laurent = charts.u01.system
    report = Report("Weyl reflection flow (w<={0}, T={1})".format(wmax, order))
    x = laurent.ring.gen(1)
    report.expect_equal("r(1) x = 1/x", reflection(laurent.b(1), order), laurent.function(laurent.ring.one() / x))
    translated = flow(wakimoto_fields(laurent).E21, laurent.function(x ** 3), order)
    report.expect_equal("exp(E21) x^3 = (x-1)^3", translated, laurent.function((x - 1) ** 3))
    states = []
    for weight in range(wmax + 1):
        for monomial in basis(laurent, weight):
            for coefficient in (laurent.ring.one(), x):
                states.append(normalize(laurent, [(coefficient, list(monomial))]))
    for state in states:
        image = reflection(state, order)
        expected = transform_state(charts.transition, state)
        report.add("r(1) {0}".format(state), image == expected,
                   "" if image == expected else "got {0}".format(image))
    report.data["order"] = order
    return report


# -- Cech computations -----------------------------------------------------------


def _counts(monomial):
    return sum(1 for v in monomial if v.family == "b"), sum(1 for v in monomial if v.family == "a")


def cech_slice(weight, eigenvalue):
    """Ranks of U0 + U1 -> U01 on the (weight, eigenvalue) slice; only ints cross the process boundary."""
    charts = p1_charts()
    laurent = charts.u01.system
    monomials = basis(laurent, weight)
    rows = {}
    for monomial in monomials:
        bs, as_ = _counts(monomial)
        rows[(monomial, eigenvalue - bs + as_)] = len(rows)
    columns = []
    u0 = []
    for monomial in monomials:
        bs, as_ = _counts(monomial)
        exponent = eigenvalue - bs + as_
        if exponent >= 0:
            u0.append((monomial, exponent))
            columns.append({rows[(monomial, exponent)]: 1})
    u1 = 0
    for monomial in monomials:
        bs, as_ = _counts(monomial)
        exponent = -eigenvalue - bs + as_
        if exponent < 0:
            continue
        u1 += 1
        image = transform_state(charts.transition, normalize(laurent, [(laurent.ring.gen(1) ** exponent, list(monomial))]))
        column = {}
        for image_monomial, coefficient in image.terms.items():
            for (e,), value in coefficient.laurent_terms().items():
                if (image_monomial, e) not in rows:
                    raise DomainError("transition left the eigenvalue slice at {0}".format(image_monomial))
                column[rows[(image_monomial, e)]] = -value
        columns.append(column)
    entries = {}
    for j, column in enumerate(columns):
        for i, value in column.items():
            entries.setdefault(i, {})[j] = laurent.ring.polys.domain.convert(value)
    matrix = DomainMatrix(entries, (len(rows), len(columns)), laurent.ring.polys.domain)
    rank = matrix.rank() if columns and rows else 0
    witnesses = []
    if len(columns) > rank:
        for vector in matrix.nullspace().to_list():
            raw = [(laurent.ring.gen(1) ** u0[j][1] * vector[j], list(u0[j][0])) for j in range(len(u0)) if vector[j]]
            witnesses.append(str(normalize(charts.u0.system, raw)))
    return {
        "weight": weight,
        "eigenvalue": eigenvalue,
        "u0": len(u0),
        "u1": u1,
        "u01": len(rows),
        "rank": rank,
        "sections": len(u0) + u1 - rank,
        "h1": len(rows) - rank,
        "witnesses": witnesses,
    }


def _run_slices(jobs, workers, progress):
    if workers <= 1:
        return [cech_slice(*job) for job in tqdm(jobs, desc="Cech slices", unit="slice", disable=not progress)]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(cech_slice, *job) for job in jobs]
        return [future.result() for future in tqdm(futures, desc="Cech slices", unit="slice", disable=not progress)]


def cech_ranks(weight, window=4, workers=1, progress=False):
    """Global sections and H1 at one weight, growing the eigenvalue window until two windows agree."""
    computed = {}
    previous = None
    while window <= MAX_WINDOW:
        jobs = [(weight, lam) for lam in range(-window, window + 1) if (weight, lam) not in computed]
        for row in _run_slices(jobs, workers, progress):
            computed[(weight, row["eigenvalue"])] = row
        rows = [computed[(weight, lam)] for lam in range(-window, window + 1)]
        totals = (sum(r["sections"] for r in rows), sum(r["h1"] for r in rows))
        _logger.debug("weight %s window %s: sections=%s h1=%s", weight, window, *totals)
        if totals == previous:
            witnesses = [w for r in rows for w in r["witnesses"]]
            return {"weight": weight, "rank": totals[0], "h1": totals[1], "window": window // 2, "witnesses": witnesses}
        previous = totals
        window *= 2
    raise WindowExhausted("ranks at weight {0} did not stabilize up to window {1}".format(weight, MAX_WINDOW))


def global_sections(wmax, window=4, workers=1, progress=False):
    return [cech_ranks(weight, window, workers, progress) for weight in range(wmax + 1)]


def h1_ranks(wmax, window=4, workers=1, progress=False):
    return [{"weight": row["weight"], "rank": row["h1"]} for row in global_sections(wmax, window, workers, progress)]


def partition_pairs(wmax):
    """Coefficients of prod (1 - q^n)^-2 up to q^wmax."""
    return product_coefficients(wmax, bosons=2)


def product_coefficients(wmax, bosons):
    coefficients = [1] + [0] * wmax
    for n in range(1, wmax + 1):
        for _ in range(bosons):
            for w in range(n, wmax + 1):
                coefficients[w] += coefficients[w - n]
    return coefficients


def sections_series(wmax):
    """Coefficients of (1 - q)^-1 prod (1 - q^n)^-2."""
    out, running = [], 0
    for value in partition_pairs(wmax):
        running += value
        out.append(running)
    return out


def euler_character(wmax):
    """Per weight, the sum of 2s - 2r + 1 over monomials with r a-modes and s b-modes."""
    system = System.make("heis", 1)
    out = []
    for weight in range(wmax + 1):
        total = 0
        for monomial in basis(system, weight):
            bs, as_ = _counts(monomial)
            total += 2 * bs - 2 * as_ + 1
        out.append(total)
    return out


def sections_report(wmax, window=4, workers=1, progress=False):
    report = Report("P1 global sections and H1 (w<={0})".format(wmax))
    rows = global_sections(wmax, window, workers, progress)
    expected = sections_series(wmax)
    for row in rows:
        report.add("rank at w={0}".format(row["weight"]), row["rank"] == expected[row["weight"]],
                   "rank {0}, series {1}".format(row["rank"], expected[row["weight"]]))
    for row in rows[1:]:
        previous = rows[row["weight"] - 1]["rank"]
        report.add("H1 at w={0} = sections at w={1}".format(row["weight"], row["weight"] - 1), row["h1"] == previous,
                   "h1 {0}".format(row["h1"]))
    report.add("euler character", [r["rank"] - r["h1"] for r in rows] == euler_character(wmax)[: len(rows)])
    report.data["rows"] = [{"weight": r["weight"], "rank": r["rank"], "h1": r["h1"]} for r in rows]
    return report


def euler_report(wmax):
    report = Report("P1 Euler character (w<={0})".format(wmax))
    values = euler_character(wmax)
    oracle = partition_pairs(wmax)
    for weight, (value, expected) in enumerate(zip(values, oracle)):
        report.add("w={0}".format(weight), value == expected, "{0} vs {1}".format(value, expected))
    report.data["coefficients"] = values
    return report
