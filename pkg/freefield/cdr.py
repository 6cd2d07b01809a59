"""Chiral de Rham structure on Omega_N.

Structure states (factors in field order, Koszul-normalized on construction):

    L = sum b_{-1} a_{-1} + phi_{-1} psi_{-1}
    J = sum phi_0 psi_{-1}
    Q = sum a_{-1} phi_0
    G = sum psi_{-1} b_{-1}

The differential is d = Q_(0); it trades one b for one phi (d+) or one psi
for one a (d-), so every (weight, charge) slice splits into finite pieces
indexed by B = deg_b + deg_phi (x-degree included) and A = deg_a + deg_psi.
"""
import itertools
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from tqdm import tqdm

from freefield.engine import apply_generator_mode, nth_product, ope
from freefield.errors import DomainError
from freefield.reports import Report
from freefield.states import Kind, ModeVar, System, basis, monomial_charge, normalize, translation

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StructureFields:
    L: object
    J: object = None
    Q: object = None
    G: object = None

    @property
    def rank(self):
        return self.L.system.rank

    def items(self):
        return [(name, getattr(self, name)) for name in ("L", "J", "Q", "G") if getattr(self, name) is not None]


def build_structure(system):
    """L (and J, Q, G on Omega_N) for a system."""
    raw_l, raw_j, raw_q, raw_g = [], [], [], []
    for i in range(1, system.rank + 1):
        a, b = ModeVar("a", i, -1), ModeVar("b", i, -1)
        phi0, phi1, psi = ModeVar("phi", i, 0), ModeVar("phi", i, -1), ModeVar("psi", i, -1)
        if system.bosons:
            raw_l.append((1, [b, a]))
        if system.fermions:
            raw_l.append((1, [phi1, psi]))
        if system.kind is Kind.OMEGA:
            raw_j.append((1, [phi0, psi]))
            raw_q.append((1, [a, phi0]))
            raw_g.append((1, [psi, b]))
    if system.kind is not Kind.OMEGA:
        return StructureFields(normalize(system, raw_l))
    return StructureFields(*(normalize(system, raw) for raw in (raw_l, raw_j, raw_q, raw_g)))


def check_virasoro(L, c=None):
    """Verify the Virasoro OPE of a weight-2 even state with central charge c."""
    system = L.system
    if c is None:
        c = system.central_charge
    if L.parity() or L.weight() != 2:
        raise DomainError("a Virasoro element is even of weight 2")
    report = Report("virasoro ({0}, N={1})".format(system.kind.value, system.rank))
    report.expect_equal("L_(0)L = TL", nth_product(L, 0, L), translation(L))
    report.expect_equal("L_(1)L = 2L", nth_product(L, 1, L), L.scale(2))
    report.expect_equal("L_(2)L = 0", nth_product(L, 2, L), system.zero())
    report.expect_equal("L_(3)L = c/2", nth_product(L, 3, L), system.vacuum().scale(QQ(c, 2)))
    report.data["central_charge"] = c
    return report


def topological_table(sf):
    """Expected singular parts of the ten OPE pairs among L, J, Q, G."""
    L, J, Q, G = sf.L, sf.J, sf.Q, sf.G
    d = sf.rank
    vacuum = L.system.vacuum()
    return {
        ("L", "L"): {2: L.scale(2), 1: translation(L)},
        ("L", "J"): {3: vacuum.scale(-d), 2: J, 1: translation(J)},
        ("L", "Q"): {2: Q, 1: translation(Q)},
        ("L", "G"): {2: G.scale(2), 1: translation(G)},
        ("J", "J"): {2: vacuum.scale(d)},
        ("J", "Q"): {1: Q},
        ("J", "G"): {1: -G},
        ("Q", "Q"): {},
        ("Q", "G"): {3: vacuum.scale(d), 2: J, 1: L},
        ("G", "G"): {},
    }


def check_topological(sf):
    """Compare every singular coefficient of the ten structure OPEs with the topological table."""
    if sf.J is None:
        raise DomainError("the topological algebra lives on Omega_N")
    fields = dict(sf.items())
    report = Report("topological algebra (N={0})".format(sf.rank))
    for (left, right), expected in topological_table(sf).items():
        computed = ope(fields[left], fields[right])
        orders = sorted(set(expected) | set(computed.poles), reverse=True)
        bad = [k for k in orders if computed.get(k, sf.L.system.zero()) != expected.get(k, sf.L.system.zero())]
        report.add("{0}(z){1}(w)".format(left, right), not bad,
                   "" if not bad else "pole {0} differs".format(bad[0]),
                   witness=None if not bad else computed.get(bad[0], sf.L.system.zero()))
    report.data["pairs"] = len(report.checks)
    return report


@dataclass(frozen=True)
class ChiralDifferential:
    """d = Q_(0) on Omega_N and its two commuting halves."""

    system: System

    @property
    def Q(self):
        return build_structure(self.system).Q

    def __call__(self, state):
        return nth_product(self.Q, 0, state)

    def plus(self, state):
        """d+ = sum_{n >= 0} a_n phi_{-n}."""
        top = max(state.weights(), default=0)
        return self._modes(state, range(0, top + 1))

    def minus(self, state):
        """d- = sum_{n < 0} a_n phi_{-n}."""
        top = max(state.weights(), default=0)
        return self._modes(state, range(-top, 0))

    def _modes(self, state, modes):
        result = self.system.zero()
        for i in range(1, self.system.rank + 1):
            for n in modes:
                step = apply_generator_mode(ModeVar("phi", i, -n), state)
                if step:
                    result = result + apply_generator_mode(ModeVar("a", i, n), step)
        return result


def chiral_d(state):
    if state.system.kind is not Kind.OMEGA:
        raise DomainError("the chiral de Rham differential lives on Omega_N")
    return ChiralDifferential(state.system)(state)


def split_d(state):
    d = ChiralDifferential(state.system)
    return d.plus(state), d.minus(state)


def fermionic_charge(state):
    """F = J_(0)."""
    return nth_product(build_structure(state.system).J, 0, state)


def weight0_product(a, b):
    """The commutative product a_(-1) b on weight-zero states."""
    for state in (a, b):
        if not state.is_zero() and state.weight() != 0:
            raise DomainError("weight0_product needs weight-zero states, got weight {0}".format(state.weight()))
    return nth_product(a, -1, b)


# -- classical forms -----------------------------------------------------------


def de_rham_inclusion(system, form):
    """Weight-zero state of a polynomial form ``{(i1 < ... < ik): coefficient}``."""
    raw = []
    for indices, coefficient in form.items():
        raw.append((coefficient, [ModeVar("phi", i, 0) for i in indices]))
    return normalize(system, raw)


def classical_d(system, form):
    """Algebraic de Rham differential of a polynomial form."""
    out = {}
    for indices, coefficient in form.items():
        for j in range(1, system.rank + 1):
            if j in indices:
                continue
            derivative = system.coefficient(coefficient).partial(j)
            if derivative.is_zero():
                continue
            merged = sorted(indices + (j,))
            sign = -1 if merged.index(j) % 2 else 1
            key = tuple(merged)
            out[key] = out.get(key, system.ring.zero()) + derivative * sign
    return {k: v for k, v in out.items() if not v.is_zero()}


# -- checks on slices ----------------------------------------------------------


def sample_states(system, weight, rng=None, limit=None):
    """Basis monomials of a weight slice times a few coefficient functions."""
    coefficients = [system.ring.one()]
    for i in range(1, system.rank + 1):
        coefficients.append(system.ring.gen(i))
    coefficients.append(system.ring.gen(1) ** 2)
    if system.rank > 1:
        coefficients.append(system.ring.gen(1) * system.ring.gen(system.rank))
    states = [normalize(system, [(c, list(m))]) for m in basis(system, weight) for c in coefficients]
    if rng is not None and limit is not None and len(states) > limit:
        states = rng.sample(states, limit)
    return states


def homotopy_check(system, weight, rng=None, limit=None):
    """[G_(1), d] = weight * identity on sampled states of the weight slice."""
    sf = build_structure(system)
    d = ChiralDifferential(system)
    report = Report("homotopy [G_(1), d] = L_(1) (N={0}, w={1})".format(system.rank, weight))
    failures = 0
    states = sample_states(system, weight, rng, limit)
    for state in states:
        bracket = nth_product(sf.G, 1, d(state)) + d(nth_product(sf.G, 1, state))
        if bracket != state.scale(weight):
            failures += 1
            report.add("witness", False, witness=state)
            break
    report.add("{0} sampled states".format(len(states)), failures == 0)
    return report


def d_squared_check(system, weight, rng=None, limit=None):
    d = ChiralDifferential(system)
    report = Report("d^2 = 0 (N={0}, w={1})".format(system.rank, weight))
    states = sample_states(system, weight, rng, limit)
    bad = next((s for s in states if d(d(s))), None)
    report.add("{0} sampled states".format(len(states)), bad is None, witness=bad)
    return report


def charge_check(system, rng=None, weight=1, limit=None):
    """F vacuum = 0, [F, phi] = phi, [F, psi] = -psi and [F, d] = d."""
    report = Report("fermionic charge (N={0})".format(system.rank))
    report.expect_equal("F|0> = 0", fermionic_charge(system.vacuum()), system.zero())
    for i in range(1, system.rank + 1):
        report.expect_equal("F phi{0} = phi{0}".format(i), fermionic_charge(system.phi(i)), system.phi(i))
        report.expect_equal("F psi{0} = -psi{0}".format(i), fermionic_charge(system.psi(i)), -system.psi(i))
    d = ChiralDifferential(system)
    states = sample_states(system, weight, rng, limit)
    bad = next((s for s in states if fermionic_charge(d(s)) - d(fermionic_charge(s)) != d(s)), None)
    report.add("[F, d] = d", bad is None, witness=bad)
    return report


def split_check(system, weight, rng=None, limit=None):
    """d+^2 = d-^2 = 0, d+ d- + d- d+ = 0 and d = d+ + d- on a weight slice."""
    d = ChiralDifferential(system)
    report = Report("split differential (N={0}, w={1})".format(system.rank, weight))
    states = sample_states(system, weight, rng, limit)
    checks = [
        ("d+^2 = 0", lambda s: d.plus(d.plus(s))),
        ("d-^2 = 0", lambda s: d.minus(d.minus(s))),
        ("d+d- + d-d+ = 0", lambda s: d.plus(d.minus(s)) + d.minus(d.plus(s))),
        ("d = d+ + d-", lambda s: d(s) - d.plus(s) - d.minus(s)),
    ]
    for name, rule in checks:
        bad = next((s for s in states if rule(s)), None)
        report.add(name, bad is None, witness=bad)
    return report


def de_rham_check(system, degree=2):
    """The weight-zero inclusion intertwines the classical d with chiral_d on monomial forms."""
    report = Report("de Rham inclusion (N={0}, coefficient degree<={1})".format(system.rank, degree))
    coefficients = [system.ring.one()]
    for total in range(1, degree + 1):
        for exps in _exponents(system.rank, total):
            value = system.ring.one()
            for i, e in enumerate(exps):
                value = value * system.ring.gen(i + 1) ** e
            coefficients.append(value)
    bad = None
    count = 0
    for k in range(system.rank + 1):
        for indices in itertools.combinations(range(1, system.rank + 1), k):
            for coefficient in coefficients:
                form = {indices: coefficient}
                count += 1
                lhs = chiral_d(de_rham_inclusion(system, form))
                rhs = de_rham_inclusion(system, classical_d(system, form))
                if lhs != rhs:
                    bad = de_rham_inclusion(system, form)
                    break
    report.add("{0} monomial forms".format(count), bad is None, witness=bad)
    return report


# -- cohomology ----------------------------------------------------------------


def _bigrade(monomial):
    b_count = sum(1 for var in monomial if var.family in ("b", "phi"))
    a_count = sum(1 for var in monomial if var.family in ("a", "psi"))
    return b_count, a_count


def _exponents(nvars, degree):
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        exps = [0] * nvars
        for i in combo:
            exps[i] += 1
        yield tuple(exps)


def slice_basis(system, weight, charge, b_degree, a_degree):
    """Basis (monomial, x-exponent) of the finite subcomplex piece at (w, p, B, A)."""
    out = []
    for monomial in basis(system, weight, charge):
        b_count, a_count = _bigrade(monomial)
        if a_count != a_degree or b_count > b_degree:
            continue
        for exps in _exponents(system.rank, b_degree - b_count):
            out.append((monomial, exps))
    return out


def differential_rank(rank, weight, charge, b_degree, a_degree):
    """(dim of the source piece, rank of d on it); takes only ints so it can run in a worker."""
    system = System.make("omega", rank)
    source = slice_basis(system, weight, charge, b_degree, a_degree)
    target = slice_basis(system, weight, charge + 1, b_degree, a_degree)
    if not source or not target:
        return len(source), 0
    index = {element: row for row, element in enumerate(target)}
    d = ChiralDifferential(system)
    polys = system.ring.polys
    entries = {}
    for column, (monomial, exps) in enumerate(source):
        coefficient = system.ring.from_poly(polys.from_dict({exps: QQ(1)}))
        image = d(normalize(system, [(coefficient, list(monomial))]))
        for image_monomial, image_coefficient in image.terms.items():
            for image_exps, value in image_coefficient.numerator().items():
                row = index[(image_monomial, image_exps)]
                entries.setdefault(row, {})[column] = value
    matrix = DomainMatrix(entries, (len(target), len(source)), QQ)
    return len(source), matrix.rank()


def _charges(system, weight):
    charges = [monomial_charge(m) for m in basis(system, weight)]
    return range(min(charges), max(charges) + 1)


def cohomology(rank, weight, charge, window, workers=1, progress=False):
    """Ranks (dim ker, dim im, dim H) at (w, p) aggregated over bigrades B <= window, A <= w."""
    jobs = [(rank, weight, p, b, a) for p in (charge - 1, charge) for b in range(window + 1) for a in range(weight + 1)]
    results = _run_jobs(jobs, workers, progress)
    dim_source = sum(results[(rank, weight, charge, b, a)][0] for b in range(window + 1) for a in range(weight + 1))
    rank_out = sum(results[(rank, weight, charge, b, a)][1] for b in range(window + 1) for a in range(weight + 1))
    rank_in = sum(results[(rank, weight, charge - 1, b, a)][1] for b in range(window + 1) for a in range(weight + 1))
    kernel = dim_source - rank_out
    return {"weight": weight, "charge": charge, "dim_ker": kernel, "dim_im": rank_in, "dim_H": kernel - rank_in}


def cohomology_table(rank, wmax, window, workers=1, progress=False):
    """Cohomology rows for every (w, p) with w <= wmax."""
    system = System.make("omega", rank)
    jobs = []
    for weight in range(wmax + 1):
        charges = _charges(system, weight)
        for p in range(charges.start - 1, charges.stop):
            jobs += [(rank, weight, p, b, a) for b in range(window + 1) for a in range(weight + 1)]
    results = _run_jobs(jobs, workers, progress)
    rows = []
    for weight in range(wmax + 1):
        for p in _charges(system, weight):
            pieces = [(b, a) for b in range(window + 1) for a in range(weight + 1)]
            dim_source = sum(results[(rank, weight, p, b, a)][0] for b, a in pieces)
            rank_out = sum(results[(rank, weight, p, b, a)][1] for b, a in pieces)
            rank_in = sum(results[(rank, weight, p - 1, b, a)][1] for b, a in pieces)
            rows.append({"weight": weight, "charge": p, "dim_ker": dim_source - rank_out,
                         "dim_im": rank_in, "dim_H": dim_source - rank_out - rank_in})
    return rows


def _run_jobs(jobs, workers, progress):
    results = {}
    if workers <= 1:
        for job in tqdm(jobs, desc="Cohomology slices", unit="slice", disable=not progress):
            results[job] = differential_rank(*job)
        return results
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = {job: executor.submit(differential_rank, *job) for job in jobs}
        for job, future in tqdm(futures.items(), desc="Cohomology slices", unit="slice", disable=not progress):
            results[job] = future.result()
    return results


# -- characters ----------------------------------------------------------------


def character(system, wmax):
    """Free-module ranks by (weight, charge) over functions and the phi_0 exterior algebra, plus Euler numbers."""
    rows = []
    for weight in range(wmax + 1):
        counts = {}
        for monomial in basis(system, weight, zero_modes=False):
            charge = monomial_charge(monomial)
            counts[charge] = counts.get(charge, 0) + 1
        euler = sum((-1) ** p * n for p, n in counts.items())
        rows.append({"weight": weight, "ranks": {p: counts[p] for p in sorted(counts)}, "euler": euler})
    return rows


def product_formula(system, wmax):
    """Expansion of prod (1-q^n)^(-2N) (1+y q^n)^N (1+y^-1 q^n)^N as {(w, p): coefficient}."""
    series = {(0, 0): 1}

    def multiply(factor):
        nonlocal series
        out = {}
        for (w1, p1), c1 in series.items():
            for (w2, p2), c2 in factor.items():
                if w1 + w2 <= wmax:
                    out[(w1 + w2, p1 + p2)] = out.get((w1 + w2, p1 + p2), 0) + c1 * c2
        series = out

    for n in range(1, wmax + 1):
        for _ in range(system.rank):
            if system.bosons:
                geometric = {(n * k, 0): 1 for k in range(wmax // n + 1)}
                multiply(geometric)
                multiply(geometric)
            if system.fermions:
                multiply({(0, 0): 1, (n, 1): 1})
                multiply({(0, 0): 1, (n, -1): 1})
    return {key: value for key, value in series.items() if value}


def character_report(system, wmax):
    report = Report("character ({0}, N={1})".format(system.kind.value, system.rank))
    rows = character(system, wmax)
    oracle = product_formula(system, wmax)
    for row in rows:
        expected = {p: c for (w, p), c in oracle.items() if w == row["weight"]}
        report.add("weight {0}".format(row["weight"]), row["ranks"] == expected,
                   "" if row["ranks"] == expected else "oracle {0}".format(expected))
    report.data["rows"] = [{"weight": r["weight"], "ranks": {str(p): n for p, n in r["ranks"].items()},
                            "euler": r["euler"]} for r in rows]
    return report


def cohomology_report(rank, wmax, window, workers=1, progress=False, seed=0, limit=40):
    """d^2 = 0, homotopy, and cohomology concentrated at (0, 0) for every slice up to wmax."""
    system = System.make("omega", rank)
    rng = random.Random(seed)
    report = Report("chiral de Rham cohomology (N={0}, w<={1}, window={2})".format(rank, wmax, window))
    for weight in range(wmax + 1):
        report.extend(d_squared_check(system, weight, rng, limit))
        report.extend(homotopy_check(system, weight, rng, limit))
    rows = cohomology_table(rank, wmax, window, workers, progress)
    for row in rows:
        expected = 1 if (row["weight"], row["charge"]) == (0, 0) else 0
        report.add("H at w={weight}, p={charge}".format(**row), row["dim_H"] == expected, "dim_H={0}".format(row["dim_H"]))
    report.data["rows"] = [{"weight": r["weight"], "charge": r["charge"], "dim_H": r["dim_H"]} for r in rows]
    return report