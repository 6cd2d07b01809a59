"""Command-line front end: run a script of systems, states and verification commands.

Exit codes: 0 every check passed, 1 a verification failed, 2 usage, parse or
name error, 3 a resource bound was hit.
"""
import argparse
import json
import logging
import os
import random
import sys
from dataclasses import dataclass

from freefield import cdr, coord, liecocycle, sheaf
from freefield.coeffs import Mode, render_poly
from freefield.dsl import Evaluator, Let, SystemDecl, parse, parse_field, parse_mapping
from freefield.engine import borcherds_report, nth_product, ope, rehome
from freefield.errors import FreeFieldError, NoConstant, ResourceBound, ScriptError
from freefield.reports import Report
from freefield.states import System

_logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

_RINGS = {"poly": Mode.POLY, "rat": Mode.RATIONAL, "series": Mode.SERIES}


@dataclass(frozen=True)
class RunConfig:
    json: bool = False
    seed: int = 0
    max_weight: int = 3
    series_order: int = 8
    degree_window: int = 4
    workers: int = 1
    quiet: bool = False

    @property
    def progress(self):
        return not (self.quiet or self.json)


class Session:
    """Executes statements in order against one system and collects reports."""

    def __init__(self, config):
        self.config = config
        self.system = None
        self.env = {}
        self.reports = []

    def run(self, statements):
        for statement in statements:
            self.execute(statement)
        return self.reports

    def execute(self, statement):
        if isinstance(statement, SystemDecl):
            self.declare(statement)
        elif isinstance(statement, Let):
            self.env[statement.name] = self.evaluator(statement).state(statement.expr)
            _logger.debug("let %s = %s", statement.name, self.env[statement.name])
        else:
            handler = getattr(self, "cmd_" + statement.name)
            try:
                report = handler(statement, *statement.args)
            except NoConstant as error:
                report = Report("{0} (line {1})".format(statement.name, statement.line))
                report.add("single constant", False, str(error))
            except (ScriptError, ResourceBound):
                raise
            except FreeFieldError as error:
                raise ScriptError(str(error), statement.line, statement.column) from None
            _logger.info("%s: %s", report.title, "pass" if report.passed else "FAIL")
            self.reports.append(report)

    def declare(self, statement):
        if self.system is not None:
            raise ScriptError("a script declares one system", statement.line, statement.column)
        if statement.rank < 1:
            raise ScriptError("systems need N >= 1", statement.line, statement.column)
        self.system = System.make(statement.kind, statement.rank, _RINGS[statement.ring], statement.order)

    def evaluator(self, statement, system=None):
        system = system or self.require_system(statement)
        return Evaluator(system, self.env)

    def require_system(self, statement):
        if self.system is None:
            raise ScriptError("no system declared", statement.line, statement.column)
        return self.system

    # -- engine --------------------------------------------------------------------

    def cmd_ope(self, statement, left, right):
        ev = self.evaluator(statement)
        a, b = ev.state(left), ev.state(right)
        report = Report("ope {0} ; {1}".format(a, b))
        report.data["poles"] = ope(a, b).to_dict()
        return report

    def cmd_nproduct(self, statement, left, n, right):
        ev = self.evaluator(statement)
        a, b = ev.state(left), ev.state(right)
        report = Report("({0})_({1}) ({2})".format(a, n, b))
        report.data["result"] = nth_product(a, n, b).render()
        return report

    def cmd_print(self, statement, expr):
        state = self.evaluator(statement).state(expr)
        report = Report("state")
        report.data["state"] = state.render()
        report.data["weight"] = state.weight() if not state.is_zero() else None
        return report

    def cmd_check(self, statement, what):
        system = self.require_system(statement)
        rng = random.Random(self.config.seed)
        if what == "virasoro":
            L = self.env.get("L") or cdr.build_structure(system).L
            return cdr.check_virasoro(L)
        if what == "topological":
            return cdr.check_topological(cdr.build_structure(system))
        if what == "borcherds":
            return borcherds_report(system, self.config.seed, self.config.max_weight)
        report = Report("{0} (N={1}, w<={2})".format(what, system.rank, self.config.max_weight))
        if what == "homotopy":
            for weight in range(self.config.max_weight + 1):
                report.extend(cdr.d_squared_check(system, weight, rng, 40))
                report.extend(cdr.homotopy_check(system, weight, rng, 40))
        elif what == "charge":
            report.extend(cdr.charge_check(system, rng))
        elif what == "split":
            for weight in range(self.config.max_weight + 1):
                report.extend(cdr.split_check(system, weight, rng, 40))
        else:
            report.extend(cdr.de_rham_check(system))
        return report

    def cmd_cohomology(self, statement, wmax):
        system = self.require_system(statement)
        return cdr.cohomology_report(system.rank, wmax, self.config.degree_window, self.config.workers,
                                  self.config.progress, self.config.seed)

    def cmd_character(self, statement, wmax):
        return cdr.character_report(self.require_system(statement), wmax)

    # -- coordinate changes -----------------------------------------------------------

    def cmd_transform(self, statement, mapping, order, action, *extra):
        base = self.require_system(statement)
        order = self.config.series_order if order is None else order
        system = System.make(base.kind.value, base.rank, Mode.SERIES, order)
        change = coord.CoordChange.make(system, parse_mapping(mapping, system))
        if action == "check_opes":
            return coord.verify_ope_preservation(change, self.config.max_weight, self.config.seed)
        if action == "structure":
            return coord.check_structure_transform(change)
        if action == "filtration":
            return coord.filtration_report(change)
        if action == "compose":
            second = coord.CoordChange.make(system, parse_mapping(extra[0], system))
            return coord.verify_composition(change, second, seed=self.config.seed)
        state = rehome(self.evaluator(statement).state(extra[0]), system)
        report = Report("transform {0}".format(change.render()))
        report.data["state"] = state.render()
        report.data["image"] = coord.transform_state(change, state).render()
        report.data["order"] = order
        return report

    # -- projective line ----------------------------------------------------------------

    def cmd_p1(self, statement, action, *extra):
        config = self.config
        if action == "glue":
            return sheaf.glue_check_p1(config.max_weight)
        if action == "wakimoto":
            return sheaf.wakimoto_check()
        if action == "sugawara":
            return sheaf.sugawara_check()
        if action == "sections":
            return sheaf.sections_report(extra[0], config.degree_window, config.workers, config.progress)
        if action == "euler":
            return sheaf.euler_report(extra[0])
        if action == "flow":
            return sheaf.reflection_report(config.max_weight, extra[0])
        laurent = sheaf.p1_charts().u01.system
        state = self.evaluator(statement, laurent).state(extra[0])
        report = Report("Weyl reflection")
        report.data["state"] = state.render()
        report.data["image"] = sheaf.reflection(state).render()
        return report

    # -- cocycles -----------------------------------------------------------------------

    def cmd_cocycle(self, statement, kind, *fields):
        rank = self.system.rank if self.system is not None else 2
        config = self.config
        if kind == "identities":
            return liecocycle.identities_report(rank, config.seed)
        if kind == "compare-frame":
            return liecocycle.compare_report(liecocycle.sample_fields(rank))
        if kind == "extension":
            return liecocycle.extension_closure(liecocycle.sample_fields(rank)[:3], liecocycle.sample_forms(rank),
                                                config.max_weight)
        if kind == "kernel":
            report = liecocycle.pi_form_kernel_evidence(rank, wmax=1)
            return report.extend(liecocycle.localized_counterexample(config.max_weight), "localized")
        taus = [parse_field(text, rank) for text in fields]
        if kind == "discrepancy":
            if len(taus) != 2:
                raise ScriptError("discrepancy takes two vector fields", statement.line, statement.column)
            return liecocycle.discrepancy(taus[0], taus[1], config.max_weight)
        value = liecocycle.cocycle_eval(kind, *taus)
        report = Report("{0}({1})".format(kind, ", ".join(str(t) for t in taus)))
        report.data["value"] = value.render() if hasattr(value, "render") else render_poly(value)
        return report


def run(source, config=None):
    """Parse and execute a script; returns (reports, exit code, diagnostics)."""
    config = config or RunConfig()
    session = Session(config)
    try:
        session.run(parse(source))
    except ScriptError as error:
        _logger.debug("script error", exc_info=True)
        return session.reports, EXIT_USAGE, [error.diagnostic()]
    except ResourceBound as error:
        return session.reports, EXIT_RESOURCE, [{"severity": "error", "message": str(error), "kind": type(error).__name__}]
    code = EXIT_OK if all(report.passed for report in session.reports) else EXIT_FAILED
    return session.reports, code, []


def emit(reports, code, diagnostics, config, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    if config.json:
        document = {"passed": code == EXIT_OK, "exit_code": code,
                    "reports": [report.to_dict() for report in reports], "diagnostics": diagnostics}
        out.write(json.dumps(document, sort_keys=True) + "\n")
    else:
        for report in reports:
            out.write(report.render() + "\n")
    for diagnostic in diagnostics:
        where = ""
        if diagnostic.get("line") is not None:
            where = "{0}:{1}: ".format(diagnostic["line"], diagnostic["column"])
        err.write("{0}{1}: {2}\n".format(where, diagnostic["severity"], diagnostic["message"]))


def build_parser():
    parser = argparse.ArgumentParser(prog="freefield", description="Exact free-field vertex algebra computations from a script.")
    parser.add_argument("script", nargs="?", default="-", help="Script file, or - for stdin")
    parser.add_argument("--json", action="store_true", help="Emit machine-readable reports")
    parser.add_argument("--seed", type=int, default=0, help="Seed for sampled checks")
    parser.add_argument("--max-weight", type=int, default=3, help="Weight bound for sampled checks")
    parser.add_argument("--series-order", type=int, default=8, help="Truncation order for coordinate changes")
    parser.add_argument("--degree-window", type=int, default=4, help="Initial Laurent-degree window")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="Processes for slice computations")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--quiet", action="store_true", help="No progress bars")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    config = RunConfig(json=args.json, seed=args.seed, max_weight=args.max_weight, series_order=args.series_order,
                       degree_window=args.degree_window, workers=max(1, args.workers), quiet=args.quiet)
    try:
        if args.script == "-":
            source = sys.stdin.read()
        else:
            with open(args.script, "r", encoding="utf-8") as f:
                source = f.read()
    except OSError as error:
        sys.stderr.write("error: {0}\n".format(error))
        return EXIT_USAGE
    reports, code, diagnostics = run(source, config)
    emit(reports, code, diagnostics, config)
    return code


if __name__ == "__main__":
    sys.exit(main())
