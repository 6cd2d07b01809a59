"""Verification reports shared by every checking operation.

A report never raises on a failed identity; it records the failing product
together with a witness so the CLI can decide the exit code.
"""
import json
from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    witness: str | None = None

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "witness": self.witness}


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def add(self, name, passed, detail="", witness=None):
        check = Check(name, bool(passed), detail, None if witness is None else str(witness))
        self.checks.append(check)
        return check

    def expect_equal(self, name, actual, expected):
        """Record whether `actual == expected`, keeping both sides on failure."""
        passed = actual == expected
        detail = "" if passed else "got {0}, expected {1}".format(actual, expected)
        return self.add(name, passed, detail)

    def extend(self, other, prefix=None):
        for check in other.checks:
            name = check.name if prefix is None else "{0}: {1}".format(prefix, check.name)
            self.checks.append(Check(name, check.passed, check.detail, check.witness))
        return self

    def failures(self):
        return [check for check in self.checks if not check.passed]

    def to_dict(self):
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
            "data": self.data,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def render(self):
        lines = ["== {0}: {1}".format(self.title, "PASS" if self.passed else "FAIL")]
        width = max([len(check.name) for check in self.checks] + [0])
        for check in self.checks:
            line = "  {0:<{1}}  {2}".format(check.name, width, "ok" if check.passed else "FAILED")
            if check.detail:
                line += "  " + check.detail
            lines.append(line)
            if check.witness is not None and not check.passed:
                lines.append("    witness: " + check.witness)
        for key in sorted(self.data):
            lines.append("  {0}: {1}".format(key, _render_value(self.data[key])))
        return "\n".join(lines)


def _render_value(value):
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    return str(value)
