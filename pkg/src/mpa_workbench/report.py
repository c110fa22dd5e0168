"""Uniform pass/fail reports shared by the verification operations."""

from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self):
        return {"name": self.name, "passed": self.passed, **self.detail}


@dataclass
class Report:
    name: str
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, name, passed, **detail):
        self.checks.append(Check(name, bool(passed), detail))
        return passed

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def failures(self):
        return [check for check in self.checks if not check.passed]

    def extend(self, other, prefix=""):
        for check in other.checks:
            self.checks.append(Check(prefix + check.name, check.passed, check.detail))

    def to_json(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": [check.to_json() for check in self.checks],
            **self.info,
        }
