"""Outcome record shared by the sampled property checkers."""
import csv
import io
import math
from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Result of one sampled check.

    ``worst_margin`` is the smallest ``rhs - lhs`` seen over every inequality
    the check evaluated (``nan`` when it evaluated none).
    """

    name: str
    trials: int = 0
    violations: list = field(default_factory=list)
    worst_margin: float = math.nan
    notes: dict = field(default_factory=dict)

    @property
    def passed(self):
        return not self.violations

    @property
    def verdict(self):
        return "pass" if self.passed else "fail"

    def margin(self, lhs, rhs):
        """Record ``rhs - lhs`` and return it."""
        m = float(rhs - lhs)
        if math.isnan(self.worst_margin) or m < self.worst_margin:
            self.worst_margin = m
        return m

    def violate(self, **info):
        self.violations.append(info)

    def merge(self, other):
        """Fold another report's trials, violations and margin into this one."""
        self.trials += other.trials
        for v in other.violations:
            self.violations.append({"from": other.name, **v})
        if not math.isnan(other.worst_margin):
            self.margin(0.0, other.worst_margin)
        return self

    def to_text(self, max_violations=5):
        lines = [
            f"check: {self.name}",
            f"  trials: {self.trials}",
            f"  verdict: {self.verdict}",
            f"  worst margin: {self.worst_margin!r}",
        ]
        for key, val in self.notes.items():
            lines.append(f"  {key}: {val}")
        for v in self.violations[:max_violations]:
            lines.append(f"  violation: {v}")
        if len(self.violations) > max_violations:
            lines.append(f"  ... {len(self.violations) - max_violations} more violations")
        return "\n".join(lines)


CSV_HEADER = ("check", "trials", "violations", "worst_margin")


def reports_to_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow([r.name, r.trials, len(r.violations), repr(r.worst_margin)])
    return buf.getvalue()
