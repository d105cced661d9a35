"""Certified disc solutions."""

from dataclasses import dataclass, field

from .disc import DiscFunction


@dataclass
class DiscSolution:
    """A disc map with its certificate.

    ``certificate`` holds measured quantities, ``checks`` the pass/fail
    verdict for each of them, ``info`` solver bookkeeping (iterations,
    residual history, contraction ratio, ...).
    """

    Z: DiscFunction
    certificate: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def failed_checks(self):
        return [k for k, ok in self.checks.items() if not ok]

    def summary(self):
        status = "ok" if self.passed else "FAILED: " + ", ".join(self.failed_checks())
        items = ", ".join(f"{k}={_fmt(v)}" for k, v in self.certificate.items())
        return f"{status} [{items}]"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)
