"""Pass/fail-with-margin records for the quantitative inequalities."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class BoundEntry:
    """One inequality evaluation: margin is the slack on the guaranteed side,
    so `pass` means margin >= -tol. `inapplicable` marks entries whose
    hypothesis does not hold (no finite delta, alpha <= 0, step size below the
    divergence threshold); those are excluded from failure counts."""

    name: str
    k: int
    lhs: float
    rhs: float
    margin: float
    status: str  # "pass" | "fail" | "inapplicable"


@dataclass
class BoundReport:
    entries: list[BoundEntry] = field(default_factory=list)

    def extend(self, more) -> None:
        self.entries.extend(more)

    def append(self, entry: BoundEntry) -> None:
        self.entries.append(entry)

    def failures(self) -> list[BoundEntry]:
        return [e for e in self.entries if e.status == "fail"]

    def all_pass(self) -> bool:
        return not self.failures()

    def by_name(self, name: str) -> list[BoundEntry]:
        return [e for e in self.entries if e.name == name]

    def counts(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for e in self.entries:
            slot = out.setdefault(e.name, {"pass": 0, "fail": 0, "inapplicable": 0})
            slot[e.status] += 1
        return out
