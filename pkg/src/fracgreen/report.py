"""Verification report record and its tab-separated line format."""

from __future__ import annotations

from dataclasses import dataclass, field


def _fmt_location(loc) -> str:
    if loc is None:
        return "-"
    if isinstance(loc, (tuple, list)):
        return "(" + ",".join(f"{float(v):.6g}" for v in loc) + ")"
    return f"{float(loc):.6g}"


@dataclass(frozen=True)
class VerifyReport:
    property_name: str
    worst_magnitude: float
    tolerance_used: float
    worst_location: tuple | float | None = None
    details: dict = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        return bool(self.worst_magnitude <= self.tolerance_used)

    def line(self) -> str:
        return "\t".join([
            self.property_name,
            "pass" if self.passed else "fail",
            _fmt_location(self.worst_location),
            f"{self.worst_magnitude:.6e}",
            f"{self.tolerance_used:.1e}",
        ])

    @classmethod
    def from_line(cls, line: str) -> "VerifyReport":
        name, _, loc, mag, tol = line.rstrip("\n").split("\t")
        if loc == "-":
            location = None
        elif loc.startswith("("):
            location = tuple(float(v) for v in loc[1:-1].split(","))
        else:
            location = float(loc)
        return cls(name, float(mag), float(tol), location)
