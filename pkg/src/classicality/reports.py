"""Structured results of criteria checks and time-evolution verification."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Iterable


@dataclass
class CriterionRow:
    """One checked inequality: a sequence (or single variable) against its bound."""

    item: str
    value: float
    bound: float
    passed: bool
    slack: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"sequence": self.item, "value": self.value, "bound": self.bound,
               "pass": self.passed, "slack": self.slack}
        if self.extra:
            out["extra"] = dict(sorted(self.extra.items()))
        return out


@dataclass
class CriterionReport:
    """Rows plus a kind-specific aggregate; the aggregate pass flag always
    equals the conjunction of the row flags."""

    kind: str
    rows: list[CriterionRow]
    aggregate: dict

    def __post_init__(self):
        self.aggregate = dict(self.aggregate)
        self.aggregate["passed"] = all(r.passed for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.aggregate["passed"]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rows": [r.to_dict() for r in self.rows],
            "aggregate": dict(sorted(self.aggregate.items())),
        }

    def to_text(self) -> str:
        head = f"[{self.kind}] " + ("PASS" if self.passed else "FAIL")
        lines = [head]
        width = max((len(r.item) for r in self.rows), default=10)
        lines.append(f"  {'item':<{width}}  {'value':>14}  {'bound':>14}  {'slack':>12}  ok")
        for r in self.rows:
            lines.append(
                f"  {r.item:<{width}}  {r.value:>14.6e}  {r.bound:>14.6e}  "
                f"{r.slack:>12.4e}  {'yes' if r.passed else 'NO'}")
        for key, val in sorted(self.aggregate.items()):
            if key != "passed":
                lines.append(f"  {key} = {val}")
        return "\n".join(lines)


@dataclass
class EvolutionRow:
    """One (time, variable, required probability) interval check."""

    t: float
    variable: str
    classical_value: float
    margin: float
    interval_lo: float
    interval_hi: float
    probability: float
    p_required: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "t": self.t, "variable": self.variable,
            "classical_value": self.classical_value, "margin": self.margin,
            "interval_lo": self.interval_lo, "interval_hi": self.interval_hi,
            "probability": self.probability, "P_required": self.p_required,
            "pass": self.passed,
        }


@dataclass
class MomentRow:
    """Evolved central moments against the propagated-margin bounds."""

    t: float
    variable: str
    moment2: float
    bound2: float
    moment_high: float
    bound_high: float
    order_high: int

    def to_dict(self) -> dict:
        return {
            "t": self.t, "variable": self.variable,
            "moment2": self.moment2, "bound2": self.bound2,
            f"moment{self.order_high}": self.moment_high,
            f"bound{self.order_high}": self.bound_high,
        }


CSV_COLUMNS = ("t", "variable", "classical_value", "margin", "interval_lo",
               "interval_hi", "probability", "P_required", "pass")


@dataclass
class EvolutionRecord:
    """Everything a time-evolution verification run produced."""

    times: tuple[float, ...]
    rows: list[EvolutionRow]
    moments: list[MomentRow]
    aggregate: dict

    def __post_init__(self):
        times = tuple(self.times)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("sample times must be strictly increasing")
        self.times = times
        self.aggregate = dict(self.aggregate)
        self.aggregate["passed"] = all(r.passed for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.aggregate["passed"]

    def min_slack(self) -> float:
        return min((r.probability - r.p_required for r in self.rows), default=float("inf"))

    def to_dict(self) -> dict:
        return {
            "times": list(self.times),
            "rows": [r.to_dict() for r in self.rows],
            "moments": [m.to_dict() for m in self.moments],
            "aggregate": dict(sorted(self.aggregate.items())),
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for r in self.rows:
                writer.writerow([
                    repr(r.t), r.variable, repr(r.classical_value), repr(r.margin),
                    repr(r.interval_lo), repr(r.interval_hi), repr(r.probability),
                    repr(r.p_required), int(r.passed),
                ])


def write_json(path, payload: dict) -> None:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
