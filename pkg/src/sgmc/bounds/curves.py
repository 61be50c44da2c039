"""Bound curves over an SNR sweep and their CSV form."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..channel import SNR_CONVENTION

KINDS = ("UB", "partialRCU", "RCU", "BonferroniLB", "exponentUB")
CSV_COLUMNS = ("snr_db", "kind", "value", "ci_low", "ci_high", "params")


@dataclass(frozen=True)
class BoundPoint:
    snr_db: float
    value: float
    ci_low: float
    ci_high: float


@dataclass
class BoundCurve:
    """One bound kind evaluated on a strictly increasing SNR grid."""

    kind: str
    points: list[BoundPoint] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown bound kind {self.kind!r}; expected one of {KINDS}")
        self.metadata.setdefault("convention", SNR_CONVENTION)
        self.validate()

    def validate(self) -> None:
        snrs = [p.snr_db for p in self.points]
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise ValueError("SNR grid must be strictly increasing")
        for p in self.points:
            if not 0.0 <= p.value <= 1.0:
                raise ValueError(f"bound value {p.value} outside [0, 1]")

    def append(self, snr_db: float, value: float, ci_low: float | None = None, ci_high: float | None = None) -> None:
        value = min(1.0, max(0.0, float(value)))
        lo = value if ci_low is None else min(1.0, max(0.0, float(ci_low)))
        hi = value if ci_high is None else min(1.0, max(0.0, float(ci_high)))
        if self.points and not snr_db > self.points[-1].snr_db:
            raise ValueError("SNR grid must be strictly increasing")
        self.points.append(BoundPoint(float(snr_db), value, lo, hi))

    @property
    def snr_db(self) -> list[float]:
        return [p.snr_db for p in self.points]

    @property
    def values(self) -> list[float]:
        return [p.value for p in self.points]

    def rows(self):
        params = json.dumps(self.metadata, sort_keys=True, separators=(",", ":"))
        for p in self.points:
            yield [repr(p.snr_db), self.kind, repr(p.value), repr(p.ci_low), repr(p.ci_high), params]


def write_curves_csv(curves, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for c in curves:
            w.writerows(c.rows())


def read_curves_csv(path: str | Path) -> list[BoundCurve]:
    """Inverse of :func:`write_curves_csv`; curves keep their first-seen order."""
    out: dict[tuple[str, str], BoundCurve] = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        for snr, kind, val, lo, hi, params in r:
            key = (kind, params)
            if key not in out:
                out[key] = BoundCurve(kind, [], json.loads(params))
            out[key].points.append(BoundPoint(float(snr), float(val), float(lo), float(hi)))
    curves = list(out.values())
    for c in curves:
        c.validate()
    return curves


__all__ = ["KINDS", "CSV_COLUMNS", "BoundPoint", "BoundCurve", "write_curves_csv", "read_curves_csv"]
