"""Diagnostic reports: named measured quantities with tolerances and verdicts.

Every diagnostic in the package funnels its measurements through
:class:`DiagnosticReport` so runs can be archived, serialized, and
aggregated into a single exit status.  A check record carries a short
``anchor`` naming the mathematical fact it exercises (e.g.
``"araki-lieb-thirring"``), which makes coverage auditable from the
report alone.
"""

from dataclasses import dataclass, field

import numpy as np


def _json_safe(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": float(v.real), "im": float(v.imag)}
    if isinstance(v, np.ndarray):
        return [_json_safe(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    return v


@dataclass
class CheckRecord:
    """One measured quantity with its tolerance and verdict."""

    name: str
    measured: object
    tolerance: object
    passed: bool
    anchor: str
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "name": self.name,
            "measured": _json_safe(self.measured),
            "tolerance": _json_safe(self.tolerance),
            "pass": bool(self.passed),
            "anchor": self.anchor,
            "detail": _json_safe(self.detail),
        }


@dataclass
class DiagnosticReport:
    """Ordered collection of check records plus run metadata."""

    title: str
    records: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, name, measured, tolerance, passed, anchor, **detail):
        rec = CheckRecord(name, measured, tolerance, bool(passed), anchor, detail)
        self.records.append(rec)
        return rec

    def passed(self):
        return all(r.passed for r in self.records)

    def record(self, name):
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def __contains__(self, name):
        return any(r.name == name for r in self.records)

    def to_dict(self):
        return {
            "title": self.title,
            "pass": self.passed(),
            "records": [r.to_dict() for r in self.records],
            "meta": _json_safe(self.meta),
        }

    def summary_lines(self):
        lines = []
        for r in self.records:
            status = "PASS" if r.passed else "FAIL"
            lines.append(f"[{status}] {self.title}/{r.name}: measured={r.measured} tol={r.tolerance} ({r.anchor})")
        return lines


@dataclass
class TraceEstimate:
    """Numerical surrogate of a normalised trace value.

    ``samples`` holds (cutoff-or-epsilon, partial estimate) pairs and
    ``spread`` is the max-min diameter of the estimates over the
    reported tail window.
    """

    value: float
    method: str
    samples: list
    spread: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.spread < 0:
            raise ValueError("spread must be non-negative")
        if not self.samples:
            raise ValueError("samples must be non-empty")

    @property
    def unreliable(self):
        return bool(self.meta.get("unreliable", False))

    def to_dict(self):
        return {
            "value": float(self.value),
            "method": self.method,
            "samples": _json_safe(self.samples),
            "spread": float(self.spread),
            "meta": _json_safe(self.meta),
        }
