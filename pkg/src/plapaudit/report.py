"""Check records, reports and their canonical serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from . import __version__

PASS = "pass"
FAIL = "fail"

SCHEMA_VERSION = "1.0"

# anchor id -> what the checks under it establish; mirrored in docs/anchors.md
ANCHORS = {
    "bubble-family": "the explicit bubble family solves the critical equation",
    "transformed-bubble": "the transformed bubble is C1 + C2 r^k, has E = 0 and constant source g",
    "decay-bounds": "far-field lower bound on u and upper bound on v, sharp on bubbles",
    "source-gradient-identity": "grad g = n E_lower for every positive field",
    "tensor-divergence-identity": "d_i E_ij = (n-1) E_j + rho_j",
    "contracted-divergence-identity": "d_i (X^j E_ij) = Tr E^2 + g rho/n + (n-1) X.E_lower + X.grad rho",
    "weighted-flux-divergence": "divergence of v^q g^m X",
    "weighted-tensor-divergence": "divergence of v^q g^m X^j E_ij",
    "weighted-trace-bound": "2 Tr(BAC) <= (L/l)^2 |B|^2 + l^2 |C|^2 for diagonal A > 0",
    "frame-bound": "Tr(BE) <= c(p) |B|^2 + Tr(E^2)/2",
    "gradient-direction-bound": "Tr E^2 >= (E w).(E^T w) with the rotated-frame gap formula",
    "radial-classification": "radial shooting reproduces the bubble with the same center value",
    "cutoff-flux-identity": "integrated divergence of v^(1-q) psi X against a cutoff",
    "growth-bounds": "growth of weighted integrals over balls against n - q",
    "integration-by-parts": "divergence theorem for v^(1-n) g^m X^j E_ij on a box",
    "exponent-window": "admissible eps0 window and the sign of q",
    "decay-rate": "positivity of the decay rate s(eps0)",
    "exponent-algebra": "hand-simplified exponent identities",
    "hypothesis-region": "case split and region of the (n, p) hypothesis",
    "plumbing": "toolkit self-checks with no mathematical content",
}


def _clean(value: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    return value


@dataclass
class CheckRecord:
    check_id: str
    anchor: str
    passed: bool
    measured: float
    tolerance: float
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.anchor not in ANCHORS:
            raise ValueError(f"unknown anchor {self.anchor!r}")
        self.passed = bool(self.passed)

    @property
    def status(self) -> str:
        return PASS if self.passed else FAIL

    def to_dict(self) -> dict:
        return _clean(
            {
                "check_id": self.check_id,
                "anchor": self.anchor,
                "status": self.status,
                "measured": float(self.measured),
                "tolerance": float(self.tolerance),
                "details": self.details,
            }
        )


def record(check_id, anchor, measured, tolerance, passed=None, **details) -> CheckRecord:
    """Record with ``passed`` defaulting to ``measured <= tolerance``."""
    if passed is None:
        passed = math.isfinite(measured) and measured <= tolerance
    return CheckRecord(check_id, anchor, passed, float(measured), float(tolerance), details)


@dataclass
class Report:
    command: str
    config: dict
    records: list
    duration: float = 0.0
    version: str = __version__

    def sorted_records(self) -> list:
        return sorted(self.records, key=lambda r: r.check_id)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def summary(self) -> dict:
        by_anchor: dict = {}
        for r in self.records:
            entry = by_anchor.setdefault(r.anchor, {"pass": 0, "fail": 0, "max_measured": None})
            entry[r.status] += 1
            if math.isfinite(r.measured):
                cur = entry["max_measured"]
                entry["max_measured"] = r.measured if cur is None else max(cur, r.measured)
        n_pass = sum(1 for r in self.records if r.passed)
        return {
            "total": len(self.records),
            "pass": n_pass,
            "fail": len(self.records) - n_pass,
            "by_anchor": dict(sorted(by_anchor.items())),
        }

    def to_dict(self, include_duration: bool = True) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "version": self.version,
            "config": self.config,
            "status": PASS if self.passed else FAIL,
            "summary": self.summary,
            "records": [r.to_dict() for r in self.sorted_records()],
        }
        if include_duration:
            out["duration_seconds"] = round(self.duration, 3)
        return _clean(out)

    def to_json(self, canonical: bool = False) -> str:
        """``canonical=True`` drops the wall-clock duration so identical runs
        produce identical bytes."""
        return json.dumps(self.to_dict(include_duration=not canonical), sort_keys=True, indent=2) + "\n"

    def failures(self) -> list:
        return [r for r in self.sorted_records() if not r.passed]

    def text_summary(self) -> str:
        s = self.summary
        lines = [f"{self.command}: {s['pass']}/{s['total']} checks passed"]
        for anchor, entry in s["by_anchor"].items():
            mark = "ok  " if entry["fail"] == 0 else "FAIL"
            lines.append(f"  {mark} {anchor}: {entry['pass']} pass, {entry['fail']} fail")
        for r in self.failures():
            lines.append(f"  failed {r.check_id}: measured {r.measured:.3g} vs {r.tolerance:.3g}")
        return "\n".join(lines)


def load_schema() -> dict:
    return json.loads(resources.files("plapaudit").joinpath("schema/report.schema.json").read_text())
