"""Check records, verification reports and their JSON/CSV serialization."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def _clean(value):
    """Make a value JSON-safe: numpy scalars to Python, complex to [re, im], non-finite to None."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [_clean(value.real), _clean(value.imag)]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


@dataclass
class Check:
    name: str
    expected: str
    passed: bool
    params: dict = field(default_factory=dict)
    norms: dict = field(default_factory=dict)
    order: float | None = None
    certificates: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return _clean({
            "name": self.name,
            "params": self.params,
            "norms": self.norms,
            "order": self.order,
            "certificates": self.certificates,
            "expected": self.expected,
            "pass": self.passed,
        })


@dataclass
class VerificationReport:
    meta: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # name -> (header, rows) for CSV output

    def add(self, check: Check):
        if any(c.name == check.name for c in self.checks):
            raise ValueError(f"duplicate check name {check.name!r}")
        self.checks.append(check)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {"meta": _clean(self.meta), "checks": [c.as_dict() for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"


# -- helpers for building checks ----------------------------------------------


def convergence_order(coarse: float, fine: float, ratio: float = 2.0) -> float | None:
    if coarse <= 0 or fine <= 0:
        return None
    return math.log(coarse / fine) / math.log(ratio)


def order_check(name: str, coarse: float, fine: float, params=None, lo: float = 1.8,
                hi: float | None = 2.2, ratio: float = 2.0, extra_norms=None) -> Check:
    """Pass when the observed order lies in ``[lo, hi]`` (``hi=None``: no upper bound)."""
    order = convergence_order(coarse, fine, ratio)
    ok = order is not None and order >= lo and (hi is None or order <= hi)
    band = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
    norms = {"coarse": coarse, "fine": fine}
    norms.update(extra_norms or {})
    return Check(name, f"order in {band}", ok, dict(params or {}), norms, order)


def bound_check(name: str, value: float, tol: float, params=None, norms=None) -> Check:
    ok = bool(value <= tol)
    return Check(name, f"<= {tol:g}", ok, dict(params or {}), {"value": value, **(norms or {})})


def nonzero_check(name: str, coarse: float, fine: float, max_change: float = 0.2,
                  floor: float = 1e-6, params=None) -> Check:
    """Negative control: residual stays away from zero and stabilizes under refinement."""
    change = abs(coarse - fine) / max(abs(coarse), abs(fine), 1e-300)
    ok = bool(min(coarse, fine) > floor and change < max_change)
    return Check(
        name, f"bounded away from zero (change < {max_change:g})", ok, dict(params or {}),
        {"coarse": coarse, "fine": fine, "relative_change": change},
    )


# -- emission ------------------------------------------------------------------


def emit_report(report: VerificationReport, out_dir, formats=("json", "csv")) -> list[Path]:
    """Write ``report.json``, ``checks.csv`` and one CSV per table; returns the paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    if "json" in formats:
        path = out / "report.json"
        path.write_text(report.to_json())
        written.append(path)
    if "csv" in formats:
        path = out / "checks.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["name", "expected", "order", "pass", "norms", "certificates"])
            for c in report.checks:
                d = c.as_dict()
                w.writerow([
                    d["name"], d["expected"], "" if d["order"] is None else repr(d["order"]),
                    int(d["pass"]), json.dumps(d["norms"], sort_keys=True),
                    json.dumps(d["certificates"], sort_keys=True),
                ])
        written.append(path)
        for name, (header, rows) in sorted(report.tables.items()):
            path = out / f"{name}.csv"
            write_table(path, header, rows)
            written.append(path)
    return written


def write_table(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_tower_csv(tower, path):
    """One row per (level, node): indices, coordinates, real/imag parts of the four entries."""
    grid = tower.grid
    r, z = grid.mesh()
    header = ["n", "i", "j", "rho", "z"] + [
        f"{part}{a}{b}" for a in (1, 2) for b in (1, 2) for part in ("re", "im")
    ]
    rows = []
    for n in tower.levels():
        v = tower[n].values
        for i in range(grid.n_rho):
            for j in range(grid.n_z):
                m = v[i, j]
                rows.append([n, i, j, float(r[i, j]), float(z[i, j])] + [
                    float(x) for a in range(2) for b in range(2) for x in (m[a, b].real, m[a, b].imag)
                ])
    write_table(path, header, rows)
