"""Orbit files (JSON), time-series tables (CSV) and trace plots (SVG)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import MassTriple, derived_constants
from .errors import DomainError, SchemaError
from .loops import FourierLoop, sample

SCHEMA = "euler-collinear-orbit/1"
KINDS = ("minimizer", "mountain_pass")
SOLVER_FIELDS = ("kind", "eps", "h", "omega", "iterations", "gradientNorm")
DIAGNOSTIC_FIELDS = ("f", "f1", "phiEps", "centralConfigResidual", "eomResidualUnperturbed",
                     "eomResidualPerturbed", "energyResidual", "closureError",
                     "separationVariation", "windingNumber")
NULLABLE = {"windingNumber"}

CSV_HEADER = "t," + ",".join(f"{kind}{body}{axis}" for kind in "qv" for body in (1, 2, 3)
                             for axis in "xyz")
SVG_SAMPLES = 256
SVG_SIZE = 480
BODY_COLORS = ("#1f77b4", "#d62728", "#2ca02c")
PLANES = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}


@dataclass(frozen=True)
class OrbitRecord:
    """A solved loop with the parameters and diagnostics that describe it.

    ``period`` is the period of the stored orbit; for mountain-pass
    records that is the rescaled period T/omega.
    """

    masses: MassTriple
    period: float
    lambda0: float
    coeffs: np.ndarray
    solver: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def loop(self) -> FourierLoop:
        return FourierLoop(self.period, self.coeffs)

    @property
    def geometry(self):
        return derived_constants(self.masses, self.lambda0)

    @property
    def kind(self) -> str:
        return self.solver["kind"]

    def to_json(self) -> dict:
        harmonics = [{"k": int(k), "cos": [float(x) for x in c[0]], "sin": [float(x) for x in c[1]]}
                     for k, c in zip(self.loop.harmonics, self.coeffs)]
        return {
            "schema": SCHEMA,
            "masses": [self.masses.m1, self.masses.m2, self.masses.m3],
            "period": self.period,
            "lambda0": self.lambda0,
            "harmonics": harmonics,
            "solver": {k: self.solver[k] for k in SOLVER_FIELDS},
            "diagnostics": {k: self.diagnostics[k] for k in DIAGNOSTIC_FIELDS},
        }

    def __eq__(self, other):
        if not isinstance(other, OrbitRecord):
            return NotImplemented
        return self.to_json() == other.to_json()


def _number(value, path, nullable=False, integer=False):
    if value is None and nullable:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise SchemaError(path, "must be finite")
    if integer:
        if int(value) != value:
            raise SchemaError(path, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _vector(value, path):
    if not isinstance(value, list) or len(value) != 3:
        raise SchemaError(path, "expected a list of 3 numbers")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _block(doc, name, fields):
    block = doc.get(name)
    if not isinstance(block, dict):
        raise SchemaError(name, "missing or not an object")
    for key in fields:
        if key not in block:
            raise SchemaError(f"{name}.{key}", "missing field")
    return block


def record_from_json(doc) -> OrbitRecord:
    """Validate a parsed orbit document and build the record."""
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected a JSON object")
    if doc.get("schema") != SCHEMA:
        raise SchemaError("schema", f"expected {SCHEMA!r}, got {doc.get('schema')!r}")
    for key in ("masses", "period", "lambda0", "harmonics"):
        if key not in doc:
            raise SchemaError(key, "missing field")

    try:
        masses = MassTriple(*_vector(doc["masses"], "masses"))
    except DomainError as exc:
        raise SchemaError("masses", str(exc)) from None
    period = _number(doc["period"], "period")
    if period <= 0:
        raise SchemaError("period", "must be positive")
    lambda0 = _number(doc["lambda0"], "lambda0")
    if not 0 < lambda0 < 1:
        raise SchemaError("lambda0", "must lie in (0, 1)")

    harmonics = doc["harmonics"]
    if not isinstance(harmonics, list) or not harmonics:
        raise SchemaError("harmonics", "expected a non-empty list")
    entries, last = {}, 0
    for i, h in enumerate(harmonics):
        path = f"harmonics[{i}]"
        if not isinstance(h, dict):
            raise SchemaError(path, "expected an object")
        k = _number(h.get("k"), f"{path}.k", integer=True)
        if k <= 0 or k % 2 == 0:
            raise SchemaError(f"{path}.k", f"harmonic k={k} is not an odd positive integer")
        if k <= last:
            raise SchemaError(f"{path}.k", "harmonics must be strictly increasing")
        last = k
        entries[k] = (_vector(h.get("cos"), f"{path}.cos"), _vector(h.get("sin"), f"{path}.sin"))
    coeffs = FourierLoop.from_harmonics(period, entries).coeffs

    solver = _block(doc, "solver", SOLVER_FIELDS)
    if solver["kind"] not in KINDS:
        raise SchemaError("solver.kind", f"expected one of {KINDS}, got {solver['kind']!r}")
    solver = {
        "kind": solver["kind"],
        "eps": _number(solver["eps"], "solver.eps"),
        "h": _number(solver["h"], "solver.h"),
        "omega": _number(solver["omega"], "solver.omega"),
        "iterations": _number(solver["iterations"], "solver.iterations", integer=True),
        "gradientNorm": _number(solver["gradientNorm"], "solver.gradientNorm"),
    }
    diag = _block(doc, "diagnostics", DIAGNOSTIC_FIELDS)
    diagnostics = {}
    for key in DIAGNOSTIC_FIELDS:
        diagnostics[key] = _number(diag[key], f"diagnostics.{key}", nullable=key in NULLABLE,
                                   integer=key == "windingNumber")
    return OrbitRecord(masses, period, lambda0, coeffs, solver, diagnostics)


def write_orbit(record: OrbitRecord, path) -> None:
    """Write JSON; floats use the shortest repr that round-trips exactly."""
    text = json.dumps(record.to_json(), indent=2, allow_nan=False)
    Path(path).write_text(text + "\n")


def read_orbit(path) -> OrbitRecord:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"{path}: not valid JSON ({exc})") from None
    return record_from_json(doc)


def _g17(x) -> str:
    return format(float(x) + 0.0, ".17g")  # + 0.0 folds -0 into 0


def emit_csv(series, path) -> None:
    """One row per instant: t, the three positions, the three velocities."""
    lines = [CSV_HEADER]
    for t, state in zip(series.times, series.states):
        lines.append(",".join(_g17(v) for v in (t, *state.phase_vector())))
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def _fmt(x: float) -> str:
    s = f"{x:.3f}"
    return "0.000" if s == "-0.000" else s


def emit_svg(record: OrbitRecord, path, plane: str = "xy") -> None:
    """Body traces and the relative curve over one period, equal aspect."""
    if plane not in PLANES:
        raise DomainError(f"plane must be one of {sorted(PLANES)}, got {plane!r}")
    i, j = PLANES[plane]
    r = sample(record.loop, SVG_SAMPLES).r
    geom = record.geometry
    curves = [np.asarray(c) * r for c in geom.c] + [r]
    pts = np.concatenate(curves)[:, [i, j]]
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.08 * span
    scale = SVG_SIZE / (span + 2 * pad)
    center = 0.5 * (lo + hi)

    def xy(p):
        u = (p[0] - center[0]) * scale + SVG_SIZE / 2
        v = -(p[1] - center[1]) * scale + SVG_SIZE / 2
        return f"{_fmt(u)},{_fmt(v)}"

    def polyline(curve, color, extra=""):
        pts2 = " ".join(xy(p) for p in np.vstack([curve, curve[:1]])[:, [i, j]])
        return (f'<polyline points="{pts2}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"{extra}/>')

    f1 = record.diagnostics.get("f1")
    legend = [f"lambda0 = {record.lambda0:.12g}",
              f"f1 = {f1:.12g}" if f1 is not None else "f1 = n/a"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE + 60}" '
           f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE + 60}">',
           f'<rect width="{SVG_SIZE}" height="{SVG_SIZE + 60}" fill="white"/>',
           polyline(curves[3], "#7f7f7f", ' stroke-dasharray="4 3"')]
    for n, (curve, color) in enumerate(zip(curves[:3], BODY_COLORS)):
        out.append(polyline(curve, color))
        start = xy(curve[0, [i, j]]).split(",")
        out.append(f'<circle cx="{start[0]}" cy="{start[1]}" r="3" fill="{color}"/>')
    y = SVG_SIZE + 18
    for n, color in enumerate(BODY_COLORS):
        out.append(f'<text x="{10 + 70 * n}" y="{y}" font-family="monospace" font-size="12" '
                   f'fill="{color}">body {n + 1}</text>')
    out.append(f'<text x="220" y="{y}" font-family="monospace" font-size="12" '
               f'fill="#7f7f7f">r = q2 - q1 ({plane})</text>')
    for n, line in enumerate(legend):
        out.append(f'<text x="10" y="{y + 18 * (n + 1)}" font-family="monospace" '
                   f'font-size="12">{line}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
