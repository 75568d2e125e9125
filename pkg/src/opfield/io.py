"""Scenario and kernel files, and report serialisation.

Complex numbers are written as ``[re, im]`` pairs. A scenario file looks like::

    {"space": {"points": ["a", "b"], "adjacency": [[0, 1]]},
     "fiber_dim": 2,
     "operators": {"A": [[[[3, 0], [0, 0]], [[0, 0], [1, 0]]], ...]},
     "vectors": {"x": [[[1, 0], [0, 0]], ...]},
     "scalars": {"s": [[1, 0], [2, 0]]},
     "kernels": {"K": {"quadrature": {...}, "kernel": [...]}},
     "mask": [[1, 1], [1, 0]],
     "tolerances": {"reconstruction": 1e-9}}

Only ``space`` and ``fiber_dim`` are required.
"""
from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fieldcore import ContractError, OperatorField, ParameterSpace, ScalarField, VectorField
from .kernelop import KernelField, QuadratureSpace

__all__ = [
    "ScenarioError",
    "Scenario",
    "DEFAULT_TOLERANCES",
    "load_scenario",
    "load_kernel",
    "parse_complex_array",
    "complex_to_json",
    "emit_report",
    "bundled_fixtures_path",
]

DEFAULT_TOLERANCES = {
    "reconstruction": 1e-9,
    "identity": 1e-10,
    "inequality": 1e-9,
}


class ScenarioError(ValueError):
    """Malformed scenario or kernel input; ``where`` names the offending field."""

    def __init__(self, where, message):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class Scenario:
    space: ParameterSpace
    fiber_dim: int
    operators: dict = field(default_factory=dict)
    vectors: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)
    kernels: dict = field(default_factory=dict)
    mask: np.ndarray | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    source: str = "<dict>"

    def operator(self, name) -> OperatorField:
        try:
            return self.operators[name]
        except KeyError:
            raise ScenarioError(f"{self.source}: operators", f"no operator named {name!r}") from None

    def kernel(self, name) -> KernelField:
        try:
            return self.kernels[name]
        except KeyError:
            raise ScenarioError(f"{self.source}: kernels", f"no kernel named {name!r}") from None


def parse_complex_array(data, shape, where):
    """Convert nested ``[re, im]`` lists (or plain reals) to a complex array of ``shape``."""
    try:
        a = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(where, "entries must be numbers or [re, im] pairs") from None
    if a.shape == tuple(shape) + (2,):
        a = a[..., 0] + 1j * a[..., 1]
    elif a.shape != tuple(shape):
        raise ScenarioError(where, f"expected shape {tuple(shape)} of [re, im] pairs, got {a.shape[:-1] if a.ndim else a.shape}")
    if not np.all(np.isfinite(a)):
        raise ScenarioError(where, "non-finite entry")
    return a.astype(complex)


def complex_to_json(a):
    """Nested ``[re, im]`` lists from a complex array."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _read_json(source):
    if isinstance(source, dict):
        return source, "<dict>"
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(str(path), f"cannot read file ({exc.strerror})") from None
    try:
        return json.loads(text), str(path)
    except json.JSONDecodeError as exc:
        raise ScenarioError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from None


def _parse_space(obj, where):
    if not isinstance(obj, dict) or "points" not in obj:
        raise ScenarioError(where, "needs an object with 'points'")
    pts = obj["points"]
    if not isinstance(pts, list):
        raise ScenarioError(f"{where}.points", "must be a list")
    pts = [tuple(p) if isinstance(p, list) else p for p in pts]
    adj = obj.get("adjacency")
    try:
        return ParameterSpace(tuple(pts), None if adj is None else [tuple(e) for e in adj])
    except (ContractError, TypeError, ValueError) as exc:
        raise ScenarioError(where, str(exc)) from None


def _parse_kernel(obj, where, space=None):
    if not isinstance(obj, dict):
        raise ScenarioError(where, "kernel must be an object")
    q = obj.get("quadrature")
    if not isinstance(q, dict) or "nodes" not in q or "weights" not in q:
        raise ScenarioError(f"{where}.quadrature", "needs 'nodes' and 'weights'")
    try:
        quad = QuadratureSpace(tuple(q["nodes"]), q["weights"])
    except (ContractError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}.quadrature", str(exc)) from None
    if "kernel" not in obj:
        raise ScenarioError(where, "missing 'kernel'")
    try:
        raw = np.asarray(obj["kernel"], dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"{where}.kernel", "entries must be [re, im] pairs") from None
    if space is None:
        if "space" in obj:
            space = _parse_space(obj["space"], f"{where}.space")
        elif raw.ndim >= 3:
            space = ParameterSpace.range(raw.shape[2])
        else:
            raise ScenarioError(f"{where}.kernel", "cannot infer the parameter space")
    n = len(quad)
    vals = parse_complex_array(obj["kernel"], (n, n, len(space)), f"{where}.kernel")
    return KernelField(quad, space, vals)


def load_kernel(source, space=None) -> KernelField:
    """Read a kernel file ``{"quadrature": {...}, "kernel": [[[re,im] per t] per s] per r}``."""
    obj, name = _read_json(source)
    return _parse_kernel(obj, name, space)


def load_scenario(source) -> Scenario:
    """Read and validate a scenario file (path or already parsed dict)."""
    obj, name = _read_json(source)
    if not isinstance(obj, dict):
        raise ScenarioError(name, "top level must be an object")
    if "space" not in obj:
        raise ScenarioError(name, "missing 'space'")
    space = _parse_space(obj["space"], f"{name}: space")
    d = obj.get("fiber_dim")
    if not isinstance(d, int) or d < 1:
        raise ScenarioError(f"{name}: fiber_dim", "must be a positive integer")
    nt = len(space)
    mask = None
    if obj.get("mask") is not None:
        m = np.asarray(obj["mask"])
        if m.shape != (nt, d):
            raise ScenarioError(f"{name}: mask", f"expected shape {(nt, d)}")
        mask = m.astype(bool)
    sc = Scenario(space, d, mask=mask, source=name)

    def build(kind, shape, ctor):
        out = {}
        section = obj.get(kind, {}) or {}
        if not isinstance(section, dict):
            raise ScenarioError(f"{name}: {kind}", "must be an object")
        for key, raw in section.items():
            where = f"{name}: {kind}.{key}"
            vals = parse_complex_array(raw, shape, where)
            try:
                out[key] = ctor(vals)
            except ContractError as exc:
                raise ScenarioError(where, str(exc)) from None
        return out

    sc.operators = build("operators", (nt, d, d), lambda v: OperatorField(space, v, mask))
    sc.vectors = build("vectors", (nt, d), lambda v: VectorField(space, v, mask))
    sc.scalars = build("scalars", (nt,), lambda v: ScalarField(space, v))
    for key, raw in (obj.get("kernels", {}) or {}).items():
        where = f"{name}: kernels.{key}"
        if isinstance(raw, str):
            base = Path(name).parent if name != "<dict>" else Path(".")
            raw, _ = _read_json(base / raw)
        sc.kernels[key] = _parse_kernel(raw, where, space)
    tol = obj.get("tolerances", {}) or {}
    for key, val in tol.items():
        if not isinstance(val, (int, float)) or not val > 0:
            raise ScenarioError(f"{name}: tolerances.{key}", "must be a positive number")
        sc.tolerances[key] = float(val)
    return sc


def bundled_fixtures_path() -> Path:
    """Path of the scenario shipped with the package (fixtures F1, F2, F4)."""
    return Path(__file__).with_name("data") / "fixtures.json"


def _csv_rows(report):
    if "checks" in report and "fields" not in report:
        cols = ["name", "reference", "status", "max_violation", "tolerance"]
        if any("runtime" in c for c in report["checks"]):
            cols.append("runtime")
        return cols, [[c.get(k, "") for k in cols] for c in report["checks"]]
    fields = report.get("fields", {})
    points = report.get("points", [])
    cols = ["point"]
    for key in sorted(fields):
        cols += [f"{key}_re", f"{key}_im"]
    rows = []
    for i, pt in enumerate(points):
        row = [pt]
        for key in sorted(fields):
            re, im = fields[key][i]
            row += [re, im]
        rows.append(row)
    return cols, rows


def emit_report(report: dict, fmt="json", path=None) -> str:
    """Serialise a report deterministically; write it to ``path`` when given.

    JSON output uses sorted keys. CSV output has one row per check for a
    verification report and one row per point otherwise.
    """
    if fmt == "json":
        text = json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"
    elif fmt == "csv":
        cols, rows = _csv_rows(report)
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text
