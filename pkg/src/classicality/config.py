"""Run configuration: strict parsing, validation and object building.

Configs are JSON. Validation is strict (unknown keys are rejected) and
exhaustive: every problem found is reported with its path, e.g.
``classical.margins.q``. Grid bounds may be omitted, in which case they
are derived from the packet widths, the classical data and -- for
evolution runs -- the classical trajectory envelope inflated by the
widest tested interval.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .classical import ClassicalData, PolynomialSystem, get_system, propagate_all_margins
from .criteria import DEFAULT_P_SAMPLES
from .errors import ConfigError, GridCoverageError
from .grids import GridAxis, GridState, load_tabulated, make_gaussian, product_state
from .phase_space import PhaseSpace, PolynomialObservable

DEFAULTS = {
    "grid": {"points": 1024, "bounds": None, "hbar": 1.0},
    "criteria": {"M": 1, "M_max": 6, "p0": 0.9, "p_samples": list(DEFAULT_P_SAMPLES)},
    "evolution": {"t_window": [0.0, 2.0 * math.pi], "samples": 50,
                  "P_list": [0.5, 0.9, 0.99], "steps": 2000},
    "output": {"dir": "out", "formats": ["json", "csv", "text"]},
    "seed": 0,
    "workers": 1,
}

_TOP_KEYS = {"system", "classical", "quantum", "grid", "criteria", "evolution",
             "scan", "output", "seed", "workers"}


class _Issues:
    def __init__(self):
        self.items: list[tuple[str, str]] = []

    def add(self, path: str, message: str):
        self.items.append((path, message))

    def __bool__(self):
        return bool(self.items)


def _check_keys(block: dict, allowed: set[str], path: str, issues: _Issues):
    for key in block:
        if key not in allowed:
            issues.add(f"{path}.{key}" if path else key, "unknown key")


def _require_number(block, key, path, issues, positive=False, integer=False):
    if key not in block:
        issues.add(f"{path}.{key}", "missing required key")
        return None
    val = block[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        issues.add(f"{path}.{key}", f"expected a number, got {type(val).__name__}")
        return None
    if integer and int(val) != val:
        issues.add(f"{path}.{key}", "expected an integer")
        return None
    if positive and val <= 0:
        issues.add(f"{path}.{key}", f"must be > 0, got {val}")
        return None
    return int(val) if integer else float(val)


@dataclass
class RunConfig:
    """Validated, default-filled configuration."""

    raw: dict

    # -- builders ------------------------------------------------------------
    def build_system(self):
        sys_block = self.raw["system"]
        if "builtin" in sys_block:
            return get_system(sys_block["builtin"], **sys_block.get("params", {}))
        poly = sys_block["polynomial"]
        space = PhaseSpace(poly["positions"], poly.get("momenta"))
        terms = {tuple(exps): coeff for coeff, exps in poly["terms"]}
        ham = PolynomialObservable(space.n_vars, terms)
        return PolynomialSystem(space, ham, poly.get("lie_order", 8))

    def build_data(self, system) -> ClassicalData:
        block = self.raw["classical"]
        return ClassicalData.from_labels(system.phase_space, block["values"], block["margins"])

    def gaussian_specs(self) -> list[dict] | None:
        return self.raw["quantum"].get("gaussian")

    def hbar(self) -> float:
        return self.raw["grid"]["hbar"]

    def resolve_bounds(self, system, data: ClassicalData, purpose: str) -> list[list[float]]:
        """Explicit bounds if given, else the coverage envelope for the run.

        ``purpose`` is "static" (t = 0 checks) or "evolve" (whole window).
        The envelope per position axis is the classical value inflated by
        the larger of the widest tested interval and 8 packet widths.
        """
        explicit = self.raw["grid"]["bounds"]
        if explicit is not None:
            return [list(map(float, b)) for b in explicit]
        gaussians = self.gaussian_specs()
        if gaussians is None:
            raise ConfigError([("grid.bounds", "tabulated input needs explicit bounds")])
        space = system.phase_space
        crit = self.raw["criteria"]
        if purpose == "evolve":
            evo = self.raw["evolution"]
            times = np.linspace(evo["t_window"][0], evo["t_window"][1], 64)
            times = [t for t in times if t > 0] or [evo["t_window"][1]]
            inflate = max((1.0 - p) ** (-1.0 / (2 * crit["M"])) for p in evo["P_list"])
        else:
            times = []
            inflate = max((1.0 - p) ** (-1.0 / (2 * crit["M"])) for p in crit["p_samples"])
        bounds = []
        for d in range(space.dof):
            width = float(gaussians[d]["width"])
            lo = data.values[d] - max(inflate * data.margins[d], 8.0 * width)
            hi = data.values[d] + max(inflate * data.margins[d], 8.0 * width)
            for t in times:
                tr = system.trajectory(t)
                center = float(tr.components[d].evaluate(data.values))
                margin = propagate_all_margins(tr, data)[d]
                half = max(inflate * margin, 8.0 * width)
                lo = min(lo, center - half)
                hi = max(hi, center + half)
            pad = 0.03 * (hi - lo)
            bounds.append([lo - pad, hi + pad])
        return bounds

    def build_axes(self, system, data: ClassicalData, purpose: str = "static") -> list[GridAxis]:
        space = system.phase_space
        grid = self.raw["grid"]
        points = grid["points"]
        if isinstance(points, int):
            points = [points] * space.dof
        bounds = self.resolve_bounds(system, data, purpose)
        if len(bounds) != space.dof or len(points) != space.dof:
            raise ConfigError([("grid", f"need {space.dof} axis entries")])
        return [GridAxis(space[d], points[d], bounds[d][0], bounds[d][1])
                for d in range(space.dof)]

    def build_state(self, system, axes: list[GridAxis]) -> GridState:
        quantum = self.raw["quantum"]
        hbar = self.hbar()
        if "gaussian" in quantum:
            packets = []
            for d, spec in enumerate(quantum["gaussian"]):
                packets.append(make_gaussian(spec["center_q"], spec["center_p"],
                                             spec["width"], axes[d], hbar))
            state = packets[0]
            for extra in packets[1:]:
                state = product_state(state, extra)
            return state
        return load_tabulated(quantum["tabulated"]["path"], axes[0], hbar)

    def resolved(self) -> dict:
        """The default-filled config (for echoing into reports)."""
        return json.loads(json.dumps(self.raw, sort_keys=True))


def _validate_system(block, issues: _Issues):
    if not isinstance(block, dict):
        issues.add("system", "expected an object")
        return
    if ("builtin" in block) == ("polynomial" in block):
        issues.add("system", "exactly one of 'builtin' or 'polynomial' is required")
        return
    if "builtin" in block:
        _check_keys(block, {"builtin", "params"}, "system", issues)
        name = block["builtin"]
        if name not in ("harmonic_oscillator", "coupled_qp2", "free_particle"):
            issues.add("system.builtin", f"unknown builtin {name!r}")
            return
        params = block.get("params", {})
        if not isinstance(params, dict):
            issues.add("system.params", "expected an object")
            return
        allowed = {"harmonic_oscillator": {"m", "omega"}, "coupled_qp2": {"m", "M", "k"},
                   "free_particle": {"m"}}[name]
        _check_keys(params, allowed, "system.params", issues)
        for key, val in params.items():
            if key in allowed and (isinstance(val, bool) or not isinstance(val, (int, float)) or val <= 0):
                issues.add(f"system.params.{key}", f"must be a positive number, got {val!r}")
    else:
        _check_keys(block, {"polynomial"}, "system", issues)
        poly = block["polynomial"]
        if not isinstance(poly, dict):
            issues.add("system.polynomial", "expected an object")
            return
        _check_keys(poly, {"positions", "momenta", "terms", "lie_order"},
                    "system.polynomial", issues)
        positions = poly.get("positions")
        if not isinstance(positions, list) or not positions:
            issues.add("system.polynomial.positions", "expected a non-empty list of labels")
            return
        n_vars = 2 * len(positions)
        terms = poly.get("terms")
        if not isinstance(terms, list) or not terms:
            issues.add("system.polynomial.terms", "expected a non-empty list of [coeff, exponents]")
            return
        for i, entry in enumerate(terms):
            ok = (isinstance(entry, list) and len(entry) == 2
                  and isinstance(entry[0], (int, float)) and not isinstance(entry[0], bool)
                  and isinstance(entry[1], list) and len(entry[1]) == n_vars
                  and all(isinstance(e, int) and e >= 0 for e in entry[1]))
            if not ok:
                issues.add(f"system.polynomial.terms.{i}",
                           f"expected [coeff, {n_vars} non-negative integer exponents]")


def _system_labels(block) -> list[str] | None:
    try:
        if "builtin" in block:
            return list(get_system(block["builtin"]).phase_space.labels())
        positions = block["polynomial"]["positions"]
        return list(PhaseSpace(positions, block["polynomial"].get("momenta")).labels())
    except Exception:
        return None


def _validate_classical(block, labels, issues: _Issues):
    if not isinstance(block, dict):
        issues.add("classical", "expected an object")
        return
    _check_keys(block, {"values", "margins"}, "classical", issues)
    for part in ("values", "margins"):
        sub = block.get(part)
        if not isinstance(sub, dict):
            issues.add(f"classical.{part}", "expected an object keyed by variable label")
            continue
        if labels is not None:
            for lbl in labels:
                if lbl not in sub:
                    issues.add(f"classical.{part}.{lbl}", "missing entry")
            for lbl in sub:
                if lbl not in labels:
                    issues.add(f"classical.{part}.{lbl}", "not a variable of this system")
        for lbl, val in sub.items():
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                issues.add(f"classical.{part}.{lbl}", f"expected a number, got {val!r}")
            elif part == "margins" and val <= 0:
                issues.add(f"classical.margins.{lbl}", f"margin must be > 0, got {val}")


def _validate_quantum(block, dof, issues: _Issues):
    if not isinstance(block, dict):
        issues.add("quantum", "expected an object")
        return
    if ("gaussian" in block) == ("tabulated" in block):
        issues.add("quantum", "exactly one of 'gaussian' or 'tabulated' is required")
        return
    _check_keys(block, {"gaussian", "tabulated"}, "quantum", issues)
    if "gaussian" in block:
        packets = block["gaussian"]
        if not isinstance(packets, list) or (dof is not None and len(packets) != dof):
            issues.add("quantum.gaussian", f"expected a list of {dof} packet objects")
            return
        for i, packet in enumerate(packets):
            if not isinstance(packet, dict):
                issues.add(f"quantum.gaussian.{i}", "expected an object")
                continue
            _check_keys(packet, {"center_q", "center_p", "width"},
                        f"quantum.gaussian.{i}", issues)
            _require_number(packet, "center_q", f"quantum.gaussian.{i}", issues)
            _require_number(packet, "center_p", f"quantum.gaussian.{i}", issues)
            _require_number(packet, "width", f"quantum.gaussian.{i}", issues, positive=True)
    else:
        tab = block["tabulated"]
        if not isinstance(tab, dict) or not isinstance(tab.get("path"), str):
            issues.add("quantum.tabulated", "expected an object with a 'path' string")
        elif dof is not None and dof != 1:
            issues.add("quantum.tabulated", "tabulated input supports one degree of freedom")


def _validate_grid(block, dof, issues: _Issues):
    if not isinstance(block, dict):
        issues.add("grid", "expected an object")
        return
    _check_keys(block, {"points", "bounds", "hbar"}, "grid", issues)
    points = block.get("points")
    point_list = points if isinstance(points, list) else [points]
    if isinstance(points, list) and dof is not None and len(points) != dof:
        issues.add("grid.points", f"expected {dof} entries")
    for i, n in enumerate(point_list):
        if isinstance(n, bool) or not isinstance(n, int) or n < 64 or n & (n - 1):
            issues.add("grid.points" if not isinstance(points, list) else f"grid.points.{i}",
                       f"expected a power of two >= 64, got {n!r}")
    bounds = block.get("bounds")
    if bounds is not None:
        if not isinstance(bounds, list) or (dof is not None and len(bounds) != dof):
            issues.add("grid.bounds", f"expected null or a list of {dof} [lo, hi] pairs")
        else:
            for i, pair in enumerate(bounds):
                if (not isinstance(pair, list) or len(pair) != 2
                        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in pair)
                        or pair[1] <= pair[0]):
                    issues.add(f"grid.bounds.{i}", f"expected [lo, hi] with hi > lo, got {pair!r}")
    _require_number(block, "hbar", "grid", issues, positive=True)


def _validate_criteria(block, issues: _Issues):
    if not isinstance(block, dict):
        issues.add("criteria", "expected an object")
        return
    _check_keys(block, {"M", "M_max", "p0", "p_samples"}, "criteria", issues)
    for key in ("M", "M_max"):
        val = _require_number(block, key, "criteria", issues, positive=True, integer=True)
        if val is not None and val < 1:
            issues.add(f"criteria.{key}", "must be >= 1")
    p0 = _require_number(block, "p0", "criteria", issues)
    if p0 is not None and not 0.0 <= p0 < 1.0:
        issues.add("criteria.p0", f"must lie in [0, 1), got {p0}")
    samples = block.get("p_samples")
    if not isinstance(samples, list) or not samples:
        issues.add("criteria.p_samples", "expected a non-empty list")
    else:
        for i, p in enumerate(samples):
            if isinstance(p, bool) or not isinstance(p, (int, float)) or not 0.0 <= p < 1.0:
                issues.add(f"criteria.p_samples.{i}", f"must lie in [0, 1), got {p!r}")


def _validate_evolution(block, issues: _Issues):
    if not isinstance(block, dict):
        issues.add("evolution", "expected an object")
        return
    _check_keys(block, {"t_window", "samples", "P_list", "steps"}, "evolution", issues)
    window = block.get("t_window")
    if (not isinstance(window, list) or len(window) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in window)
            or window[1] <= window[0] or window[0] < 0):
        issues.add("evolution.t_window", f"expected [t0, t1] with 0 <= t0 < t1, got {window!r}")
    for key in ("samples", "steps"):
        val = _require_number(block, key, "evolution", issues, positive=True, integer=True)
        if val is not None and val < 2 and key == "samples":
            issues.add("evolution.samples", "need at least 2 samples")
    plist = block.get("P_list")
    if not isinstance(plist, list) or not plist:
        issues.add("evolution.P_list", "expected a non-empty list")
    else:
        for i, p in enumerate(plist):
            if isinstance(p, bool) or not isinstance(p, (int, float)) or not 0.0 <= p < 1.0:
                issues.add(f"evolution.P_list.{i}", f"must lie in [0, 1), got {p!r}")


def _validate_scan(block, issues: _Issues):
    if not isinstance(block, dict):
        issues.add("scan", "expected an object")
        return
    _check_keys(block, {"parameter", "min", "max", "count", "orders"}, "scan", issues)
    if not isinstance(block.get("parameter"), str):
        issues.add("scan.parameter", "expected a dotted config path string")
    lo = _require_number(block, "min", "scan", issues)
    hi = _require_number(block, "max", "scan", issues)
    if lo is not None and hi is not None and hi <= lo:
        issues.add("scan.max", "must exceed scan.min")
    count = _require_number(block, "count", "scan", issues, positive=True, integer=True)
    if count is not None and count < 2:
        issues.add("scan.count", "need at least 2 points")
    orders = block.get("orders", [1])
    if not isinstance(orders, list) or not orders or any(
            isinstance(o, bool) or not isinstance(o, int) or o < 1 for o in orders):
        issues.add("scan.orders", "expected a list of integers >= 1")


def _merge_defaults(raw: dict) -> dict:
    merged = {}
    for key, default in DEFAULTS.items():
        if isinstance(default, dict):
            merged[key] = {**default, **raw.get(key, {})} if isinstance(raw.get(key, {}), dict) \
                else raw.get(key)
        else:
            merged[key] = raw.get(key, default)
    for key in ("system", "classical", "quantum", "scan"):
        if key in raw:
            merged[key] = raw[key]
    return merged


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config; raises ConfigError with *all* problems."""
    issues = _Issues()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("<json>", str(exc))]) from exc
    if not isinstance(raw, dict):
        raise ConfigError([("<top>", "expected a JSON object")])
    _check_keys(raw, _TOP_KEYS, "", issues)
    for key in ("system", "classical", "quantum"):
        if key not in raw:
            issues.add(key, "missing required block")
    merged = _merge_defaults(raw)

    labels = dof = None
    if "system" in raw:
        _validate_system(merged["system"], issues)
        labels = _system_labels(merged["system"])
        dof = len(labels) // 2 if labels else None
    if "classical" in raw:
        _validate_classical(merged["classical"], labels, issues)
    if "quantum" in raw:
        _validate_quantum(merged["quantum"], dof, issues)
    _validate_grid(merged["grid"], dof, issues)
    _validate_criteria(merged["criteria"], issues)
    _validate_evolution(merged["evolution"], issues)
    if "scan" in merged:
        _validate_scan(merged["scan"], issues)
    for key in ("seed", "workers"):
        val = merged.get(key)
        if isinstance(val, bool) or not isinstance(val, int) or val < 0:
            issues.add(key, f"expected a non-negative integer, got {val!r}")
    out = merged.get("output")
    if not isinstance(out, dict):
        issues.add("output", "expected an object")
    else:
        _check_keys(out, {"dir", "formats"}, "output", issues)
        if not isinstance(out.get("dir"), str):
            issues.add("output.dir", "expected a string")
        formats = out.get("formats")
        if (not isinstance(formats, list)
                or any(f not in ("json", "csv", "text") for f in formats)):
            issues.add("output.formats", "expected a list drawn from json|csv|text")

    if issues:
        raise ConfigError(issues.items)
    return RunConfig(merged)


def apply_override(raw: dict, path: str, value: str) -> None:
    """Apply one ``--set path=value`` override in place; value is parsed as
    JSON when possible, else kept as a string. List indices are numeric."""
    try:
        parsed: Any = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    keys = path.split(".")
    node = raw
    for i, key in enumerate(keys[:-1]):
        idx: Any = int(key) if key.lstrip("-").isdigit() else key
        if isinstance(node, list):
            node = node[int(key)]
        else:
            if idx not in node or not isinstance(node[idx], (dict, list)):
                node[idx] = {}
            node = node[idx]
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = parsed
    else:
        node[last] = parsed
