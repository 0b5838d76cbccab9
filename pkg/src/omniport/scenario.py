"""Scenario documents: TOML recipes describing a network, its signals and grids.

A document has up to six sections::

    title = "..."                      # optional, free text
    [network]   level, mech{omega_m, gamma_m}, ports[...], linearize{branch, tol}
    [signals]   amplitudes/phases  OR  target/partner/control/eta/phi
    [grid]      min, max, count     (detuning grid)
    [sweep]     metric, xi, axes[{knob, label, values | min/max/count}]
    [output]    format, path

Ports are numbered from 1 in documents and from 0 in code.  Unknown keys are
rejected with their full dotted path.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

try:
    import tomllib as tomli
except ImportError:  # Python < 3.11
    import tomli

from .meanfield import MeanFieldBranch, solve_mean_fields, to_linearized
from .metrics import Scenario, Transmission
from .model import (
    LINEARIZED,
    PHYSICAL,
    ConfigError,
    LinearPort,
    MechanicalMode,
    NetworkConfig,
    PhysicalPort,
    SignalSet,
    validate,
)
from .response import Control


class ScenarioError(ConfigError):
    """Malformed scenario document."""


_LINEAR_PORT = {"kappa_0": 0.0, "kappa_ex": None, "G_mod": 0.0, "G_phase": 0.0}
_PHYSICAL_PORT = {
    "kappa_0": 0.0,
    "kappa_ex": None,
    "g": None,
    "drive_amplitude": 0.0,
    "drive_phase": 0.0,
    "detuning": 0.0,
}
_SECTIONS = {"title", "network", "signals", "grid", "sweep", "output"}


def _check_keys(table: dict, allowed, where: str) -> None:
    if not isinstance(table, dict):
        raise ScenarioError(f"{where} must be a table")
    for key in table:
        if key not in allowed:
            path = f"{where}.{key}" if where else key
            raise ScenarioError(f"unknown key '{path}'")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"'{where}' must be a number, got {value!r}")
    return float(value)


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"'{where}' must be an integer, got {value!r}")
    return value


def _numbers(value, where: str) -> list[float]:
    if not isinstance(value, list):
        raise ScenarioError(f"'{where}' must be an array of numbers")
    return [_number(v, f"{where}[{i}]") for i, v in enumerate(value)]


def _range_or_values(table: dict, where: str) -> list[float]:
    if "values" in table:
        if any(k in table for k in ("min", "max", "count")):
            raise ScenarioError(f"'{where}' gives both values and min/max/count")
        return _numbers(table["values"], f"{where}.values")
    try:
        lo = _number(table["min"], f"{where}.min")
        hi = _number(table["max"], f"{where}.max")
        count = _integer(table["count"], f"{where}.count")
    except KeyError as exc:
        raise ScenarioError(f"'{where}' needs values or min/max/count (missing {exc.args[0]})")
    if count < 1:
        raise ScenarioError(f"'{where}.count' must be >= 1")
    return [float(v) for v in np.linspace(lo, hi, count)]


def _normalize_network(net: dict) -> dict:
    _check_keys(net, {"level", "mech", "ports", "linearize"}, "network")
    level = net.get("level", LINEARIZED)
    if level not in (LINEARIZED, PHYSICAL):
        raise ScenarioError(f"'network.level' must be 'linearized' or 'physical', got {level!r}")
    if "mech" not in net:
        raise ScenarioError("missing 'network.mech'")
    mech = net["mech"]
    _check_keys(mech, {"omega_m", "gamma_m"}, "network.mech")
    out: dict[str, Any] = {
        "level": level,
        "mech": {k: _number(mech.get(k), f"network.mech.{k}") for k in ("omega_m", "gamma_m")},
    }
    ports = net.get("ports")
    if not isinstance(ports, list) or not ports:
        raise ScenarioError("'network.ports' must be a non-empty array of tables")
    schema = _LINEAR_PORT if level == LINEARIZED else _PHYSICAL_PORT
    norm_ports = []
    for i, port in enumerate(ports, start=1):
        where = f"network.ports.{i}"
        _check_keys(port, schema, where)
        entry = {}
        for key, default in schema.items():
            if key in port:
                entry[key] = _number(port[key], f"{where}.{key}")
            elif default is None:
                raise ScenarioError(f"missing '{where}.{key}'")
            else:
                entry[key] = default
        norm_ports.append(entry)
    out["ports"] = norm_ports
    lin = net.get("linearize", {})
    _check_keys(lin, {"branch", "tol", "allow_uncoupled"}, "network.linearize")
    if level == PHYSICAL:
        branch = lin.get("branch", "auto")
        if branch != "auto":
            branch = _integer(branch, "network.linearize.branch")
        out["linearize"] = {
            "branch": branch,
            "tol": _number(lin.get("tol", 1e-6), "network.linearize.tol"),
            "allow_uncoupled": bool(lin.get("allow_uncoupled", False)),
        }
    elif lin:
        raise ScenarioError("'network.linearize' only applies to physical networks")
    return out


def _normalize_signals(sig: dict, n: int) -> dict:
    explicit = {"amplitudes", "phases"}
    shorthand = {"target", "partner", "control", "eta", "phi"}
    _check_keys(sig, explicit | shorthand | {"pair"}, "signals")
    if sig.keys() & explicit and sig.keys() & shorthand:
        raise ScenarioError("'signals' mixes explicit amplitudes with target/control shorthand")
    if sig.keys() & shorthand:
        target = _integer(sig.get("target", 1), "signals.target")
        control = sig.get("control")
        if control is not None:
            control = _integer(control, "signals.control")
        partner = _integer(sig["partner"], "signals.partner") if "partner" in sig else None
        for key, val in (("target", target), ("partner", partner), ("control", control)):
            if val is not None and not 1 <= val <= n:
                raise ScenarioError(f"'signals.{key}' = {val} is not a port (1..{n})")
        if partner is None:
            rest = [p for p in range(1, n + 1) if p not in (target, control)]
            if len(rest) != 1:
                raise ScenarioError("'signals.partner' is ambiguous; give it explicitly")
            partner = rest[0]
        if "pair" in sig:
            raise ScenarioError("'signals.pair' only applies to explicit amplitudes")
        return {
            "mode": "shorthand",
            "target": target,
            "partner": partner,
            "control": control,
            "eta": _number(sig.get("eta", 1.0), "signals.eta"),
            "phi": _number(sig.get("phi", 0.0), "signals.phi"),
        }
    amps = _numbers(sig.get("amplitudes", [1.0] * n), "signals.amplitudes")
    phases = _numbers(sig.get("phases", [0.0] * len(amps)), "signals.phases")
    if len(amps) != n or len(phases) != n:
        raise ScenarioError(f"'signals.amplitudes' and 'signals.phases' need {n} entries")
    pair = sig.get("pair", [1, 2])
    if not (isinstance(pair, list) and len(pair) == 2):
        raise ScenarioError("'signals.pair' must be two port numbers")
    pair = [_integer(p, "signals.pair") for p in pair]
    return {"mode": "explicit", "amplitudes": amps, "phases": phases, "pair": pair}


def _normalize_grid(grid: dict) -> dict:
    _check_keys(grid, {"min", "max", "count"}, "grid")
    return {
        "min": _number(grid.get("min", -5.0), "grid.min"),
        "max": _number(grid.get("max", 5.0), "grid.max"),
        "count": _integer(grid.get("count", 1001), "grid.count"),
    }


def _normalize_sweep(sweep: dict) -> dict:
    _check_keys(sweep, {"metric", "xi", "axes"}, "sweep")
    metric = sweep.get("metric", "T_fwd")
    metrics = [metric] if isinstance(metric, str) else metric
    if not isinstance(metrics, list) or not all(isinstance(m, str) for m in metrics):
        raise ScenarioError("'sweep.metric' must be a name or an array of names")
    axes = sweep.get("axes", [])
    if not isinstance(axes, list) or not 1 <= len(axes) <= 2:
        raise ScenarioError("'sweep.axes' must hold one or two axes")
    norm_axes = []
    for i, axis in enumerate(axes, start=1):
        where = f"sweep.axes.{i}"
        _check_keys(axis, {"knob", "label", "values", "min", "max", "count"}, where)
        if "knob" not in axis:
            raise ScenarioError(f"missing '{where}.knob'")
        norm_axes.append(
            {
                "knob": str(axis["knob"]),
                "label": str(axis.get("label", axis["knob"])),
                "values": _range_or_values(axis, where),
            }
        )
    return {
        "metric": metrics,
        "xi": _number(sweep.get("xi", 0.0), "sweep.xi"),
        "axes": norm_axes,
    }


def normalize(raw: dict) -> dict:
    """Validate structure, fill defaults and coerce numbers to floats."""
    _check_keys(raw, _SECTIONS, "")
    if "network" not in raw:
        raise ScenarioError("missing [network] section")
    doc: dict[str, Any] = {"title": str(raw.get("title", ""))}
    doc["network"] = _normalize_network(raw["network"])
    n = len(doc["network"]["ports"])
    doc["signals"] = _normalize_signals(raw.get("signals", {}), n)
    doc["grid"] = _normalize_grid(raw.get("grid", {}))
    if "sweep" in raw:
        doc["sweep"] = _normalize_sweep(raw["sweep"])
    out = raw.get("output", {})
    _check_keys(out, {"format", "path"}, "output")
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ScenarioError(f"'output.format' must be csv or json, got {fmt!r}")
    doc["output"] = {"format": fmt, "path": out.get("path")}
    return doc


def semantic_hash(doc: dict) -> str:
    """Hash of everything except title and output settings."""
    body = {k: v for k, v in doc.items() if k not in ("title", "output")}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def parse_text(text: str) -> dict:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ScenarioError(f"parse error: {exc}") from None
    return normalize(raw)


def load(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}") from None
    try:
        return parse_text(text)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def network_from(doc: dict) -> NetworkConfig:
    net = doc["network"]
    mech = MechanicalMode(**net["mech"])
    if net["level"] == LINEARIZED:
        ports = tuple(LinearPort(**p) for p in net["ports"])
    else:
        ports = tuple(PhysicalPort(**p) for p in net["ports"])
    return NetworkConfig(mech, ports, net["level"])


def choose_branch(branches: list[MeanFieldBranch], selector) -> int:
    if selector == "auto":
        stable = [i for i, b in enumerate(branches) if b.stable]
        if not stable:
            raise ConfigError("no stable mean-field branch")
        return min(stable, key=lambda i: abs(branches[i].x))
    if not 0 <= selector < len(branches):
        raise ConfigError(f"branch {selector} out of range ({len(branches)} branches)")
    return selector


def linearized_network(doc: dict) -> NetworkConfig:
    """The linearized network, solving the mean fields first for physical documents."""
    config = network_from(doc)
    validate(config).raise_if_invalid()
    if config.level == LINEARIZED:
        return config
    opts = doc["network"]["linearize"]
    branches = solve_mean_fields(config)
    idx = choose_branch(branches, opts["branch"])
    return to_linearized(branches[idx], config, opts["tol"], opts["allow_uncoupled"])


def scenario_from(doc: dict) -> Scenario:
    network = linearized_network(doc)
    sig = doc["signals"]
    n = network.n
    if sig["mode"] == "shorthand":
        control = None
        if sig["control"] is not None:
            control = Control(sig["control"] - 1, sig["eta"], sig["phi"])
        return Scenario.targeted(network, sig["target"] - 1, sig["partner"] - 1, control)
    pair = tuple(p - 1 for p in sig["pair"])
    if any(not 0 <= p < n for p in pair):
        raise ScenarioError(f"'signals.pair' must name ports 1..{n}")
    return Scenario(
        network,
        SignalSet(tuple(sig["amplitudes"]), tuple(sig["phases"])),
        Transmission(pair, None),
    )


def grid_from(doc: dict) -> np.ndarray:
    g = doc["grid"]
    return np.linspace(g["min"], g["max"], g["count"])


def parse_grid_override(text: str) -> dict:
    """Parse ``"min:max:count"``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ScenarioError(f"--grid expects min:max:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ScenarioError(f"--grid expects min:max:count, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or count < 1:
        raise ScenarioError(f"--grid values out of range: {text!r}")
    return {"min": lo, "max": hi, "count": count}


# -- knob addressing ---------------------------------------------------------

XI_KNOB = "xi"


def _knob_path(knob: str) -> list[str]:
    parts = knob.split(".")
    if parts[0] in ("ports", "mech"):
        parts = ["network"] + parts
    return parts


def set_knob(doc: dict, knob: str, value: float) -> dict:
    """Return a copy of ``doc`` with the numeric field at ``knob`` replaced.

    Paths are dotted, with 1-based port indices: ``ports.3.G_mod``,
    ``mech.gamma_m``, ``signals.eta``.  The knob ``xi`` is handled by the
    sweep engine, not here.
    """
    parts = _knob_path(knob)
    new = copy.deepcopy(doc)
    node: Any = new
    for i, part in enumerate(parts[:-1]):
        if isinstance(node, list):
            if not part.isdigit() or not 1 <= int(part) <= len(node):
                raise ScenarioError(f"knob '{knob}': no element {part}")
            node = node[int(part) - 1]
        elif isinstance(node, dict) and part in node:
            node = node[part]
        else:
            raise ScenarioError(f"knob '{knob}' does not resolve")
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node or isinstance(node[leaf], (bool, str, list, dict)):
        raise ScenarioError(f"knob '{knob}' does not name a numeric field")
    if node[leaf] is None:
        raise ScenarioError(f"knob '{knob}' is unset in this scenario")
    node[leaf] = float(value)
    return new


def check_knob(doc: dict, knob: str) -> None:
    if knob != XI_KNOB:
        set_knob(doc, knob, 0.0)


@dataclass(frozen=True)
class ScenarioDocument:
    doc: dict
    path: Optional[str] = None

    @classmethod
    def from_file(cls, path) -> "ScenarioDocument":
        return cls(load(path), str(path))

    @property
    def hash(self) -> str:
        return semantic_hash(self.doc)

    def scenario(self) -> Scenario:
        return scenario_from(self.doc)

    def grid(self) -> np.ndarray:
        return grid_from(self.doc)
