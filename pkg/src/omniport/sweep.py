"""One- and two-dimensional parameter sweeps over scenario documents.

Every grid point is an independent, pure evaluation: the document is copied,
the swept knobs are written into it, the scenario is rebuilt and the
requested metrics are computed.  Results are stored row-major (the first
axis varies slowest) regardless of how many worker threads ran.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .metrics import Scenario, SpectrumRecord, max_mech_excitation, point, spectrum
from .scenario import XI_KNOB, ScenarioError, check_knob, grid_from, scenario_from, set_knob

POINT_METRICS = ("record", "T_fwd", "T_bwd", "I", "log10_I", "b_abs2")
GRID_METRICS = ("max_T_fwd", "max_T_bwd", "max_b_abs2")


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple
    label: Optional[str] = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ScenarioError(f"axis '{self.name}' has no values")
        if not all(math.isfinite(v) for v in vals):
            raise ScenarioError(f"axis '{self.name}' has non-finite values")
        steps = np.diff(vals)
        if len(vals) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ScenarioError(f"axis '{self.name}' is not strictly monotone")

    @property
    def column(self) -> str:
        return self.label or self.name


@dataclass(frozen=True)
class SweepTable:
    axes: tuple
    metrics: tuple
    records: tuple

    def __post_init__(self):
        expected = math.prod(len(a.values) for a in self.axes)
        if len(self.records) != expected:
            raise ValueError(f"{len(self.records)} records for {expected} grid points")

    def coordinates(self):
        """Axis values for each record, in row-major order."""
        return list(itertools.product(*(a.values for a in self.axes)))

    def column(self, metric: str) -> np.ndarray:
        k = self.metrics.index(metric)
        shape = tuple(len(a.values) for a in self.axes)
        return np.array([r[k] for r in self.records], dtype=float).reshape(shape)


def _log10(v: float) -> float:
    if v == 0:
        return -math.inf
    return math.log10(v)


def evaluate(scenario: Scenario, metric: str, xi: float, grid, record: Optional[SpectrumRecord] = None):
    """Value of ``metric`` for one scenario.

    Point metrics are taken at detuning ``xi``; ``max_*`` metrics reduce
    over ``grid``.  ``S<j>`` and ``share<j>`` address port ``j`` (1-based).
    """
    if metric in GRID_METRICS:
        if metric == "max_b_abs2":
            return max_mech_excitation(scenario, grid)
        attr = metric[len("max_"):]
        return float(max(getattr(r, attr) for r in spectrum(scenario, grid)))
    rec = record if record is not None else point(scenario, xi)
    if metric == "record":
        return rec
    if metric == "log10_I":
        return _log10(rec.I)
    if metric in ("T_fwd", "T_bwd", "I", "b_abs2"):
        return getattr(rec, metric)
    for prefix in ("share", "S"):
        if metric.startswith(prefix) and metric[len(prefix):].isdigit():
            j = int(metric[len(prefix):]) - 1
            if not 0 <= j < len(rec.S):
                break
            if prefix == "S":
                return rec.S[j]
            amps = np.asarray(scenario.signals.amplitudes)
            norm = np.where(amps > 0, amps, amps.max())
            energy = np.asarray(rec.S) * norm**2
            total = float(np.sum(energy))
            return math.nan if total == 0 else float(energy[j] / total)
    raise ScenarioError(f"unknown metric '{metric}'")


def check_metric(metric: str, n_ports: int) -> None:
    if metric in POINT_METRICS or metric in GRID_METRICS:
        return
    for prefix in ("share", "S"):
        tail = metric[len(prefix):]
        if metric.startswith(prefix) and tail.isdigit() and 1 <= int(tail) <= n_ports:
            return
    raise ScenarioError(f"unknown metric '{metric}'")


def _evaluate_point(doc: dict, axes: Sequence[SweepAxis], coords, metrics, xi, grid):
    xi_here = xi
    for axis, value in zip(axes, coords):
        if axis.name == XI_KNOB:
            xi_here = value
        else:
            doc = set_knob(doc, axis.name, value)
    scenario = scenario_from(doc)
    rec = None
    if any(m not in GRID_METRICS for m in metrics):
        rec = point(scenario, xi_here)
    return tuple(evaluate(scenario, m, xi_here, grid, rec) for m in metrics)


def run_sweep(
    doc: dict,
    axes: Sequence[SweepAxis],
    metrics: Sequence[str] | str,
    xi: float = 0.0,
    grid: Optional[Sequence[float]] = None,
    threads: int = 1,
) -> SweepTable:
    """Evaluate ``metrics`` on the product grid of ``axes``.

    ``doc`` is a normalized scenario document.  The knob ``xi`` sweeps the
    evaluation detuning; any other knob is a dotted path into the document.
    """
    axes = tuple(axes)
    metrics = (metrics,) if isinstance(metrics, str) else tuple(metrics)
    if not 1 <= len(axes) <= 2:
        raise ScenarioError("a sweep takes one or two axes")
    names = [a.name for a in axes]
    if len(set(names)) != len(names):
        raise ScenarioError("sweep knobs must be distinct")
    for name in names:
        check_knob(doc, name)
    n_ports = len(doc["network"]["ports"])
    for m in metrics:
        check_metric(m, n_ports)
    grid = grid_from(doc) if grid is None else np.asarray(grid, dtype=float)

    points = list(itertools.product(*(a.values for a in axes)))
    task = lambda c: _evaluate_point(doc, axes, c, metrics, xi, grid)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(task, points))
    else:
        records = [task(c) for c in points]
    return SweepTable(axes, metrics, tuple(records))


def axes_from(doc: dict) -> list[SweepAxis]:
    if "sweep" not in doc:
        raise ScenarioError("scenario has no [sweep] section")
    return [SweepAxis(a["knob"], tuple(a["values"]), a["label"]) for a in doc["sweep"]["axes"]]
