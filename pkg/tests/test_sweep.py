import math

import numpy as np
import pytest

from omniport import io as tio
from omniport.metrics import point
from omniport.scenario import ScenarioDocument, ScenarioError, parse_text, scenario_from, set_knob
from omniport.sweep import SweepAxis, axes_from, evaluate, run_sweep

from test_scenario import BASE


@pytest.fixture
def doc():
    return parse_text(BASE)


def test_axis_checks():
    with pytest.raises(ScenarioError):
        SweepAxis("xi", ())
    with pytest.raises(ScenarioError):
        SweepAxis("xi", (0.0, 1.0, 0.5))
    with pytest.raises(ScenarioError):
        SweepAxis("xi", (0.0, math.nan))
    assert SweepAxis("xi", (2.0, 1.0)).column == "xi"
    assert SweepAxis("ports.3.G_mod", (1.0,), "Gp").column == "Gp"


def test_row_major_order(doc):
    axes = [SweepAxis("ports.3.G_mod", (0.5, 1.0, 2.0), "Gp"), SweepAxis("signals.eta", (1.0, 2.0))]
    table = run_sweep(doc, axes, ["T_fwd"])
    assert table.coordinates()[:3] == [(0.5, 1.0), (0.5, 2.0), (1.0, 1.0)]
    grid = table.column("T_fwd")
    assert grid.shape == (3, 2)
    d = set_knob(set_knob(doc, "ports.3.G_mod", 2.0), "signals.eta", 1.0)
    assert grid[2, 0] == point(scenario_from(d), 0.0).T_fwd


def test_threads_do_not_change_results(doc):
    axes = [SweepAxis("ports.3.G_mod", np.linspace(0.1, 2, 9), "Gp"), SweepAxis("xi", np.linspace(-1, 1, 7))]
    serial = run_sweep(doc, axes, ["T_fwd", "log10_I", "S1"])
    parallel = run_sweep(doc, axes, ["T_fwd", "log10_I", "S1"], threads=4)
    assert tio.to_csv(tio.sweep_table(serial)) == tio.to_csv(tio.sweep_table(parallel))


def test_xi_knob_sets_detuning(doc):
    table = run_sweep(doc, [SweepAxis("xi", (-1.0, 0.0, 1.0))], "T_fwd")
    sc = scenario_from(doc)
    np.testing.assert_array_equal(table.column("T_fwd"), [point(sc, x).T_fwd for x in (-1, 0, 1)])


def test_metric_values(doc):
    sc = scenario_from(doc)
    rec = point(sc, 0.0)
    assert evaluate(sc, "log10_I", 0.0, None, rec) == math.inf
    assert evaluate(sc, "S1", 0.0, None, rec) == rec.S[0]
    shares = [evaluate(sc, f"share{j}", 0.0, None, rec) for j in (1, 2, 3)]
    assert sum(shares) == pytest.approx(1.0)
    grid = np.linspace(-2, 2, 9)
    assert evaluate(sc, "max_T_fwd", 0.0, grid) == max(point(sc, x).T_fwd for x in grid)
    with pytest.raises(ScenarioError):
        evaluate(sc, "S9", 0.0, None, rec)


def test_record_metric_expands(doc):
    table = run_sweep(doc, [SweepAxis("xi", (0.0,))], "record")
    flat = tio.sweep_table(table)
    assert flat.columns == ("xi", "xi", "T_fwd", "T_bwd", "I", "S1", "S2", "S3", "b_abs2")


@pytest.mark.parametrize(
    "axes, metrics",
    [
        ([SweepAxis("xi", (0.0,))] * 2, "T_fwd"),
        ([SweepAxis("xi", (0.0,)), SweepAxis("mech.gamma_m", (0.1,)), SweepAxis("signals.eta", (1.0,))], "T_fwd"),
        ([SweepAxis("ports.9.G_mod", (0.0,))], "T_fwd"),
        ([SweepAxis("xi", (0.0,))], "S4"),
        ([SweepAxis("xi", (0.0,))], "entropy"),
    ],
)
def test_rejected_sweeps(doc, axes, metrics):
    with pytest.raises(ScenarioError):
        run_sweep(doc, axes, metrics)


def test_axes_from_document(scenarios_dir):
    sd = ScenarioDocument.from_file(scenarios_dir / "fig4a.scn")
    axes = axes_from(sd.doc)
    assert [a.column for a in axes] == ["Gp", "eta"]
    with pytest.raises(ScenarioError):
        axes_from(ScenarioDocument.from_file(scenarios_dir / "fig2b.scn").doc)
