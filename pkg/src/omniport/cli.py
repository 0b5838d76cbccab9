"""Command-line front end.

    omniport validate     --scenario fig2b.scn
    omniport spectrum     --scenario fig2b.scn --out fig2b.csv
    omniport isolate      --scenario fig3d.scn
    omniport route        --scenario fig5b.scn --format json
    omniport sweep        --scenario fig4a.scn --threads 4
    omniport meanfield    --scenario bistable.scn
    omniport oracle-check --scenario fig2b.scn --grid -2:2:5

Exit status: 0 on success, 1 for invalid input, 2 for numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import io as tio
from .meanfield import BracketError, SidebandError, solve_mean_fields
from .metrics import FIPB_THRESHOLD, routing_report, spectrum
from .model import PHYSICAL, ConfigError, validate
from .oracle import OracleError, TrajectorySpec, integrate_rwa, integrate_two_sideband
from .response import solve_response
from .scenario import (
    ScenarioDocument,
    ScenarioError,
    network_from,
    parse_grid_override,
)
from .sweep import axes_from, run_sweep

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class NumericalFailure(RuntimeError):
    pass


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("OMNIPORT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ScenarioError(f"OMNIPORT_THREADS must be an integer, got {env!r}") from None
    return 1


def _load(args) -> ScenarioDocument:
    sd = ScenarioDocument.from_file(args.scenario)
    if args.grid:
        sd.doc["grid"] = parse_grid_override(args.grid)
    return sd


def _emit(args, sd: ScenarioDocument, table: tio.Table) -> None:
    fmt = args.format or sd.doc["output"]["format"]
    path = args.out or sd.doc["output"]["path"]
    tio.emit(table, fmt, path)


def _note(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def cmd_validate(args) -> int:
    sd = _load(args)
    config = network_from(sd.doc)
    report = validate(config)
    print(report.render())
    if not report.ok:
        return EXIT_INVALID
    if config.level == PHYSICAL:
        # a physical document may be meant for `meanfield` only; an off-sideband
        # branch blocks the linear commands but not the document itself
        try:
            sd.scenario()
        except SidebandError as exc:
            print(f"warning: not linearizable: {exc}")
        return EXIT_OK
    sd.scenario()
    return EXIT_OK


def cmd_meanfield(args) -> int:
    sd = _load(args)
    config = network_from(sd.doc)
    if config.level != PHYSICAL:
        raise ScenarioError("meanfield needs network.level = 'physical'")
    validate(config).raise_if_invalid()
    branches = solve_mean_fields(config)
    n = config.n
    cols = ["branch", "x", "stable", "beta_re", "beta_im"]
    for j in range(1, n + 1):
        cols += [f"alpha{j}_re", f"alpha{j}_im", f"delta_eff{j}", f"G{j}_mod", f"G{j}_phase"]
    rows = []
    for i, b in enumerate(branches):
        row = [i, b.x, b.stable, b.beta.real, b.beta.imag]
        for j in range(n):
            G = b.G_eff[j]
            row += [b.alpha[j].real, b.alpha[j].imag, b.delta_eff[j], abs(G), float(np.angle(G))]
        rows.append(row)
    _emit(args, sd, tio.Table(cols, rows, (), sd.hash))
    _note(args, f"{len(branches)} branch(es); stable: {[i for i, b in enumerate(branches) if b.stable]}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    sd = _load(args)
    records = spectrum(sd.scenario(), sd.grid())
    _emit(args, sd, tio.spectrum_table(records, ("xi", "T_fwd", "T_bwd"), sd.hash))
    return EXIT_OK


def cmd_isolate(args) -> int:
    sd = _load(args)
    scenario = sd.scenario()
    grid = sd.grid()
    records = spectrum(scenario, grid)
    _emit(args, sd, tio.spectrum_table(records, ("xi", "T_fwd", "T_bwd", "I", "log10_I"), sd.hash))
    fwd = max(r.T_fwd for r in records)
    bwd = max(r.T_bwd for r in records)
    spans = grid.min() <= -5 and grid.max() >= 5
    for name, worst in (("forward", fwd), ("backward", bwd)):
        verdict = "yes" if worst <= FIPB_THRESHOLD else "no"
        if not spans:
            verdict += " (grid narrower than [-5, 5])"
        _note(args, f"blockade {name}: {verdict}, max rate {worst:.6g}")
    return EXIT_OK


def cmd_route(args) -> int:
    sd = _load(args)
    scenario = sd.scenario()
    rep = routing_report(scenario, sd.grid())
    n = scenario.network.n
    cols = ["xi"] + [f"S{j}" for j in range(1, n + 1)] + ["b_abs2"]
    rows = [(x, *s, b) for x, s, b in zip(rep.xi, rep.S, rep.b_abs2)]
    _emit(args, sd, tio.Table(cols, rows, (("xi", rep.xi),), sd.hash))
    cps = "none" if rep.cps_port is None else f"port {rep.cps_port + 1}"
    shares = ", ".join(f"{s:.6f}" for s in rep.share_at_zero)
    _note(args, f"coherent perfect synthesis at xi=0: {cps}; shares [{shares}]")
    _note(args, f"max |b_-|^2 over grid: {float(np.max(rep.b_abs2)):.6g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    sd = _load(args)
    axes = axes_from(sd.doc)
    sw = sd.doc["sweep"]
    table = run_sweep(sd.doc, axes, sw["metric"], sw["xi"], sd.grid(), _threads(args))
    _emit(args, sd, tio.sweep_table(table, sd.hash))
    return EXIT_OK


def cmd_oracle(args) -> int:
    sd = _load(args)
    scenario = sd.scenario()
    net = scenario.network
    inputs = scenario.signals.inputs
    spec = TrajectorySpec()
    cols = ["xi", "rwa_rel_err", "rwa_drift"]
    if args.two_sideband:
        cols += ["sideband_rwa_error", "stokes_ratio"]
    rows = []
    worst = 0.0
    for x in sd.grid():
        est = integrate_rwa(net, inputs, x, spec)
        ref = solve_response(net, inputs, x)
        ref_vec = np.concatenate([ref.a_minus, [ref.b_minus]])
        est_vec = np.concatenate([est.state.a_minus, [est.state.b_minus]])
        err = float(np.max(np.abs(est_vec - ref_vec)) / np.max(np.abs(ref_vec)))
        worst = max(worst, err)
        row = [x, err, est.drift]
        if args.two_sideband:
            ts = integrate_two_sideband(net, inputs, x, spec)
            row += [ts.rwa_error, ts.stokes_ratio]
        rows.append(row)
    _emit(args, sd, tio.Table(cols, rows, (("xi", tuple(r[0] for r in rows)),), sd.hash))
    _note(args, f"largest oracle/analytic gap: {worst:.3g} (tolerance 1e-6)")
    if worst > 1e-6:
        raise NumericalFailure(f"time-domain oracle disagrees with the analytic response ({worst:.3g})")
    return EXIT_OK


COMMANDS = {
    "validate": (cmd_validate, "check a scenario document"),
    "meanfield": (cmd_meanfield, "list mean-field branches of a physical network"),
    "spectrum": (cmd_spectrum, "forward/backward transmission rates over the grid"),
    "sweep": (cmd_sweep, "1D/2D parameter sweep from the [sweep] section"),
    "isolate": (cmd_isolate, "transmission rates, isolation ratio and blockade check"),
    "route": (cmd_route, "normalized output energies and routing flags"),
    "oracle-check": (cmd_oracle, "compare against time-domain integration"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omniport", description="Steady-state response of multi-port optomechanical networks."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True, metavar="PATH")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--threads", type=int, metavar="N")
        p.add_argument("--grid", metavar="MIN:MAX:COUNT")
        p.add_argument("--quiet", action="store_true")
        if name == "oracle-check":
            p.add_argument(
                "--two-sideband", action="store_true",
                help="also integrate with counter-rotating terms (slow for large omega_m)",
            )
    return parser


def _join_grid(argv: Sequence[str]) -> list[str]:
    # argparse mistakes "-5:5:11" for an option; glue it to its flag
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--grid={nxt}")
        else:
            out.append(tok)
    return out


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_grid(argv))
    handler = COMMANDS[args.command][0]
    try:
        return handler(args)
    except (BracketError, OracleError, NumericalFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ScenarioError, SidebandError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
