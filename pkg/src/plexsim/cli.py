"""Command-line front end.

Exit codes: 0 success, 1 I/O failure, 2 usage error (unknown subcommand or
flag), 3 configuration error, 4 solver error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import scenarios
from .config import RunConfig, load_config, parse_energy
from .eom import pathway_phase
from .errors import ConfigError, InvalidTruncationError, PlexsimError
from .lindblad import solve_system
from .observables import gn_from_distribution, photon_distribution
from .scenarios import Axis, Engine, SweepSpec, evaluate_point
from .serialization import (
    plot_levels,
    plot_spectrum,
    plot_sweep,
    stats_to_dict,
    to_csv,
    to_jsonable,
    write_results,
)
from .spectra import energy_levels, excitation_spectrum

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_SOLVER = 4

log = logging.getLogger("plexsim")


def _energy_arg(text: str) -> float:
    try:
        return parse_energy(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _add_common(p: argparse.ArgumentParser, config_required: bool = True, outputs: bool = True) -> None:
    p.add_argument("--config", required=config_required, help="JSON run configuration")
    p.add_argument("--n-max", type=int, default=None, help="override the Fock truncation")
    if outputs:
        p.add_argument("--out", default=None, help="output file (CSV or JSON)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--plot", nargs="?", const=True, default=None,
                       help="also write an SVG plot (optional path)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plexsim", description="Driven cavity-emitter photon statistics")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("solve", help="steady-state g2, g3 at one drive energy")
    _add_common(p)
    p.add_argument("--omega", default=None, help="drive energy, e.g. '2 eV'")
    p.add_argument("--engine", choices=[e.value for e in Engine], default=None)

    p = sub.add_parser("sweep", help="one- or two-axis parameter sweep from the config 'sweep' block")
    _add_common(p)
    p.add_argument("--engine", choices=[e.value for e in Engine], default=None)

    p = sub.add_parser("levels", help="excitation-manifold energy levels")
    _add_common(p)
    p.add_argument("--max-manifold", type=int, default=None)

    p = sub.add_parser("spectrum", help="weak-drive cavity excitation spectrum")
    _add_common(p)

    p = sub.add_parser("stats", help="photon-number distribution at one drive energy")
    _add_common(p)
    p.add_argument("--omega", default=None)

    p = sub.add_parser("phase", help="two-photon pathway phase difference (one emitter)")
    _add_common(p, outputs=False)
    p.add_argument("--omega", default=None)

    p = sub.add_parser("scenario", help="prebuilt experiments")
    p.add_argument("name", choices=("chemical", "optical", "second-emitter"))
    _add_common(p, config_required=False)
    return parser


def _output_format(args, cfg: RunConfig | None, default: str = "csv") -> str:
    if args.format:
        return args.format
    if cfg is not None and cfg.output.format:
        return cfg.output.format
    out = _out_path(args, cfg)
    if out is not None and Path(out).suffix.lower() == ".json":
        return "json"
    return default


def _out_path(args, cfg: RunConfig | None):
    if getattr(args, "out", None):
        return args.out
    if cfg is not None and cfg.output.path:
        return cfg.output.path
    return None


def _plot_path(args, cfg: RunConfig | None, command: str):
    flag = getattr(args, "plot", None)
    if flag is None and not (cfg is not None and cfg.output.plot):
        return None
    if isinstance(flag, str):
        return flag
    out = _out_path(args, cfg)
    return str(Path(out).with_suffix(".svg")) if out else f"{command}.svg"


def _emit(result, args, cfg, default_format: str, engine: str = "master-equation") -> None:
    fmt = _output_format(args, cfg, default_format)
    out = _out_path(args, cfg)
    if out:
        write_results(result, fmt, out, engine=engine)
        log.info("wrote %s", out)
    elif fmt == "csv":
        sys.stdout.write(to_csv(result, engine))
    else:
        print(json.dumps(to_jsonable(result, engine), indent=2))


def _spec(cfg: RunConfig, args, omega: str | None = None):
    spec = cfg.system_spec()
    if args.n_max is not None:
        try:
            spec = spec.replace(n_max=args.n_max)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if omega is not None:
        spec = spec.with_drive_omega(_energy_arg(omega))
    return spec


def _cmd_solve(args, cfg):
    spec = _spec(cfg, args, args.omega)
    engine = Engine(args.engine or cfg.engine)
    result, phase = evaluate_point(spec, engine, with_phase=spec.n_emitters == 1)
    payload = {**to_jsonable(result, engine.value)}
    if phase is not None:
        payload["delta_theta"] = phase
    if _out_path(args, cfg):
        write_results(result, _output_format(args, cfg, "json"), _out_path(args, cfg), engine=engine.value)
    print(json.dumps(to_jsonable(payload), indent=2))


def _cmd_sweep(args, cfg):
    if cfg.sweep is None:
        raise ConfigError("configuration has no 'sweep' block")
    spec = _spec(cfg, args)
    s = cfg.sweep
    try:
        sweep_spec = SweepSpec(spec, Axis(s.axis1.path, s.axis1.grid.grid()),
                               Axis(s.axis2.path, s.axis2.grid.grid()) if s.axis2 else None,
                               tuple(s.outputs))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"sweep: {exc}") from exc
    result = scenarios.sweep(sweep_spec, Engine(args.engine or cfg.engine))
    _emit(result, args, cfg, "csv")
    plot = _plot_path(args, cfg, "sweep")
    if plot:
        plot_sweep(result, plot)


def _cmd_levels(args, cfg):
    spec = _spec(cfg, args)
    max_manifold = args.max_manifold
    if max_manifold is None:
        max_manifold = cfg.levels.max_manifold if cfg.levels else 3
    try:
        result = energy_levels(spec, max_manifold)
    except PlexsimError as exc:
        raise ConfigError(str(exc)) from exc
    _emit(result, args, cfg, "json")
    plot = _plot_path(args, cfg, "levels")
    if plot:
        plot_levels(result, plot)


def _cmd_spectrum(args, cfg):
    if cfg.spectrum is None:
        raise ConfigError("configuration has no 'spectrum' block")
    spec = _spec(cfg, args)
    try:
        result = excitation_spectrum(spec, cfg.spectrum.omegas.grid())
    except ValueError as exc:
        if isinstance(exc, PlexsimError):
            raise
        raise ConfigError(str(exc)) from exc
    _emit(result, args, cfg, "csv")
    plot = _plot_path(args, cfg, "spectrum")
    if plot:
        plot_spectrum(result, plot, energy_levels(spec, 1))


def _cmd_stats(args, cfg):
    spec = _spec(cfg, args, args.omega)
    rho = solve_system(spec)
    stats = photon_distribution(rho, spec)
    if _out_path(args, cfg):
        write_results(stats, _output_format(args, cfg, "json"), _out_path(args, cfg))
    payload = {**stats_to_dict(stats), "drive_omega": spec.drive_omega,
               "g2": gn_from_distribution(stats, 2), "g3": gn_from_distribution(stats, 3)}
    print(json.dumps(to_jsonable(payload), indent=2))


def _cmd_phase(args, cfg):
    spec = _spec(cfg, args, args.omega)
    if spec.n_emitters != 1:
        raise ConfigError(f"phase needs exactly one emitter, config has {spec.n_emitters}")
    print(json.dumps(to_jsonable({"drive_omega": spec.drive_omega,
                                  "delta_theta": pathway_phase(spec)}), indent=2))


def _cmd_scenario(args, cfg):
    block = cfg.scenario if cfg is not None else None
    if block is not None and block.name != args.name:
        raise ConfigError(f"config describes scenario {block.name!r}, not {args.name!r}")
    n_max = args.n_max or (cfg.n_max if cfg is not None and cfg.n_max else 6)
    if args.name == "chemical":
        f = block.fractions.grid() if block else tuple(x / 10 for x in range(11))
        omegas = block.omegas.grid() if block else (2.0,)
        peak = block.peak_coupling if block else 0.1
        result = scenarios.chemical_scenario(f, omegas, peak, n_max=n_max)
    elif args.name == "optical":
        alphas = block.alphas_deg.grid() if block else tuple(range(-90, 91, 5))
        omega = block.omega if block else 2.0
        peak = block.peak_coupling if block else 0.085
        result = scenarios.optical_scenario(alphas, omega, peak, n_max=n_max)
    else:
        if cfg is not None and cfg.system is not None:
            base = _spec(cfg, args)
        else:
            base = scenarios.resonant_single_spec(n_max)
        if block:
            result = scenarios.second_emitter_map(base, block.delta_e2c.grid(), block.omegas.grid(),
                                                  block.g_e2, block.gamma_e2)
        else:
            result = scenarios.second_emitter_map(base, scenarios.default_grid(-0.2, 0.2),
                                                  scenarios.default_grid(1.8, 2.2), 0.08)
    _emit(result, args, cfg, "csv")
    plot = _plot_path(args, cfg, f"scenario-{args.name}")
    if plot:
        plot_sweep(result, plot)


_COMMANDS = {
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "levels": _cmd_levels,
    "spectrum": _cmd_spectrum,
    "stats": _cmd_stats,
    "phase": _cmd_phase,
    "scenario": _cmd_scenario,
}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else None
        _COMMANDS[args.command](args, cfg)
    except (ConfigError, InvalidTruncationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PlexsimError as exc:
        residual = getattr(exc, "residual", None)
        extra = f" (residual {residual:.3e})" if residual is not None else ""
        print(f"solver error [{exc.code}]: {exc}{extra}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run_command())
