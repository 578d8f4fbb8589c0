"""Command-line entry point: ``annni-battery {charge,sweep,critical,validate}``.

Exit codes: 0 success, 1 usage/config error, 2 numerical failure, 3 partial sweep.
"""
from __future__ import annotations

import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .charging import run_charging
from .config import ConfigError, parse_config
from .errors import BatteryError, DomainError, NumericalError
from .io import OutputError, dump_json, emit_sweep_csv, emit_trace_csv, sha256_file, write_json
from .svg import Band, Series, emit_figure_svg
from .sweep import critical_band, run_sweep
from .validation import run_validation

log = logging.getLogger("annni_battery")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 1, 2, 3

AXIS_LABELS = {"kappa": "kappa (frustration, H0)", "h": "h (transverse field, H0)"}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _manifest(config, started, files, **extra) -> dict:
    manifest = {
        "tool": "annni_battery",
        "version": __version__,
        "config": config.to_dict(),
        "started": started,
        "finished": _now(),
        "files": {Path(p).name: sha256_file(p) for p in files},
    }
    manifest.update(extra)
    return manifest


def cmd_charge(config) -> int:
    started = _now()
    out = Path(config.out)
    protocol = config.sweep_protocol()
    trace = run_charging(protocol.quench(config.single_point()), config.solver_options())
    files = [emit_trace_csv(trace, out / "trace.csv")]
    if config.emit_svg:
        taus = list(trace.taus)
        files.append(emit_figure_svg(
            [Series("W/L", taus, trace.work_per_spin)], out / "trace_work.svg",
            xlabel="tau (1/J1)", ylabel="W(tau)/L (J1 per spin)",
        ))
        files.append(emit_figure_svg(
            [Series("P/L", taus, trace.power_per_spin)], out / "trace_power.svg",
            xlabel="tau (1/J1)", ylabel="P(tau)/L (J1^2 per spin)",
        ))
    if trace.tau_star_at_boundary:
        log.warning("power maximum sits at tau_max=%s and may not be interior", trace.tau_star)
    write_json(out / "manifest.json", _manifest(
        config, started, files,
        e0=trace.e0,
        p_max_per_spin=trace.p_max_per_spin,
        tau_star=trace.tau_star,
        tau_star_at_boundary=trace.tau_star_at_boundary,
        ground_degenerate=trace.ground.degenerate,
        ground_gap=trace.ground.gap,
    ))
    print(f"P_max/L = {trace.p_max_per_spin!r} at tau* = {trace.tau_star!r}")
    return EXIT_OK


def cmd_sweep(config) -> int:
    started = _now()
    out = Path(config.out)
    protocol = config.sweep_protocol()
    result = run_sweep(protocol, workers=config.workers, solver_opts=config.solver_options())
    files = [emit_sweep_csv(result, out / "sweep.csv")]
    critical = None
    if config.emit_svg:
        est1, est0 = critical_band(protocol, config.solver_options(), workers=config.workers)
        critical = {"h1": est1.to_dict(), "h0": est0.to_dict()}
        ok = [p for p in result.points if p.status != "failed"]
        if len(ok) >= 2:
            files.append(emit_figure_svg(
                [Series("P_max/L", [p.axis for p in ok], [p.p_max_per_spin for p in ok])],
                out / "sweep.svg",
                bands=[Band(est1.value, est0.value, "H1 to H0 critical")],
                xlabel=AXIS_LABELS[protocol.axis], ylabel="P_max/L (J1^2 per spin)",
            ))
    write_json(out / "manifest.json", _manifest(
        config, started, files, sweep=result.manifest, critical=critical,
    ))
    for p in result.failed:
        log.error("point %s failed: %s", p.axis, p.message)
    print(f"peak P_max/L at {protocol.axis} = {result.peak_axis()!r}")
    return EXIT_PARTIAL if result.partial else EXIT_OK


def cmd_critical(config) -> int:
    started = _now()
    out = Path(config.out)
    est1, est0 = critical_band(config.sweep_protocol(), config.solver_options(), workers=config.workers)
    payload = {"h0": est0.to_dict(), "h1": est1.to_dict()}
    path = write_json(out / "critical.json", payload)
    write_json(out / "manifest.json", _manifest(config, started, [path]))
    print(dump_json({k: {"value": v["value"], "boundary_limited": v["boundary_limited"]}
                     for k, v in payload.items()}), end="")
    return EXIT_OK


def cmd_validate(config) -> int:
    results = run_validation()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


COMMANDS = {"charge": cmd_charge, "sweep": cmd_sweep, "critical": cmd_critical, "validate": cmd_validate}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return COMMANDS[config.command](config)
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, BatteryError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
