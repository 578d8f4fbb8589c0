"""Run configuration: defaults, config files, and command-line flags.

Precedence is flag > config-file key > default.  Config files are flat
``key = value`` text using the long flag names as keys; ``#`` starts a comment.
"""
from __future__ import annotations

import argparse
import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .charging import DEFAULT_TAU_MAX, DEFAULT_TAU_POINTS, tau_grid
from .eigensolver import DEFAULT_SEED, SolverOptions
from .errors import BatteryError
from .operators import max_sites
from .sweep import DEFAULT_H_GRID, DEFAULT_KAPPA_GRID, SweepProtocol, uniform_grid

COMMANDS = ("charge", "sweep", "critical", "validate")
PROTOCOLS = {
    "kappa-quench": "kappa_quench",
    "field-quench-tfi": "field_quench_tfi",
    "hybrid": "hybrid_tfi_annni",
    "custom": "custom",
}


class ConfigError(BatteryError, ValueError):
    """Invalid, unknown, or inconsistent configuration."""


def parse_grid(text: str) -> tuple[float, float, int]:
    """``"a:b:n"`` -> (a, b, n), n uniform points including both ends."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {text!r} must look like start:stop:points")
    try:
        start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"grid {text!r}: {exc}") from exc
    if n < 1:
        raise ConfigError(f"grid {text!r} needs at least one point")
    if n > 1 and not stop > start:
        raise ConfigError(f"grid {text!r}: stop must exceed start")
    return start, stop, n


def format_grid(grid) -> str:
    start, stop, n = grid
    return f"{start!r}:{stop!r}:{n}"


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_seed(text) -> int:
    return int(text, 0) if isinstance(text, str) else int(text)


def _parse_protocol(text) -> str:
    if text not in PROTOCOLS:
        raise ValueError(f"unknown protocol {text!r}; choose from {sorted(PROTOCOLS)}")
    return text


def _parse_axis(text) -> str:
    if text not in ("kappa", "h"):
        raise ValueError(f"axis must be 'kappa' or 'h', got {text!r}")
    return text


# key (long flag name) -> (field name, converter)
KEYS = {
    "protocol": ("protocol", _parse_protocol),
    "L": ("L", int),
    "h": ("h", float),
    "kappa": ("kappa", float),
    "dkappa": ("dkappa", float),
    "dh": ("dh", float),
    "axis": ("axis", _parse_axis),
    "kappa-grid": ("kappa_grid", parse_grid),
    "h-grid": ("h_grid", parse_grid),
    "tau-max": ("tau_max", float),
    "tau-points": ("tau_points", int),
    "workers": ("workers", int),
    "seed": ("seed", _parse_seed),
    "out": ("out", str),
    "emit-svg": ("emit_svg", _parse_bool),
}


@dataclass(frozen=True)
class RunConfig:
    command: str = "sweep"
    protocol: str = "kappa-quench"
    L: int = 16
    h: float = 0.4
    kappa: float = 0.0
    dkappa: float = 0.1
    dh: float = 0.1
    # only consulted by the custom protocol
    axis: str = "kappa"
    kappa_grid: tuple[float, float, int] = DEFAULT_KAPPA_GRID
    h_grid: tuple[float, float, int] = DEFAULT_H_GRID
    tau_max: float = DEFAULT_TAU_MAX
    tau_points: int = DEFAULT_TAU_POINTS
    workers: int = 1
    seed: int = DEFAULT_SEED
    out: str = "out"
    emit_svg: bool = False

    @property
    def kind(self) -> str:
        return PROTOCOLS[self.protocol]

    def solver_options(self) -> SolverOptions:
        return SolverOptions(seed=self.seed)

    def sweep_protocol(self) -> SweepProtocol:
        kind = self.kind
        axis = self.axis if kind == "custom" else ("kappa" if kind == "kappa_quench" else "h")
        grid = uniform_grid(*(self.kappa_grid if axis == "kappa" else self.h_grid))
        return SweepProtocol(
            kind=kind,
            grid=grid,
            L=self.L,
            h=self.h,
            kappa=self.kappa,
            dkappa=self.dkappa,
            dh=self.dh,
            taus=tau_grid(self.tau_max, self.tau_points),
            axis=axis,
        )

    def single_point(self) -> float:
        """Axis value used by ``charge``: the configured kappa or h."""
        return self.kappa if self.sweep_protocol().axis == "kappa" else self.h

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        limit = max_sites()
        if not 1 <= self.L <= limit:
            raise ConfigError(
                f"L={self.L} is outside 1..{limit}; lower --L or raise QB_MAX_L"
            )
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.command == "validate":
            return self
        try:
            protocol = self.sweep_protocol()
            points = [self.single_point()] if self.command == "charge" else protocol.grid
            for x in points:
                protocol.quench(x)
        except BatteryError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
        return self

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["kappa_grid"] = list(self.kappa_grid)
        out["h_grid"] = list(self.h_grid)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("kappa_grid", "h_grid"):
            if key in data:
                start, stop, n = data[key]
                data[key] = (float(start), float(stop), int(n))
        return cls(**data)

    def to_config_text(self) -> str:
        values = self.to_dict()
        lines = []
        for key, (name, _) in KEYS.items():
            value = getattr(self, name)
            if name.endswith("_grid"):
                text = format_grid(value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(values[name])
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file into field overrides."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        name, convert = KEYS[key]
        try:
            overrides[name] = convert(value)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return overrides


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _argtype(convert):
    def wrapped(text):
        try:
            return convert(text)
        except ConfigError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    wrapped.__name__ = getattr(convert, "__name__", "value")
    return wrapped


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, allow_abbrev=False)
    for key, (name, convert) in KEYS.items():
        if name == "emit_svg":
            common.add_argument("--emit-svg", dest=name, action="store_const", const=True,
                                default=None, help="also write SVG figures")
            continue
        common.add_argument(f"--{key}", dest=name, type=_argtype(convert), default=None)
    common.add_argument("--config", default=None, help="flat key = value config file")

    parser = _Parser(prog="annni-battery", description="ANNNI quantum-battery charging simulator",
                     allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("charge", parents=[common], help="single quench -> trace CSV")
    sub.add_parser("sweep", parents=[common], help="protocol sweep -> sweep CSV")
    sub.add_parser("critical", parents=[common], help="fidelity locator -> JSON")
    sub.add_parser("validate", parents=[common], help="oracle checks at L <= 10")
    return parser


def parse_config(argv, config_file=None) -> RunConfig:
    """Resolve a fully populated :class:`RunConfig` from ``argv``."""
    args = build_parser().parse_args(list(argv))
    values = {}
    path = args.config or config_file
    if path is not None:
        values.update(read_config_file(path))
    for _, (name, _) in KEYS.items():
        flag_value = getattr(args, name)
        if flag_value is not None:
            values[name] = flag_value
    return RunConfig(command=args.command, **values).validate()
