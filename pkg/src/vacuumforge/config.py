"""Run configuration: INI parsing, per-command defaults, validation.

Config files are INI with sections [grid], [potential], [ramp],
[observables], [run].  Every key is optional; missing keys keep the
built-in defaults, which reproduce the published well parameters.  List
values (t_list, v0_list) accept comma-separated numbers or start:stop:step
ranges (stop inclusive up to rounding), e.g. "3:93:3" or "10, 20, 50".

There is no random state anywhere: a config fully determines every output
byte, which is what makes golden-file runs meaningful.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from .errors import ConfigError
from .grids import Grid, make_grid
from .hamiltonian import PotentialSpec, RampSpec

COMMANDS = ("spectrum", "evolve", "observables", "decay")

GRID_X_MIN = -34.25
GRID_X_MAX = 34.25
GRID_POINTS = 512
DELTA_T = 4.7
SINGLE_PAIR_V0 = -2.85
TWO_PAIR_V0 = -3.6


@dataclass(frozen=True)
class ObservableToggles:
    rho1: bool = True
    rho2: bool = True
    chi1: bool = True
    chi2: bool = True
    peaks: bool = True

    def any_tables(self) -> bool:
        return self.rho1 or self.rho2 or self.chi1 or self.chi2


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs; validated against the target command."""

    command: str
    grid: Grid
    potential: PotentialSpec
    delta_T: float
    T: Optional[float]
    T_list: Optional[Tuple[float, ...]]
    V0_list: Optional[Tuple[float, ...]]
    toggles: ObservableToggles
    nmax: int
    pair_index: int
    decimate: int
    ramp_step: float
    method: str
    threads: int
    save_matrices: bool
    plots: bool

    def ramp(self, T: Optional[float] = None) -> RampSpec:
        chosen = self.T if T is None else T
        if chosen is None:
            raise ConfigError("ramp.t: no plateau duration configured")
        return RampSpec(self.delta_T, float(chosen))

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown command {self.command!r}")
        if self.nmax < 1:
            raise ConfigError(f"run.nmax: must be >= 1, got {self.nmax}")
        if self.pair_index < 1 or self.pair_index > self.nmax:
            raise ConfigError(
                f"run.pair_index: must be in 1..nmax, got {self.pair_index}"
            )
        if self.decimate < 1:
            raise ConfigError(
                f"run.decimate: must be >= 1, got {self.decimate}"
            )
        if self.threads < 1:
            raise ConfigError(f"run.threads: must be >= 1, got {self.threads}")
        if self.command == "spectrum":
            if not self.V0_list:
                raise ConfigError(
                    "potential.v0_list: spectrum needs a nonempty V0 list"
                )
        elif self.command == "evolve":
            if not self.T_list:
                raise ConfigError("ramp.t_list: evolve needs a T list")
            if any(t < 0 for t in self.T_list):
                raise ConfigError("ramp.t_list: plateau durations must be >= 0")
        elif self.command == "observables":
            if self.T is None:
                raise ConfigError("ramp.t: observables needs a single T")
            if self.T < 0:
                raise ConfigError("ramp.t: plateau duration must be >= 0")
        elif self.command == "decay":
            if not self.T_list or len(self.T_list) < 5:
                raise ConfigError(
                    "ramp.t_list: decay needs at least 5 T samples"
                )
        # Constructing the ramp catches bad delta_T / step combinations early.
        RampSpec(self.delta_T, 0.0)
        if self.ramp_step <= 0 or self.ramp_step > self.delta_T / 50.0:
            raise ConfigError(
                f"run.ramp_step: must be in (0, delta_T/50], got "
                f"{self.ramp_step}"
            )
        return self


def paper_defaults(command: str) -> RunConfig:
    """Defaults reproducing the published figures for each command."""
    if command not in COMMANDS:
        raise ConfigError(f"command: unknown command {command!r}")
    grid = make_grid(GRID_X_MIN, GRID_X_MAX, GRID_POINTS)
    base = RunConfig(
        command=command,
        grid=grid,
        potential=PotentialSpec(TWO_PAIR_V0),
        delta_T=DELTA_T,
        T=None,
        T_list=None,
        V0_list=None,
        toggles=ObservableToggles(),
        nmax=6,
        pair_index=2,
        decimate=2,
        ramp_step=0.01,
        method="suzuki4",
        threads=1,
        save_matrices=False,
        plots=True,
    )
    if command == "spectrum":
        v0s = tuple(round(-5.0 + 0.05 * k, 10) for k in range(101))
        return replace(base, V0_list=v0s)
    if command == "evolve":
        ts = tuple(float(t) for t in range(3, 94, 3))
        return replace(base, potential=PotentialSpec(SINGLE_PAIR_V0),
                       T_list=ts)
    if command == "observables":
        return replace(base, T=90.0)
    # decay: two-pair well, sampled over the clean exponential regime of
    # the finite box (past T ~ 68 periodic-image recurrences poison the
    # asymptote estimate).
    ts = tuple(float(t) for t in range(2, 57, 2))
    return replace(base, T_list=ts)


def _parse_floats(raw: str, where: str) -> Tuple[float, ...]:
    raw = raw.strip()
    if not raw:
        return ()
    if ":" in raw and "," not in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{where}: ranges use start:stop:step, got {raw!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{where}: non-numeric range bound in {raw!r}")
        if step <= 0:
            raise ConfigError(f"{where}: range step must be positive")
        out = []
        k = 0
        # Integer stepping avoids drift over long ranges.
        while True:
            v = start + k * step
            if v > stop + 1e-9 * max(1.0, abs(stop)):
                break
            out.append(round(v, 12))
            k += 1
        return tuple(out)
    try:
        return tuple(float(p) for p in raw.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"{where}: expected comma-separated numbers, got {raw!r}")


_KNOWN = {
    "grid": {"x_min", "x_max", "n_points"},
    "potential": {"v0", "d", "w", "v0_list"},
    "ramp": {"delta_t", "t", "t_list"},
    "observables": {"rho1", "rho2", "chi1", "chi2", "peaks"},
    "run": {"nmax", "pair_index", "decimate", "ramp_step", "method",
            "threads", "save_matrices", "plots"},
}


def _get_bool(section, key: str, where: str) -> bool:
    try:
        return section.getboolean(key)
    except ValueError:
        raise ConfigError(f"{where}: expected a boolean, got {section[key]!r}")


def parse_config(text: str, command: str,
                 base: Optional[RunConfig] = None) -> RunConfig:
    """Overlay INI text onto the per-command defaults and validate."""
    cfg = paper_defaults(command) if base is None else base
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}")

    for section in parser.sections():
        if section not in _KNOWN:
            raise ConfigError(f"{section}: unknown config section")
        for key in parser[section]:
            if key not in _KNOWN[section]:
                raise ConfigError(f"{section}.{key}: unknown config key")

    def fget(section: str, key: str, current: float) -> float:
        if not parser.has_option(section, key):
            return current
        try:
            return parser.getfloat(section, key)
        except ValueError:
            raise ConfigError(
                f"{section}.{key}: expected a number, got "
                f"{parser.get(section, key)!r}"
            )

    def iget(section: str, key: str, current: int) -> int:
        if not parser.has_option(section, key):
            return current
        try:
            return parser.getint(section, key)
        except ValueError:
            raise ConfigError(
                f"{section}.{key}: expected an integer, got "
                f"{parser.get(section, key)!r}"
            )

    x_min = fget("grid", "x_min", cfg.grid.x_min)
    x_max = fget("grid", "x_max", cfg.grid.x_max)
    n_points = iget("grid", "n_points", cfg.grid.n_points)
    grid = make_grid(x_min, x_max, n_points)

    v0 = fget("potential", "v0", cfg.potential.V0)
    d = fget("potential", "d", cfg.potential.D)
    w = fget("potential", "w", cfg.potential.W)
    potential = PotentialSpec(v0, d, w)

    v0_list = cfg.V0_list
    if parser.has_option("potential", "v0_list"):
        v0_list = _parse_floats(parser.get("potential", "v0_list"),
                                "potential.v0_list")

    delta_T = fget("ramp", "delta_t", cfg.delta_T)
    T = cfg.T
    if parser.has_option("ramp", "t"):
        T = fget("ramp", "t", 0.0)
    T_list = cfg.T_list
    if parser.has_option("ramp", "t_list"):
        T_list = _parse_floats(parser.get("ramp", "t_list"), "ramp.t_list")

    toggles = cfg.toggles
    if parser.has_section("observables"):
        sec = parser["observables"]
        toggles = ObservableToggles(
            rho1=_get_bool(sec, "rho1", "observables.rho1")
            if "rho1" in sec else toggles.rho1,
            rho2=_get_bool(sec, "rho2", "observables.rho2")
            if "rho2" in sec else toggles.rho2,
            chi1=_get_bool(sec, "chi1", "observables.chi1")
            if "chi1" in sec else toggles.chi1,
            chi2=_get_bool(sec, "chi2", "observables.chi2")
            if "chi2" in sec else toggles.chi2,
            peaks=_get_bool(sec, "peaks", "observables.peaks")
            if "peaks" in sec else toggles.peaks,
        )

    method = cfg.method
    if parser.has_option("run", "method"):
        method = parser.get("run", "method").strip()

    out = replace(
        cfg,
        grid=grid,
        potential=potential,
        delta_T=delta_T,
        T=T,
        T_list=T_list,
        V0_list=v0_list,
        toggles=toggles,
        nmax=iget("run", "nmax", cfg.nmax),
        pair_index=iget("run", "pair_index", cfg.pair_index),
        decimate=iget("run", "decimate", cfg.decimate),
        ramp_step=fget("run", "ramp_step", cfg.ramp_step),
        method=method,
        threads=iget("run", "threads", cfg.threads),
        save_matrices=parser.getboolean("run", "save_matrices")
        if parser.has_option("run", "save_matrices") else cfg.save_matrices,
        plots=parser.getboolean("run", "plots")
        if parser.has_option("run", "plots") else cfg.plots,
    )
    return out.validate()


def load_config(path: str, command: str,
                base: Optional[RunConfig] = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"config file {path}: {exc}")
    return parse_config(text, command, base)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def render_config(cfg: RunConfig) -> str:
    """Echo the effective config as INI; parsing it back is lossless."""
    parser = configparser.ConfigParser()
    parser["grid"] = {
        "x_min": _fmt(cfg.grid.x_min),
        "x_max": _fmt(cfg.grid.x_max),
        "n_points": str(cfg.grid.n_points),
    }
    pot = {"v0": _fmt(cfg.potential.V0), "d": _fmt(cfg.potential.D),
           "w": _fmt(cfg.potential.W)}
    if cfg.V0_list is not None:
        pot["v0_list"] = ", ".join(_fmt(v) for v in cfg.V0_list)
    parser["potential"] = pot
    ramp = {"delta_t": _fmt(cfg.delta_T)}
    if cfg.T is not None:
        ramp["t"] = _fmt(cfg.T)
    if cfg.T_list is not None:
        ramp["t_list"] = ", ".join(_fmt(t) for t in cfg.T_list)
    parser["ramp"] = ramp
    parser["observables"] = {
        "rho1": str(cfg.toggles.rho1).lower(),
        "rho2": str(cfg.toggles.rho2).lower(),
        "chi1": str(cfg.toggles.chi1).lower(),
        "chi2": str(cfg.toggles.chi2).lower(),
        "peaks": str(cfg.toggles.peaks).lower(),
    }
    parser["run"] = {
        "nmax": str(cfg.nmax),
        "pair_index": str(cfg.pair_index),
        "decimate": str(cfg.decimate),
        "ramp_step": _fmt(cfg.ramp_step),
        "method": cfg.method,
        "threads": str(cfg.threads),
        "save_matrices": str(cfg.save_matrices).lower(),
        "plots": str(cfg.plots).lower(),
    }
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()
