"""Command orchestration: compute, then emit CSVs, figures, and a manifest.

Every run writes into one output directory: the effective config echoed as
INI, the delimited tables, SVG renders of them (unless disabled), and last
a manifest.json listing each emitted file with its SHA-256.  Floats are
written with 17 significant digits so repeated runs are byte-identical.

Sweep points (eigendecompositions, plateau lengths) go through a thread
pool; rows are reassembled in sweep order before anything is written, so
thread scheduling never reaches the output bytes.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from . import plotting
from .analysis import PeakList, decay_series, find_peaks, find_peaks_2d, fit_exponential
from .bogoliubov import build_S, build_S_minus, transition_blocks
from .config import RunConfig, render_config
from .errors import ConfigError
from .grids import build_free_basis
from .hamiltonian import PotentialSpec, count_supercritical, spectrum_sweep
from .observables import (
    density_table,
    momentum_spectrum,
    momentum_to_energy,
    pair_statistics,
)
from .propagator import PreparedEvolution

MANIFEST_NAME = "manifest.json"
CONFIG_ECHO_NAME = "config_echo.ini"


def _fmt(x) -> str:
    return f"{float(x):.17g}"


@dataclass
class RunResult:
    out_dir: str
    files: Dict[str, str]

    @property
    def manifest_path(self) -> str:
        return os.path.join(self.out_dir, MANIFEST_NAME)


class _Emitter:
    """Collects emitted files and writes the manifest once at the end."""

    def __init__(self, cfg: RunConfig, out_dir: str):
        self.cfg = cfg
        self.out_dir = out_dir
        self.entries: List[Tuple[str, str, int]] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _register(self, name: str) -> None:
        with open(self.path(name), "rb") as fh:
            payload = fh.read()
        digest = hashlib.sha256(payload).hexdigest()
        self.entries.append((name, digest, len(payload)))

    def csv_table(self, name: str, header: Sequence[str],
                  rows: Iterable[Sequence]) -> None:
        with open(self.path(name), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([c if isinstance(c, str) else _fmt(c)
                                 for c in row])
        self._register(name)

    def text(self, name: str, payload: str) -> None:
        with open(self.path(name), "w", encoding="utf-8") as fh:
            fh.write(payload)
        self._register(name)

    def npy(self, name: str, array: np.ndarray) -> None:
        np.save(self.path(name), array)
        self._register(name)

    def figure(self, name: str, render) -> None:
        if not self.cfg.plots:
            return
        render(self.path(name))
        self._register(name)

    def finish(self) -> RunResult:
        self.text(CONFIG_ECHO_NAME, render_config(self.cfg))
        listing = [
            {"name": n, "sha256": d, "bytes": b}
            for n, d, b in sorted(self.entries)
        ]
        manifest = {
            "command": self.cfg.command,
            "config": CONFIG_ECHO_NAME,
            "files": listing,
        }
        with open(self.path(MANIFEST_NAME), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")
        return RunResult(self.out_dir, {n: d for n, d, _ in self.entries})


def _pool_map(fn, items: Sequence, threads: int) -> List:
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --- spectrum ---------------------------------------------------------------

def run_spectrum(cfg: RunConfig, out_dir: str) -> RunResult:
    emit = _Emitter(cfg, out_dir)
    v0s = np.asarray(cfg.V0_list, dtype=float)
    table = spectrum_sweep(cfg.grid, cfg.potential, v0s, threads=cfg.threads)

    rows = []
    for i, v0 in enumerate(v0s):
        for k in range(table.energies.shape[1]):
            rows.append((v0, k, table.energies[i, k], table.localization[i, k]))
    emit.csv_table("spectrum.csv",
                   ["V0", "eigen_index", "energy", "localization"], rows)

    def count_at(v0: float):
        spec = PotentialSpec(float(v0), cfg.potential.D, cfg.potential.W)
        return count_supercritical(cfg.grid, spec)

    counts = _pool_map(count_at, list(v0s), cfg.threads)
    emit.csv_table("supercritical.csv", ["V0", "b"],
                   [(c.V0, str(c.b)) for c in counts])
    for c in counts:
        if c.ambiguous:
            print(f"warning: supercritical count at V0={c.V0:g} is ambiguous "
                  f"(level crossing says {c.b}, localized weight says "
                  f"{c.b_localized})", file=sys.stderr)
    emit.figure("spectrum.svg", lambda p: plotting.plot_spectrum(
        v0s, [table.energies[:, k] for k in range(table.energies.shape[1])], p))
    return emit.finish()


# --- evolve -----------------------------------------------------------------

def _statistics_point(prep: PreparedEvolution, T: float, nmax: int):
    blocks = transition_blocks(prep.evolved_basis(T, "both"))
    s_plus = build_S(blocks)
    s_minus = build_S_minus(blocks)
    stats = pair_statistics(s_plus, nmax)
    return blocks, s_plus, s_minus, stats


def run_evolve(cfg: RunConfig, out_dir: str) -> RunResult:
    emit = _Emitter(cfg, out_dir)
    basis = build_free_basis(cfg.grid)
    prep = PreparedEvolution(basis, cfg.potential, cfg.delta_T,
                             cfg.ramp_step, cfg.method).prepare()

    def point(T: float):
        blocks, s_plus, s_minus, stats = _statistics_point(prep, T, cfg.nmax)
        return T, blocks, s_plus, s_minus, stats

    points = _pool_map(point, [float(t) for t in cfg.T_list], cfg.threads)

    header = (["T"] + [f"N_{n}" for n in range(1, cfg.nmax + 1)]
              + [f"C_{n}" for n in range(0, cfg.nmax + 1)]
              + ["tr_S", "tr_S_minus"])
    rows = []
    for T, blocks, s_plus, s_minus, stats in points:
        rows.append([T, *stats.numbers, *stats.probabilities,
                     s_plus.expected_number, s_minus.expected_number])
        if cfg.save_matrices:
            tag = _fmt(T)
            emit.npy(f"transition_T{tag}.npy", blocks.stacked)
            emit.npy(f"s_electron_T{tag}.npy", s_plus.matrix)
            emit.npy(f"s_positron_T{tag}.npy", s_minus.matrix)
    emit.csv_table("pairs.csv", header, rows)

    ts = np.array([p[0] for p in points])
    probs = np.array([p[4].probabilities[:min(cfg.nmax, 3) + 1]
                      for p in points])
    emit.figure("pairs.svg", lambda path: plotting.plot_pair_probabilities(
        ts, probs, path))
    return emit.finish()


# --- observables ------------------------------------------------------------

def _peak_rows(name: str, peaks: PeakList, energies: bool) -> List[list]:
    rows = []
    for pk in peaks:
        loc2 = _fmt(pk.location[1]) if len(pk.location) > 1 else ""
        hw2 = _fmt(pk.half_width[1]) if len(pk.half_width) > 1 else ""
        energy = _fmt(momentum_to_energy(abs(pk.location[0]))) if energies else ""
        rows.append([name, _fmt(pk.location[0]), loc2, _fmt(pk.height),
                     _fmt(pk.half_width[0]), hw2, energy])
    return rows


def run_observables(cfg: RunConfig, out_dir: str) -> RunResult:
    emit = _Emitter(cfg, out_dir)
    basis = build_free_basis(cfg.grid)
    prep = PreparedEvolution(basis, cfg.potential, cfg.delta_T,
                             cfg.ramp_step, cfg.method).prepare()
    blocks, s_plus, s_minus, stats = _statistics_point(
        prep, float(cfg.T), cfg.nmax)

    emit.csv_table(
        "pairs.csv", ["n", "N_n", "C_n"],
        [(str(n + 1), stats.numbers[n], stats.probabilities[n + 1])
         for n in range(cfg.nmax)],
    )
    if cfg.save_matrices:
        emit.npy("transition.npy", blocks.stacked)
        emit.npy("s_electron.npy", s_plus.matrix)
        emit.npy("s_positron.npy", s_minus.matrix)

    peak_rows: List[list] = []
    tog = cfg.toggles

    if tog.rho1 or tog.rho2:
        table = density_table(s_plus, basis, step=cfg.decimate)
        if tog.rho1:
            emit.csv_table("rho1.csv", ["x", "rho1"],
                           list(zip(table.x, table.rho1)))
            emit.figure("rho1.svg", lambda p: plotting.plot_density(
                table.x, table.rho1, p))
            if tog.peaks:
                peak_rows += _peak_rows(
                    "rho1", find_peaks(table.x, table.rho1), energies=False)
        if tog.rho2:
            rows = [(x1, x2, table.rho2[i, j])
                    for i, x1 in enumerate(table.x_pair)
                    for j, x2 in enumerate(table.x_pair)]
            emit.csv_table("rho2.csv", ["x1", "x2", "rho2"], rows)
            emit.figure("rho2.svg", lambda p: plotting.plot_heatmap(
                table.x_pair, table.x_pair, table.rho2, p,
                r"$x_1$ [$\lambda_C$]", r"$x_2$ [$\lambda_C$]",
                "two-particle position density"))
            if tog.peaks:
                peak_rows += _peak_rows(
                    "rho2",
                    find_peaks_2d(table.x_pair, table.x_pair, table.rho2),
                    energies=False)

    if tog.chi1 or tog.chi2:
        spec_e = momentum_spectrum(s_plus, basis)
        spec_p = momentum_spectrum(s_minus, basis)
        if tog.chi1:
            emit.csv_table(
                "chi1.csv", ["p", "chi1_electron", "chi1_positron"],
                list(zip(spec_e.momenta, spec_e.chi1, spec_p.chi1)))
            emit.figure("chi1.svg", lambda p: plotting.plot_momentum_spectra(
                spec_e.momenta, spec_e.chi1, spec_p.chi1, p))
            if tog.peaks:
                peak_rows += _peak_rows(
                    "chi1_electron", find_peaks(spec_e.momenta, spec_e.chi1),
                    energies=True)
                peak_rows += _peak_rows(
                    "chi1_positron", find_peaks(spec_p.momenta, spec_p.chi1),
                    energies=True)
        if tog.chi2:
            rows = [(p1, p2, spec_p.chi2[i, j])
                    for i, p1 in enumerate(spec_p.momenta)
                    for j, p2 in enumerate(spec_p.momenta)]
            emit.csv_table("chi2.csv", ["p1", "p2", "chi2_positron"], rows)
            emit.figure("chi2.svg", lambda p: plotting.plot_heatmap(
                spec_p.momenta, spec_p.momenta, spec_p.chi2, p,
                r"$p_1$ [$m_e c$]", r"$p_2$ [$m_e c$]",
                "two-particle positron momentum density"))
            if tog.peaks:
                peak_rows += _peak_rows(
                    "chi2_positron",
                    find_peaks_2d(spec_p.momenta, spec_p.momenta, spec_p.chi2),
                    energies=True)

    if tog.peaks:
        emit.csv_table(
            "peaks.csv",
            ["table", "location1", "location2", "height",
             "half_width1", "half_width2", "energy"],
            peak_rows,
        )
    return emit.finish()


# --- decay ------------------------------------------------------------------

def run_decay(cfg: RunConfig, out_dir: str) -> RunResult:
    emit = _Emitter(cfg, out_dir)
    basis = build_free_basis(cfg.grid)
    prep = PreparedEvolution(basis, cfg.potential, cfg.delta_T,
                             cfg.ramp_step, cfg.method).prepare()

    def point(T: float) -> Tuple[float, np.ndarray]:
        s_plus = build_S(transition_blocks(prep.evolved_basis(T, "both")))
        return T, pair_statistics(s_plus, cfg.nmax).probabilities

    points = _pool_map(point, [float(t) for t in cfg.T_list], cfg.threads)
    ts = np.array([p[0] for p in points])
    c_n = np.array([p[1][cfg.pair_index] for p in points])

    series = decay_series(ts, c_n, cfg.pair_index)
    fit = fit_exponential(series)

    emit.csv_table(
        "decay.csv", ["T", f"C_{cfg.pair_index}", f"d_{cfg.pair_index}"],
        list(zip(series.T, series.C, series.d)))
    record = {
        "pair_index": cfg.pair_index,
        "gamma": fit.gamma,
        "log_intercept": fit.log_intercept,
        "residual": fit.residual,
        "window": list(fit.window),
        "n_points": fit.n_points,
        "c_infinity": series.c_infinity,
        "asymptote_unreliable": series.unreliable,
    }
    emit.text("fit.json", json.dumps(record, indent=1, sort_keys=True) + "\n")
    emit.figure("decay.svg", lambda p: plotting.plot_decay(
        series.T, series.d, fit.gamma, fit.log_intercept, fit.window, p))
    return emit.finish()


RUNNERS = {
    "spectrum": run_spectrum,
    "evolve": run_evolve,
    "observables": run_observables,
    "decay": run_decay,
}


def run_command(cfg: RunConfig, out_dir: str) -> RunResult:
    cfg.validate()
    try:
        runner = RUNNERS[cfg.command]
    except KeyError:
        raise ConfigError(f"command: unknown command {cfg.command!r}")
    return runner(cfg, out_dir)
