"""Static SVG renders of the CSV tables.

Plots are a convenience layer: the CSVs are the contract, and nothing here
feeds back into the numbers.  Rendering is pinned for reproducibility: the
Agg backend, a fixed hash salt for SVG element ids, and no embedded
creation date, so identical data produces identical SVG bytes.
"""
from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  backend must be set first
import numpy as np  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "vacuumforge"

_META = {"Date": None}


def _save(fig, path: str) -> str:
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def plot_spectrum(v0: np.ndarray, energy_rows: Sequence[np.ndarray],
                  path: str) -> str:
    """Eigenvalue flow against potential depth with the mass gap shaded."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for row in energy_rows:
        ax.plot(v0, row, lw=0.5, color="tab:blue")
    ax.axhspan(-1.0, 1.0, color="0.85", zorder=0)
    ax.set_xlabel(r"$V_0$ [$m_e c^2$]")
    ax.set_ylabel(r"energy [$m_e c^2$]")
    ax.set_ylim(-3.0, 3.0)
    ax.set_title("single-particle spectrum vs potential depth")
    fig.tight_layout()
    return _save(fig, path)


def plot_pair_probabilities(T: np.ndarray, probs: np.ndarray,
                            path: str, labels: Optional[Sequence[str]] = None,
                            x_label: str = "plateau duration T") -> str:
    """C_n curves over a sweep variable (interaction time or depth)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    n_curves = probs.shape[1]
    for k in range(n_curves):
        name = labels[k] if labels else f"$C_{{{k}}}$"
        ax.plot(T, probs[:, k], lw=1.2, label=name)
    ax.set_xlabel(x_label)
    ax.set_ylabel("probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="center right", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_density(x: np.ndarray, rho: np.ndarray, path: str,
                 y_label: str = r"$\varrho_1(x)$") -> str:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(x, rho, lw=1.2, color="tab:red")
    ax.set_xlabel(r"$x$ [$\lambda_C$]")
    ax.set_ylabel(y_label)
    fig.tight_layout()
    return _save(fig, path)


def plot_heatmap(x1: np.ndarray, x2: np.ndarray, table: np.ndarray,
                 path: str, x_label: str, y_label: str, title: str) -> str:
    """Two-coordinate table as a pcolormesh; table[i, j] at (x1[i], x2[j])."""
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    mesh = ax.pcolormesh(x1, x2, table.T, shading="nearest", cmap="inferno")
    fig.colorbar(mesh, ax=ax)
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_momentum_spectra(p: np.ndarray, chi_e: np.ndarray, chi_p: np.ndarray,
                          path: str) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(p, chi_e, lw=1.2, label=r"electron $\chi_1$")
    ax.plot(p, chi_p, lw=1.2, label=r"positron $\chi_1$")
    ax.set_xlabel(r"$p$ [$m_e c$]")
    ax.set_ylabel("single-particle momentum density")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_decay(T: np.ndarray, d: np.ndarray, gamma: float, intercept: float,
               window: tuple, path: str) -> str:
    """d_n on a log scale with the fitted exponential overlaid."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    pos = d > 0
    ax.semilogy(T[pos], d[pos], "k--", lw=1.2, label="data")
    t_fit = np.linspace(window[0], window[1], 50)
    ax.semilogy(t_fit, np.exp(intercept - gamma * t_fit), color="0.5",
                lw=1.8, label=f"fit, rate {gamma:.3f}")
    ax.set_xlabel("plateau duration T")
    ax.set_ylabel("distance to asymptote")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)
