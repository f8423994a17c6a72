"""Transition amplitudes between free modes and their pair correlations.

The evolved basis yields the single-particle transition matrix; its
sign-sector blocks G(nu, nu') carry all information about created pairs.
The Hermitian matrices S (electrons) and S- (positrons) are quadratic in
the sea-to-positive and positive-to-sea blocks respectively, and every
observable downstream is a function of them.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, ContractViolationError
from .propagator import EvolvedBasis

STACKED_UNITARITY_TOL = 1e-7
HERMITICITY_TOL = 1e-10
EIGENVALUE_SLACK = 1e-9


@dataclass(frozen=True)
class TransitionBlocks:
    """Sign-sector blocks of the single-particle transition matrix.

    g_pm[p, q] is the amplitude of free positive mode p in the evolved
    state that started as negative mode q, and so on. Rows and columns
    are ordered by the momentum index of the free basis.
    """

    g_pp: np.ndarray
    g_pm: np.ndarray
    g_mp: np.ndarray
    g_mm: np.ndarray
    grid_hash: str
    schedule_hash: str

    def __post_init__(self):
        n = self.g_pp.shape[0]
        for name in ("g_pp", "g_pm", "g_mp", "g_mm"):
            block = getattr(self, name)
            if block.shape != (n, n):
                raise ConfigError(f"{name} has shape {block.shape}, want {(n, n)}")
        stacked = self.stacked
        defect = np.max(np.abs(stacked.conj().T @ stacked - np.eye(2 * n)))
        if defect > STACKED_UNITARITY_TOL:
            raise ContractViolationError(
                f"stacked transition matrix not unitary: defect {defect:.3e}"
            )

    @property
    def stacked(self) -> np.ndarray:
        return np.block([[self.g_pp, self.g_pm], [self.g_mp, self.g_mm]])


def transition_blocks(*evolved: EvolvedBasis) -> TransitionBlocks:
    """Assemble the full transition matrix from evolved basis blocks.

    Accepts either a single evolution of all modes or the positive and
    negative halves separately; the pieces must come from the same grid
    and schedule.
    """
    if not evolved:
        raise ConfigError("no evolved bases given")
    grid_hash = evolved[0].grid_hash
    schedule_hash = evolved[0].schedule_hash
    for ev in evolved[1:]:
        if ev.grid_hash != grid_hash:
            raise ConfigError("evolved bases come from different grids")
        if ev.schedule_hash != schedule_hash:
            raise ConfigError("evolved bases come from different schedules")

    indices = np.concatenate([ev.mode_indices for ev in evolved])
    if np.unique(indices).size != indices.size:
        raise ConfigError("evolved bases overlap in mode coverage")
    m = evolved[0].coefficients.shape[0]
    if indices.size != m:
        raise ConfigError(
            f"evolved bases cover {indices.size} of {m} modes; need all"
        )

    full = np.empty((m, m), dtype=np.complex128)
    for ev in evolved:
        full[:, ev.mode_indices] = ev.coefficients

    n = m // 2
    return TransitionBlocks(
        full[:n, :n].copy(), full[:n, n:].copy(),
        full[n:, :n].copy(), full[n:, n:].copy(),
        grid_hash, schedule_hash,
    )


@dataclass(frozen=True)
class OverlapMatrix:
    """Hermitian pair-correlation matrix for one created species.

    Eigenvalues live in [0, 1] by the exclusion principle; the trace is
    the expected particle number of the species.
    """

    matrix: np.ndarray
    species: str

    def __post_init__(self):
        if self.species not in ("electron", "positron"):
            raise ConfigError(f"unknown species {self.species!r}")
        defect = np.max(np.abs(self.matrix - self.matrix.conj().T))
        if defect > HERMITICITY_TOL:
            raise ContractViolationError(
                f"overlap matrix not Hermitian: defect {defect:.3e}"
            )
        lam = self.eigenvalues
        if lam.size and (lam[0] < -EIGENVALUE_SLACK
                         or lam[-1] > 1.0 + EIGENVALUE_SLACK):
            raise ContractViolationError(
                f"overlap eigenvalues outside [0, 1]: "
                f"[{lam[0]:.3e}, {lam[-1]:.3e}]"
            )

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Ascending real eigenvalues (the pair-mode occupations)."""
        return np.linalg.eigvalsh(self.matrix)

    @property
    def expected_number(self) -> float:
        return float(np.real(np.trace(self.matrix)))


def build_S(blocks: TransitionBlocks) -> OverlapMatrix:
    """Electron correlation matrix S[p, p'] = sum_q g_pm[p, q]* g_pm[p', q]."""
    g = blocks.g_pm
    return OverlapMatrix(g.conj() @ g.T, "electron")


def build_S_minus(blocks: TransitionBlocks) -> OverlapMatrix:
    """Positron correlation matrix from the positive-to-sea block."""
    g = blocks.g_mp
    return OverlapMatrix(g.conj() @ g.T, "positron")
