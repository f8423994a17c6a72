"""Observables of the created pairs: counting statistics, densities, spectra.

Everything here is a pure function of an OverlapMatrix (and, for position
densities, the free basis). Counting statistics come from the eigenvalues
alone: each eigenvalue is an independent pair-mode occupation probability,
so N_n is the n-th elementary symmetric polynomial and the C_n are the
coefficients of the product generating function. Densities and spectra
are determinantal contractions of the matrix itself.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bogoliubov import OverlapMatrix
from .errors import ConfigError, ContractViolationError
from .grids import FreeBasis

DEFAULT_NMAX = 6

# Signed noise below this is zeroed before entering products.
EIGENVALUE_FLOOR = 1e-14


def _occupations(overlap: OverlapMatrix) -> np.ndarray:
    lam = overlap.eigenvalues.copy()
    lam[lam < EIGENVALUE_FLOOR] = 0.0
    return lam[lam > 0.0]


def pair_numbers(overlap: OverlapMatrix, nmax: int = DEFAULT_NMAX) -> np.ndarray:
    """Expected n-tuple counts N_1..N_nmax.

    N_n = e_n(lambda), the n-th elementary symmetric polynomial of the
    occupation eigenvalues, accumulated by the descending in-place
    recurrence (each eigenvalue multiplies in once; no cancellation).
    """
    if nmax < 1:
        raise ConfigError(f"nmax must be >= 1, got {nmax}")
    lam = _occupations(overlap)
    e = np.zeros(nmax + 1)
    e[0] = 1.0
    for k, x in enumerate(lam):
        top = min(k + 1, nmax)
        for j in range(top, 0, -1):
            e[j] += x * e[j - 1]
    return e[1:]


def _probability_polynomial(lam: np.ndarray) -> np.ndarray:
    # Coefficients of prod_k ((1 - l_k) + l_k z), low order first.
    poly = np.array([1.0])
    for x in lam:
        poly = np.convolve(poly, [1.0 - x, x])
    return poly


def pair_probabilities(overlap: OverlapMatrix,
                       nmax: int = DEFAULT_NMAX) -> np.ndarray:
    """Exact n-pair probabilities C_0..C_nmax via the generating function."""
    if nmax < 1:
        raise ConfigError(f"nmax must be >= 1, got {nmax}")
    poly = _probability_polynomial(_occupations(overlap))
    out = np.zeros(nmax + 1)
    take = min(nmax + 1, poly.size)
    out[:take] = poly[:take]
    return out


def pair_probabilities_alternating(overlap: OverlapMatrix,
                                   nmax: int = DEFAULT_NMAX) -> np.ndarray:
    """C_n by the alternating binomial sum over all N_m.

    Cross-check path: C_n = sum_m (-1)^(m+n) binom(m, n) N_m with the sum
    closed at the matrix rank. Binomial growth makes this explosive for
    large matrices; meant for small cross-check systems.
    """
    if nmax < 1:
        raise ConfigError(f"nmax must be >= 1, got {nmax}")
    lam = _occupations(overlap)
    rank = lam.size
    numbers = np.concatenate([[1.0], pair_numbers(overlap, max(rank, 1))])
    out = np.zeros(nmax + 1)
    for n in range(nmax + 1):
        acc = 0.0
        for m in range(n, rank + 1):
            acc += (-1.0) ** (m + n) * math.comb(m, n) * numbers[m]
        out[n] = acc
    return out


@dataclass(frozen=True)
class PairStatistics:
    """Occupations, expected counts, and exact pair-number probabilities."""

    lambdas: np.ndarray
    numbers: np.ndarray
    probabilities: np.ndarray
    nmax: int
    species: str


def pair_statistics(overlap: OverlapMatrix,
                    nmax: int = DEFAULT_NMAX) -> PairStatistics:
    """Bundle N_n and C_n with their defining eigenvalues, checked."""
    lam = _occupations(overlap)
    numbers = pair_numbers(overlap, nmax)
    probs = pair_probabilities(overlap, nmax)

    full = _probability_polynomial(lam)
    total = float(np.sum(full))
    if abs(total - 1.0) > 1e-8:
        raise ContractViolationError(
            f"pair probabilities sum to {total!r}, not 1"
        )
    if probs.min() < -1e-9:
        raise ContractViolationError(
            f"negative pair probability {probs.min():.3e}"
        )
    return PairStatistics(lam, numbers, probs, nmax, overlap.species)


def _positive_modes(overlap: OverlapMatrix, basis: FreeBasis) -> np.ndarray:
    if overlap.species != "electron":
        raise ConfigError(
            "position densities are defined for electrons; positron "
            "observables live in momentum space"
        )
    n = basis.grid.n_points
    if overlap.matrix.shape[0] != n:
        raise ConfigError(
            f"overlap has {overlap.matrix.shape[0]} modes, basis has {n} "
            "positive modes; orderings do not match"
        )
    return basis.mode_values[:n]


def density_one(overlap: OverlapMatrix, basis: FreeBasis) -> np.ndarray:
    """One-particle density rho1(x) = tr_spinor K(x, x), on the full grid."""
    modes = _positive_modes(overlap, basis)
    rho = np.zeros(basis.grid.n_points)
    for a in (0, 1):
        block = modes[:, a, :]
        rho += np.real(np.einsum("px,px->x", block.conj(),
                                 overlap.matrix @ block))
    return rho


def density_two(overlap: OverlapMatrix, basis: FreeBasis,
                step: int = 2) -> np.ndarray:
    """Two-particle density on grid.x[::step] squared.

    rho2(x1, x2) = (1/2)[rho1(x1) rho1(x2) - tr K(x1,x2) K(x2,x1)] with
    spinor traces. The decimation keeps the table quadratic cost in
    check; step=1 recovers full resolution.
    """
    if step < 1:
        raise ConfigError(f"step must be >= 1, got {step}")
    modes = _positive_modes(overlap, basis)
    blocks = [modes[:, a, ::step] for a in (0, 1)]

    kernels = [[blocks[a].conj().T @ (overlap.matrix @ blocks[b])
                for b in (0, 1)] for a in (0, 1)]
    rho1 = np.real(np.diagonal(kernels[0][0]) + np.diagonal(kernels[1][1]))

    exchange = np.zeros((rho1.size, rho1.size))
    for a in (0, 1):
        for b in (0, 1):
            exchange += np.abs(kernels[a][b]) ** 2
    rho2 = 0.5 * (np.outer(rho1, rho1) - exchange)
    return 0.5 * (rho2 + rho2.T)


@dataclass(frozen=True)
class DensityTable:
    """Position-space densities of created electrons.

    rho2 lives on the decimated axis x[::step]; diagonal entries are
    exchange-suppressed relative to the off-diagonal maxima.
    """

    x: np.ndarray
    rho1: np.ndarray
    x_pair: np.ndarray
    rho2: np.ndarray
    species: str

    def __post_init__(self):
        if self.rho1.min() < -1e-9:
            raise ContractViolationError(
                f"negative one-particle density {self.rho1.min():.3e}"
            )


def density_table(overlap: OverlapMatrix, basis: FreeBasis,
                  step: int = 2) -> DensityTable:
    return DensityTable(
        basis.grid.x.copy(),
        density_one(overlap, basis),
        basis.grid.x[::step].copy(),
        density_two(overlap, basis, step),
        overlap.species,
    )


def momentum_spectrum_one(overlap: OverlapMatrix) -> np.ndarray:
    """chi1(p): diagonal of the overlap matrix in mode order."""
    return np.real(np.diagonal(overlap.matrix)).copy()


def momentum_spectrum_two(overlap: OverlapMatrix) -> np.ndarray:
    """chi2(p1, p2) = (1/2)(chi1(p1) chi1(p2) - |M[p1, p2]|^2).

    Exactly zero on the diagonal: the Hermitian diagonal is real, so the
    direct and exchange terms cancel identically there.
    """
    d = momentum_spectrum_one(overlap)
    return 0.5 * (np.outer(d, d) - np.abs(overlap.matrix) ** 2)


@dataclass(frozen=True)
class MomentumSpectrum:
    """Single- and pair-momentum distributions for one species."""

    momenta: np.ndarray
    chi1: np.ndarray
    chi2: np.ndarray
    species: str

    def __post_init__(self):
        if self.chi1.min() < -1e-9:
            raise ContractViolationError(
                f"negative momentum density {self.chi1.min():.3e}"
            )


def momentum_spectrum(overlap: OverlapMatrix,
                      basis: FreeBasis) -> MomentumSpectrum:
    n = basis.grid.n_points
    if overlap.matrix.shape[0] != n:
        raise ConfigError(
            f"overlap has {overlap.matrix.shape[0]} modes, basis momentum "
            f"lattice has {n}; orderings do not match"
        )
    spectrum = MomentumSpectrum(
        basis.momenta.copy(),
        momentum_spectrum_one(overlap),
        momentum_spectrum_two(overlap),
        overlap.species,
    )
    defect = abs(float(np.sum(spectrum.chi1)) - overlap.expected_number)
    if defect > 1e-8:
        raise ContractViolationError(
            f"chi1 total differs from expected number by {defect:.3e}"
        )
    return spectrum


def momentum_to_energy(p) -> np.ndarray:
    """Relativistic dispersion: energy of a free particle of momentum p."""
    p = np.asarray(p, dtype=float)
    return np.sqrt(p * p + 1.0)
