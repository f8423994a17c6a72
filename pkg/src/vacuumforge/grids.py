"""Uniform periodic grid and the free-particle Dirac basis in 1+1 dimensions.

Natural units throughout: hbar = m_e = c = 1, so lengths are Compton
wavelengths, momenta are in units of m_e c and energies in m_e c^2. The
single-particle Hamiltonian symbol is h(p) = alpha*p + beta with the fixed
representation alpha = sigma_x, beta = sigma_z, acting on two-component
spinors (1D: no spin degree of freedom).

Free modes are plane waves e^{ipx}/sqrt(L) times the eigenspinors of h(p),
one positive- and one negative-energy mode per lattice momentum
p_j = 2*pi*j/L, j = -n/2 .. n/2-1. The flat mode ordering is sign-major:
indices 0..n-1 are the positive-energy modes by ascending p, indices n..2n-1
the negative-energy modes by ascending p.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import hashlib

import numpy as np

from .errors import ConfigError, GridMismatchError

# Convention marker: all quantities are dimensionless in these units.
NATURAL_UNITS = {"hbar": 1.0, "electron_mass": 1.0, "c": 1.0, "compton_wavelength": 1.0}


@dataclass(frozen=True)
class Grid:
    """Uniform spatial lattice on [x_min, x_max) with periodic wrap-around."""

    x_min: float
    x_max: float
    n_points: int

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @cached_property
    def momenta(self) -> np.ndarray:
        """Momentum lattice in ascending order, j = -n/2 .. n/2-1."""
        n = self.n_points
        return (2.0 * np.pi / self.length) * np.arange(-n // 2, n - n // 2)

    @cached_property
    def momenta_fft(self) -> np.ndarray:
        """Same lattice in numpy FFT frequency order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def content_hash(self) -> str:
        key = f"{self.x_min:.17g}|{self.x_max:.17g}|{self.n_points}"
        return hashlib.sha256(key.encode()).hexdigest()


def make_grid(x_min: float, x_max: float, n_points: int) -> Grid:
    """Validated Grid constructor.

    n_points must be even and at least 8 so the momentum lattice splits into
    symmetric halves plus the unpaired Nyquist mode.
    """
    if not x_max > x_min:
        raise ConfigError(f"grid bounds inverted or empty: [{x_min}, {x_max}]")
    if n_points < 8 or n_points % 2 != 0:
        raise ConfigError(f"grid.n_points: must be even and >= 8, got {n_points}")
    return Grid(float(x_min), float(x_max), int(n_points))


@dataclass
class SpinorField:
    """Two-component field sampled on a grid; values has shape (2, n_points)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (2, self.grid.n_points):
            raise ConfigError(
                f"spinor field shape {self.values.shape} does not match grid "
                f"(expected (2, {self.grid.n_points}))"
            )

    def norm(self) -> float:
        return float(np.sqrt(self.grid.dx * np.sum(np.abs(self.values) ** 2)))


def inner_product(a: SpinorField, b: SpinorField) -> complex:
    """Discrete <a|b> = dx * sum_x a(x)^dagger b(x); conjugate-linear in a."""
    if a.grid != b.grid:
        raise GridMismatchError("inner product of fields on different grids")
    return complex(a.grid.dx * np.vdot(a.values, b.values))


def _eigenspinors(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal eigenvectors of h(p) = p*sigma_x + sigma_z, closed form.

    Returns (u_plus, u_minus), each of shape (len(p), 2). The branch is
    continuous in p and reduces to (1,0) / (0,1) at p = 0.
    """
    energy = np.sqrt(p * p + 1.0)
    top = energy + 1.0
    norm = np.sqrt(top * top + p * p)
    u_plus = np.stack([top / norm, p / norm], axis=1)
    u_minus = np.stack([-p / norm, top / norm], axis=1)
    return u_plus, u_minus


class FreeBasis:
    """All 2n free Dirac modes on a grid, tagged by energy sign and momentum.

    Attributes
    ----------
    momenta : (n,) ascending momentum lattice shared by both sign blocks.
    signs : (2n,) +1/-1 per flat mode index.
    energies : (2n,) signed mode energies, sign * sqrt(p^2 + 1).
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        n = grid.n_points
        self.momenta = grid.momenta
        kinetic = np.sqrt(self.momenta**2 + 1.0)
        self.signs = np.concatenate([np.ones(n), -np.ones(n)])
        self.energies = np.concatenate([kinetic, -kinetic])
        self.u_plus, self.u_minus = _eigenspinors(self.momenta)

    @property
    def n_modes(self) -> int:
        return 2 * self.grid.n_points

    @cached_property
    def mode_values(self) -> np.ndarray:
        """(2n, 2, n_points) complex: sampled spinor values of every mode."""
        grid = self.grid
        waves = np.exp(1j * np.outer(grid.momenta, grid.x)) / np.sqrt(grid.length)
        plus = self.u_plus[:, :, None] * waves[:, None, :]
        minus = self.u_minus[:, :, None] * waves[:, None, :]
        return np.concatenate([plus, minus], axis=0)

    @cached_property
    def matrix(self) -> np.ndarray:
        """(2*n_points, 2n) matrix whose columns are flattened mode values.

        Flattening is component-major: rows 0..n-1 hold the upper spinor
        component on the grid, rows n..2n-1 the lower one. Columns are
        orthonormal under the dx-weighted inner product.
        """
        vals = self.mode_values
        return vals.reshape(self.n_modes, -1).T.copy()

    def flat_index(self, sign: int, p_index: int) -> int:
        n = self.grid.n_points
        if not 0 <= p_index < n:
            raise ConfigError(f"momentum index {p_index} out of range 0..{n - 1}")
        if sign == +1:
            return p_index
        if sign == -1:
            return n + p_index
        raise ConfigError(f"energy sign must be +1 or -1, got {sign}")

    def mode(self, sign: int, p_index: int) -> SpinorField:
        return SpinorField(self.grid, self.mode_values[self.flat_index(sign, p_index)].copy())

    def coefficients(self, values: np.ndarray) -> np.ndarray:
        """Expansion coefficients <mode_i | field> for flattened field columns.

        values: (2*n_points,) or (2*n_points, k) in the component-major
        flattening used by `matrix`. Returns the same trailing shape with
        leading dimension 2n.
        """
        return self.grid.dx * (self.matrix.conj().T @ values)

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        """Inverse of `coefficients`: rebuild flattened field values."""
        return self.matrix @ coeffs


def build_free_basis(grid: Grid) -> FreeBasis:
    return FreeBasis(grid)
