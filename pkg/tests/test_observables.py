import itertools

import numpy as np
import pytest

from vacuumforge.bogoliubov import OverlapMatrix, build_S, transition_blocks
from vacuumforge.errors import ConfigError, ContractViolationError
from vacuumforge.grids import build_free_basis, make_grid
from vacuumforge.hamiltonian import PotentialSpec
from vacuumforge.observables import (
    DensityTable,
    density_one,
    density_table,
    density_two,
    momentum_spectrum,
    momentum_spectrum_two,
    momentum_to_energy,
    pair_numbers,
    pair_probabilities,
    pair_probabilities_alternating,
    pair_statistics,
)
from vacuumforge.propagator import PreparedEvolution


def _diag_overlap(*lam):
    return OverlapMatrix(np.diag(lam).astype(np.complex128), "electron")


def _random_overlap(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, _ = np.linalg.qr(a)
    lam = rng.uniform(0.0, 1.0, n)
    m = (q * lam) @ q.conj().T
    return OverlapMatrix(0.5 * (m + m.conj().T), "electron")


def test_two_full_modes():
    s = _diag_overlap(1.0, 1.0)
    np.testing.assert_allclose(pair_numbers(s, 3), [2.0, 1.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(pair_probabilities(s, 3),
                               [0.0, 0.0, 1.0, 0.0], atol=1e-14)


def test_two_half_modes():
    s = _diag_overlap(0.5, 0.5)
    np.testing.assert_allclose(pair_numbers(s, 2), [1.0, 0.25], atol=1e-14)
    np.testing.assert_allclose(pair_probabilities(s, 2),
                               [0.25, 0.5, 0.25], atol=1e-14)
    np.testing.assert_allclose(pair_probabilities_alternating(s, 2),
                               [0.25, 0.5, 0.25], atol=1e-12)


def test_generating_function_vs_alternating_sum():
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        s = _random_overlap(rng, n)
        nmax = min(n, 6)
        direct = pair_probabilities(s, nmax)
        alt = pair_probabilities_alternating(s, nmax)
        np.testing.assert_allclose(alt, direct, atol=1e-8)


def test_four_mode_fock_oracle():
    # two positive modes, two sea modes, random unitary single-particle
    # evolution; the final state is worked out directly in Fock space and
    # the exact n-pair weights compared against the eigenvalue route
    rng = np.random.default_rng(7)
    for _ in range(30):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        u, r = np.linalg.qr(a)
        u = u * (np.diag(r) / np.abs(np.diag(r)))

        # |Psi> = (evolved sea 1)^+ (evolved sea 2)^+ |0>, orbitals u[:, 2:]
        weights = np.zeros(3)
        for m1, m2 in itertools.combinations(range(4), 2):
            amp = u[m1, 2] * u[m2, 3] - u[m2, 2] * u[m1, 3]
            n_created = int(m1 in (0, 1)) + int(m2 in (0, 1))
            weights[n_created] += np.abs(amp) ** 2

        g_pm = u[:2, 2:]
        s = OverlapMatrix(g_pm.conj() @ g_pm.T, "electron")
        np.testing.assert_allclose(pair_probabilities(s, 2), weights,
                                   atol=1e-10)


def test_free_evolution_leaves_vacuum():
    grid = make_grid(-8.0, 8.0, 32)
    basis = build_free_basis(grid)
    prep = PreparedEvolution(basis, PotentialSpec(0.0), 4.7).prepare()
    s = build_S(transition_blocks(prep.evolved_basis(1.7, "both")))
    stats = pair_statistics(s)
    assert stats.probabilities[0] == pytest.approx(1.0, abs=1e-10)
    assert abs(stats.numbers[0]) < 1e-10


def test_probability_and_number_relations():
    rng = np.random.default_rng(13)
    for _ in range(20):
        s = _random_overlap(rng, 7)
        stats = pair_statistics(s, 7)
        # total probability including tail
        assert np.sum(stats.probabilities) == pytest.approx(1.0, abs=1e-8)
        assert stats.numbers[0] == pytest.approx(s.expected_number, abs=1e-10)
        # N_2 = e_2(lambda)
        lam = stats.lambdas
        e2 = 0.5 * (lam.sum() ** 2 - (lam ** 2).sum())
        assert stats.numbers[1] == pytest.approx(e2, abs=1e-10)


def test_nmax_validation():
    s = _diag_overlap(0.5)
    with pytest.raises(ConfigError):
        pair_numbers(s, 0)
    with pytest.raises(ConfigError):
        pair_probabilities(s, 0)
    with pytest.raises(ConfigError):
        pair_probabilities_alternating(s, -1)
    # beyond-rank entries are exactly zero
    np.testing.assert_array_equal(pair_numbers(s, 4)[1:], 0.0)


def test_eigenvalue_floor():
    s = _diag_overlap(-5e-10, 0.3)
    assert pair_numbers(s, 2)[0] == pytest.approx(0.3, abs=1e-14)
    assert np.all(pair_probabilities(s, 2) >= 0.0)


def test_density_two_matches_literal_contraction():
    grid = make_grid(-6.0, 6.0, 8)
    basis = build_free_basis(grid)
    rng = np.random.default_rng(11)
    s = _random_overlap(rng, 8)
    rho2 = density_two(s, basis, step=1)
    psi = basis.mode_values[:8]
    m = s.matrix

    def literal(i1, i2):
        tot = 0.0
        for p1 in range(8):
            for q1 in range(8):
                d1 = np.vdot(psi[p1, :, i1], psi[q1, :, i1])
                for p2 in range(8):
                    for q2 in range(8):
                        d2 = np.vdot(psi[p2, :, i2], psi[q2, :, i2])
                        tot += np.real((m[p1, q1] * m[p2, q2]
                                        - m[p1, q2] * m[p2, q1]) * d1 * d2)
        return 0.5 * tot

    for i1, i2 in ((1, 5), (3, 3), (0, 7)):
        assert rho2[i1, i2] == pytest.approx(literal(i1, i2), abs=1e-12)


def test_density_normalizations():
    grid = make_grid(-8.0, 8.0, 24)
    basis = build_free_basis(grid)
    rng = np.random.default_rng(5)
    s = _random_overlap(rng, 24)
    dx = grid.dx
    rho1 = density_one(s, basis)
    assert dx * rho1.sum() == pytest.approx(s.expected_number, abs=1e-10)
    rho2 = density_two(s, basis, step=1)
    n2 = pair_numbers(s, 2)[1]
    assert dx * dx * rho2.sum() == pytest.approx(n2, abs=1e-8)


def test_rank_one_state_has_no_pairs():
    grid = make_grid(-8.0, 8.0, 24)
    basis = build_free_basis(grid)
    rng = np.random.default_rng(9)
    v = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    v /= np.linalg.norm(v)
    s = OverlapMatrix(0.7 * np.outer(v, v.conj()), "electron")
    assert np.max(np.abs(density_two(s, basis, step=1))) < 1e-12


def test_density_species_and_shape_guards():
    grid = make_grid(-8.0, 8.0, 24)
    basis = build_free_basis(grid)
    pos = OverlapMatrix(np.zeros((24, 24)), "positron")
    with pytest.raises(ConfigError):
        density_one(pos, basis)
    wrong = OverlapMatrix(np.zeros((12, 12)), "electron")
    with pytest.raises(ConfigError):
        density_table(wrong, basis)
    with pytest.raises(ConfigError):
        density_two(OverlapMatrix(np.zeros((24, 24)), "electron"), basis,
                    step=0)
    with pytest.raises(ContractViolationError):
        DensityTable(grid.x, np.full(24, -1.0), grid.x, np.zeros((24, 24)),
                     "electron")


def test_momentum_spectrum_identities():
    grid = make_grid(-8.0, 8.0, 24)
    basis = build_free_basis(grid)
    rng = np.random.default_rng(17)
    s = _random_overlap(rng, 24)
    spec = momentum_spectrum(s, basis)
    assert spec.chi1.sum() == pytest.approx(s.expected_number, abs=1e-10)
    # diagonal cancels exactly: same floats subtracted
    assert np.all(np.diagonal(spec.chi2) == 0.0)
    # row sums against the closed form
    d = spec.chi1
    m2 = np.real(np.diagonal(s.matrix @ s.matrix))
    np.testing.assert_allclose(spec.chi2.sum(axis=1),
                               0.5 * (d * d.sum() - m2), atol=1e-12)
    # total pair weight
    assert spec.chi2.sum() == pytest.approx(pair_numbers(s, 2)[1], abs=1e-8)
    wrong = OverlapMatrix(np.zeros((12, 12)), "electron")
    with pytest.raises(ConfigError):
        momentum_spectrum(wrong, basis)


def test_momentum_spectrum_two_diagonal_zero():
    s = _diag_overlap(0.3, 0.8, 0.1)
    chi2 = momentum_spectrum_two(s)
    assert np.all(np.diagonal(chi2) == 0.0)
    assert chi2[0, 1] == pytest.approx(0.5 * 0.3 * 0.8, abs=1e-14)


def test_momentum_to_energy():
    assert momentum_to_energy(0.0) == pytest.approx(1.0)
    assert momentum_to_energy(0.96) == pytest.approx(np.sqrt(1.9216))
    np.testing.assert_allclose(momentum_to_energy([-1.0, 1.0]),
                               [np.sqrt(2.0)] * 2, atol=1e-15)
