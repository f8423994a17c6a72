import numpy as np
import pytest

from vacuumforge.errors import ConfigError, GridMismatchError
from vacuumforge.grids import (
    FreeBasis,
    SpinorField,
    build_free_basis,
    inner_product,
    make_grid,
)


def test_make_grid_rejects_bad_inputs():
    with pytest.raises(ConfigError):
        make_grid(1.0, -1.0, 64)
    with pytest.raises(ConfigError):
        make_grid(-1.0, 1.0, 7)
    with pytest.raises(ConfigError):
        make_grid(-1.0, 1.0, 4)
    with pytest.raises(ConfigError):
        make_grid(0.0, 0.0, 64)


def test_reference_grid_spacing_and_momenta():
    g = make_grid(-34.25, 34.25, 512)
    assert g.dx == 0.1337890625
    assert g.x.shape == (512,)
    assert g.x[0] == -34.25
    # half-open interval: the right endpoint is the wrapped image of x[0]
    assert g.x[-1] == pytest.approx(34.25 - g.dx)
    dp = 2.0 * np.pi / g.length
    assert np.allclose(np.diff(g.momenta), dp)
    assert g.momenta[g.n_points // 2] == 0.0
    # fft ordering is a permutation of the ascending lattice
    assert np.allclose(np.sort(g.momenta_fft), g.momenta)


def test_grid_content_hash_distinguishes():
    g1 = make_grid(-34.25, 34.25, 512)
    g2 = make_grid(-34.25, 34.25, 256)
    g3 = make_grid(-34.25, 34.25, 512)
    assert g1.content_hash() == g3.content_hash()
    assert g1.content_hash() != g2.content_hash()


def test_spinor_field_shape_and_norm():
    g = make_grid(-8.0, 8.0, 32)
    with pytest.raises(ConfigError):
        SpinorField(g, np.zeros((3, 32)))
    vals = np.zeros((2, 32), dtype=complex)
    vals[0] = 1.0 / np.sqrt(g.length)
    f = SpinorField(g, vals)
    assert f.norm() == pytest.approx(1.0, abs=1e-14)


def test_inner_product_conjugate_linearity_and_grid_guard():
    g = make_grid(-8.0, 8.0, 32)
    rng = np.random.default_rng(7)
    a = SpinorField(g, rng.normal(size=(2, 32)) + 1j * rng.normal(size=(2, 32)))
    b = SpinorField(g, rng.normal(size=(2, 32)) + 1j * rng.normal(size=(2, 32)))
    z = 0.3 - 1.2j
    scaled = SpinorField(g, z * a.values)
    assert inner_product(scaled, b) == pytest.approx(
        np.conj(z) * inner_product(a, b))
    assert inner_product(a, b) == pytest.approx(np.conj(inner_product(b, a)))
    other = make_grid(-8.0, 8.0, 64)
    c = SpinorField(other, np.zeros((2, 64)))
    with pytest.raises(GridMismatchError):
        inner_product(a, c)


@pytest.fixture(scope="module")
def small_basis() -> FreeBasis:
    return build_free_basis(make_grid(-6.4, 6.4, 16))


def test_free_basis_orthonormal_and_complete(small_basis):
    b = small_basis
    m = b.matrix
    gram = b.grid.dx * (m.conj().T @ m)
    assert np.max(np.abs(gram - np.eye(b.n_modes))) < 1e-12
    # square matrix, so orthonormal columns imply completeness
    comp = b.grid.dx * (m @ m.conj().T)
    assert np.max(np.abs(comp - np.eye(b.n_modes))) < 1e-12


def test_free_basis_energies_and_signs(small_basis):
    b = small_basis
    expected = np.sqrt(b.momenta ** 2 + 1.0)
    n = b.grid.n_points
    assert np.allclose(b.energies[:n], expected)
    assert np.allclose(b.energies[n:], -expected)
    assert np.all(b.signs[:n] == 1)
    assert np.all(b.signs[n:] == -1)


def test_free_basis_mode_lookup(small_basis):
    b = small_basis
    n = b.grid.n_points
    for sign in (+1, -1):
        for k in (0, 3, n - 1):
            idx = b.flat_index(sign, k)
            assert b.signs[idx] == sign
            offset = 0 if sign > 0 else n
            assert idx == offset + k


def test_coefficients_synthesize_round_trip(small_basis):
    b = small_basis
    rng = np.random.default_rng(3)
    coeff = rng.normal(size=b.n_modes) + 1j * rng.normal(size=b.n_modes)
    coeff /= np.linalg.norm(coeff)
    flat = b.synthesize(coeff)
    assert flat.shape == (b.n_modes,)
    back = b.coefficients(flat)
    assert np.max(np.abs(back - coeff)) < 1e-12
