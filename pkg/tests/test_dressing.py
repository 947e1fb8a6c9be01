import numpy as np
import pytest
from hypothesis import given, strategies as st

from cqednet.basis import enumerate_basis, number_operator
from cqednet.dressing import SystemConfig, build_hamiltonian, dress
from cqednet.errors import ConfigError, DressingError


def test_hamiltonian_elements():
    cfg = SystemConfig(g1=0.07, g2=0.05, nu=0.03)
    b = enumerate_basis(2)
    h = build_hamiltonian(cfg, b)
    assert h[b.index("eg000"), b.index("gg100")] == pytest.approx(0.07)
    assert h[b.index("gg100"), b.index("gg001")] == pytest.approx(0.03)
    assert h[b.index("gg000"), b.index("gg000")] == pytest.approx(-1.0)
    assert np.allclose(h, h.conj().T)


def test_block_sizes_and_ground():
    b = enumerate_basis(2)
    sizes = [sl.stop - sl.start for sl in b.manifold_slices()]
    assert sizes == [1, 5, 13]
    d = dress(build_hamiltonian(SystemConfig(), b), b)
    assert d.energies[0] == pytest.approx(-1.0)


def test_uncoupled_limit():
    # with no couplings the dressed states are the bare states, reordered by energy
    b = enumerate_basis(2)
    h = build_hamiltonian(SystemConfig(g1=0, g2=0, nu=0), b)
    d = dress(h, b)
    assert set(np.unique(d.vectors)) <= {0.0, 1.0}
    assert np.allclose(d.vectors.sum(axis=0), 1.0) and np.allclose(d.vectors.sum(axis=1), 1.0)
    assert np.allclose(d.energies, d.vectors.T @ np.diag(h))


def test_invalid_config():
    with pytest.raises(ConfigError):
        SystemConfig(omega_0=0).validate()
    with pytest.raises(ConfigError):
        SystemConfig(nu=-0.1).validate()


def test_markov_flag():
    assert SystemConfig(g1=0.08, g2=0.08).is_markovian(0.008)
    assert not SystemConfig(g1=0.004, g2=0.08).is_markovian(0.008)


def test_rejects_non_hermitian_and_mixing():
    b = enumerate_basis(1)
    h = build_hamiltonian(SystemConfig(), b)
    bad = h.copy()
    bad[0, 1] = 0.3
    with pytest.raises(DressingError):
        dress(bad, b)
    bad = h.copy()
    bad[0, 1] = bad[1, 0] = 0.3
    with pytest.raises(DressingError):
        dress(bad, b)


couplings = st.floats(min_value=0.0, max_value=0.3)


@given(couplings, couplings, couplings, st.integers(min_value=1, max_value=3))
def test_dressed_basis_invariants(g1, g2, nu, n_max):
    b = enumerate_basis(n_max)
    h = build_hamiltonian(SystemConfig(g1=g1, g2=g2, nu=nu, n_max=n_max), b)
    d = dress(h, b)
    c = d.vectors
    scale = np.linalg.norm(h)
    assert np.abs(c.conj().T @ c - np.eye(len(b))).max() < 1e-10
    off = c.conj().T @ h @ c - np.diag(d.energies)
    assert np.abs(off).max() < 1e-9 * scale
    assert np.abs(c @ np.diag(d.energies) @ c.conj().T - h).max() < 1e-9 * scale
    # eigenvectors stay inside their manifold
    m = b.manifold
    rows, cols = np.nonzero(np.abs(c) > 0)
    assert np.all(m[rows] == d.manifold[cols])
    n_op = number_operator(b)
    assert np.abs(h @ n_op - n_op @ h).max() < 1e-12 * scale
    # largest component of each eigenvector is real and positive
    piv = c[np.argmax(np.abs(c), axis=0), np.arange(len(b))]
    assert np.all(np.abs(piv.imag) < 1e-14) and np.all(piv.real > 0)


@given(st.floats(min_value=-5, max_value=5))
def test_bohr_frequencies_shift_invariant(shift):
    b = enumerate_basis(2)
    h = build_hamiltonian(SystemConfig(g1=0.1, g2=0.07, nu=0.05), b)
    w0 = dress(h, b).bohr()
    w1 = dress(h + shift * np.eye(len(b)), b).bohr()
    assert np.abs(w0 - w1).max() < 1e-9
