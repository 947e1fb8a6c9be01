"""RWA Hamiltonian of the fiber-coupled two-cavity network and its dressed states.

All frequencies are in units of the atomic frequency omega_a unless stated otherwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .basis import BareBasis, atomic_operators, lowering_operator
from .errors import ConfigError, DressingError

log = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-9
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class SystemConfig:
    omega_a: float = 1.0
    omega_0: float = 0.9
    omega_f: float = 1.0
    g1: float = 0.08
    g2: float = 0.08
    nu: float = 0.08
    n_max: int = 2

    def validate(self) -> None:
        for name in ("omega_a", "omega_0", "omega_f"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("g1", "g2", "nu"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ConfigError(f"n_max must be a non-negative integer, got {self.n_max}")

    def is_markovian(self, max_damping: float) -> bool:
        """The microscopic master equation needs 2 g >> gamma."""
        return 2 * min(self.g1, self.g2) > max_damping


def build_hamiltonian(config: SystemConfig, basis: BareBasis) -> np.ndarray:
    config.validate()
    a1 = lowering_operator(basis, "cavity1")
    a2 = lowering_operator(basis, "cavity2")
    a3 = lowering_operator(basis, "fiber")
    sz1, sp1, _ = atomic_operators(basis, 1)
    sz2, sp2, _ = atomic_operators(basis, 2)

    h = (config.omega_f * a3.T @ a3
         + config.omega_a * (sz1 + sz2)
         + config.omega_0 * (a1.T @ a1 + a2.T @ a2))
    v = (config.g1 * sp1 @ a1 + config.g2 * sp2 @ a2
         + config.nu * (a1.T @ a3 + a2.T @ a3))
    return h + v + v.T


@dataclass(frozen=True)
class DressedBasis:
    """Dressed eigenfrequencies and the bare-to-dressed transformation.

    Columns of ``vectors`` are the dressed eigenvectors expressed in the bare
    basis; index 0 is the ground state.
    """

    energies: np.ndarray
    vectors: np.ndarray
    manifold: np.ndarray
    basis: BareBasis
    degeneracies: tuple = field(default=())

    def __len__(self) -> int:
        return len(self.energies)

    def to_dressed(self, op: np.ndarray) -> np.ndarray:
        return self.vectors.conj().T @ op @ self.vectors

    def to_bare(self, op: np.ndarray) -> np.ndarray:
        return self.vectors @ op @ self.vectors.conj().T

    def bohr(self) -> np.ndarray:
        """omega_mn = Omega_m - Omega_n."""
        return self.energies[:, None] - self.energies[None, :]


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    rows = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[rows, np.arange(vecs.shape[1])]
    return vecs * (np.abs(pivots) / pivots)


def dress(h: np.ndarray, basis: BareBasis) -> DressedBasis:
    """Diagonalize ``h`` manifold by manifold (RWA conserves excitation number)."""
    if not np.allclose(h, h.conj().T, atol=1e-12 * max(1.0, np.abs(h).max())):
        raise DressingError("Hamiltonian is not Hermitian")
    dim = len(basis)
    energies = np.zeros(dim)
    vectors = np.zeros((dim, dim), dtype=h.dtype)
    degeneracies = []
    scale = max(1.0, np.abs(h).max())
    for sl in basis.manifold_slices():
        block = h[sl, sl]
        off = h[sl].copy()
        off[:, sl] = 0
        if np.abs(off).max(initial=0.0) > 1e-12 * scale:
            raise DressingError(f"Hamiltonian couples manifold starting at index {sl.start} to other manifolds")
        w, v = np.linalg.eigh(block)
        v = _fix_phase(v)
        resid = np.linalg.norm(block @ v - v * w, axis=0).max(initial=0.0)
        if resid > RESIDUAL_TOL * scale:
            raise DressingError(f"eigen-residual {resid:.3e} exceeds tolerance in block at {sl.start}")
        energies[sl] = w
        vectors[sl, sl] = v
        for k in np.nonzero(np.diff(w) < DEGENERACY_TOL)[0]:
            degeneracies.append((sl.start + int(k), sl.start + int(k) + 1))
    if degeneracies:
        log.info("degenerate dressed levels: %s", degeneracies)
    return DressedBasis(energies, vectors, basis.manifold, basis, tuple(degeneracies))
