"""Bell-diagonal preparation, embedding into the network and vacuum-conditioned readout.

Two-qubit matrices use the basis order |ee>, |eg>, |ge>, |gg>, with e the
+1 eigenstate of sigma_z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BareState
from .dressing import DressedBasis
from .errors import ConfigError, ProjectionError

X_TOL = 1e-8
ATOM_LABELS = ("ee000", "eg000", "ge000", "gg000")

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def bell_diagonal_eigenvalues(c) -> np.ndarray:
    c1, c2, c3 = c
    return np.array([1 + c1 - c2 + c3, 1 - c1 + c2 + c3,
                     1 + c1 + c2 - c3, 1 - c1 - c2 - c3]) / 4


def bell_diagonal_state(c) -> np.ndarray:
    """[I + sum_i c_i sigma_i x sigma_i] / 4."""
    c = tuple(float(x) for x in c)
    if len(c) != 3 or any(abs(x) > 1 for x in c):
        raise ConfigError(f"correlation vector must have three entries in [-1, 1], got {c}")
    lam = bell_diagonal_eigenvalues(c)
    if lam.min() < -1e-12:
        raise ConfigError(f"correlation vector {c} is not a state: eigenvalue {lam.min():.6g}")
    rho = np.eye(4, dtype=complex)
    for ci, s in zip(c, PAULI):
        rho += ci * np.kron(s, s)
    return rho / 4


@dataclass(frozen=True)
class TwoQubitXState:
    d1: float
    d2: float
    d3: float
    d4: float
    a14: complex
    a23: complex

    def __post_init__(self):
        diag = np.array([self.d1, self.d2, self.d3, self.d4])
        if diag.min() < -1e-10:
            raise ValueError(f"negative population in X state: {diag}")
        if abs(diag.sum() - 1) > 1e-9:
            raise ValueError(f"X state trace {diag.sum():.12g} != 1")
        if abs(self.a14) > np.sqrt(max(self.d1 * self.d4, 0.0)) + 1e-10 or \
                abs(self.a23) > np.sqrt(max(self.d2 * self.d3, 0.0)) + 1e-10:
            raise ValueError("X state violates positivity")

    @classmethod
    def from_matrix(cls, rho: np.ndarray, tol: float = X_TOL) -> "TwoQubitXState":
        rho = np.asarray(rho, dtype=complex)
        residual = non_x_residual(rho)
        if residual > tol:
            raise ProjectionError(f"state is not of X form (non-X residual {residual:.3e})")
        d = np.real(np.diag(rho))
        return cls(*(float(x) for x in d), complex(rho[0, 3]), complex(rho[1, 2]))

    def matrix(self) -> np.ndarray:
        m = np.diag([self.d1, self.d2, self.d3, self.d4]).astype(complex)
        m[0, 3], m[3, 0] = self.a14, np.conj(self.a14)
        m[1, 2], m[2, 1] = self.a23, np.conj(self.a23)
        return m

    def to_row(self) -> list[float]:
        return [self.d1, self.d2, self.d3, self.d4,
                self.a14.real, self.a14.imag, self.a23.real, self.a23.imag]

    @classmethod
    def from_row(cls, row) -> "TwoQubitXState":
        d1, d2, d3, d4, r14, i14, r23, i23 = (float(x) for x in row)
        return cls(d1, d2, d3, d4, complex(r14, i14), complex(r23, i23))

    def conjugate(self) -> "TwoQubitXState":
        return TwoQubitXState(self.d1, self.d2, self.d3, self.d4,
                              self.a14.conjugate(), self.a23.conjugate())


ROW_FIELDS = ("d1", "d2", "d3", "d4", "a14_re", "a14_im", "a23_re", "a23_im")

_X_MASK = np.eye(4, dtype=bool) | np.eye(4, dtype=bool)[::-1]


def non_x_residual(rho: np.ndarray) -> float:
    """Largest entry outside the diagonal and anti-diagonal, relative to the trace."""
    tr = abs(np.trace(rho))
    return float(np.abs(np.where(_X_MASK, 0, rho)).max() / (tr if tr > 0 else 1.0))


def _atom_slots(dressed: DressedBasis) -> tuple[list[int], list[int]]:
    """Positions in the 4x4 atomic block and matching bare indices present under the cap."""
    pos, idx = [], []
    for i, lbl in enumerate(ATOM_LABELS):
        state = BareState.from_label(lbl)
        if state.excitations <= dressed.basis.n_max:
            pos.append(i)
            idx.append(dressed.basis.index(state))
    return pos, idx


def embed(rho_atoms: np.ndarray, dressed: DressedBasis) -> np.ndarray:
    """rho_atoms x |000><000| rotated into the dressed basis."""
    rho_atoms = np.asarray(rho_atoms, dtype=complex)
    pos, idx = _atom_slots(dressed)
    missing = [i for i in range(4) if i not in pos]
    if missing and np.abs(rho_atoms[missing]).max() > 0:
        raise ConfigError("|ee> components need an excitation cap of at least 2")
    dim = len(dressed)
    bare = np.zeros((dim, dim), dtype=complex)
    bare[np.ix_(idx, idx)] = rho_atoms[np.ix_(pos, pos)]
    return dressed.to_dressed(bare)


def atomic_block(rho: np.ndarray, dressed: DressedBasis) -> np.ndarray:
    """Unnormalized 4x4 block of the bare-basis state on the field vacuum."""
    bare = dressed.to_bare(np.asarray(rho))
    pos, idx = _atom_slots(dressed)
    block = np.zeros((4, 4), dtype=complex)
    block[np.ix_(pos, pos)] = bare[np.ix_(idx, idx)]
    return block


def project_vacuum(rho: np.ndarray, dressed: DressedBasis,
                   tol: float = X_TOL) -> tuple[TwoQubitXState, float]:
    """Condition the atoms on all three field modes being in vacuum."""
    block = atomic_block(rho, dressed)
    p_vac = float(np.real(np.trace(block)))
    if p_vac < 1e-12:
        raise ProjectionError(f"vacuum probability {p_vac:.3e} too small to condition on")
    block = block / p_vac
    residual = non_x_residual(block)
    if residual > tol:
        raise ProjectionError(f"projected atomic state is not of X form (residual {residual:.3e})")
    block = np.where(_X_MASK, block, 0)
    block = (block + block.conj().T) / 2
    d = np.clip(np.real(np.diag(block)), 0.0, None)
    d = d / d.sum()
    # round-off can push coherences past the positivity bound
    a14 = _clamp(complex(block[0, 3]), np.sqrt(d[0] * d[3]))
    a23 = _clamp(complex(block[1, 2]), np.sqrt(d[1] * d[2]))
    return TwoQubitXState(*(float(x) for x in d), a14, a23), min(p_vac, 1.0)


def _clamp(z: complex, bound: float) -> complex:
    r = abs(z)
    return z if r <= bound else z * (bound / r)
