"""Entropies and Bloch-form decompositions of two-qubit states (bits throughout)."""

from __future__ import annotations

import numpy as np

from ..states import PAULI, TwoQubitXState

_ID = np.eye(2, dtype=complex)


def as_matrix(x) -> np.ndarray:
    if isinstance(x, TwoQubitXState):
        return x.matrix()
    return np.asarray(x, dtype=complex)


def entropy_of_spectrum(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 1e-15]
    return float(-(p * np.log2(p)).sum())


def von_neumann_entropy(rho) -> float:
    rho = as_matrix(rho)
    return entropy_of_spectrum(np.linalg.eigvalsh((rho + rho.conj().T) / 2))


def binary_entropy(p):
    """h(p) in bits, vectorized, with 0 log 0 = 0."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.where(p > 0, p * np.log2(p), 0.0) - np.where(q > 0, q * np.log2(q), 0.0)
    return out


def qubit_entropy(bloch_length):
    """Entropy of a qubit whose Bloch vector has the given length."""
    r = np.clip(bloch_length, 0.0, 1.0)
    return binary_entropy((1.0 + r) / 2.0)


def partial_trace(rho, keep: int) -> np.ndarray:
    """Reduced state of qubit 0 (A) or 1 (B)."""
    r = as_matrix(rho).reshape(2, 2, 2, 2)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    return np.einsum("ijil->jl", r)


def bloch_form(rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(a, b, T) with rho = [I + a.s x I + I x b.s + sum T_ij s_i x s_j] / 4."""
    rho = as_matrix(rho)
    a = np.array([np.trace(rho @ np.kron(s, _ID)).real for s in PAULI])
    b = np.array([np.trace(rho @ np.kron(_ID, s)).real for s in PAULI])
    t = np.array([[np.trace(rho @ np.kron(si, sj)).real for sj in PAULI] for si in PAULI])
    return a, b, t


def mutual_information(x) -> float:
    rho = as_matrix(x)
    return (von_neumann_entropy(partial_trace(rho, 0)) + von_neumann_entropy(partial_trace(rho, 1))
            - von_neumann_entropy(rho))


def real_x_form(x) -> np.ndarray:
    """Local-phase rotation making both anti-diagonal coherences real and >= 0.

    For X-shaped input the result is built exactly, so a state and its complex
    conjugate map to the same matrix.
    """
    rho = as_matrix(x)
    if isinstance(x, TwoQubitXState):
        a14, a23 = x.a14, x.a23
    else:
        a14, a23 = rho[0, 3], rho[1, 2]
    mask = np.array([[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]], dtype=bool)
    if isinstance(x, TwoQubitXState) or not np.any(rho[mask]):
        out = np.diag(np.real(np.diag(rho))).astype(complex)
        out[0, 3] = out[3, 0] = abs(a14)
        out[1, 2] = out[2, 1] = abs(a23)
        return out
    s = np.angle(a14) if abs(a14) > 0 else 0.0
    d = np.angle(a23) if abs(a23) > 0 else 0.0
    alpha, beta = (s + d) / 2, (s - d) / 2
    u = np.kron(np.diag([np.exp(-1j * alpha), 1]), np.diag([np.exp(-1j * beta), 1]))
    return u @ rho @ u.conj().T
