from __future__ import annotations

import numpy as np

from .entropy import as_matrix


def psd_sqrt(rho: np.ndarray) -> np.ndarray:
    rho = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(rho)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def uhlmann_fidelity(rho, sigma) -> float:
    """(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    s = psd_sqrt(as_matrix(rho))
    m = s @ as_matrix(sigma) @ s
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    # round-off eigenvalues of a rank-deficient product would add ~sqrt(eps) to the trace
    w = np.where(w > 64 * np.finfo(float).eps * max(w.max(), 0.0), w, 0.0)
    return float(min(np.sqrt(w).sum() ** 2, 1.0))


def root_fidelity_and_gradient(sqrt_rho: np.ndarray, sigma: np.ndarray, cutoff: float = 1e-14):
    """sqrt(F) and its gradient with respect to sigma.

    d tr (S sigma S)^(1/2) = tr[G d sigma] with G = S (S sigma S)^(-1/2) S / 2,
    the inverse square root taken on the support.
    """
    m = sqrt_rho @ sigma @ sqrt_rho
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    root = np.sqrt(w)
    inv = np.where(w > cutoff, 1.0 / np.where(root > 0, root, 1.0), 0.0)
    grad = 0.5 * sqrt_rho @ (v * inv) @ v.conj().T @ sqrt_rho
    return float(root.sum()), grad
