"""Distance-to-separable measures: relative entropy and Bures geometric entanglement.

For two qubits the separable set equals the PPT set, whose extreme points are
pure product states.  Both measures are solved by fully-corrective conditional
gradient: the linear subproblem is an exact search over product states, and the
objective is re-optimized over the convex hull of the atoms found so far.

The input is first rotated by local phases so its anti-diagonal is real and
non-negative.  The resulting state is invariant under conjugation by
sigma_z x sigma_z and under complex conjugation, so the optimum can be sought
among states with the same symmetry; every atom is symmetrized accordingly.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from ..states import TwoQubitXState
from .entropy import as_matrix, real_x_form  # noqa: F401
from .fidelity import psd_sqrt, root_fidelity_and_gradient
from .result import MeasureResult
from .bures import BELL_NORMALIZATION

LN2 = np.log(2.0)
GAP_TOL = 1e-6
MAX_ITER = 150
ORACLE_GAP_FLAG = 1e-3
_ZZ = np.diag([1.0, -1.0, -1.0, 1.0])


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Transpose on qubit B."""
    return np.asarray(rho).reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def is_ppt(rho, tol: float = 1e-12) -> bool:
    pt = partial_transpose(as_matrix(rho))
    return bool(np.linalg.eigvalsh((pt + pt.conj().T) / 2).min() >= -tol)


def symmetrize(sigma: np.ndarray) -> np.ndarray:
    s = 0.5 * (sigma + _ZZ @ sigma @ _ZZ)
    return 0.5 * (s + s.conj()).real.astype(complex)


def _product(theta_a, phi_a, theta_b, phi_b) -> np.ndarray:
    a = np.array([np.cos(theta_a / 2), np.exp(1j * phi_a) * np.sin(theta_a / 2)])
    b = np.array([np.cos(theta_b / 2), np.exp(1j * phi_b) * np.sin(theta_b / 2)])
    v = np.kron(a, b)
    return np.outer(v, v.conj())


def _sym2_extreme_eig(m, largest):
    """Extreme eigenvalue of stacked Hermitian 2x2 matrices (..., 2, 2)."""
    tr = (m[..., 0, 0] + m[..., 1, 1]).real / 2
    dz = (m[..., 0, 0] - m[..., 1, 1]).real / 2
    rad = np.hypot(dz, np.abs(m[..., 0, 1]))
    return tr + rad if largest else tr - rad


def product_extreme(g: np.ndarray, largest: bool = True, grid: int = 48):
    """max (or min) over pure product states of <ab|G|ab>; returns (value, state)."""
    sign = 1.0 if largest else -1.0
    g4 = g.reshape(2, 2, 2, 2)
    th = np.linspace(0, np.pi, grid)
    ph = np.linspace(0, 2 * np.pi, 2 * grid, endpoint=False)
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    a = np.stack([np.cos(tt / 2), np.exp(1j * pp) * np.sin(tt / 2)], axis=-1)
    # reduced 2x2 operator on B for every A direction
    gb = np.einsum("...i,ijkl,...k->...jl", a.conj(), g4, a)
    vals = sign * _sym2_extreme_eig(gb, largest)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)

    def reduced(v):
        av = np.array([np.cos(v[0] / 2), np.exp(1j * v[1]) * np.sin(v[0] / 2)])
        return np.einsum("i,ijkl,k->jl", av.conj(), g4, av), av

    def neg(v):
        m, _ = reduced(v)
        return -sign * float(_sym2_extreme_eig(m, largest))

    res = minimize(neg, [th[i], ph[j]], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000})
    m, av = reduced(res.x)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    bv = v[:, -1] if largest else v[:, 0]
    vec = np.kron(av, bv)
    state = np.outer(vec, vec.conj())
    return float(np.real(vec.conj() @ g @ vec)), state


def _weights_step(objective, atoms, w0):
    """Minimize objective(sum_i w_i atoms_i) over the probability simplex."""
    k = len(atoms)
    stack = np.array(atoms)

    def fun(w):
        sigma = np.tensordot(w, stack, axes=1)
        f, g = objective(sigma)
        return f, np.real(np.einsum("ij,kji->k", g, stack))

    res = minimize(fun, w0, jac=True, method="SLSQP", bounds=[(0.0, 1.0)] * k,
                   constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1.0,
                                 "jac": lambda w: np.ones_like(w)}],
                   options={"ftol": 1e-15, "maxiter": 500})
    w = np.clip(res.x, 0.0, None)
    w /= w.sum()
    if not np.isfinite(fun(w)[0]) or fun(w)[0] > fun(w0)[0]:
        w = w0
    return w


def conditional_gradient(objective, rho: np.ndarray, gap_tol: float = GAP_TOL,
                         max_iter: int = MAX_ITER):
    """Fully-corrective Frank-Wolfe minimization of a convex objective over separable states.

    ``objective(sigma)`` returns (value, gradient).  Starts from the dephased
    state diag(rho), a mixture of computational product states.
    """
    atoms = [np.diag(e).astype(complex) for e in np.eye(4)]
    w = np.real(np.diag(rho)).copy()
    keep = w > 1e-15
    atoms = [a for a, k in zip(atoms, keep) if k]
    w = w[keep] / w[keep].sum()
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        sigma = np.tensordot(w, np.array(atoms), axes=1)
        f, g = objective(sigma)
        lin, s = product_extreme(g, largest=False)
        gap = float(np.real(np.trace(g @ sigma)) - lin)
        if gap < gap_tol:
            break
        atoms.append(symmetrize(s))
        w = _weights_step(objective, atoms, np.append(w * 0.9, 0.1))
        alive = w > 1e-12
        atoms = [a for a, k in zip(atoms, alive) if k]
        w = w[alive] / w[alive].sum()
    sigma = np.tensordot(w, np.array(atoms), axes=1)
    return sigma, {"gap": gap, "iterations": it, "atoms": len(atoms), "converged": gap < gap_tol}


def _log_derivative(sigma, rho):
    """Frechet derivative of tr(rho log sigma) with respect to sigma, and the trace value."""
    lam, u = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    lam = np.clip(lam, 1e-300, None)
    r = u.conj().T @ rho @ u
    # drop round-off overlap of rho with the (near) kernel of sigma
    r = np.where(np.abs(r) < 1e-14, 0.0, r)
    loglam = np.log(lam)
    diff = lam[:, None] - lam[None, :]
    close = np.abs(diff) < 1e-12 * np.maximum(lam[:, None], lam[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = np.where(close, 1.0 / lam[:, None], (loglam[:, None] - loglam[None, :]) / np.where(close, 1, diff))
    value = float(np.real(np.sum(np.diag(r) * loglam)))
    return value, u @ (r * kernel) @ u.conj().T


def ree(x, gap_tol: float = GAP_TOL, max_iter: int = MAX_ITER) -> MeasureResult:
    """min over separable sigma of S(rho || sigma), in bits."""
    rho = real_x_form(x)
    if is_ppt(rho):
        return MeasureResult(0.0, as_matrix(x), {"gap": 0.0, "iterations": 0, "converged": True,
                                                   "ppt": True})
    lam = np.clip(np.linalg.eigvalsh(rho), 0, None)
    neg_entropy = float(np.sum(lam[lam > 0] * np.log(lam[lam > 0])))

    def objective(sigma):
        val, deriv = _log_derivative(sigma, rho)
        return (neg_entropy - val) / LN2, -deriv / LN2

    sigma, cert = conditional_gradient(objective, rho, gap_tol, max_iter)
    value, _ = objective(sigma)
    cert["ppt"] = False
    return MeasureResult(float(value), sigma, cert)


def product_fidelity_bound(x, grid: int = 48) -> float:
    """Largest overlap <ab|rho|ab> with a pure product state (lower bound on F_sep)."""
    val, _ = product_extreme(real_x_form(x), largest=True, grid=grid)
    return val


def geometric_entanglement(x, gap_tol: float = GAP_TOL, max_iter: int = MAX_ITER) -> MeasureResult:
    """Bell-normalized Bures distance n (1 - sqrt(F_sep)) to the separable set."""
    rho = real_x_form(x)
    bound = product_fidelity_bound(x)
    if is_ppt(rho):
        return MeasureResult(0.0, as_matrix(x), {"raw": 0.0, "fidelity": 1.0, "gap": 0.0, "iterations": 0,
                                                   "converged": True, "oracle_lower_bound": bound})
    sqrt_rho = psd_sqrt(rho)

    def objective(sigma):
        root, grad = root_fidelity_and_gradient(sqrt_rho, sigma)
        return -root, -grad

    sigma, cert = conditional_gradient(objective, rho, gap_tol, max_iter)
    root = -objective(sigma)[0]
    fid = min(root, 1.0) ** 2
    raw = max(1.0 - np.sqrt(fid), 0.0)
    cert.update({"raw": raw, "fidelity": fid, "oracle_lower_bound": bound,
                 "below_oracle": fid < bound - 1e-9,
                 "oracle_gap_large": fid - bound > ORACLE_GAP_FLAG})
    return MeasureResult(BELL_NORMALIZATION * raw, sigma, cert)
