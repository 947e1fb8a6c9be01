"""Bures geometric discord: distance to the closest classical-quantum state.

Classical-quantum states sigma = sum_i p_i |alpha_i><alpha_i| x chi_i (classical
on qubit A) are parameterized by nine reals: the Bloch angles of |alpha_1>,
a weight angle w with p_1 = sin^2 w, and two unconstrained 3-vectors mapped into
the Bloch ball by x -> tanh|x| x / |x|.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from ..states import PAULI
from .entropy import as_matrix, real_x_form
from .fidelity import psd_sqrt, root_fidelity_and_gradient
from .result import MeasureResult

BELL_NORMALIZATION = 1.0 / (1.0 - np.sqrt(0.5))
N_STARTS = 16
SPREAD_TOL = 1e-4

_ID = np.eye(2, dtype=complex)
_PAULI = np.array(PAULI)


def _ball(x):
    """Map R^3 into the open Bloch ball; returns r and dr/dx."""
    n = np.sqrt(x @ x)
    if n < 1e-12:
        return x.copy(), np.eye(3)
    th = np.tanh(n)
    r = th / n * x
    jac = th / n * np.eye(3) + ((1.0 - th * th) / n ** 2 - th / n ** 3) * np.outer(x, x)
    return r, jac


def _qubit(r):
    return 0.5 * np.array([[1 + r[2], r[0] - 1j * r[1]], [r[0] + 1j * r[1], 1 - r[2]]])


def _kron(a, b):
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(4, 4)


def cq_state(params) -> np.ndarray:
    return _cq_state_and_parts(np.asarray(params, dtype=float))[0]


def _cq_state_and_parts(x):
    theta, phi, w = x[:3]
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    proj = _qubit(np.array([st * cp, st * sp, ct]))
    p = np.sin(w) ** 2
    r1, j1 = _ball(x[3:6])
    r2, j2 = _ball(x[6:9])
    chi1, chi2 = _qubit(r1), _qubit(r2)
    sigma = _kron(p * proj, chi1) + _kron((1 - p) * (_ID - proj), chi2)
    return sigma, (st, ct, sp, cp, w, proj, p, chi1, chi2, j1, j2)


def _objective(x, sqrt_rho):
    sigma, (st, ct, sp, cp, w, proj, p, chi1, chi2, j1, j2) = _cq_state_and_parts(x)
    root, g = root_fidelity_and_gradient(sqrt_rho, sigma)
    # tr[G (X x Y)] = sum G[i, j, k, l] X[k, i] Y[l, j]; A indices i, k and B indices j, l
    blocks = g.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3)
    on_b1 = np.einsum("ki,ikjl->jl", proj, blocks)
    on_b2 = np.einsum("ki,ikjl->jl", _ID - proj, blocks)
    diff = p * chi1 - (1 - p) * chi2
    on_a = np.einsum("ikjl,lj->ik", blocks, diff)
    dproj_theta = 0.5 * np.array([[-st, ct * (cp - 1j * sp)], [ct * (cp + 1j * sp), st]])
    dproj_phi = 0.5 * np.array([[0, st * (-sp - 1j * cp)], [st * (-sp + 1j * cp), 0]])
    grad = np.empty(9)
    grad[0] = np.sum(dproj_theta.T * on_a).real
    grad[1] = np.sum(dproj_phi.T * on_a).real
    grad[2] = np.sin(2 * w) * (np.sum(on_b1 * chi1.T) - np.sum(on_b2 * chi2.T)).real
    grad[3:6] = j1.T @ (p * _pauli_components(on_b1))
    grad[6:9] = j2.T @ ((1 - p) * _pauli_components(on_b2))
    return -root, -grad


def _pauli_components(m):
    """tr(M sigma_k / 2) for k = x, y, z."""
    return 0.5 * np.array([(m[0, 1] + m[1, 0]).real, (1j * m[0, 1] - 1j * m[1, 0]).real,
                           (m[0, 0] - m[1, 1]).real])


def _starts(rng, n_starts):
    """Structured starts on the z and equatorial axes, then random ones."""
    fixed = []
    for theta, phi in ((0.0, 0.0), (np.pi / 2, 0.0), (np.pi / 2, np.pi / 2), (np.pi / 2, np.pi / 4)):
        fixed.append(np.array([theta, phi, np.pi / 4, 0, 0, 0.5, 0, 0, -0.5]))
        fixed.append(np.array([theta, phi, np.pi / 4, 0, 0, 0, 0, 0, 0]))
    out = fixed[:n_starts]
    while len(out) < n_starts:
        x = rng.normal(size=9)
        x[0] = np.arccos(rng.uniform(-1, 1))
        x[1] = rng.uniform(0, 2 * np.pi)
        x[2] = rng.uniform(0.2, np.pi / 2 - 0.2)
        out.append(x)
    return out


def max_cq_fidelity(x, n_starts: int = N_STARTS, seed: int = 0):
    """Largest Uhlmann fidelity between ``x`` and a classical-quantum state."""
    if n_starts < 1:
        raise ValueError("need at least one start")
    sqrt_rho = psd_sqrt(as_matrix(x))
    rng = np.random.default_rng(seed)
    finals = []
    for x0 in _starts(rng, n_starts):
        res = minimize(_objective, x0, args=(sqrt_rho,), jac=True, method="L-BFGS-B",
                       options={"ftol": 1e-13, "gtol": 1e-10, "maxiter": 500})
        finals.append((-res.fun, res.x))
    finals.sort(key=lambda item: -item[0])
    best_root, best_x = finals[0]
    polish = minimize(_objective, best_x, args=(sqrt_rho,), jac=True, method="BFGS",
                      options={"gtol": 1e-10, "maxiter": 200})
    if -polish.fun > best_root:
        best_root, best_x = -polish.fun, polish.x
    roots = np.array([f for f, _ in finals])
    agreeing = int(np.sum(roots > best_root - 1e-6))
    spread = float(best_root - roots[min(1, len(roots) - 1)])
    cert = {"starts": n_starts, "agreeing_starts": agreeing, "spread": spread,
            "converged": agreeing >= 2 or spread <= SPREAD_TOL}
    return min(best_root, 1.0) ** 2, best_x, cert


def bures_gqd(x, n_starts: int = N_STARTS, seed: int = 0) -> MeasureResult:
    """Bell-normalized Bures geometric discord n (1 - sqrt(F_max)).

    The certificate carries the raw value 1 - sqrt(F_max), F_max and the
    multi-start agreement.  The argument holds the nine CQ parameters and the
    canonical angles of the classical basis on A.
    """
    # local phases leave the discord unchanged; removing them makes the search
    # identical for a state and its complex conjugate
    f_max, params, cert = max_cq_fidelity(real_x_form(x), n_starts, seed)
    raw = max(1.0 - np.sqrt(f_max), 0.0)
    theta, phi = float(params[0]), float(params[1])
    n = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    if n[2] < 0:
        n = -n
    axis = (float(np.arccos(np.clip(n[2], -1, 1))), float(np.arctan2(n[1], n[0]) % (2 * np.pi)))
    cert.update({"raw": raw, "fidelity": f_max})
    return MeasureResult(BELL_NORMALIZATION * raw, {"params": params.tolist(), "axis": axis}, cert)
