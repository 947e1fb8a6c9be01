"""Measurement-optimized classical correlation and entropic discord.

The measurement acts on qubit B with projectors (I +/- n.sigma)/2.  For a
direction n the post-measurement states of A have Bloch vectors
(a +/- T n) / (1 +/- n.b) with probabilities (1 +/- n.b) / 2.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

from .entropy import as_matrix, bloch_form, mutual_information, qubit_entropy
from .result import MeasureResult

GRID = 128
FLAT_TOL = 1e-12


def _direction(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta) * np.ones_like(phi)], axis=-1)


def _information_gain(a, b, t, n):
    """S(rho_A) - sum_k p_k S(rho_A|k) for measurement directions n (..., 3)."""
    s_a = qubit_entropy(np.linalg.norm(a))
    nb = n @ b
    tn = n @ t.T
    total = np.full(nb.shape, s_a, dtype=float)
    for sign in (1.0, -1.0):
        p = (1.0 + sign * nb) / 2.0
        safe = np.where(p > 1e-15, 2.0 * p, 1.0)
        r = np.linalg.norm(a + sign * tn, axis=-1) / safe
        total -= np.where(p > 1e-15, p * qubit_entropy(r), 0.0)
    return total


def _h(r: float) -> float:
    r = min(max(r, 0.0), 1.0)
    out = 0.0
    for p in ((1.0 + r) / 2.0, (1.0 - r) / 2.0):
        if p > 0:
            out -= p * math.log2(p)
    return out


def _gain_scalar(a, b, t, theta, phi, s_a):
    """Scalar version of _information_gain used inside the local refinement."""
    st = math.sin(theta)
    n = (st * math.cos(phi), st * math.sin(phi), math.cos(theta))
    nb = n[0] * b[0] + n[1] * b[1] + n[2] * b[2]
    tn = [t[i][0] * n[0] + t[i][1] * n[1] + t[i][2] * n[2] for i in range(3)]
    total = s_a
    for sign in (1.0, -1.0):
        p = (1.0 + sign * nb) / 2.0
        if p > 1e-15:
            r = math.sqrt(sum((a[i] + sign * tn[i]) ** 2 for i in range(3))) / (2.0 * p)
            total -= p * _h(r)
    return total


def canonical_angles(theta: float, phi: float) -> tuple[float, float]:
    """Fold the direction onto the upper hemisphere (n and -n are the same measurement)."""
    n = _direction(np.float64(theta), np.float64(phi))
    if n[2] < 0 or (n[2] == 0 and (n[1] < 0 or (n[1] == 0 and n[0] < 0))):
        n = -n
    th = float(np.arccos(np.clip(n[2], -1.0, 1.0)))
    ph = float(np.arctan2(n[1], n[0]) % (2 * np.pi)) if th > 1e-12 else 0.0
    return th, ph


def classical_correlation(x, grid: int = GRID, refine: int = 3) -> MeasureResult:
    """Largest information about A obtainable by a projective measurement on B.

    A ``grid`` x ``grid`` scan over the measurement hemisphere is refined by
    Nelder-Mead from the ``refine`` best grid points.  The argument is the
    canonical (theta, phi) of the optimal measurement axis.
    """
    a, b, t = bloch_form(as_matrix(x))
    thetas = np.linspace(0.0, np.pi / 2, grid)
    phis = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    values = _information_gain(a, b, t, _direction(th, ph))
    flat = values.ravel()
    spread = float(flat.max() - flat.min())
    if spread < FLAT_TOL:
        value = float(flat.max())
        return MeasureResult(value, (0.0, 0.0), {"flat": True, "grid_max": value})

    al, bl, tl = a.tolist(), b.tolist(), t.tolist()
    s_a = float(qubit_entropy(np.linalg.norm(a)))

    def neg(v):
        return -_gain_scalar(al, bl, tl, float(v[0]), float(v[1]), s_a)

    best_val, best_arg = -np.inf, None
    for k in np.argsort(flat)[::-1][:refine]:
        i, j = np.unravel_index(k, values.shape)
        res = minimize(neg, [thetas[i], phis[j]], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
        val = -res.fun
        if val < flat[k]:
            val, res.x = flat[k], np.array([thetas[i], phis[j]])
        if val > best_val + 1e-14:
            best_val, best_arg = val, res.x
    arg = canonical_angles(*best_arg)
    return MeasureResult(float(best_val), arg,
                         {"flat": False, "grid_max": float(flat.max()), "grid_spread": spread})


def information_gain(x, theta: float, phi: float) -> float:
    """Re-evaluate the measured correlation at a given measurement axis."""
    a, b, t = bloch_form(as_matrix(x))
    return float(_information_gain(a, b, t, _direction(np.float64(theta), np.float64(phi))))


def quantum_discord(x, cc: MeasureResult | None = None) -> MeasureResult:
    """Mutual information minus classical correlation."""
    if cc is None:
        cc = classical_correlation(x)
    mi = mutual_information(as_matrix(x))
    return MeasureResult(mi - cc.value, cc.argument,
                         {"mutual_information": mi, "classical_correlation": cc.value})
