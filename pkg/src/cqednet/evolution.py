"""Secular master-equation propagation in the dressed basis.

Populations follow the classical rate equation dp/dt = R p; each coherence
rho_mn rotates at Omega_m - Omega_n and decays at (Gamma_m + Gamma_n) / 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .dressing import DressedBasis
from .errors import PropagationError
from .rates import RateTable

TRACE_TOL = 1e-9
HERMITIAN_TOL = 1e-9
POSITIVITY_TOL = 1e-8


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    mode: str
    fingerprint: str
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def save(self, path) -> None:
        header = {"mode": self.mode, "fingerprint": self.fingerprint,
                  "dim": int(self.states.shape[-1]), **self.meta}
        np.savez_compressed(path, times=self.times, states=self.states,
                            header=np.array(json.dumps(header, sort_keys=True)))

    @classmethod
    def load(cls, path) -> "Trajectory":
        with np.load(path) as data:
            header = json.loads(str(data["header"]))
            mode = header.pop("mode")
            fp = header.pop("fingerprint")
            header.pop("dim")
            return cls(data["times"].copy(), data["states"].copy(), mode, fp, header)


def check_state(rho: np.ndarray, t: float | None = None) -> dict:
    """Trace, Hermiticity and positivity diagnostics; raises on violation."""
    trace_err = abs(np.trace(rho) - 1.0)
    herm_err = np.abs(rho - rho.conj().T).max()
    min_eig = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    diag = {"trace_error": float(trace_err), "hermiticity_error": float(herm_err),
            "min_eigenvalue": float(min_eig)}
    if trace_err > TRACE_TOL or herm_err > HERMITIAN_TOL or min_eig < -POSITIVITY_TOL:
        where = "" if t is None else f" at t={t:.6g}"
        raise PropagationError(f"unphysical state{where}: {diag}")
    return diag


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise PropagationError("times must be a non-empty 1-D sequence")
    if np.any(np.diff(times) <= 0) or times[0] < 0:
        raise PropagationError("times must be non-negative and strictly increasing")
    return times


def coherence_factors(dressed: DressedBasis, rates: RateTable, t: float) -> np.ndarray:
    gamma = rates.total_outflow
    return np.exp((-1j * dressed.bohr() - 0.5 * (gamma[:, None] + gamma[None, :])) * t)


def propagate(rho0: np.ndarray, dressed: DressedBasis, rates: RateTable, times,
              check: bool = True) -> Trajectory:
    """Semi-analytic propagation of a dressed-basis density matrix."""
    times = _check_times(times)
    rho0 = np.asarray(rho0, dtype=complex)
    if check:
        check_state(rho0, 0.0)
    gen = rates.generator()
    p0 = np.real(np.diag(rho0))
    gamma = rates.total_outflow
    decay = -1j * dressed.bohr() - 0.5 * (gamma[:, None] + gamma[None, :])

    steps = np.diff(np.concatenate([[0.0], times]))
    uniform = len(times) > 1 and np.allclose(steps[1:], steps[1], rtol=1e-12, atol=0)
    cache: dict[float, np.ndarray] = {}

    out = np.empty((len(times),) + rho0.shape, dtype=complex)
    p = p0
    for i, t in enumerate(times):
        if uniform:
            dt = steps[i]
            key = round(dt, 15)
            if key not in cache:
                cache[key] = scipy.linalg.expm(gen * dt)
            p = cache[key] @ p
        else:
            p = scipy.linalg.expm(gen * t) @ p0
        rho = rho0 * np.exp(decay * t)
        np.fill_diagonal(rho, p)
        out[i] = rho
        if check:
            check_state(rho, t)
    return Trajectory(times, out, rates.mode, rates.fingerprint(), {"propagator": "semi-analytic"})


def generator_action(dressed: DressedBasis, rates: RateTable):
    """Right-hand side of the secular master equation acting on a flat matrix."""
    dim = len(dressed)
    gen = rates.generator()
    gamma = rates.total_outflow
    coh = -1j * dressed.bohr() - 0.5 * (gamma[:, None] + gamma[None, :])
    np.fill_diagonal(coh, 0.0)
    diag_idx = np.arange(dim) * (dim + 1)
    coh_flat = coh.ravel()

    def rhs(_t, y):
        dy = coh_flat * y
        dy[diag_idx] = gen @ y[diag_idx]
        return dy

    return rhs


def rk_propagate(rho0: np.ndarray, dressed: DressedBasis, rates: RateTable, times,
                 rtol: float = 1e-8, atol: float = 1e-12, method: str = "DOP853",
                 check: bool = True) -> Trajectory:
    """Adaptive embedded Runge-Kutta integration of the same generator."""
    times = _check_times(times)
    rho0 = np.asarray(rho0, dtype=complex)
    dim = rho0.shape[0]
    if times[-1] == 0.0:
        return Trajectory(times, rho0[None].copy(), rates.mode, rates.fingerprint(), {"propagator": method})
    sol = solve_ivp(generator_action(dressed, rates), (0.0, float(times[-1])), rho0.ravel(),
                    method=method, t_eval=times, rtol=rtol, atol=atol)
    if sol.status != 0:
        reached = sol.t[-1] if len(sol.t) else 0.0
        raise PropagationError(f"integrator failed near t={reached:.6g}: {sol.message}")
    states = sol.y.T.reshape(len(times), dim, dim)
    if check:
        for t, rho in zip(times, states):
            check_state(rho, t)
    return Trajectory(times, states, rates.mode, rates.fingerprint(),
                      {"propagator": method, "rtol": rtol, "atol": atol})
