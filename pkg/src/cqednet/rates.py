"""Thermal transition rates between dressed states.

Each reservoir couples to one field mode (two cavities and the fiber).  The
weight of a transition k -> k' through channel j is |<k'|a_j|k>|^2 in the
dressed basis; downward rates carry n + 1, upward rates carry n (KMS).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .basis import CHANNELS, lowering_operator
from .dressing import DressedBasis
from .errors import ConfigError, RateError

MODES = ("cascade", "literal")
WEIGHT_TOL = 1e-14
GAP_TOL = 1e-9


@dataclass(frozen=True)
class ReservoirSpec:
    gamma: float
    temperature: float = 0.0
    nbar_ref: float | None = None

    def __post_init__(self):
        if self.gamma < 0:
            raise ConfigError(f"damping rate must be >= 0, got {self.gamma}")
        if self.temperature < 0:
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")

    @classmethod
    def from_nbar(cls, gamma: float, nbar: float, omega_ref: float = 1.0) -> "ReservoirSpec":
        """Reservoir whose mean occupation at ``omega_ref`` is ``nbar``."""
        if nbar < 0:
            raise ConfigError(f"mean thermal occupation must be >= 0, got {nbar}")
        return cls(gamma, temperature_from_nbar(nbar, omega_ref), nbar_ref=nbar)


def temperature_from_nbar(nbar: float, omega: float = 1.0) -> float:
    if nbar == 0:
        return 0.0
    return omega / math.log1p(1.0 / nbar)


def thermal_occupation(delta: float, temperature: float) -> float:
    """Bose occupation 1 / (exp(delta / T) - 1), zero at T = 0."""
    if delta <= 0:
        raise ValueError(f"Bohr frequency must be positive, got {delta}")
    if temperature == 0:
        return 0.0
    x = delta / temperature
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class RateTable:
    """Dense rate matrices; ``down[k, k']`` is gamma_{k -> k'} for Omega_k > Omega_k'
    and ``up[k', k]`` the reverse (absorption) rate."""

    down: np.ndarray
    up: np.ndarray
    bohr: np.ndarray
    mode: str

    @property
    def matrix(self) -> np.ndarray:
        """gamma_{m -> n} for every ordered pair."""
        return self.down + self.up

    @property
    def total_outflow(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def generator(self) -> np.ndarray:
        """Classical rate matrix R with dp/dt = R p."""
        w = self.matrix
        return w.T - np.diag(w.sum(axis=1))

    def downward(self) -> dict[tuple[int, int], float]:
        return {(int(k), int(kp)): float(self.down[k, kp]) for k, kp in zip(*np.nonzero(self.down))}

    def upward(self) -> dict[tuple[int, int], float]:
        return {(int(kp), int(k)): float(self.up[kp, k]) for kp, k in zip(*np.nonzero(self.up))}

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.mode.encode())
        h.update(np.ascontiguousarray(self.matrix).tobytes())
        return h.hexdigest()[:16]


def channel_weights(dressed: DressedBasis, lowering_ops) -> list[np.ndarray]:
    """|<k'|a_j|k>|^2 for each channel, indexed [k', k]."""
    return [np.abs(dressed.to_dressed(a)) ** 2 for a in lowering_ops]


def build_rate_table(dressed: DressedBasis, reservoirs, lowering_ops=None,
                     mode: str = "cascade") -> RateTable:
    """Assemble thermal rates for the three dissipation channels.

    ``mode='literal'`` keeps only transitions into and out of the ground state.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown rate mode {mode!r}; expected one of {MODES}")
    reservoirs = list(reservoirs)
    if lowering_ops is None:
        lowering_ops = [lowering_operator(dressed.basis, ch) for ch in CHANNELS]
    if len(reservoirs) != len(lowering_ops):
        raise ConfigError("need exactly one reservoir per dissipation channel")

    dim = len(dressed)
    omega = dressed.energies
    down = np.zeros((dim, dim))
    up = np.zeros((dim, dim))
    for weights, res in zip(channel_weights(dressed, lowering_ops), reservoirs):
        if res.gamma == 0:
            continue
        lower, upper = np.nonzero(weights > WEIGHT_TOL)
        for kp, k in zip(lower, upper):
            if mode == "literal" and kp != 0:
                continue
            delta = omega[k] - omega[kp]
            if abs(delta) <= GAP_TOL:
                raise RateError(f"degenerate Bohr frequency {delta:.3e} "
                                f"between dressed states {k} -> {kp}")
            # overlapping high manifolds: lowering the excitation number can raise the energy
            hi, lo = (k, kp) if delta > 0 else (kp, k)
            n = thermal_occupation(abs(delta), res.temperature)
            w = res.gamma * weights[kp, k]
            down[hi, lo] += w * (n + 1.0)
            if n > 0:
                up[lo, hi] += w * n
    return RateTable(down, up, dressed.bohr(), mode)
