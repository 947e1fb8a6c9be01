"""Truncated product basis |A1 A2 C1 C2 F> of the two-cavity network and its operators."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

GROUND, EXCITED = 0, 1
CHANNELS = ("cavity1", "cavity2", "fiber")
_CHANNEL_SLOT = {"cavity1": 2, "cavity2": 3, "fiber": 4}


@dataclass(frozen=True, order=True)
class BareState:
    """Product state; atoms are 0 (g) or 1 (e), modes hold photon numbers."""

    a1: int
    a2: int
    c1: int
    c2: int
    f: int

    @property
    def excitations(self) -> int:
        return self.a1 + self.a2 + self.c1 + self.c2 + self.f

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.c1, self.c2, self.f)

    @property
    def label(self) -> str:
        atoms = "".join("e" if a else "g" for a in (self.a1, self.a2))
        return f"{atoms}{self.c1}{self.c2}{self.f}"

    @classmethod
    def from_label(cls, label: str) -> "BareState":
        a1, a2 = (1 if ch == "e" else 0 for ch in label[:2])
        c1, c2, f = (int(ch) for ch in label[2:])
        return cls(a1, a2, c1, c2, f)


@dataclass(frozen=True)
class BareBasis:
    states: tuple[BareState, ...]
    n_max: int
    _index: dict = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.states)

    def index(self, state: BareState | str) -> int:
        if isinstance(state, str):
            state = BareState.from_label(state)
        return self._index[state]

    @property
    def manifold(self) -> np.ndarray:
        return np.array([s.excitations for s in self.states])

    def manifold_slices(self) -> list[slice]:
        """Contiguous index ranges of each excitation manifold, lowest first."""
        m = self.manifold
        return [slice(int(np.searchsorted(m, k, "left")), int(np.searchsorted(m, k, "right")))
                for k in range(self.n_max + 1)]


def dimension(n_max: int) -> int:
    """1 + d_N with d_N = N + 2 sum_k k(k+1)."""
    return 1 + n_max + 2 * sum(k * (k + 1) for k in range(1, n_max + 1))


def enumerate_basis(n_max: int) -> BareBasis:
    if n_max < 0:
        raise ValueError(f"excitation cap must be >= 0, got {n_max}")
    states = []
    for a1, a2 in itertools.product((GROUND, EXCITED), repeat=2):
        for c1, c2, f in itertools.product(range(n_max + 1), repeat=3):
            s = BareState(a1, a2, c1, c2, f)
            if s.excitations <= n_max:
                states.append(s)
    states.sort(key=lambda s: (s.excitations, s.as_tuple()))
    return BareBasis(tuple(states), n_max, {s: i for i, s in enumerate(states)})


def lowering_operator(basis: BareBasis, channel: str) -> np.ndarray:
    """Matrix of a_j (cavity1, cavity2 or fiber) with sqrt(n) amplitudes."""
    try:
        slot = _CHANNEL_SLOT[channel]
    except KeyError:
        raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}") from None
    dim = len(basis)
    op = np.zeros((dim, dim))
    for j, s in enumerate(basis.states):
        occ = s.as_tuple()
        n = occ[slot]
        if n == 0:
            continue
        target = list(occ)
        target[slot] -= 1
        op[basis.index(BareState(*target)), j] = np.sqrt(n)
    return op


def atomic_operators(basis: BareBasis, atom: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(S_z, S_plus, S_minus) for atom 1 or 2; S_z = +1/2 on e, -1/2 on g.

    Raising elements whose target exceeds the excitation cap are dropped.
    """
    if atom not in (1, 2):
        raise ValueError(f"atom must be 1 or 2, got {atom}")
    slot = atom - 1
    dim = len(basis)
    sz = np.zeros((dim, dim))
    sp = np.zeros((dim, dim))
    for j, s in enumerate(basis.states):
        occ = s.as_tuple()
        sz[j, j] = 0.5 if occ[slot] == EXCITED else -0.5
        if occ[slot] == GROUND:
            target = list(occ)
            target[slot] = EXCITED
            t = BareState(*target)
            if t.excitations <= basis.n_max:
                sp[basis.index(t), j] = 1.0
    return sz, sp, sp.T.copy()


def number_operator(basis: BareBasis) -> np.ndarray:
    return np.diag(basis.manifold.astype(float))
