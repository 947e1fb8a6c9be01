import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cqednet.basis import enumerate_basis
from cqednet.dressing import SystemConfig, build_hamiltonian, dress
from cqednet.errors import PropagationError
from cqednet.evolution import Trajectory, check_state, propagate, rk_propagate
from cqednet.rates import ReservoirSpec, build_rate_table
from cqednet.states import bell_diagonal_state, embed
from oracles import gibbs, rate_matrix_null_space


def setup(n_max=2, reservoirs=None, mode="cascade", **kw):
    b = enumerate_basis(n_max)
    d = dress(build_hamiltonian(SystemConfig(n_max=n_max, **kw), b), b)
    if reservoirs is None:
        reservoirs = [ReservoirSpec(0.01)] * 3
    return d, build_rate_table(d, reservoirs, mode=mode)


def bd_start(d, c=(1.0, -0.95, 0.95)):
    return embed(bell_diagonal_state(c), d)


def test_no_damping_is_pure_phase():
    d, rates = setup(reservoirs=[ReservoirSpec(0.0)] * 3)
    rho0 = bd_start(d)
    times = np.linspace(0, 50, 11)
    traj = propagate(rho0, d, rates, times)
    for t, rho in zip(times, traj.states):
        expected = rho0 * np.exp(-1j * d.bohr() * t)
        assert np.abs(rho - expected).max() < 1e-12
    rk = rk_propagate(rho0, d, rates, times, rtol=1e-11, atol=1e-13)
    assert np.abs(rk.states - traj.states).max() < 1e-9


def test_zero_temperature_relaxes_to_ground():
    d, rates = setup()
    traj = propagate(bd_start(d), d, rates, [0.0, 1e5])
    ground = np.zeros_like(traj.states[-1])
    ground[0, 0] = 1
    assert np.abs(traj.states[-1] - ground).max() < 1e-8


@pytest.mark.parametrize("temperature", [0.3, 1.0])
def test_uniform_temperature_reaches_gibbs(temperature):
    d, rates = setup(reservoirs=[ReservoirSpec(0.02, temperature)] * 3, g1=0.08, g2=0.08, nu=0.08)
    traj = propagate(bd_start(d), d, rates, [0.0, 20000.0])
    p = np.real(np.diag(traj.states[-1]))
    target = gibbs(d.energies, temperature)
    assert np.abs(p - target).max() / target.max() < 1e-6
    assert np.allclose(rate_matrix_null_space(rates.generator()), target, rtol=1e-8, atol=1e-14)


def test_two_level_relaxation_closed_form():
    gamma, nbar = 0.05, 0.7
    res = [ReservoirSpec.from_nbar(gamma, nbar), ReservoirSpec(0.0), ReservoirSpec(0.0)]
    d, rates = setup(1, res, g1=0.0, g2=0.0, nu=0.0)
    i1 = int(np.argmax(np.abs(d.vectors[d.basis.index("gg100")])))
    rho0 = np.zeros((len(d), len(d)), dtype=complex)
    rho0[i1, i1] = 1.0
    times = np.linspace(0, 60, 13)
    n = 1.0 / np.expm1(0.9 / res[0].temperature)
    down, up = gamma * (n + 1), gamma * n
    p_eq = up / (up + down)
    expected = p_eq + (1 - p_eq) * np.exp(-(up + down) * times)
    for traj in (propagate(rho0, d, rates, times), rk_propagate(rho0, d, rates, times, rtol=1e-11, atol=1e-14)):
        assert np.allclose(np.real(traj.states[:, i1, i1]), expected, atol=1e-9)


def test_literal_coherence_decay_toy():
    # three states: ground, and two one-excitation levels; literal = cascade at N = 1
    res = [ReservoirSpec.from_nbar(0.03, 1.5)] * 3
    d, rates = setup(1, res, mode="literal", g1=0.05, g2=0.0, nu=0.0)
    n = 1
    out_n = rates.matrix[n, 0]
    out_0 = rates.matrix[0].sum()
    rho0 = np.zeros((len(d), len(d)), dtype=complex)
    rho0[0, 0] = rho0[n, n] = 0.5
    rho0[0, n] = rho0[n, 0] = 0.5
    t = 37.0
    rho = propagate(rho0, d, rates, [t]).states[0]
    expected = 0.5 * np.exp((-1j * (d.energies[0] - d.energies[n]) - (out_n + out_0) / 2) * t)
    assert rho[0, n] == pytest.approx(expected, abs=1e-14)


def test_semigroup():
    d, rates = setup(reservoirs=[ReservoirSpec.from_nbar(0.01, 0.5)] * 3)
    rho0 = bd_start(d)
    t1, t2 = 13.0, 41.0
    mid = propagate(rho0, d, rates, [t1]).states[0]
    two_step = propagate(mid, d, rates, [t2 - t1]).states[0]
    direct = propagate(rho0, d, rates, [t2]).states[0]
    assert np.abs(two_step - direct).max() < 1e-9


def test_uniform_grid_matches_direct():
    d, rates = setup(reservoirs=[ReservoirSpec.from_nbar(0.01, 0.5)] * 3)
    rho0 = bd_start(d)
    grid = np.linspace(0, 300, 31)
    cached = propagate(rho0, d, rates, grid).states
    direct = np.array([propagate(rho0, d, rates, [t]).states[0] for t in grid[1:]])
    assert np.abs(cached[1:] - direct).max() < 1e-12


@settings(max_examples=15)
@given(st.floats(min_value=0.0, max_value=3.0), st.floats(min_value=0.01, max_value=0.15),
       st.sampled_from(["cascade", "literal"]))
def test_propagators_agree(nbar, coupling, mode):
    res = [ReservoirSpec.from_nbar(0.01, nbar), ReservoirSpec(0.01), ReservoirSpec.from_nbar(0.01, nbar / 2)]
    d, rates = setup(2, res, mode=mode, g1=coupling, g2=coupling, nu=coupling / 2)
    rho0 = bd_start(d, (0.3, -0.2, 0.5))
    times = np.linspace(0, 200, 9)
    a = propagate(rho0, d, rates, times)
    b = rk_propagate(rho0, d, rates, times, rtol=1e-10, atol=1e-13)
    assert np.abs(a.states - b.states).max() < 1e-7


def test_state_checks():
    rho = np.diag([0.5, 0.6]).astype(complex)
    with pytest.raises(PropagationError, match="t=2"):
        check_state(rho, 2.0)
    rho = np.array([[0.5, 0.6], [0.6, 0.5]], dtype=complex)
    with pytest.raises(PropagationError):
        check_state(rho)
    d, rates = setup(1)
    with pytest.raises(PropagationError):
        propagate(np.eye(len(d)) / len(d), d, rates, [1.0, 0.5])


def test_trajectory_round_trip(tmp_path):
    d, rates = setup(1)
    traj = propagate(np.eye(len(d), dtype=complex) / len(d), d, rates, [0.0, 1.0, 2.0])
    path = tmp_path / "traj.npz"
    traj.save(path)
    back = Trajectory.load(path)
    assert np.array_equal(back.times, traj.times) and np.array_equal(back.states, traj.states)
    assert back.mode == traj.mode and back.fingerprint == traj.fingerprint
