"""The compiled and pure-numpy kernel paths must agree to round-off."""

import os
import subprocess
import sys

import numpy as np
import pytest

from spinctrl import _kernels
from spinctrl.basis import enumerate_basis
from spinctrl.hamiltonians import ChainSpec, build_h0, build_h1, build_target_observable


def _problem_arrays(seed, n_spins=5, n_exc=2, steps=16):
    rng = np.random.default_rng(seed)
    spec = ChainSpec(n_spins)
    h0 = build_h0(spec, n_exc).real_mat()
    h1 = build_h1(spec, n_exc).real_mat()
    a_op = build_target_observable(n_spins, n_exc).real_mat()
    amps = rng.uniform(-1, 1, size=steps)
    dim = h0.shape[0]
    x = rng.normal(size=(dim, 3)) + 1j * rng.normal(size=(dim, 3))
    x /= np.linalg.norm(x, axis=0, keepdims=True)
    w = rng.uniform(0.1, 1.0, size=3)
    return h0, h1, a_op, amps, x, w


def test_gosper_enumeration_matches_itertools():
    from itertools import combinations

    for n_spins, n_exc in [(4, 2), (6, 0), (6, 6), (7, 3)]:
        basis = enumerate_basis(n_spins, n_exc)
        expected = sorted(
            sum(1 << (n_spins - 1 - pos) for pos in combo)
            for combo in combinations(range(n_spins), n_exc)
        )
        assert basis.configs.tolist() == expected


def test_h0_fill_paths_agree():
    rng = np.random.default_rng(0)
    basis = enumerate_basis(7, 3)
    bond_w = 1.0 + rng.uniform(-0.4, 0.4, size=6)
    a = np.zeros((basis.dim, basis.dim)); _kernels._h0_fill_np(basis.configs, 7, bond_w, a)
    b = _kernels.h0_dense(basis.configs, 7, bond_w)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("seed", [0, 1])
def test_pulse_states_paths_agree(seed):
    h0, h1, _, amps, x, _ = _problem_arrays(seed)
    got = _kernels.pulse_states(h0, h1, 1.1, amps, 0.2, x)
    ref = _kernels._pulse_states_np(h0, h1, 1.1, amps, 0.2, x.copy())
    assert np.max(np.abs(got - ref)) < 1e-12


def test_pulse_states_traj_matches_final():
    h0, h1, _, amps, x, _ = _problem_arrays(3)
    traj = _kernels.pulse_states_traj(h0, h1, 0.9, amps, 0.15, x)
    final = _kernels.pulse_states(h0, h1, 0.9, amps, 0.15, x)
    assert traj.shape == (len(amps) + 1,) + x.shape
    assert np.max(np.abs(traj[-1] - final)) < 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_objective_gradient_paths_agree(seed):
    h0, h1, a_op, amps, x, w = _problem_arrays(seed)
    k1, g1 = _kernels.objective_gradient(h0, h1, a_op, 1.0, amps, 0.25, x, w)
    k2, g2 = _kernels._obj_grad_np(h0, h1, a_op, 1.0, amps, 0.25, x.copy(), w)
    assert k1 == pytest.approx(k2, abs=1e-12)
    assert np.max(np.abs(g1 - g2)) < 1e-11


def test_rk4_dephasing_paths_agree():
    rng = np.random.default_rng(5)
    ham = rng.normal(size=(6, 6))
    ham = (ham + ham.T).astype(complex)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    decay = -np.abs(rng.normal(size=(6, 6)))
    decay = (decay + decay.T) / 2
    np.fill_diagonal(decay, 0.0)
    got = _kernels.rk4_dephasing(ham, rho, decay, 0.01, 20)
    ref = _kernels._rk4_dephasing(ham, rho.copy(), decay, 0.01, 20)
    assert np.max(np.abs(got - ref)) < 1e-13


def test_env_flag_selects_numpy_path():
    env = dict(os.environ, SPINCTRL_PURE_NUMPY="1")
    out = subprocess.run(
        [sys.executable, "-c", "import spinctrl; print(spinctrl.USING_NUMBA)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "False"


def test_numpy_path_computes_same_objective():
    # full pipeline parity under the fallback flag
    h0, h1, a_op, amps, x, w = _problem_arrays(7)
    k, g = _kernels.objective_gradient(h0, h1, a_op, 1.0, amps, 0.2, x, w)
    code = (
        "import numpy as np\n"
        "from spinctrl import _kernels\n"
        "import sys\n"
        "dat = np.load(sys.argv[1])\n"
        "k, g = _kernels.objective_gradient(dat['h0'], dat['h1'], dat['a'], 1.0,"
        " dat['amps'], 0.2, dat['x'], dat['w'])\n"
        "print(repr(float(k)))\n"
        "np.save(sys.argv[2], g)\n"
    )
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        np.savez(f"{tmp}/in.npz", h0=h0, h1=h1, a=a_op, amps=amps, x=x, w=w)
        env = dict(os.environ, SPINCTRL_PURE_NUMPY="1")
        out = subprocess.run(
            [sys.executable, "-c", code, f"{tmp}/in.npz", f"{tmp}/g.npy"],
            capture_output=True, text=True, env=env, check=True,
        )
        k_np = float(out.stdout.strip())
        g_np = np.load(f"{tmp}/g.npy")
    assert k == pytest.approx(k_np, abs=1e-12)
    assert np.max(np.abs(g - g_np)) < 1e-11
