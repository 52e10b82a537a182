"""Shared fixtures and full-Hilbert-space oracles.

The oracles build operators by explicit Pauli tensor products on the whole
2^N space and never touch the package's sector machinery, so subspace
results can be checked against an independent construction.
"""

from functools import reduce

import numpy as np
import pytest

import spinctrl as sc
from spinctrl import optimizer as opt

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
IDENTITY2 = np.eye(2)


def site_operator(op, site, n_spins):
    """op acting on one 1-based site, identity elsewhere; spin 1 leftmost."""
    factors = [IDENTITY2] * n_spins
    factors[site - 1] = op
    return reduce(np.kron, factors)


def full_h0(n_spins, epsilon=None):
    """Full-space Heisenberg drift (J factored out) from explicit Paulis."""
    epsilon = np.zeros(n_spins - 1) if epsilon is None else np.asarray(epsilon)
    dim = 2 ** n_spins
    h = np.zeros((dim, dim), dtype=complex)
    for k in range(1, n_spins):
        w = 1.0 + epsilon[k - 1]
        for pauli in (PAULI_X, PAULI_Y, PAULI_Z):
            h += w * site_operator(pauli, k, n_spins) @ site_operator(pauli, k + 1, n_spins)
    return h


def full_h1(n_spins, xi=0.0):
    """Full-space control operator, ideal or leaky."""
    dim = 2 ** n_spins
    h = np.zeros((dim, dim), dtype=complex)
    for k in range(1, n_spins + 1):
        w = 1.0 if k == 1 else (np.exp(-(k - 1) / xi) if xi > 0 else 0.0)
        if w:
            h += w * site_operator(PAULI_Z, k, n_spins)
    return h


def total_sz(n_spins):
    return sum(site_operator(PAULI_Z, k, n_spins) for k in range(1, n_spins + 1))


def embed_state(psi, basis):
    """Lift a sector state into the full 2^N space (configs index directly)."""
    full = np.zeros(2 ** basis.n_spins, dtype=complex)
    full[basis.configs] = psi
    return full



@pytest.fixture(scope="session")
def n4_spec():
    return sc.ChainSpec(4)


@pytest.fixture(scope="session")
def n4_ground_pulse(n4_spec):
    """Near-unit-fidelity pulse for the N=4 ground-state problem."""
    problem = opt.ground_problem(n4_spec)
    result = opt.multistart_optimize(
        problem, steps=64, duration=opt.recommended_horizon(4),
        restarts=5, seed=123,
        options=opt.OptimizeOptions(value_tol=1e-14, target_fidelity=0.99995),
    )
    assert result.final_fidelity >= 0.999
    return result.pulse


@pytest.fixture(scope="session")
def n4_ensemble_pulse(n4_spec):
    """Pulse optimized for the N=4 Gibbs ensemble at kT/J = 2."""
    from spinctrl.metrics import thermal_fidelity_bound

    bound = thermal_fidelity_bound(n4_spec, 2.0)
    problem = opt.ensemble_problem(n4_spec, 2.0)
    result = opt.multistart_optimize(
        problem, steps=64, duration=8.0, restarts=5, seed=21,
        options=opt.OptimizeOptions(value_tol=1e-13, target_fidelity=bound - 1e-4),
    )
    assert bound - result.final_fidelity < 1e-3
    return result.pulse


@pytest.fixture(scope="session")
def n6_ground_pulse():
    # generous horizon: near-unit fidelity needs headroom beyond the 0.99
    # threshold time, and the gentle fields found there (|B| of a few J)
    # are the leakage-robust representatives
    spec = sc.ChainSpec(6)
    problem = opt.ground_problem(spec)
    result = opt.multistart_optimize(
        problem, steps=64, duration=10.0, restarts=5, seed=123,
        options=opt.OptimizeOptions(value_tol=1e-13, target_fidelity=0.9995),
    )
    assert result.final_fidelity >= 0.999
    return result.pulse
