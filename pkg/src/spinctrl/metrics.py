"""Figures of merit: singlet fidelity, end-pair state, concurrence, bounds."""

from __future__ import annotations

from math import comb

import numpy as np

from .basis import EndPairPartition, end_pair_partition, enumerate_basis
from .hamiltonians import (
    ChainSpec,
    SubspaceOperator,
    ThermalState,
    build_target_observable,
    thermal_state,
)

__all__ = [
    "fidelity",
    "ensemble_fidelity",
    "reduced_end_density",
    "ensemble_end_density",
    "concurrence",
    "plus_eigenspace_dim",
    "thermal_fidelity_bound",
]

# basis order of the end-pair density: |00>, |01>, |10>, |11> of (spin 1, spin N)
_PAIR_INDEX = {(0, 0): 0, (0, 1): 1, (1, 0): 2, (1, 1): 3}

DENSITY_TOL = 1e-9


def fidelity(state: np.ndarray, a_op: SubspaceOperator) -> float:
    """Expectation of the projector ``a_op``: <psi|A|psi> or Tr[A rho].

    ``state`` is a pure vector or a density block on the operator's basis.
    """
    state = np.asarray(state)
    mat = a_op.mat
    if state.ndim == 1:
        if state.shape[0] != a_op.dim:
            raise ValueError(f"state dim {state.shape[0]} != operator dim {a_op.dim}")
        val = float(np.real(np.vdot(state, mat @ state)))
    elif state.ndim == 2:
        if state.shape != (a_op.dim, a_op.dim):
            raise ValueError(f"density shape {state.shape} != operator dim {a_op.dim}")
        val = float(np.trace(mat @ state).real)
    else:
        raise ValueError("state must be a vector or a square density block")
    if not -DENSITY_TOL <= val <= 1 + DENSITY_TOL:
        raise ValueError(f"projector expectation {val} escapes [0, 1]")
    return min(max(val, 0.0), 1.0)


def ensemble_fidelity(state: ThermalState) -> float:
    """Tr[A rho] of a block-diagonal ensemble, summed sector by sector."""
    total = 0.0
    for n, block in enumerate(state.blocks):
        a_op = build_target_observable(state.n_spins, n)
        total += float(np.trace(a_op.mat @ block).real)
    return total


def _pair_accumulate(rho4, part: EndPairPartition, accumulate):
    keys = list(part.indices)
    for a in keys:
        ia = part.indices[a]
        if len(ia) == 0:
            continue
        for b in keys:
            ib = part.indices[b]
            if len(ib) == 0:
                continue
            if a[0] + a[1] != b[0] + b[1]:
                continue  # interiors cannot match across end-pair excitation
            _, sa, sb = np.intersect1d(
                part.interiors[a], part.interiors[b],
                assume_unique=True, return_indices=True,
            )
            if len(sa):
                rho4[_PAIR_INDEX[a], _PAIR_INDEX[b]] += accumulate(ia[sa], ib[sb])


def reduced_end_density(state: np.ndarray, part: EndPairPartition) -> np.ndarray:
    """Density matrix of (spin 1, spin N) after tracing out the interior.

    Accepts a pure vector or a density block on the partition's basis;
    returns a 4x4 Hermitian unit-trace matrix in the |00>, |01>, |10>, |11>
    order.
    """
    state = np.asarray(state, dtype=np.complex128)
    dim = part.basis.dim
    rho4 = np.zeros((4, 4), dtype=np.complex128)
    if state.ndim == 1:
        if state.shape[0] != dim:
            raise ValueError(f"state dim {state.shape[0]} != basis dim {dim}")
        _pair_accumulate(rho4, part, lambda ia, ib: np.sum(state[ia] * state[ib].conj()))
    elif state.ndim == 2:
        if state.shape != (dim, dim):
            raise ValueError(f"density shape {state.shape} != basis dim {dim}")
        _pair_accumulate(rho4, part, lambda ia, ib: np.sum(state[ia, ib]))
    else:
        raise ValueError("state must be a vector or a square density block")
    rho4 = 0.5 * (rho4 + rho4.conj().T)
    tr = float(np.trace(rho4).real)
    if abs(tr - 1.0) > DENSITY_TOL:
        raise ValueError(f"reduced density trace {tr} deviates from 1")
    return rho4


def ensemble_end_density(state: ThermalState) -> np.ndarray:
    """End-pair density of a block-diagonal ensemble (blockwise partial trace)."""
    rho4 = np.zeros((4, 4), dtype=np.complex128)
    for n, block in enumerate(state.blocks):
        part = end_pair_partition(enumerate_basis(state.n_spins, n))
        _pair_accumulate(rho4, part, lambda ia, ib: np.sum(block[ia, ib]))
    rho4 = 0.5 * (rho4 + rho4.conj().T)
    tr = float(np.trace(rho4).real)
    if abs(tr - 1.0) > DENSITY_TOL:
        raise ValueError(f"reduced density trace {tr} deviates from 1")
    return rho4


def concurrence(rho: np.ndarray, *, neg_tol: float = DENSITY_TOL) -> float:
    """Two-qubit concurrence of a 4x4 density matrix.

    C = max(0, l1 - l2 - l3 - l4) with l_i the decreasing square roots of the
    eigenvalues of ``rho (Y x Y) rho* (Y x Y)``, evaluated through the
    Hermitian form ``sqrt(rho) (Y x Y) rho* (Y x Y) sqrt(rho)`` (same
    spectrum, better conditioned).  Eigenvalues of ``rho`` in [-neg_tol, 0)
    are clipped to zero first; anything more negative is an error.  ``neg_tol``
    exists for inputs quantized at known precision (printed matrices);
    integrator output should stay within the default.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 density matrix, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise ValueError("density matrix is not Hermitian")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > 1e-6:
        raise ValueError(f"density matrix trace {tr} deviates from 1")
    vals, vecs = np.linalg.eigh(rho)
    if vals[0] < -neg_tol:
        raise ValueError(f"density matrix has negative eigenvalue {vals[0]:.3e}")
    vals = np.clip(vals, 0.0, None)
    sqrt_rho = (vecs * np.sqrt(vals)[None, :]) @ vecs.conj().T

    yy = np.zeros((4, 4))
    yy[0, 3], yy[1, 2], yy[2, 1], yy[3, 0] = -1.0, 1.0, 1.0, -1.0
    rho_tilde = yy @ ((vecs * vals[None, :]) @ vecs.conj().T).conj() @ yy
    lam_sq = np.linalg.eigvalsh(sqrt_rho @ rho_tilde @ sqrt_rho)
    # the square root would inflate pure noise at zero to ~sqrt(eps)
    floor = 1e-14 * max(float(lam_sq[-1]), 1e-300)
    lam_sq = np.where(lam_sq < floor, 0.0, lam_sq)
    lam = np.sqrt(np.clip(lam_sq, 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def plus_eigenspace_dim(n_spins: int, n_exc: int) -> int:
    """Rank of the singlet projector on the ``n_exc`` sector."""
    if not 0 <= n_exc <= n_spins:
        raise ValueError(f"n_exc must be in [0, {n_spins}], got {n_exc}")
    if 1 <= n_exc <= n_spins - 1:
        return comb(n_spins - 2, n_exc - 1)
    return 0


def thermal_fidelity_bound(spec: ChainSpec, state_or_kt) -> float:
    """Unitary-reachability ceiling on Tr[A rho] for a thermal start.

    Sums, sector by sector, the largest ``d_n`` Boltzmann weights, where
    ``d_n`` is the singlet-projector rank on that sector.  Accepts either a
    prebuilt :class:`ThermalState` or a temperature ``kT/J``.
    """
    state = state_or_kt if isinstance(state_or_kt, ThermalState) else thermal_state(spec, state_or_kt)
    total = 0.0
    for n, w in enumerate(state.weights):
        d_n = plus_eigenspace_dim(state.n_spins, n)
        if d_n:
            total += float(np.sort(w)[::-1][:d_n].sum())
    return total
