"""Exact piecewise-constant propagation and dephasing dynamics.

Unitary steps are computed from the eigendecomposition of the constant-step
Hamiltonian ``J h0 + B h1`` (exact, no splitting error), which also underpins
the optimizer's analytic gradients.  Open-system evolution under pure
dephasing integrates the master equation blockwise with a classical
fourth-order fixed-step scheme; both dephasing models commute with the total
excitation number, so evolution never leaves the initial sector.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .basis import SubspaceBasis
from .hamiltonians import ChainSpec, SubspaceOperator, ThermalState, build_h0, build_h1
from .pulses import Pulse

__all__ = [
    "DephasingModel",
    "LindbladSpec",
    "Propagator",
    "StepRefinementError",
    "eigh_checked",
    "step_propagator",
    "pulse_propagator",
    "evolve_pure",
    "evolve_density_unitary",
    "evolve_lindblad",
]

UNITARITY_TOL = 1e-10


class DephasingModel(enum.Enum):
    END_SPINS = "end_spins"
    ALL_SPINS = "all_spins"


@dataclass(frozen=True)
class LindbladSpec:
    """Pure-dephasing noise: rate ``gamma`` and which spins it touches."""

    gamma: float
    model: DephasingModel = DephasingModel.END_SPINS

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class Propagator:
    """One constant-field step ``exp(-i (J h0 + B h1) dt)``."""

    basis: SubspaceBasis
    unitary: np.ndarray = field(repr=False)
    b_amp: float = 0.0
    dt: float = 0.0
    coupling: float = 1.0


class StepRefinementError(RuntimeError):
    """Step-halving did not converge; carries the smallest delta achieved."""

    def __init__(self, achieved_delta: float, steps: int):
        super().__init__(
            f"integrator refinement stalled at delta={achieved_delta:.3e} "
            f"with {steps} substeps per pulse step"
        )
        self.achieved_delta = achieved_delta
        self.steps = steps


def eigh_checked(op: SubspaceOperator) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition with an explicit reconstruction check.

    Returns ascending eigenvalues and the orthonormal eigenvector matrix;
    raises if the reconstruction drifts beyond 1e-10 relative Frobenius norm.
    """
    mat = op.real_mat()
    vals, vecs = np.linalg.eigh(mat)
    recon = (vecs * vals[None, :]) @ vecs.T
    norm = np.linalg.norm(mat)
    resid = np.linalg.norm(recon - mat) / (norm if norm > 0 else 1.0)
    if resid > 1e-10:
        raise np.linalg.LinAlgError(
            f"eigendecomposition reconstruction residual {resid:.3e} exceeds 1e-10"
        )
    return vals, vecs


def _require_same_basis(h0: SubspaceOperator, h1: SubspaceOperator):
    if not h0.same_basis(h1):
        raise ValueError(
            f"operator bases differ: ({h0.basis.n_spins}, {h0.basis.n_exc}) vs "
            f"({h1.basis.n_spins}, {h1.basis.n_exc})"
        )


def step_propagator(
    h0: SubspaceOperator,
    h1: SubspaceOperator,
    coupling: float,
    b_amp: float,
    dt: float,
) -> Propagator:
    """Unitary for one constant-field step."""
    _require_same_basis(h0, h1)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    ham = coupling * h0.real_mat() + b_amp * h1.real_mat()
    vals, vecs = np.linalg.eigh(ham)
    unitary = (vecs * np.exp(-1j * dt * vals)[None, :]) @ vecs.T
    dev = np.linalg.norm(unitary.conj().T @ unitary - np.eye(len(vals)), ord=2)
    if dev > UNITARITY_TOL:
        raise np.linalg.LinAlgError(f"propagator unitarity deviation {dev:.3e}")
    return Propagator(basis=h0.basis, unitary=unitary, b_amp=b_amp, dt=dt, coupling=coupling)


def pulse_propagator(
    pulse: Pulse, h0: SubspaceOperator, h1: SubspaceOperator, coupling: float
) -> np.ndarray:
    """Total unitary ``U(B_p) ... U(B_1)`` of the whole pulse."""
    _require_same_basis(h0, h1)
    u = np.eye(h0.dim, dtype=np.complex128)
    return _kernels.pulse_states(
        h0.real_mat(), h1.real_mat(), coupling, pulse.amplitudes, pulse.dt, u
    )


def evolve_pure(
    pulse: Pulse,
    psi0: np.ndarray,
    h0: SubspaceOperator,
    h1: SubspaceOperator,
    coupling: float,
    *,
    trajectory: bool = False,
):
    """Propagate a pure state through the pulse.

    Returns the final state, or ``(final, states)`` with one row per step
    boundary (``states[0]`` is the initial state) when ``trajectory`` is set.
    """
    _require_same_basis(h0, h1)
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.shape != (h0.dim,):
        raise ValueError(f"state shape {psi0.shape} does not match dim {h0.dim}")
    if trajectory:
        states = _kernels.pulse_states_traj(
            h0.real_mat(), h1.real_mat(), coupling, pulse.amplitudes, pulse.dt, psi0
        )
        return states[-1], states
    return _kernels.pulse_states(
        h0.real_mat(), h1.real_mat(), coupling, pulse.amplitudes, pulse.dt, psi0
    )


def evolve_density_unitary(
    pulse: Pulse,
    state: ThermalState,
    spec: ChainSpec | None = None,
    *,
    weight_cutoff: float = 0.0,
) -> ThermalState:
    """Conjugate every density block by its sector propagator product.

    Blocks with trace below ``weight_cutoff`` are passed through unchanged
    (their contribution to any end-pair observable is bounded by the trace).
    """
    spec = spec or state.spec
    if spec.n_spins != state.n_spins:
        raise ValueError("spec and state chain lengths differ")
    blocks = []
    for n, block in enumerate(state.blocks):
        if float(np.trace(block).real) <= weight_cutoff:
            blocks.append(block.astype(np.complex128))
            continue
        u = pulse_propagator(pulse, build_h0(spec, n), build_h1(spec, n), spec.coupling)
        blocks.append(u @ block @ u.conj().T)
    return ThermalState(
        spec=state.spec,
        kt_over_j=state.kt_over_j,
        blocks=blocks,
        energies=state.energies,
        vectors=state.vectors,
        weights=state.weights,
    )


def dephasing_matrix(basis: SubspaceBasis, lind: LindbladSpec) -> np.ndarray:
    """Elementwise decay rates of the dephasing generator on one sector.

    Entry (c, c') is ``gamma * sum_{i in S} (z_i(c) z_i(c') - 1)``, the rate
    at which the coherence between configurations c and c' decays; diagonal
    entries vanish (populations are preserved).
    """
    if lind.model is DephasingModel.END_SPINS:
        sites = (1, basis.n_spins)
    else:
        sites = tuple(range(1, basis.n_spins + 1))
    z = np.stack([basis.z_values(k) for k in sites])
    return lind.gamma * (z.T @ z - len(sites))


def evolve_lindblad(
    pulse: Pulse,
    rho0: np.ndarray,
    n_exc: int,
    lind: LindbladSpec,
    spec: ChainSpec,
    steps_per_pulse_step: int | None = None,
    *,
    refine: bool = True,
    refine_tol: float = 1e-6,
    max_substeps: int = 4096,
) -> np.ndarray:
    """Integrate the dephasing master equation through the pulse.

    Fixed-step RK4 within each constant-field segment.  When ``refine`` is
    set the substep count is doubled until the final state moves by less
    than ``refine_tol`` (max-norm), starting from ``steps_per_pulse_step``
    or a spectral-radius heuristic; :class:`StepRefinementError` reports the
    achieved delta when the cap is hit.
    """
    h0 = build_h0(spec, n_exc)
    h1 = build_h1(spec, n_exc)
    rho0 = np.asarray(rho0, dtype=np.complex128)
    if rho0.shape != (h0.dim, h0.dim):
        raise ValueError(f"block shape {rho0.shape} does not match dim {h0.dim}")
    decay = dephasing_matrix(h0.basis, lind)
    h0m = h0.real_mat()
    h1m = h1.real_mat()

    def run(nsub: int) -> np.ndarray:
        rho = rho0.copy()
        for b_amp in pulse.amplitudes:
            ham = spec.coupling * h0m + b_amp * h1m
            rho = _kernels.rk4_dephasing(ham, rho, decay, pulse.dt / nsub, nsub)
        return 0.5 * (rho + rho.conj().T)

    if steps_per_pulse_step is None:
        # resolve the fastest rate: (||H|| + max decay) dt / nsub kept ~ 0.5
        scale = spec.coupling * np.abs(h0m).sum(axis=1).max()
        scale += np.max(np.abs(pulse.amplitudes)) * np.abs(h1m).sum(axis=1).max()
        scale += float(np.max(np.abs(decay))) if decay.size else 0.0
        nsub = min(max(4, int(np.ceil(2.0 * scale * pulse.dt))), max_substeps)
    else:
        nsub = int(steps_per_pulse_step)
    if not refine:
        return run(nsub)

    rho = run(nsub)
    delta = np.inf
    while 2 * nsub <= max_substeps:
        nsub *= 2
        rho_fine = run(nsub)
        delta = float(np.max(np.abs(rho_fine - rho)))
        rho = rho_fine
        if delta < refine_tol:
            return rho
    raise StepRefinementError(delta, nsub)
