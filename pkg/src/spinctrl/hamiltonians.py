"""Operators of the controlled Heisenberg chain, restricted to one sector.

All builders return real symmetric matrices in the computational basis of a
:class:`~spinctrl.basis.SubspaceBasis`; the exchange coupling J is factored
out of the drift so one cached matrix serves every J sweep (the total
Hamiltonian is assembled as ``J * h0 + B * h1`` at propagation time).

Sign conventions follow Z|0> = +|0>, Z|1> = -|1> with |1> the excitation,
which makes the two-spin singlet the ground state of the antiferromagnetic
drift (eigenvalue -3 against +1 for the triplet).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .basis import SubspaceBasis, end_pair_partition, enumerate_basis

__all__ = [
    "ChainSpec",
    "SubspaceOperator",
    "ThermalState",
    "build_h0",
    "build_h1",
    "build_target_observable",
    "ground_state",
    "thermal_state",
    "sample_disorder",
    "operator_to_json",
    "operator_from_json",
]

HERMITICITY_TOL = 1e-12
DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True)
class ChainSpec:
    """Chain parameters that fully determine drift and control operators.

    Attributes
    ----------
    n_spins : int
        Chain length N >= 2.
    coupling : float
        Mean exchange coupling J > 0 (frequency units, hbar = 1).
    epsilon : tuple of float
        Per-bond fractional offsets, length N - 1; bond k carries weight
        ``(1 + epsilon[k])``.  Defaults to the homogeneous chain.
    xi : float
        Control-field leakage length; 0 means the field addresses spin 1
        only, larger values spread it as ``exp(-(k-1)/xi)`` over the chain.
    """

    n_spins: int
    coupling: float = 1.0
    epsilon: tuple[float, ...] = ()
    xi: float = 0.0

    def __post_init__(self):
        if self.n_spins < 2:
            raise ValueError(f"n_spins must be >= 2, got {self.n_spins}")
        if not self.coupling > 0:
            raise ValueError(f"coupling must be positive, got {self.coupling}")
        eps = tuple(float(e) for e in self.epsilon)
        if not eps:
            eps = (0.0,) * (self.n_spins - 1)
        if len(eps) != self.n_spins - 1:
            raise ValueError(
                f"epsilon must have length {self.n_spins - 1}, got {len(eps)}"
            )
        if any(abs(e) > 1.0 for e in eps):
            raise ValueError("bond offsets must satisfy |epsilon_k| <= 1")
        if self.xi < 0:
            raise ValueError(f"xi must be >= 0, got {self.xi}")
        object.__setattr__(self, "epsilon", eps)

    def with_epsilon(self, epsilon) -> "ChainSpec":
        return ChainSpec(self.n_spins, self.coupling, tuple(epsilon), self.xi)

    def with_xi(self, xi: float) -> "ChainSpec":
        return ChainSpec(self.n_spins, self.coupling, self.epsilon, xi)

    def largest_sector(self) -> int:
        """Excitation count of the sector holding the prepared ground state."""
        return (self.n_spins + 1) // 2


@dataclass(frozen=True)
class SubspaceOperator:
    """Hermitian operator on one excitation sector."""

    basis: SubspaceBasis
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = self.mat
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match basis dim {self.basis.dim}"
            )
        dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
        if dev > HERMITICITY_TOL * scale:
            raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")

    @property
    def dim(self) -> int:
        return self.basis.dim

    def same_basis(self, other: "SubspaceOperator") -> bool:
        return (
            self.basis.n_spins == other.basis.n_spins
            and self.basis.n_exc == other.basis.n_exc
        )

    def real_mat(self) -> np.ndarray:
        """Real view of the entries (all chain operators are real symmetric)."""
        if np.iscomplexobj(self.mat):
            if np.max(np.abs(self.mat.imag)) > HERMITICITY_TOL:
                raise ValueError("operator has non-negligible imaginary entries")
            return np.ascontiguousarray(self.mat.real)
        return np.ascontiguousarray(self.mat)


def build_h0(spec: ChainSpec, n_exc: int) -> SubspaceOperator:
    """Drift (isotropic exchange, J factored out) on the ``n_exc`` sector.

    Matrix elements: +-(1 + eps_k) on the diagonal for aligned/antiparallel
    bonds and 2(1 + eps_k) between configurations that differ by a swap of
    adjacent antiparallel spins.
    """
    basis = enumerate_basis(spec.n_spins, n_exc)
    bond_w = 1.0 + np.asarray(spec.epsilon)
    mat = _kernels.h0_dense(basis.configs, spec.n_spins, bond_w)
    return SubspaceOperator(basis=basis, mat=mat)


def control_weights(spec: ChainSpec) -> np.ndarray:
    """Field weight on each spin: 1 on spin 1, exp(-(k-1)/xi) beyond."""
    w = np.zeros(spec.n_spins)
    w[0] = 1.0
    if spec.xi > 0:
        k = np.arange(1, spec.n_spins)
        w[1:] = np.exp(-k / spec.xi)
    return w


def build_h1(spec: ChainSpec, n_exc: int) -> SubspaceOperator:
    """Control operator (Z field on spin 1, optionally leaking down the chain).

    Diagonal in the computational basis: entry for configuration c is
    ``sum_k w_k z_k(c)`` with z the Z eigenvalue (+1 for |0>, -1 for |1>).
    """
    basis = enumerate_basis(spec.n_spins, n_exc)
    w = control_weights(spec)
    diag = np.zeros(basis.dim)
    for k in range(1, spec.n_spins + 1):
        if w[k - 1] != 0.0:
            diag += w[k - 1] * basis.z_values(k)
    return SubspaceOperator(basis=basis, mat=np.diag(diag))


def build_target_observable(n_spins: int, n_exc: int) -> SubspaceOperator:
    """Projector onto states whose end spins form a singlet.

    Restricted to the sector it is the rank-C(N-2, n-1) projector spanned by
    ``(|0,m,1> - |1,m,0>)/sqrt(2)`` over interior patterns m; it vanishes on
    the 0- and N-excitation sectors.
    """
    basis = enumerate_basis(n_spins, n_exc)
    mat = np.zeros((basis.dim, basis.dim))
    if 1 <= n_exc <= n_spins - 1:
        part = end_pair_partition(basis)
        lo = part.indices[(0, 1)]
        hi = part.indices[(1, 0)]
        # interiors of the two groups coincide element-by-element: both are
        # ascending enumerations of the same (n_exc - 1)-excitation patterns
        mat[lo, lo] = 0.5
        mat[hi, hi] = 0.5
        mat[lo, hi] = -0.5
        mat[hi, lo] = -0.5
    return SubspaceOperator(basis=basis, mat=mat)


def ground_state(op: SubspaceOperator) -> tuple[float, np.ndarray, bool]:
    """Minimal eigenvalue, a unit eigenvector, and a near-degeneracy flag.

    The flag is set when the gap to the next eigenvalue is below
    ``1e-9 * (spectral range)``.
    """
    vals, vecs = np.linalg.eigh(op.real_mat())
    spread = float(vals[-1] - vals[0])
    degenerate = len(vals) > 1 and (vals[1] - vals[0]) <= DEGENERACY_RTOL * spread
    if len(vals) == 1:
        degenerate = False
    return float(vals[0]), vecs[:, 0].astype(np.complex128), degenerate


@dataclass(frozen=True)
class ThermalState:
    """Block-diagonal Gibbs state of the drift, one block per sector.

    ``blocks[n]`` is the (unnormalized-trace) density block on the n-excitation
    sector; block traces sum to 1.  ``energies``/``vectors``/``weights`` hold
    the per-block eigendecomposition the blocks were assembled from, with
    energies ascending (weights therefore non-increasing within each block).
    """

    spec: ChainSpec
    kt_over_j: float
    blocks: list[np.ndarray] = field(repr=False)
    energies: list[np.ndarray] = field(repr=False)
    vectors: list[np.ndarray] = field(repr=False)
    weights: list[np.ndarray] = field(repr=False)

    @property
    def n_spins(self) -> int:
        return self.spec.n_spins

    def block_traces(self) -> np.ndarray:
        return np.array([float(np.trace(b).real) for b in self.blocks])


def thermal_state(spec: ChainSpec, kt_over_j: float) -> ThermalState:
    """Gibbs state of ``J * h0`` at temperature ``kT / J``.

    Exponents are shifted by the global ground energy before exponentiation,
    so arbitrarily low temperatures stay finite; normalization runs jointly
    over all sectors.
    """
    if not kt_over_j > 0:
        raise ValueError("kt_over_j must be positive; use the ground state at T = 0")
    energies = []
    vectors = []
    for n in range(spec.n_spins + 1):
        vals, vecs = np.linalg.eigh(build_h0(spec, n).real_mat())
        energies.append(vals)
        vectors.append(vecs)
    e_min = min(float(v[0]) for v in energies)
    raw = [np.exp(-(v - e_min) / kt_over_j) for v in energies]
    z = sum(float(r.sum()) for r in raw)
    weights = [r / z for r in raw]
    blocks = [
        (vecs * w[None, :]) @ vecs.T
        for vecs, w in zip(vectors, weights)
    ]
    return ThermalState(
        spec=spec,
        kt_over_j=float(kt_over_j),
        blocks=blocks,
        energies=energies,
        vectors=vectors,
        weights=weights,
    )


def sample_disorder(n_spins: int, alpha: float, rng_seed) -> np.ndarray:
    """Draw N - 1 bond offsets uniformly from [-alpha, +alpha].

    ``rng_seed`` may be anything accepted by :func:`numpy.random.default_rng`
    (including a SeedSequence), so sweep harnesses can derive independent
    reproducible streams.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    rng = np.random.default_rng(rng_seed)
    return rng.uniform(-alpha, alpha, size=n_spins - 1)


def operator_to_json(op: SubspaceOperator) -> str:
    """Serialize an operator: dim, basis descriptor, row-major [re, im] pairs."""
    mat = np.asarray(op.mat, dtype=np.complex128)
    entries = [[float(v.real), float(v.imag)] for v in mat.ravel()]
    doc = {
        "dim": op.dim,
        "basis": {"n_spins": op.basis.n_spins, "n_exc": op.basis.n_exc},
        "entries": entries,
    }
    return json.dumps(doc)


def operator_from_json(text: str) -> SubspaceOperator:
    """Inverse of :func:`operator_to_json`."""
    doc = json.loads(text)
    dim = int(doc["dim"])
    entries = np.asarray(doc["entries"], dtype=np.float64)
    if entries.shape != (dim * dim, 2):
        raise ValueError(
            f"expected {dim * dim} [re, im] pairs, got shape {entries.shape}"
        )
    mat = (entries[:, 0] + 1j * entries[:, 1]).reshape(dim, dim)
    if np.max(np.abs(mat.imag)) == 0.0:
        mat = mat.real.copy()
    basis = enumerate_basis(int(doc["basis"]["n_spins"]), int(doc["basis"]["n_exc"]))
    if basis.dim != dim:
        raise ValueError(
            f"basis ({basis.n_spins}, {basis.n_exc}) has dim {basis.dim}, file says {dim}"
        )
    return SubspaceOperator(basis=basis, mat=mat)
