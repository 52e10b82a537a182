"""Imperfection studies: thermal start, field leakage, disorder, dephasing.

Each sweep evaluates one imperfection at a time (they are not combined),
records end-spin concurrence along a parameter grid, and is exactly
reproducible from its pulse, master seed, and grid.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .basis import end_pair_partition
from .hamiltonians import (
    ChainSpec,
    build_h0,
    build_h1,
    build_target_observable,
    ground_state,
    sample_disorder,
    thermal_state,
)
from .metrics import (
    concurrence,
    ensemble_end_density,
    ensemble_fidelity,
    reduced_end_density,
    thermal_fidelity_bound,
)
from .optimizer import (
    ControlProblem,
    OptimizeOptions,
    multistart_optimize,
    optimize_pulse,
)
from .propagation import (
    DephasingModel,
    LindbladSpec,
    evolve_lindblad,
    evolve_pure,
    pulse_propagator,
)
from .pulses import Pulse

__all__ = [
    "SweepKind",
    "SweepResult",
    "sweep_thermal",
    "sweep_leakage",
    "sweep_disorder",
    "sweep_dephasing",
    "sweep_to_csv",
    "sweep_to_json",
]

THERMAL_BLOCK_CUTOFF = 1e-12


class SweepKind(enum.Enum):
    THERMAL = "thermal"
    LEAKAGE = "leakage"
    DISORDER = "disorder"
    DEPHASING = "dephasing"


@dataclass(frozen=True)
class SweepResult:
    kind: SweepKind
    parameter: str
    grid: np.ndarray
    concurrences: np.ndarray
    fidelities: np.ndarray | None = None
    bounds: np.ndarray | None = None
    stderrs: np.ndarray | None = None
    n_samples: int = 1
    excluded: np.ndarray | None = None  # degenerate-sample count per grid point
    sample_std: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.concurrences, self.fidelities, self.bounds, self.stderrs):
            if arr is not None and len(arr) != len(self.grid):
                raise ValueError("grid and value arrays must have equal length")
        if self.stderrs is not None and np.any(self.stderrs < 0):
            raise ValueError("standard errors must be non-negative")


def _ideal_ground_concurrence(pulse: Pulse, spec: ChainSpec, n_exc: int) -> float:
    h0 = build_h0(spec, n_exc)
    _, psi0, _ = ground_state(h0)
    psi = evolve_pure(pulse, psi0, h0, build_h1(spec, n_exc), spec.coupling)
    part = end_pair_partition(h0.basis)
    return concurrence(reduced_end_density(psi, part))


def _reoptimized(problem: ControlProblem, pulse: Pulse, restarts: int, seed: int,
                 options: OptimizeOptions) -> Pulse:
    """Re-shape against the imperfect model, warm-starting from the pulse."""
    best = optimize_pulse(problem, pulse, options)
    if restarts > 1:
        alt = multistart_optimize(
            problem, pulse.steps, pulse.duration,
            restarts=restarts - 1, seed=seed, options=options,
        )
        if alt.final_fidelity > best.final_fidelity:
            best = alt
    return best.pulse


def sweep_thermal(pulse: Pulse, spec: ChainSpec, kt_grid, provenance: dict | None = None) -> SweepResult:
    """Apply one fixed pulse to Gibbs states across a temperature grid.

    The pulse does not depend on temperature, so each sector's propagator
    product is computed once and reused for every grid point.  Per point the
    result records concurrence, the achieved Tr[A rho], and the reachability
    bound.
    """
    kt_grid = np.asarray(sorted(float(t) for t in kt_grid))
    props = {}

    def sector_propagator(n: int) -> np.ndarray:
        if n not in props:
            props[n] = pulse_propagator(
                pulse, build_h0(spec, n), build_h1(spec, n), spec.coupling
            )
        return props[n]

    concs = np.zeros(len(kt_grid))
    fids = np.zeros(len(kt_grid))
    bounds = np.zeros(len(kt_grid))
    for i, kt in enumerate(kt_grid):
        state = thermal_state(spec, kt)
        blocks = []
        for n, block in enumerate(state.blocks):
            if float(np.trace(block).real) <= THERMAL_BLOCK_CUTOFF:
                blocks.append(block.astype(np.complex128))
                continue
            u = sector_propagator(n)
            blocks.append(u @ block @ u.conj().T)
        evolved = type(state)(
            spec=state.spec, kt_over_j=state.kt_over_j, blocks=blocks,
            energies=state.energies, vectors=state.vectors, weights=state.weights,
        )
        concs[i] = concurrence(ensemble_end_density(evolved))
        fids[i] = ensemble_fidelity(evolved)
        bounds[i] = thermal_fidelity_bound(spec, state)
    return SweepResult(
        kind=SweepKind.THERMAL,
        parameter="kT_over_J",
        grid=kt_grid,
        concurrences=concs,
        fidelities=fids,
        bounds=bounds,
        provenance=provenance or {},
    )


def sweep_leakage(
    pulse: Pulse,
    spec: ChainSpec,
    xi_grid,
    reoptimize: bool = False,
    *,
    restarts: int = 5,
    seed: int = 0,
    options: OptimizeOptions = OptimizeOptions(),
    provenance: dict | None = None,
) -> SweepResult:
    """Concurrence versus control-field leakage length.

    With ``reoptimize`` unset the given pulse drives the leaky control as-is;
    otherwise a fresh pulse (same discretization) is optimized against each
    leaky control operator.
    """
    xi_grid = np.asarray([float(x) for x in xi_grid])
    n_exc = spec.largest_sector()
    h0 = build_h0(spec, n_exc)
    _, psi0, _ = ground_state(h0)
    part = end_pair_partition(h0.basis)
    concs = np.zeros(len(xi_grid))
    fids = np.zeros(len(xi_grid))
    a_op = build_target_observable(spec.n_spins, n_exc)
    for i, xi in enumerate(xi_grid):
        leaky = spec.with_xi(xi)
        used = pulse
        if reoptimize:
            problem = ControlProblem(leaky, psi0, n_exc)
            used = _reoptimized(
                problem, pulse, restarts,
                int(np.random.SeedSequence([seed, i]).generate_state(1)[0]),
                options,
            )
        psi = evolve_pure(used, psi0, h0, build_h1(leaky, n_exc), spec.coupling)
        concs[i] = concurrence(reduced_end_density(psi, part))
        fids[i] = float(np.real(np.vdot(psi, a_op.mat @ psi)))
    return SweepResult(
        kind=SweepKind.LEAKAGE,
        parameter="xi",
        grid=xi_grid,
        concurrences=concs,
        fidelities=fids,
        provenance=provenance or {},
    )


def sweep_disorder(
    pulse: Pulse,
    spec: ChainSpec,
    alpha_grid,
    samples: int = 100,
    master_seed: int = 0,
    *,
    reoptimize: bool = False,
    restarts: int = 1,
    options: OptimizeOptions = OptimizeOptions(),
    provenance: dict | None = None,
) -> SweepResult:
    """Monte Carlo average of the concurrence over random bond disorder.

    Per (alpha, sample): draw bond offsets, prepare the ground state of the
    perturbed drift, evolve it under the perturbed drift with the given
    (or per-sample reoptimized) pulse, and record the end-spin concurrence.
    Samples whose perturbed ground state is near-degenerate are excluded and
    counted.  Sample seeds derive from (master_seed, alpha index, sample
    index), so any subset replays identically.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    alpha_grid = np.asarray([float(a) for a in alpha_grid])
    n_exc = spec.largest_sector()
    means = np.zeros(len(alpha_grid))
    stderrs = np.zeros(len(alpha_grid))
    stds = np.zeros(len(alpha_grid))
    excluded = np.zeros(len(alpha_grid), dtype=int)
    for i, alpha in enumerate(alpha_grid):
        vals = []
        for s in range(samples):
            seed_seq = np.random.SeedSequence([int(master_seed), i, s])
            eps = sample_disorder(spec.n_spins, alpha, seed_seq)
            perturbed = spec.with_epsilon(eps)
            h0 = build_h0(perturbed, n_exc)
            _, psi0, degenerate = ground_state(h0)
            if degenerate:
                excluded[i] += 1
                continue
            used = pulse
            if reoptimize:
                problem = ControlProblem(perturbed, psi0, n_exc)
                used = _reoptimized(
                    problem, pulse, restarts, int(seed_seq.generate_state(1)[0]), options
                )
            psi = evolve_pure(used, psi0, h0, build_h1(perturbed, n_exc), perturbed.coupling)
            part = end_pair_partition(h0.basis)
            vals.append(concurrence(reduced_end_density(psi, part)))
        vals = np.asarray(vals)
        if len(vals) == 0:
            raise RuntimeError(f"all samples excluded as degenerate at alpha={alpha}")
        means[i] = vals.mean()
        stds[i] = vals.std(ddof=1) if len(vals) > 1 else 0.0
        stderrs[i] = stds[i] / np.sqrt(len(vals))
    return SweepResult(
        kind=SweepKind.DISORDER,
        parameter="alpha",
        grid=alpha_grid,
        concurrences=means,
        stderrs=stderrs,
        sample_std=stds,
        n_samples=samples,
        excluded=excluded,
        provenance=provenance or {},
    )


def sweep_dephasing(
    pulse: Pulse,
    spec: ChainSpec,
    gamma_grid,
    model: DephasingModel = DephasingModel.END_SPINS,
    *,
    provenance: dict | None = None,
) -> SweepResult:
    """Concurrence versus dephasing rate for one noise model."""
    gamma_grid = np.asarray([float(g) for g in gamma_grid])
    n_exc = spec.largest_sector()
    h0 = build_h0(spec, n_exc)
    _, psi0, _ = ground_state(h0)
    part = end_pair_partition(h0.basis)
    rho0 = np.outer(psi0, psi0.conj())
    concs = np.zeros(len(gamma_grid))
    for i, gamma in enumerate(gamma_grid):
        if gamma == 0.0:
            psi = evolve_pure(pulse, psi0, h0, build_h1(spec, n_exc), spec.coupling)
            concs[i] = concurrence(reduced_end_density(psi, part))
            continue
        lind = LindbladSpec(gamma=gamma, model=model)
        rho = evolve_lindblad(pulse, rho0, n_exc, lind, spec)
        concs[i] = concurrence(reduced_end_density(rho, part))
    return SweepResult(
        kind=SweepKind.DEPHASING,
        parameter="gamma_over_J",
        grid=gamma_grid,
        concurrences=concs,
        provenance=dict(provenance or {}, model=model.value),
    )


def sweep_to_csv(result: SweepResult) -> str:
    """One row per grid point: parameter, mean value, stderr, bound, n_samples.

    A trailing fidelity column is appended for sweeps that track Tr[A rho].
    """
    lines = [f"{result.parameter},concurrence,stderr,bound,n_samples,fidelity"]
    for i, x in enumerate(result.grid):
        stderr = f"{result.stderrs[i]:.12g}" if result.stderrs is not None else ""
        fid = f"{result.fidelities[i]:.12g}" if result.fidelities is not None else ""
        bound = f"{result.bounds[i]:.12g}" if result.bounds is not None else ""
        lines.append(
            f"{x:.12g},{result.concurrences[i]:.12g},{stderr},{bound},{result.n_samples},{fid}"
        )
    return "\n".join(lines) + "\n"


def sweep_to_json(result: SweepResult) -> str:
    doc = {
        "kind": result.kind.value,
        "parameter": result.parameter,
        "grid": result.grid.tolist(),
        "concurrence": result.concurrences.tolist(),
        "n_samples": result.n_samples,
        "provenance": result.provenance,
    }
    if result.fidelities is not None:
        doc["fidelity"] = result.fidelities.tolist()
    if result.bounds is not None:
        doc["bound"] = result.bounds.tolist()
    if result.stderrs is not None:
        doc["stderr"] = result.stderrs.tolist()
    if result.sample_std is not None:
        doc["sample_std"] = result.sample_std.tolist()
    if result.excluded is not None:
        doc["excluded"] = result.excluded.tolist()
    return json.dumps(doc, indent=2, sort_keys=True)


def sweep_filename(result: SweepResult, suffix: str) -> str:
    """Content-addressed artifact name: kind, chain length, short hash."""
    n = result.provenance.get("n_spins", "x")
    digest = hashlib.sha256(sweep_to_json(result).encode()).hexdigest()[:10]
    return f"sweep_{result.kind.value}_N{n}_{digest}.{suffix}"
