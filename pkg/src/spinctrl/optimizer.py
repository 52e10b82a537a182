"""Quasi-Newton pulse shaping for end-to-end singlet generation.

The objective is the singlet-projector expectation of the propagated state
(pure initial states) or its trace form over a block-diagonal thermal
ensemble.  Gradients are exact: each step exponential is differentiated
through its spectral representation, so BFGS line searches see machine-
precision derivatives rather than first-order-in-dt estimates.

The curvature updates and box handling are delegated to SciPy's L-BFGS-B
(gradient projection with an active-set free-variable subspace), with the
memory depth raised so the search behaves like full BFGS at these problem
sizes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from . import _kernels
from .basis import end_pair_partition
from .hamiltonians import (
    ChainSpec,
    ThermalState,
    build_h0,
    build_h1,
    build_target_observable,
    ground_state,
    thermal_state,
)
from .metrics import (
    concurrence,
    ensemble_end_density,
    ensemble_fidelity,
    reduced_end_density,
    thermal_fidelity_bound,
)
from .propagation import evolve_density_unitary, evolve_pure
from .pulses import Pulse, default_initial_pulse, random_restart_pulse

__all__ = [
    "ObjectiveKind",
    "OptimizerStatus",
    "ControlProblem",
    "OptimizeOptions",
    "OptimizationResult",
    "MinTimeResult",
    "ground_problem",
    "ensemble_problem",
    "objective_and_gradient",
    "evaluate_pulse",
    "optimize_pulse",
    "multistart_optimize",
    "min_time_scan",
    "RECOMMENDED_HORIZONS",
    "recommended_horizon",
]

WEIGHT_CUTOFF = 1e-12


class ObjectiveKind(enum.Enum):
    PURE_FIDELITY = "pure"
    ENSEMBLE_FIDELITY = "ensemble"


class OptimizerStatus(enum.Enum):
    CONVERGED = "converged"
    STALLED = "stalled"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class _Sector:
    n_exc: int
    h0: np.ndarray
    h1: np.ndarray
    a_op: np.ndarray
    x0: np.ndarray  # initial state columns (dim x r)
    w: np.ndarray  # column weights


class ControlProblem:
    """A fixed chain, initial state, and singlet target for the optimizer.

    ``initial`` is either a pure vector on the ``n_exc`` sector or a
    :class:`ThermalState`; ensembles are split into their sectors, keeping
    only eigenvector columns whose weight exceeds ``weight_cutoff`` (sectors
    where the target projector vanishes carry no gradient and are dropped).
    """

    def __init__(
        self,
        spec: ChainSpec,
        initial,
        n_exc: int | None = None,
        *,
        weight_cutoff: float = WEIGHT_CUTOFF,
    ):
        self.spec = spec
        self.initial = initial
        self.weight_cutoff = weight_cutoff
        self._sectors: list[_Sector] = []
        if isinstance(initial, ThermalState):
            if initial.n_spins != spec.n_spins:
                raise ValueError("thermal state and spec chain lengths differ")
            self.kind = ObjectiveKind.ENSEMBLE_FIDELITY
            self.n_exc = None
            for n in range(spec.n_spins + 1):
                w = initial.weights[n]
                keep = w > weight_cutoff
                a_op = build_target_observable(spec.n_spins, n)
                if not np.any(keep) or not np.any(a_op.mat):
                    continue
                self._sectors.append(_Sector(
                    n_exc=n,
                    h0=build_h0(spec, n).real_mat(),
                    h1=build_h1(spec, n).real_mat(),
                    a_op=a_op.real_mat(),
                    x0=initial.vectors[n][:, keep].astype(np.complex128),
                    w=w[keep].copy(),
                ))
        else:
            if n_exc is None:
                raise ValueError("a pure initial state needs its sector n_exc")
            psi = np.asarray(initial, dtype=np.complex128)
            h0 = build_h0(spec, n_exc)
            if psi.shape != (h0.dim,):
                raise ValueError(f"state shape {psi.shape} != sector dim {h0.dim}")
            if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
                raise ValueError("initial state must be unit norm")
            self.kind = ObjectiveKind.PURE_FIDELITY
            self.n_exc = n_exc
            self._sectors.append(_Sector(
                n_exc=n_exc,
                h0=h0.real_mat(),
                h1=build_h1(spec, n_exc).real_mat(),
                a_op=build_target_observable(spec.n_spins, n_exc).real_mat(),
                x0=psi[:, None],
                w=np.ones(1),
            ))

    def objective_ceiling(self) -> float:
        """Largest objective any pulse can reach (1 for pure starts)."""
        if self.kind is ObjectiveKind.PURE_FIDELITY:
            return 1.0
        return thermal_fidelity_bound(self.spec, self.initial)


def ground_problem(spec: ChainSpec, n_exc: int | None = None) -> ControlProblem:
    """Control problem starting from the drift ground state of a sector."""
    n = spec.largest_sector() if n_exc is None else n_exc
    _, psi, _ = ground_state(build_h0(spec, n))
    return ControlProblem(spec, psi, n)


def ensemble_problem(spec: ChainSpec, kt_over_j: float) -> ControlProblem:
    """Control problem starting from the Gibbs state at ``kT/J``."""
    return ControlProblem(spec, thermal_state(spec, kt_over_j))


def objective_and_gradient(pulse: Pulse, problem: ControlProblem) -> tuple[float, np.ndarray]:
    """Objective K and its exact gradient dK/dB_m for every pulse step."""
    total = 0.0
    grad = np.zeros(pulse.steps)
    for sec in problem._sectors:
        k, g = _kernels.objective_gradient(
            sec.h0, sec.h1, sec.a_op, problem.spec.coupling,
            pulse.amplitudes, pulse.dt, sec.x0, sec.w,
        )
        total += k
        grad += g
    return total, grad


def evaluate_pulse(pulse: Pulse, problem: ControlProblem) -> tuple[float, float]:
    """Final fidelity and end-spin concurrence of a pulse on this problem."""
    spec = problem.spec
    if problem.kind is ObjectiveKind.PURE_FIDELITY:
        sec = problem._sectors[0]
        psi = evolve_pure(
            pulse, sec.x0[:, 0],
            build_h0(spec, sec.n_exc), build_h1(spec, sec.n_exc), spec.coupling,
        )
        fid = float(np.real(np.vdot(psi, sec.a_op @ psi)))
        part = end_pair_partition(build_h0(spec, sec.n_exc).basis)
        return fid, concurrence(reduced_end_density(psi, part))
    evolved = evolve_density_unitary(
        pulse, problem.initial, spec, weight_cutoff=problem.weight_cutoff
    )
    return ensemble_fidelity(evolved), concurrence(ensemble_end_density(evolved))


@dataclass(frozen=True)
class OptimizeOptions:
    max_iterations: int = 5000
    grad_tol: float = 1e-8
    value_tol: float = 1e-10
    bound: float | None = None
    target_fidelity: float | None = None
    history_size: int = 100


@dataclass(frozen=True)
class OptimizationResult:
    pulse: Pulse
    final_fidelity: float
    final_concurrence: float
    iterations: int
    gradient_norm_at_exit: float
    status: OptimizerStatus
    fidelity_trace: np.ndarray = field(repr=False)
    message: str = ""


def optimize_pulse(
    problem: ControlProblem,
    init: Pulse,
    options: OptimizeOptions = OptimizeOptions(),
) -> OptimizationResult:
    """Maximize the objective over step amplitudes from the given start.

    Every accepted iterate strictly increases the objective (monotone line
    search); the returned trace holds the objective at the start and after
    each accepted iteration.
    """
    x0 = init.amplitudes.copy()
    bounds = None
    if options.bound is not None:
        x0 = np.clip(x0, -options.bound, options.bound)
        bounds = [(-options.bound, options.bound)] * len(x0)

    trace = []
    last = {"x": None, "k": None}

    def negative_objective(x):
        pulse = Pulse(dt=init.dt, amplitudes=x)
        k, g = objective_and_gradient(pulse, problem)
        last["x"], last["k"] = x.copy(), k
        return -k, -g

    k0, _ = objective_and_gradient(init.with_amplitudes(x0), problem)
    trace.append(k0)

    def callback(xk):
        if last["x"] is not None and np.array_equal(xk, last["x"]):
            k = last["k"]
        else:
            k, _ = objective_and_gradient(init.with_amplitudes(xk), problem)
        trace.append(k)
        if options.target_fidelity is not None and k >= options.target_fidelity:
            raise StopIteration

    res = scipy.optimize.minimize(
        negative_objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        callback=callback,
        options={
            "maxiter": options.max_iterations,
            "ftol": options.value_tol,
            "gtol": options.grad_tol,
            "maxcor": min(options.history_size, max(2, len(x0))),
        },
    )

    amps = res.x
    if options.bound is not None:
        amps = np.clip(amps, -options.bound, options.bound)
    final = Pulse(dt=init.dt, amplitudes=amps, bound=options.bound)
    fid, conc = evaluate_pulse(final, problem)

    message = res.message if isinstance(res.message, str) else res.message.decode()
    target_hit = (
        options.target_fidelity is not None and fid >= options.target_fidelity
    )
    if res.success or target_hit:
        status = OptimizerStatus.CONVERGED
    elif res.status == 1:
        status = OptimizerStatus.ITERATION_LIMIT
    else:
        status = OptimizerStatus.STALLED
    return OptimizationResult(
        pulse=final,
        final_fidelity=fid,
        final_concurrence=conc,
        iterations=int(res.nit),
        gradient_norm_at_exit=float(np.max(np.abs(res.jac))),
        status=status,
        fidelity_trace=np.asarray(trace),
        message=message,
    )


def multistart_optimize(
    problem: ControlProblem,
    steps: int,
    duration: float,
    restarts: int = 5,
    seed: int = 0,
    options: OptimizeOptions = OptimizeOptions(),
) -> OptimizationResult:
    """Best of ``restarts`` seeded local optimizations.

    Restart 0 starts near zero field (the documented default initial pulse);
    later restarts draw wider random amplitudes.  Deterministic in ``seed``.
    """
    dt = duration / steps
    best = None
    for r in range(restarts):
        rng = np.random.SeedSequence([int(seed), r])
        if r == 0:
            init = default_initial_pulse(steps, dt, problem.spec.coupling, rng)
        else:
            init = random_restart_pulse(steps, dt, problem.spec.coupling, rng)
        result = optimize_pulse(problem, init, options)
        if best is None or result.final_fidelity > best.final_fidelity:
            best = result
        if (
            options.target_fidelity is not None
            and best.final_fidelity >= options.target_fidelity
        ):
            break
    return best


@dataclass(frozen=True)
class MinTimeResult:
    times: np.ndarray
    best_fidelities: np.ndarray
    threshold: float
    t_c: float | None

    def table(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.best_fidelities.tolist()))


def min_time_scan(
    problem: ControlProblem,
    fidelity_threshold: float,
    time_grid,
    restarts: int = 3,
    rng_seed: int = 0,
    steps: int = 64,
    options: OptimizeOptions = OptimizeOptions(),
) -> MinTimeResult:
    """Best reachable fidelity per horizon and the first one over threshold.

    For each horizon the optimizer runs from ``restarts`` seeded starts;
    the restart seeds for a given horizon index do not depend on the number
    of restarts, so enlarging ``restarts`` only extends the search.
    """
    if not 0 < fidelity_threshold < 1:
        raise ValueError("fidelity_threshold must lie in (0, 1)")
    times = np.asarray(sorted(float(t) for t in time_grid))
    if times.size == 0:
        raise ValueError("time grid is empty")
    opts = replace(options, target_fidelity=fidelity_threshold)
    best = np.zeros(times.size)
    for i, t_f in enumerate(times):
        result = multistart_optimize(
            problem, steps, t_f, restarts=restarts,
            seed=int(np.random.SeedSequence([rng_seed, i]).generate_state(1)[0]),
            options=opts,
        )
        best[i] = result.final_fidelity
    above = np.nonzero(best >= fidelity_threshold)[0]
    t_c = float(times[above[0]]) if len(above) else None
    return MinTimeResult(times=times, best_fidelities=best, threshold=fidelity_threshold, t_c=t_c)


# Horizons (units of 1/J) at which the 0.99-fidelity target became reachable
# in this package's own scans (threshold 0.99, 64 steps, unconstrained
# amplitudes, 2-3 restarts); reproduction recipes take these plus a 20%
# margin.  Entries above N=8 are scan-guided estimates on the quadratic
# trend rather than fine-grid scans.
RECOMMENDED_HORIZONS: dict[int, float] = {
    4: 1.6,
    5: 2.4,
    6: 2.6,
    7: 3.5,
    8: 4.5,
    9: 6.0,
    10: 7.0,
    11: 8.3,
    12: 9.3,
}


def recommended_horizon(n_spins: int, margin: float = 1.2) -> float:
    """Tabulated minimum horizon for a chain length, with safety margin.

    Lengths beyond the table are extrapolated with the quadratic trend
    fitted to the tabulated values.
    """
    if n_spins in RECOMMENDED_HORIZONS:
        return margin * RECOMMENDED_HORIZONS[n_spins]
    ns = np.array(sorted(RECOMMENDED_HORIZONS))
    ts = np.array([RECOMMENDED_HORIZONS[n] for n in ns])
    coef = np.polyfit(ns.astype(float) ** 2, ts, 1)
    return margin * float(np.polyval(coef, n_spins ** 2))
