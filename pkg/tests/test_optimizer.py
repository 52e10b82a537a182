import numpy as np
import pytest
import scipy.optimize

import spinctrl as sc
from spinctrl import optimizer as opt
from spinctrl.metrics import thermal_fidelity_bound
from spinctrl.pulses import Pulse


def finite_difference_gradient(pulse, problem, h=1e-5):
    g = np.zeros(pulse.steps)
    for m in range(pulse.steps):
        up = pulse.amplitudes.copy()
        dn = pulse.amplitudes.copy()
        up[m] += h
        dn[m] -= h
        kp, _ = opt.objective_and_gradient(pulse.with_amplitudes(up), problem)
        km, _ = opt.objective_and_gradient(pulse.with_amplitudes(dn), problem)
        g[m] = (kp - km) / (2 * h)
    return g


@pytest.mark.parametrize("n_spins,steps,seed", [
    (2, 3, 0), (2, 8, 1), (4, 3, 2), (4, 8, 3), (6, 3, 4), (6, 8, 5),
])
def test_gradient_matches_finite_differences(n_spins, steps, seed):
    problem = opt.ground_problem(sc.ChainSpec(n_spins))
    rng = np.random.default_rng(seed)
    pulse = Pulse(dt=0.3, amplitudes=rng.uniform(-1.5, 1.5, size=steps))
    _, grad = opt.objective_and_gradient(pulse, problem)
    fd = finite_difference_gradient(pulse, problem)
    # denominator floored at 1% of the gradient scale; below that the
    # central-difference oracle's own truncation error dominates
    scale = np.max(np.abs(fd))
    assert np.max(np.abs(grad - fd) / np.maximum(np.abs(fd), 1e-2 * scale)) < 1e-6


def test_gradient_matches_finite_differences_ensemble():
    problem = opt.ensemble_problem(sc.ChainSpec(4), 1.0)
    rng = np.random.default_rng(7)
    pulse = Pulse(dt=0.4, amplitudes=rng.uniform(-1, 1, size=4))
    _, grad = opt.objective_and_gradient(pulse, problem)
    fd = finite_difference_gradient(pulse, problem)
    # denominator floored at 1% of the gradient scale; below that the
    # central-difference oracle's own truncation error dominates
    scale = np.max(np.abs(fd))
    assert np.max(np.abs(grad - fd) / np.maximum(np.abs(fd), 1e-2 * scale)) < 1e-6


def test_gradient_vanishes_at_critical_point():
    problem = opt.ground_problem(sc.ChainSpec(4))
    init = Pulse(dt=1.0, amplitudes=np.array([0.3]))
    res = opt.optimize_pulse(
        problem, init, opt.OptimizeOptions(grad_tol=1e-12, value_tol=1e-15)
    )
    _, grad = opt.objective_and_gradient(res.pulse, problem)
    assert np.linalg.norm(grad) < 1e-8


def test_pure_objective_equals_ensemble_at_zero_temperature():
    spec = sc.ChainSpec(4)
    pure = opt.ground_problem(spec)
    frozen = opt.ensemble_problem(spec, 1e-3)  # ground weight is 1 to machine precision
    rng = np.random.default_rng(3)
    pulse = Pulse(dt=0.3, amplitudes=rng.uniform(-1, 1, size=6))
    k_pure, g_pure = opt.objective_and_gradient(pulse, pure)
    k_ens, g_ens = opt.objective_and_gradient(pulse, frozen)
    assert k_pure == pytest.approx(k_ens, abs=1e-12)
    assert np.max(np.abs(g_pure - g_ens)) < 1e-12


def test_objective_matches_density_evolution():
    spec = sc.ChainSpec(4)
    problem = opt.ensemble_problem(spec, 1.5)
    rng = np.random.default_rng(8)
    pulse = Pulse(dt=0.35, amplitudes=rng.uniform(-1, 1, size=5))
    k, _ = opt.objective_and_gradient(pulse, problem)
    evolved = sc.evolve_density_unitary(pulse, problem.initial, spec)
    assert k == pytest.approx(sc.ensemble_fidelity(evolved), abs=1e-12)


def test_two_level_optimum_matches_analytic_grid_oracle():
    # N=2 single-excitation sector from the triplet: H = -J + 2J X + B Z on
    # the sector basis, so each step has the closed form
    #   U = e^{iJ dt} [cos(w dt) I - i sin(w dt) (B Z + 2J X)/w], w^2 = B^2 + 4J^2
    spec = sc.ChainSpec(2)
    triplet = np.array([1.0, 1.0]) / np.sqrt(2)
    problem = sc.ControlProblem(spec, triplet, 1)
    dt, steps = 0.35, 2

    def analytic_objective(b1, b2):
        shape = np.broadcast(np.asarray(b1), np.asarray(b2)).shape
        psi = [np.full(shape, triplet[0], dtype=complex),
               np.full(shape, triplet[1], dtype=complex)]
        for b in (np.asarray(b1, dtype=float), np.asarray(b2, dtype=float)):
            w = np.sqrt(b ** 2 + 4.0)
            c, s = np.cos(w * dt), np.sin(w * dt) / w
            top = c * psi[0] - 1j * s * (b * psi[0] + 2 * psi[1])
            bot = c * psi[1] - 1j * s * (2 * psi[0] - b * psi[1])
            psi = [top, bot]
        return 0.5 * np.abs(psi[0] - psi[1]) ** 2

    grid = np.linspace(-6, 6, 241)
    b1, b2 = np.meshgrid(grid, grid, indexing="ij")
    values = analytic_objective(b1, b2)
    i, j = np.unravel_index(np.argmax(values), values.shape)
    polish = scipy.optimize.minimize(
        lambda x: -analytic_objective(x[0], x[1]),
        [grid[i], grid[j]], method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14},
    )
    oracle_max = -polish.fun

    best = opt.multistart_optimize(
        problem, steps=steps, duration=steps * dt, restarts=8, seed=5,
        options=opt.OptimizeOptions(grad_tol=1e-12),
    )
    assert best.final_fidelity == pytest.approx(oracle_max, abs=1e-6)


def test_optimize_trace_is_monotone_and_starts_at_init(n4_spec):
    problem = opt.ground_problem(n4_spec)
    rng = np.random.default_rng(11)
    init = Pulse(dt=0.025, amplitudes=rng.uniform(-0.5, 0.5, size=64))
    k0, _ = opt.objective_and_gradient(init, problem)
    res = opt.optimize_pulse(problem, init)
    assert res.fidelity_trace[0] == pytest.approx(k0, abs=1e-14)
    assert np.all(np.diff(res.fidelity_trace) >= -1e-12)
    assert res.final_fidelity == pytest.approx(res.fidelity_trace[-1], abs=1e-9)


def test_optimize_from_converged_pulse_is_idempotent(n4_spec, n4_ground_pulse):
    problem = opt.ground_problem(n4_spec)
    first = opt.optimize_pulse(problem, n4_ground_pulse)  # run to the gradient stop
    again = opt.optimize_pulse(problem, first.pulse)
    assert again.status is opt.OptimizerStatus.CONVERGED
    assert again.iterations <= 1


def test_optimize_respects_amplitude_bounds(n4_spec):
    problem = opt.ground_problem(n4_spec)
    rng = np.random.default_rng(13)
    init = Pulse(dt=0.025, amplitudes=rng.uniform(-1, 1, size=64))
    res = opt.optimize_pulse(problem, init, opt.OptimizeOptions(bound=0.15))
    assert np.max(np.abs(res.pulse.amplitudes)) <= 0.15 + 1e-12
    assert res.pulse.bound == 0.15


def test_optimize_iteration_limit_status(n4_spec):
    problem = opt.ground_problem(n4_spec)
    rng = np.random.default_rng(17)
    init = Pulse(dt=0.025, amplitudes=rng.uniform(-1, 1, size=64))
    res = opt.optimize_pulse(problem, init, opt.OptimizeOptions(max_iterations=2))
    assert res.status is opt.OptimizerStatus.ITERATION_LIMIT


def test_ground_problem_reaches_near_unit_concurrence(n4_ground_pulse, n4_spec):
    problem = opt.ground_problem(n4_spec)
    fid, conc = opt.evaluate_pulse(n4_ground_pulse, problem)
    assert fid >= 0.999
    assert conc >= 0.999


def test_ensemble_pulse_attains_bound_at_all_lower_temperatures(n4_ensemble_pulse, n4_spec):
    # a bound-attaining pulse sorts sector eigenstates into the projector's
    # eigenspaces in energy order, which is temperature independent
    from spinctrl.robustness import sweep_thermal

    sweep = sweep_thermal(n4_ensemble_pulse, n4_spec, [0.25, 0.5, 1.0, 1.5, 2.0])
    for fid, bound in zip(sweep.fidelities, sweep.bounds):
        assert bound - fid < 1e-3
        assert fid <= bound + 1e-9


def test_min_time_scan_threshold_monotonicity(n4_spec):
    problem = opt.ground_problem(n4_spec)
    grid = [0.8, 1.6, 2.4]
    loose = opt.min_time_scan(problem, 0.5, grid, restarts=2, rng_seed=3)
    tight = opt.min_time_scan(problem, 0.99, grid, restarts=2, rng_seed=3)
    assert loose.t_c is not None and tight.t_c is not None
    assert loose.t_c <= tight.t_c


def test_min_time_scan_more_restarts_never_worse(n4_spec):
    problem = opt.ground_problem(n4_spec)
    one = opt.min_time_scan(problem, 0.99, [0.8], restarts=1, rng_seed=3)
    two = opt.min_time_scan(problem, 0.99, [0.8], restarts=2, rng_seed=3)
    assert two.best_fidelities[0] >= one.best_fidelities[0] - 1e-15


def test_min_time_scan_reports_absent_threshold(n4_spec):
    problem = opt.ground_problem(n4_spec)
    res = opt.min_time_scan(problem, 0.99, [0.2, 0.4], restarts=1, rng_seed=1)
    assert res.t_c is None
    assert len(res.best_fidelities) == 2


def test_min_time_scan_validation(n4_spec):
    problem = opt.ground_problem(n4_spec)
    with pytest.raises(ValueError):
        opt.min_time_scan(problem, 1.5, [1.0])
    with pytest.raises(ValueError):
        opt.min_time_scan(problem, 0.9, [])


def test_recommended_horizon_interpolates_and_extrapolates():
    assert opt.recommended_horizon(4) == pytest.approx(1.2 * 1.6)
    beyond = opt.recommended_horizon(14)
    fit_14 = opt.recommended_horizon(12) / 1.2
    assert beyond > fit_14  # quadratic growth continues past the table


def test_control_problem_validation():
    spec = sc.ChainSpec(4)
    with pytest.raises(ValueError):
        sc.ControlProblem(spec, np.ones(6) / np.sqrt(6))  # missing sector
    with pytest.raises(ValueError):
        sc.ControlProblem(spec, np.ones(6), 2)  # not normalized
    with pytest.raises(ValueError):
        sc.ControlProblem(spec, np.ones(4) / 2.0, 2)  # wrong dimension
