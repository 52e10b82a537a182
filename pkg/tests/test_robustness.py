import json

import numpy as np
import pytest

import spinctrl as sc
from spinctrl import optimizer as opt
from spinctrl.propagation import DephasingModel
from spinctrl.robustness import (
    SweepKind,
    sweep_dephasing,
    sweep_disorder,
    sweep_filename,
    sweep_leakage,
    sweep_thermal,
    sweep_to_csv,
    sweep_to_json,
)


def _ideal_concurrence(pulse, spec):
    problem = opt.ground_problem(spec)
    _, conc = opt.evaluate_pulse(pulse, problem)
    return conc


def test_sweep_thermal_low_temperature_matches_pure_case(n4_ground_pulse, n4_spec):
    sweep = sweep_thermal(n4_ground_pulse, n4_spec, [1e-4])
    ideal = _ideal_concurrence(n4_ground_pulse, n4_spec)
    assert sweep.concurrences[0] == pytest.approx(ideal, abs=1e-6)
    assert sweep.concurrences[0] >= 0.99
    assert sweep.bounds[0] == pytest.approx(1.0, abs=1e-9)


def test_sweep_thermal_ground_pulse_degrades_with_temperature(n4_ground_pulse, n4_spec):
    sweep = sweep_thermal(n4_ground_pulse, n4_spec, [1e-3, 1.0])
    assert sweep.concurrences[1] < 0.7  # ground-optimized pulses lose to warm starts
    assert sweep.fidelities[1] <= sweep.bounds[1] + 1e-9


def test_sweep_leakage_zero_matches_ideal_exactly(n6_ground_pulse):
    spec = sc.ChainSpec(6)
    sweep = sweep_leakage(n6_ground_pulse, spec, [0.0, 0.2])
    ideal = _ideal_concurrence(n6_ground_pulse, spec)
    assert sweep.concurrences[0] == pytest.approx(ideal, abs=1e-10)
    assert sweep.concurrences[0] >= sweep.concurrences[1] - 1e-9


def test_sweep_leakage_ten_percent_on_neighbour_keeps_entanglement(n6_ground_pulse):
    # exp(-1/xi) = 0.1 puts a tenth of the field on spin 2
    xi_ten_percent = 1.0 / np.log(10.0)
    sweep = sweep_leakage(n6_ground_pulse, sc.ChainSpec(6), [xi_ten_percent])
    assert sweep.concurrences[0] >= 0.8


def test_sweep_disorder_zero_alpha_is_exactly_ideal(n4_ground_pulse, n4_spec):
    sweep = sweep_disorder(n4_ground_pulse, n4_spec, [0.0], samples=5, master_seed=1)
    ideal = _ideal_concurrence(n4_ground_pulse, n4_spec)
    assert sweep.concurrences[0] == ideal  # every sample identical, no noise
    assert sweep.stderrs[0] == 0.0
    assert sweep.excluded[0] == 0


def test_sweep_disorder_replay_and_stats(n4_ground_pulse, n4_spec):
    a = sweep_disorder(n4_ground_pulse, n4_spec, [0.02, 0.05], samples=12, master_seed=9)
    b = sweep_disorder(n4_ground_pulse, n4_spec, [0.02, 0.05], samples=12, master_seed=9)
    assert np.array_equal(a.concurrences, b.concurrences)
    assert np.array_equal(a.stderrs, b.stderrs)
    assert np.all(a.stderrs >= 0)
    assert np.all(a.sample_std >= 0)


def test_sweep_disorder_validates_samples(n4_ground_pulse, n4_spec):
    with pytest.raises(ValueError):
        sweep_disorder(n4_ground_pulse, n4_spec, [0.1], samples=0)


def test_sweep_dephasing_zero_gamma_matches_unitary(n4_ground_pulse, n4_spec):
    sweep = sweep_dephasing(n4_ground_pulse, n4_spec, [0.0])
    ideal = _ideal_concurrence(n4_ground_pulse, n4_spec)
    assert sweep.concurrences[0] == pytest.approx(ideal, abs=1e-6)


def test_sweep_dephasing_all_spins_at_most_end_spins(n4_ground_pulse, n4_spec):
    grid = [0.0, 1e-3, 5e-3]
    end = sweep_dephasing(n4_ground_pulse, n4_spec, grid, DephasingModel.END_SPINS)
    both = sweep_dephasing(n4_ground_pulse, n4_spec, grid, DephasingModel.ALL_SPINS)
    assert np.all(both.concurrences <= end.concurrences + 1e-6)
    # pure dephasing only destroys coherence here: expect decay along gamma
    assert np.all(np.diff(end.concurrences) <= 1e-6)
    assert np.all(np.diff(both.concurrences) <= 1e-6)


def test_sweep_result_validation(n4_spec):
    from spinctrl.robustness import SweepResult

    with pytest.raises(ValueError):
        SweepResult(
            kind=SweepKind.THERMAL, parameter="x",
            grid=np.array([1.0, 2.0]), concurrences=np.array([0.5]),
        )
    with pytest.raises(ValueError):
        SweepResult(
            kind=SweepKind.DISORDER, parameter="x",
            grid=np.array([1.0]), concurrences=np.array([0.5]),
            stderrs=np.array([-0.1]),
        )


def test_sweep_serialization_round_trip(n4_ground_pulse, n4_spec):
    sweep = sweep_thermal(
        n4_ground_pulse, n4_spec, [0.5, 1.0],
        provenance={"n_spins": 4, "seed": 7},
    )
    csv_text = sweep_to_csv(sweep)
    lines = csv_text.strip().split("\n")
    assert lines[0] == "kT_over_J,concurrence,stderr,bound,n_samples,fidelity"
    assert len(lines) == 3

    doc = json.loads(sweep_to_json(sweep))
    assert doc["kind"] == "thermal"
    assert doc["provenance"]["seed"] == 7
    assert len(doc["concurrence"]) == 2

    name = sweep_filename(sweep, "csv")
    assert name.startswith("sweep_thermal_N4_") and name.endswith(".csv")


def test_leakage_reoptimization_helps_at_moderate_leakage(n4_ground_pulse, n4_spec):
    xi = [1.0 / np.log(10.0)]
    fixed = sweep_leakage(n4_ground_pulse, n4_spec, xi)
    reopt = sweep_leakage(
        n4_ground_pulse, n4_spec, xi, reoptimize=True, restarts=1, seed=3,
        options=opt.OptimizeOptions(value_tol=1e-13, target_fidelity=0.9999),
    )
    assert reopt.concurrences[0] >= fixed.concurrences[0] - 1e-9
    assert reopt.concurrences[0] >= 0.99


def test_extreme_leakage_defeats_equal_budget_optimization(n4_spec):
    # at xi = 1e3 the control is nearly uniform, hence nearly commutes with
    # the drift on the sector; an equal-budget search cannot approach the
    # leak-free optimum
    from spinctrl.hamiltonians import build_h0, ground_state
    from spinctrl.optimizer import ControlProblem

    _, psi0, _ = ground_state(build_h0(n4_spec, 2))
    budgets = dict(steps=32, duration=4.0, restarts=2, seed=9,
                   options=opt.OptimizeOptions(max_iterations=500))
    clean = opt.multistart_optimize(ControlProblem(n4_spec, psi0, 2), **budgets)
    leaky = opt.multistart_optimize(
        ControlProblem(n4_spec.with_xi(1e3), psi0, 2), **budgets)
    assert leaky.final_fidelity < clean.final_fidelity
    assert clean.final_fidelity > 0.99
