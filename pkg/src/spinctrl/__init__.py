"""Single-spin optimal control of antiferromagnetic Heisenberg chains."""

from ._kernels import USING_NUMBA
from .basis import SubspaceBasis, end_pair_partition, enumerate_basis
from .hamiltonians import (
    ChainSpec,
    SubspaceOperator,
    ThermalState,
    build_h0,
    build_h1,
    build_target_observable,
    ground_state,
    sample_disorder,
    thermal_state,
)
from .metrics import (
    concurrence,
    ensemble_fidelity,
    fidelity,
    plus_eigenspace_dim,
    reduced_end_density,
    thermal_fidelity_bound,
)
from .optimizer import (
    ControlProblem,
    OptimizeOptions,
    ensemble_problem,
    ground_problem,
    min_time_scan,
    multistart_optimize,
    objective_and_gradient,
    optimize_pulse,
    recommended_horizon,
)
from .propagation import (
    DephasingModel,
    LindbladSpec,
    evolve_density_unitary,
    evolve_lindblad,
    evolve_pure,
    step_propagator,
)
from .pulses import Pulse, default_initial_pulse

__version__ = "0.1.0"
