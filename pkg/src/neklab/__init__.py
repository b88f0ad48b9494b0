"""neklab: averaging normal forms and long-time action-stability experiments
for polynomial Hamiltonians with a transverse component."""

from .polyalg import (
    AmbientMismatchError,
    Monomial,
    Polynomial,
    action_polynomial,
    format_polynomial,
    parse_polynomial,
)
from .hamiltonian import (
    PhasePoint,
    SystemSpec,
    actions,
    action_distance,
    check_structural_hypotheses,
    hamiltonian_value,
    total_polynomial,
    vector_field,
)
from .diophantine import (
    PeriodicApproximation,
    approximate_periodic_orbit,
    dirichlet_best,
    periodic_frequency,
)
from .normalform import (
    AveragingContext,
    NormalFormResult,
    check_conditions,
    exact_flow_h,
    exponents_from_a,
    homological_generator,
    iterate_normal_form,
    lie_transform,
    one_step,
    parameter_recipe,
    quadrature_average,
    resonant_average,
)
from .integrator import Trajectory, default_dt, integrate, step
from .experiments import (
    ConvergenceReport,
    DriftReport,
    constrained_limit_study,
    measure_drift,
    smallkappa_scaling_study,
    variant_scaling_study,
)

__version__ = "0.1.0"
