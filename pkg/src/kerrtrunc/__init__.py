"""Squeezing in qubit states truncated by pumped Kerr couplers (nonlinear quantum scissors)."""

from .analysis import (
    RwaReport,
    SqueezingWindow,
    VarianceSeries,
    detect_windows,
    rwa_validation,
    scan_variances,
)
from .dynamics import (
    AnalyticModel,
    Propagator,
    Variant,
    analytic_no_pump,
    analytic_three_mode_symmetric,
    analytic_two_mode_single_pump,
    analytic_two_mode_two_pump,
    integrate_ode,
    propagate,
)
from .fock import (
    FockBasis,
    StateVector,
    SystemSpec,
    annihilation_matrix,
    build_basis,
    build_hamiltonian,
    project_qubit,
)
from .observables import (
    QuadratureVariances,
    analytic_variances_no_pump,
    analytic_variances_single_pump,
    analytic_variances_two_pump,
    quadrature_operators,
    quadrature_variances,
    qubit_variances,
    reconciliation_report,
    xi_coefficients,
)

__version__ = "0.1.0"
