"""Structure-preserving full-wave solver for magnetized cold plasma.

A tensor-product B-spline discrete de Rham complex discretizes the coupled
Maxwell / linearized-current system in space; three second-order geometric
time integrators (two splittings and Crank-Nicolson) advance it with
impedance boundary conditions and an incoming-wave source. A companion
frequency-domain solver provides the time-harmonic reference for long-time
runs. All quantities are normalized to the injected wave frequency.
"""

from .splines import (KnotVector, SplineBasis1D, QuadratureRule,
                      make_knot_vector, make_basis, derivative_matrix,
                      gauss_rule)
from .derham import (TensorSpace, DeRhamComplex, FieldCoeffs, build_complex,
                     eval_field, eval_on_grid)
from .assembly import (BoxQuadrature, SourceSpec, SystemOperators,
                       assemble_mass, assemble_rotation,
                       assemble_boundary_penalty, assemble_boundary_source,
                       assemble_volume_moments, assemble_weak_divergence,
                       assemble_dielectric_mass, build_system_operators)
from .projections import project_l2, project_commuting_v2, project_commuting_v3
from .solvers import (SolveStats, SolverBreakdown, ConvergenceFailure,
                      pcg, pbicgstab, KroneckerMassSolver,
                      BlockDiagPreconditioner)
from .plasma import (PlasmaProfile, GaussianBeam, ManufacturedSolution,
                     stix_parameters, dielectric_apply, dielectric_matrix,
                     current_response_inverse, dispersion_scan, envelope,
                     vacuum_profile, ramp_profile, blob_profile,
                     profile_from_csv)
from .integrators import (FieldState, StepCost, make_stepper, SCHEMES,
                          build_evolution_operator, flow_maxwell, flow_plasma,
                          flow_electric, flow_magnetic_plasma,
                          crank_nicolson_flow)
from .diagnostics import (hamiltonian, total_charge, div_b_max,
                          energy_balance_residual, step_block_products,
                          local_field_ops, GridEvaluator,
                          ManufacturedErrorTracker)
from .freqdomain import (FrequencySystem, FrequencySolution,
                         assemble_frequency_system, TimeHarmonicMismatch,
                         write_snapshot, read_snapshot)
from .runs import (RunConfig, benchmark_config, beam_config,
                   run_convergence_study, run_stability_scan,
                   run_conservation, run_performance, run_beam_2d,
                   run_freqsolve)

__version__ = '0.1.0'
