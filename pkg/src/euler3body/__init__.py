"""Variational search and verification of Eulerian collinear three-body orbits."""

from .config import (CollinearGeometry, ConfigurationState, MassTriple, central_config_residual,
                     derived_constants, euler_condition_residual, geometry_for,
                     reconstruct_configuration, solve_lambda0)
from .dynamics import (DistinctionReport, OrbitTimeSeries, closure_error, collinearity_drift,
                       compare_orbits, eom_residual_spectral, integrate, series_from_loop)
from .errors import (CollisionError, DomainError, RootNotBracketedError, SchemaError,
                     UndersamplingError)
from .functionals import (EnergyParams, GradedValue, action_f, action_f1, energy_residual,
                          identity_3_9_ratio, jensen_gap, kepler_lower_bound, phi_eps,
                          potential_V_eps)
from .loops import (FourierLoop, SampledLoop, circle_loop, derivative, evaluate, loop_norm,
                    min_separation, random_loop, sample, winding_number)
from .optimize import (SolverOptions, SolverReport, build_mp_endpoints, continuation_in_eps,
                       minimize_f1, mountain_pass, rescale_to_energy)
from .orbit_io import OrbitRecord, emit_csv, emit_svg, read_orbit, write_orbit

__version__ = "0.1.0"
