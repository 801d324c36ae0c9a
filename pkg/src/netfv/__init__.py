"""Monotone finite volume schemes for scalar conservation laws on networks."""

from .errors import (BadArity, CflViolation, DomainViolation, NetFVError, NotBracketed, NotMonotone,
                     OutsideAdmissibleSet, OutsideValidity, ParseError, SpecMismatch, ValidationError)
from .flux import (AggregateFlux, Burgers, Flux, LinearAdvection, Monotonicity, QuadraticFlux,
                   ScaledLWR, TabulatedFlux, flux_from_spec, monotone_inverse)
from .network import (Diagnostic, Dirichlet, Edge, Junction, Network, Neumann, add_roundabout,
                      star_network, validate)
from .grid import (AUTO, Grid, GridState, PiecewiseConstant, l1_distance, mass, project_initial,
                   read_snapshot_csv, tv_discrete, write_snapshot_csv)
from .scheme import NumericalFlux, Rule, RunReport, RunResult, StepReport, cfl_dt, run, step, wave_speed
from .germ import (GermVector, StationaryVector, admissible_intervals, check_maximality_on,
                   germ_bounds_for_data, in_monotone_germ, is_discrete_stationary, is_stationary,
                   kruzkov_q, mutual_consistency, sample_germ, solve_vertex_value)
from .cases import CASES, Case, EdgeWave, ExactSolution, get_case
from .analysis import (EocReport, crandall_majda_q, discrete_entropy_residuals, eoc, eoc_orders,
                       exact_eval, l1_error_vs, restrict)
from .config import RunConfig, dump_config, load_config, parse_config

__version__ = "0.1.0"
