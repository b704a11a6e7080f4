"""extraprox: extragradient and proximal splitting for composite minimization.

Solvers for F = f + g with smooth f and prox-friendly convex g, built around
the l1-regularized least-squares instance: an extragradient method with
certified step-size regimes, forward-backward splitting, FISTA, an exact
line search along the prox-gradient path, Kurdyka-Lojasiewicz complexity
bound tables, and a reproducible benchmark harness.
"""

from . import bench, klbound, linesearch, problems, solvers
from .bench import BenchConfig, StepRule, backtracking_step, generate_problem, reference_solve, run_benchmark
from .klbound import KLParams, ScalarSolveError, SmallProxBound, beta_sequence
from .linesearch import (
    Breakpoint,
    LineSearchError,
    QuadraticSegment,
    breakpoints,
    count_sweep_operations,
    exact_line_search,
    sweep,
)
from .problems import (
    CompositeProblem,
    PowerIterationError,
    L1LeastSquares,
    ProxOracle,
    SmoothOracle,
    lipschitz_estimate,
    load_problem,
    prox_grad_map,
    prox_l1,
    save_problem,
    soft_threshold,
)
from .solvers import (
    CertificateError,
    Certificates,
    ScheduleReport,
    ConfigurationError,
    RunRecord,
    StepSchedule,
    coupling_certificate,
    descent_certificate,
    eeg_step,
    fb_step,
    fista_step,
    run,
    subgrad_certificate,
    validate_schedule,
)

__version__ = "0.1.0"
