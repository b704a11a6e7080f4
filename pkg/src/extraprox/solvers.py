"""Iterative methods for composite minimization with per-iteration certificates.

Three methods share one driver:

* ``eeg``   - extragradient: a scout prox-gradient step with step s_k gives
  y_k, whose gradient drives the real update with step alpha_k,

      y_k     = prox_{s_k g}(x_k - s_k grad f(x_k))
      x_{k+1} = prox_{a_k g}(x_k - a_k grad f(y_k))

* ``fb``    - forward-backward splitting, one prox-gradient step,
* ``fista`` - forward-backward with Nesterov extrapolation.

Step sizes come either from a :class:`StepSchedule` (with a declared regime
c1/c2/c3 whose inequalities guarantee descent, the sublinear rate, and a
uniform decrease constant respectively) or from a runtime rule (constant,
backtracking, exact line search).  Every extragradient iteration with a
valid regime carries numerical certificates: the descent margin, the slack
of the bound coupling ||x_{k+1}-y_k|| to ||x_k-x_{k+1}||, and a subgradient
residual that witnesses how close the new iterate is to criticality.

Solver state is confined to a single ``run`` call; problem objects are
immutable, so independent runs may execute concurrently against shared data.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .problems import L1LeastSquares, soft_threshold

__all__ = [
    "ConfigurationError",
    "CertificateError",
    "StepSchedule",
    "ScheduleReport",
    "Certificates",
    "RunRecord",
    "validate_schedule",
    "c3_alpha_cap",
    "eeg_step",
    "fb_step",
    "fista_step",
    "run",
    "descent_certificate",
    "coupling_certificate",
    "subgrad_certificate",
    "coupling_factor",
    "decrease_coefficient",
    "subgrad_bound_c1",
    "CERT_TOL",
    "REGIMES",
]

REGIMES = ("c1", "c2", "c3", "custom")

# Certificate inequalities are exact in real arithmetic; floating point gets
# an absolute slack of CERT_TOL scaled by (1 + magnitude of the bound).
CERT_TOL = 1e-10

_S_CAP_C3 = (math.sqrt(5.0) - 1.0) / 2.0  # upper limit of L*s under regime c3


class ConfigurationError(ValueError):
    """Invalid solver configuration (schedule, rule, or method combination)."""


class CertificateError(RuntimeError):
    """A certified inequality failed beyond the floating-point tolerance."""


def c3_alpha_cap(s: float, L: float) -> float:
    """Largest alpha allowed by regime c3 for scout step s: 2/L - 2s - (1-Ls)Ls^2."""
    return 2.0 / L - 2.0 * s - (1.0 - L * s) * L * s * s


@dataclass(frozen=True)
class StepSchedule:
    """Step-size sequences (s_k, alpha_k) with declared regime and bounds.

    ``s`` and ``alpha`` map the iteration counter to a positive step.  The
    bound fields are the inf/sup of the sequences over the run horizon; for
    constant schedules they equal the constants.  Regimes stack as follows
    on top of the base condition (0 < s_inf, 0 < alpha_inf, s_sup < 1/L,
    s_k <= alpha_k):

    * ``c1``: alpha_k <= 1/L                      (monotone descent)
    * ``c2``: s_k <= 1/(2L), alpha_k <= 1/L - s_k (sublinear rate)
    * ``c3``: s_k <= (sqrt(5)-1)/(2L),
              alpha_k <= 2/L - 2 s_k - (1-L s_k) L s_k^2
                                                  (uniform decrease constant)
    """

    regime: str
    s: Callable[[int], float]
    alpha: Callable[[int], float]
    s_inf: float
    s_sup: float
    alpha_inf: float
    alpha_sup: float

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ConfigurationError(f"unknown regime {self.regime!r}, expected one of {REGIMES}")

    @staticmethod
    def constant(s: float, alpha: float, regime: str = "custom") -> "StepSchedule":
        s = float(s)
        alpha = float(alpha)
        return StepSchedule(
            regime=regime,
            s=lambda k: s,
            alpha=lambda k: alpha,
            s_inf=s,
            s_sup=s,
            alpha_inf=alpha,
            alpha_sup=alpha,
        )

    # Default constant schedules sit at 0.99 of each regime cap so that the
    # strict inequalities hold with margin in floating point.
    @staticmethod
    def c1_default(L: float) -> "StepSchedule":
        return StepSchedule.constant(0.99 / (2.0 * L), 0.99 / L, regime="c1")

    @staticmethod
    def c2_default(L: float) -> "StepSchedule":
        s = 0.99 / (2.0 * L)
        return StepSchedule.constant(s, 0.99 * (1.0 / L - s), regime="c2")

    @staticmethod
    def c3_default(L: float) -> "StepSchedule":
        s = 0.99 * _S_CAP_C3 / L
        return StepSchedule.constant(s, 0.99 * c3_alpha_cap(s, L), regime="c3")


@dataclass(frozen=True)
class ScheduleReport:
    """Outcome of schedule validation: per-inequality pass/fail."""

    ok: bool
    checks: tuple
    first_violation: Optional[str]

    def __bool__(self) -> bool:
        return self.ok


def validate_schedule(schedule: StepSchedule, L: float, horizon: int = 512,
                      regime: Optional[str] = None) -> ScheduleReport:
    """Check the base condition and the declared regime's extra inequalities.

    Per-iteration inequalities are sampled for k in range(horizon); bound
    inequalities use the declared inf/sup fields.  ``regime`` overrides the
    schedule's own declaration (used e.g. to test a custom schedule against
    regime c3).  The report names every inequality and the first violated one.
    """
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    regime = schedule.regime if regime is None else regime
    ks = range(max(1, horizon))
    s_vals = np.array([schedule.s(k) for k in ks], dtype=float)
    a_vals = np.array([schedule.alpha(k) for k in ks], dtype=float)

    checks = [
        ("0 < s_inf", schedule.s_inf > 0 and bool(np.all(s_vals > 0))),
        ("0 < alpha_inf", schedule.alpha_inf > 0 and bool(np.all(a_vals > 0))),
        ("s_sup < 1/L", schedule.s_sup < 1.0 / L),
        ("0 < s_k <= alpha_k", bool(np.all((s_vals > 0) & (s_vals <= a_vals)))),
    ]
    if regime == "c1":
        checks.append(("alpha_k <= 1/L", bool(np.all(a_vals <= 1.0 / L))))
    elif regime == "c2":
        checks.append(("s_k <= 1/(2L)", bool(np.all(s_vals <= 0.5 / L))))
        checks.append(("alpha_k <= 1/L - s_k", bool(np.all(a_vals <= 1.0 / L - s_vals))))
    elif regime == "c3":
        checks.append(
            ("s_k <= (sqrt(5)-1)/(2L)", bool(np.all(s_vals <= _S_CAP_C3 / L)))
        )
        caps = np.array([c3_alpha_cap(s, L) for s in s_vals])
        checks.append(
            ("alpha_k <= 2/L - 2 s_k - (1 - L s_k) L s_k^2", bool(np.all(a_vals <= caps)))
        )
    first = next((name for name, ok in checks if not ok), None)
    return ScheduleReport(ok=first is None, checks=tuple(checks), first_violation=first)


# ---------------------------------------------------------------------------
# single steps


def eeg_step(problem, x: np.ndarray, s: float, alpha: float):
    """One extragradient iteration; returns (y, x_next)."""
    f, g = problem.f, problem.g
    x = np.asarray(x, dtype=float)
    y = g.prox(x - s * f.gradient(x), s)
    x_next = g.prox(x - alpha * f.gradient(y), alpha)
    return y, x_next


def fb_step(problem, x: np.ndarray, alpha: float) -> np.ndarray:
    """One forward-backward iteration: prox_{alpha g}(x - alpha grad f(x))."""
    f, g = problem.f, problem.g
    x = np.asarray(x, dtype=float)
    return g.prox(x - alpha * f.gradient(x), alpha)


def fista_step(problem, x: np.ndarray, x_prev: np.ndarray, t: float, alpha: float):
    """One FISTA iteration; returns (x_next, t_next).

    t_next = (1 + sqrt(1 + 4 t^2))/2 and the extrapolated point is
    z = x + ((t - 1)/t_next) (x - x_prev); with x == x_prev and t == 1 this
    reduces to a plain forward-backward step.
    """
    if t < 1.0:
        raise ValueError(f"momentum scalar must be >= 1, got {t}")
    f, g = problem.f, problem.g
    x = np.asarray(x, dtype=float)
    x_prev = np.asarray(x_prev, dtype=float)
    t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
    z = x + ((t - 1.0) / t_next) * (x - x_prev)
    x_next = g.prox(z - alpha * f.gradient(z), alpha)
    return x_next, t_next


# ---------------------------------------------------------------------------
# certificates


def descent_certificate(F_k: float, F_k1: float, x_k, x_k1, alpha_k: float) -> float:
    """F(x_k) - F(x_{k+1}) - ||x_k - x_{k+1}||^2 / (2 alpha_k).

    Nonnegative (up to CERT_TOL*(1+|F(x_k)|)) for extragradient iterations
    under regime c1.
    """
    d = np.asarray(x_k, dtype=float) - np.asarray(x_k1, dtype=float)
    return float(F_k - F_k1 - (d @ d) / (2.0 * alpha_k))


def coupling_factor(s: float, alpha: float, L: float) -> float:
    """1/(1 - L s) - s/alpha, the bound tying ||x_{k+1}-y_k|| to ||x_k-x_{k+1}||."""
    if s * L >= 1.0:
        raise ValueError(f"requires s < 1/L, got s={s}, L={L}")
    return 1.0 / (1.0 - L * s) - s / alpha


def coupling_certificate(x_k, x_k1, y_k, s_k: float, alpha_k: float, L: float) -> float:
    """Slack of ||x_{k+1} - y_k|| <= (1/(1-L s_k) - s_k/alpha_k) ||x_k - x_{k+1}||.

    Nonnegative under the base step condition (s_k <= alpha_k, s_k < 1/L),
    up to floating-point noise.
    """
    x_k = np.asarray(x_k, dtype=float)
    x_k1 = np.asarray(x_k1, dtype=float)
    y_k = np.asarray(y_k, dtype=float)
    factor = coupling_factor(s_k, alpha_k, L)
    return float(factor * np.linalg.norm(x_k - x_k1) - np.linalg.norm(x_k1 - y_k))


def decrease_coefficient(s: float, alpha: float, L: float) -> float:
    """Per-step quadratic decrease coefficient for convex smooth terms.

    c_k = 1/alpha_k - (L/2) (1/(1-L s_k) - s_k/alpha_k)^2; the objective
    drops by at least c_k ||x_k - x_{k+1}||^2 per extragradient iteration.
    """
    return 1.0 / alpha - 0.5 * L * coupling_factor(s, alpha, L) ** 2


def subgrad_bound_c1(alpha_inf: float, s_sup: float, L: float) -> float:
    """Uniform bound on b_k under regime c1: 2 / (alpha_inf (1 - s_sup L))."""
    return 2.0 / (alpha_inf * (1.0 - s_sup * L))


def subgrad_certificate(problem, x_k, x_k1, y_k, s_k: float, alpha_k: float):
    """Subgradient residual of the new iterate and its per-step bound.

    omega = (x_k - x_{k+1})/alpha_k + grad f(x_{k+1}) - grad f(y_k) is a
    member of the subdifferential of F at x_{k+1} (optimality condition of
    the second prox step).  Returns (||omega||, b_k) and checks
    ||omega|| <= b_k ||x_k - x_{k+1}|| with
    b_k = (L alpha_k + (1 - L s_k)^2) / (alpha_k (1 - L s_k)).
    """
    L = problem.f.lipschitz
    if s_k * L >= 1.0:
        raise ValueError(f"requires s_k < 1/L, got s_k={s_k}, L={L}")
    x_k = np.asarray(x_k, dtype=float)
    x_k1 = np.asarray(x_k1, dtype=float)
    omega = (x_k - x_k1) / alpha_k + problem.f.gradient(x_k1) - problem.f.gradient(y_k)
    residual = float(np.linalg.norm(omega))
    b_k = (L * alpha_k + (1.0 - L * s_k) ** 2) / (alpha_k * (1.0 - L * s_k))
    bound = b_k * float(np.linalg.norm(x_k - x_k1))
    if residual > bound + CERT_TOL * (1.0 + bound):
        raise CertificateError(
            f"subgradient residual {residual} exceeds bound {bound} (b_k={b_k})"
        )
    return residual, b_k


@dataclass(frozen=True)
class Certificates:
    """Per-iteration certificate values (NaN when not applicable)."""

    descent_margin: float
    coupling_slack: float
    subgrad_residual_norm: float
    b_k: float
    c_k: float


# ---------------------------------------------------------------------------
# run driver


@dataclass
class RunRecord:
    """Per-iteration trace of a solver run.

    Row k describes the iterate x_k: its objective, the steps (s_{k-1},
    alpha_{k-1}) that produced it, the certificates of the transition
    x_{k-1} -> x_k, and the cumulative wall-clock time and work counter.
    ``matvecs`` counts A/A^T applications (fractions account for the exact
    line-search sweep) for least-squares problems, gradient evaluations
    otherwise.  Row 0 holds the starting point and a probe residual.
    """

    method: str
    step_rule: str
    k: np.ndarray
    time_s: np.ndarray
    objective: np.ndarray
    subopt: np.ndarray
    s_k: np.ndarray
    alpha_k: np.ndarray
    descent_margin: np.ndarray
    coupling_slack: np.ndarray
    residual: np.ndarray
    b_k: np.ndarray
    c_k: np.ndarray
    matvecs: np.ndarray
    status: str
    x: np.ndarray
    f_star: Optional[float] = None

    CSV_COLUMNS = (
        "algo,step_rule,k,time_s,objective,subopt,s_k,alpha_k,"
        "descent_margin,coupling_slack,residual,b_k"
    )

    @property
    def iterations(self) -> int:
        return len(self.k) - 1

    def csv_rows(self):
        for i in range(len(self.k)):
            vals = [
                self.method,
                self.step_rule,
                str(int(self.k[i])),
            ] + [
                format(col[i], ".17g")
                for col in (
                    self.time_s,
                    self.objective,
                    self.subopt,
                    self.s_k,
                    self.alpha_k,
                    self.descent_margin,
                    self.coupling_slack,
                    self.residual,
                    self.b_k,
                )
            ]
            yield ",".join(vals)

    def to_csv(self, path_or_file, header: bool = True) -> None:
        close = False
        fh = path_or_file
        if not hasattr(fh, "write"):
            fh = open(fh, "w")
            close = True
        try:
            if header:
                fh.write(self.CSV_COLUMNS + "\n")
            for row in self.csv_rows():
                fh.write(row + "\n")
        finally:
            if close:
                fh.close()


class _Work:
    """Oracle adapter with product caching and a flop-proportional counter.

    For :class:`L1LeastSquares` one unit is one application of A or A^T;
    the exact line-search sweep contributes its operation count divided by
    n*p.  For generic composite problems one unit is one gradient call.
    """

    def __init__(self, problem):
        self.problem = problem
        self.fast = isinstance(problem, L1LeastSquares)
        self.units = 0.0
        if self.fast:
            self.A = problem.A
            self.AT = problem.AT
            self.b = problem.b
            self.lam = problem.lam
            self.np_cost = problem.p * problem.n

    def forward(self, x):
        """A @ x, counted.  Returns None for generic problems."""
        if not self.fast:
            return None
        self.units += 1.0
        return self.A @ x

    def gradient(self, x, Ax=None):
        if self.fast:
            if Ax is None:
                Ax = self.forward(x)
            self.units += 1.0
            return self.AT @ (Ax - self.b)
        self.units += 1.0
        return self.problem.f.gradient(x)

    def smooth_value(self, x, Ax=None):
        if self.fast:
            if Ax is None:
                Ax = self.forward(x)
            r = Ax - self.b
            return 0.5 * float(r @ r)
        return float(self.problem.f.value(x))

    def g_value(self, x):
        if self.fast:
            return self.lam * float(np.abs(x).sum())
        return float(self.problem.g.value(x))

    def prox(self, v, t):
        if self.fast:
            return soft_threshold(v, t * self.lam)
        return self.problem.g.prox(v, t)


def _rule_kind(rule) -> str:
    kind = getattr(rule, "kind", None)
    if kind is None:
        raise ConfigurationError(f"step rule {rule!r} has no 'kind'")
    return kind


def _backtrack(work: _Work, x, f_x, grad_x, step_grad, L_est: float, growth: float):
    """Grow L_est by `growth` until the quadratic upper model at x accepts
    the prox-gradient point taken with step 1/L_est (gradient `step_grad`).

    Returns (alpha, L_est, p, Ap, f_p).  The acceptance test uses grad f(x),
    which the descent lemma guarantees for any L_est >= L, so termination is
    assured whatever gradient drives the step.
    """
    slack = 1e-12 * (1.0 + abs(f_x))
    while True:
        t = 1.0 / L_est
        p = work.prox(x - t * step_grad, t)
        Ap = work.forward(p)
        f_p = work.smooth_value(p, Ap)
        d = p - x
        if f_p <= f_x + float(grad_x @ d) + 0.5 * L_est * float(d @ d) + slack:
            return t, L_est, p, Ap, f_p
        L_est *= growth
        if not np.isfinite(L_est) or L_est > 1e300:
            raise RuntimeError("backtracking estimate overflowed")


def run(
    problem,
    method: str = "eeg",
    *,
    schedule: Optional[StepSchedule] = None,
    rule=None,
    x0=None,
    max_iters: int = 1000,
    tol: float = 1e-10,
    f_star: Optional[float] = None,
    f_target: Optional[float] = None,
    validate: bool = True,
) -> RunRecord:
    """Run a solver and return its per-iteration trace.

    Exactly one of ``schedule`` / ``rule`` must be given.  With a rule, the
    extragradient scout step is fixed at s = 1/L and the rule drives alpha.
    The run stops when the subgradient residual drops to ``tol``, when
    ``f_target`` (if given) is reached, or after ``max_iters`` iterations.
    ``f_star``, when known, fills the suboptimality column.

    FISTA refuses the 2/L and exact line-search rules: those step choices
    make its iterates diverge.
    """
    method = method.lower()
    if method not in ("eeg", "fb", "fista"):
        raise ConfigurationError(f"unknown method {method!r}")
    if (schedule is None) == (rule is None):
        raise ConfigurationError("exactly one of schedule= or rule= is required")
    if x0 is None:
        raise ConfigurationError("x0 is required")

    L = problem.f.lipschitz
    kind = None
    if rule is not None:
        kind = _rule_kind(rule)
        if kind not in ("1/L", "2/L", "backtracking", "exact"):
            raise ConfigurationError(f"unknown step rule {kind!r}")
        if method == "fista" and kind in ("2/L", "exact"):
            raise ConfigurationError(
                f"fista with the {kind} rule produces diverging iterates; "
                "use 1/L or backtracking"
            )
        if kind == "exact" and not isinstance(problem, L1LeastSquares):
            raise ConfigurationError("exact line search needs an L1LeastSquares problem")
    elif validate and schedule.regime != "custom":
        report = validate_schedule(schedule, L, horizon=min(max_iters + 1, 512))
        if not report.ok:
            raise ConfigurationError(
                f"schedule fails regime {schedule.regime}: {report.first_violation}"
            )

    if kind == "exact":
        from .linesearch import _engine_line_search, warmup

        warmup()

    label = kind if kind is not None else f"schedule:{schedule.regime}"
    work = _Work(problem)
    x = np.array(x0, dtype=float)
    Ax = work.forward(x)
    F_x = work.smooth_value(x, Ax) + work.g_value(x)
    grad_x = work.gradient(x, Ax)

    rows = {
        name: []
        for name in (
            "k time_s objective subopt s_k alpha_k descent_margin "
            "coupling_slack residual b_k c_k matvecs"
        ).split()
    }

    def append(k, t, F, s_k, a_k, margin, coup, res, b_k, c_k):
        rows["k"].append(k)
        rows["time_s"].append(t)
        rows["objective"].append(F)
        rows["subopt"].append(F - f_star if f_star is not None else math.nan)
        rows["s_k"].append(s_k)
        rows["alpha_k"].append(a_k)
        rows["descent_margin"].append(margin)
        rows["coupling_slack"].append(coup)
        rows["residual"].append(res)
        rows["b_k"].append(b_k)
        rows["c_k"].append(c_k)
        rows["matvecs"].append(work.units)

    # Row 0: prox-gradient mapping norm ||x0 - prox(x0 - a grad f(x0))|| / a,
    # the standard stationarity measure at the start; zero iff x0 is critical.
    a0 = schedule.alpha(0) if schedule is not None else 1.0 / L
    p_hat = work.prox(x - a0 * grad_x, a0)
    res0 = float(np.linalg.norm(x - p_hat)) / a0
    append(0, 0.0, F_x, math.nan, math.nan, math.nan, math.nan, res0, math.nan, math.nan)

    status = "max_iters"
    if res0 <= tol or (f_target is not None and F_x <= f_target):
        status = "converged"
        max_iters = 0

    x_prev = x
    Ax_prev = Ax
    t_mom = 1.0
    L_est = getattr(rule, "backtrack_init", 1.0) if kind == "backtracking" else None
    growth = getattr(rule, "backtrack_growth", 1.2) if kind == "backtracking" else None
    elapsed = 0.0

    for k in range(max_iters):
        tic = time.perf_counter()
        coup = b_k = c_k = math.nan
        s_col = math.nan

        if method == "eeg":
            s_k = schedule.s(k) if schedule is not None else 1.0 / L
            s_col = s_k
            y = work.prox(x - s_k * grad_x, s_k)
            Ay = work.forward(y)
            grad_y = work.gradient(y, Ay)
            step_grad = grad_y
            if schedule is not None:
                alpha_k = schedule.alpha(k)
            elif kind == "1/L":
                alpha_k = 1.0 / L
            elif kind == "2/L":
                alpha_k = 2.0 / L
            elif kind == "backtracking":
                alpha_k, L_est, x1, Ax1, f_x1 = _backtrack(
                    work, x, work.smooth_value(x, Ax), grad_x, grad_y, L_est, growth
                )
            else:  # exact
                alpha_k, x1, Ax1 = _engine_line_search(work, x, Ax, grad_y)
                if alpha_k == 0.0:
                    # the scout-gradient path can be flat at a noncritical
                    # point (thresholding swallows a small gradient); fall
                    # back to searching the own-gradient path, which is flat
                    # only at critical points
                    step_grad = grad_x
                    alpha_k, x1, Ax1 = _engine_line_search(work, x, Ax, grad_x)
            if schedule is not None or kind in ("1/L", "2/L"):
                x1 = work.prox(x - alpha_k * grad_y, alpha_k)
                Ax1 = work.forward(x1)
            if alpha_k == 0.0:
                # critical point: freeze the iterate, residual vanishes below
                x1, Ax1, alpha_k, step_grad = x, Ax, 1.0 / L, grad_x
            F_x1 = work.smooth_value(x1, Ax1) + work.g_value(x1)
            grad_x1 = work.gradient(x1, Ax1)
            omega = (x - x1) / alpha_k + grad_x1 - step_grad
            residual = float(np.linalg.norm(omega))
            margin = descent_certificate(F_x, F_x1, x, x1, alpha_k)
            if s_k * L < 1.0 and s_k <= alpha_k:
                coup = coupling_certificate(x, x1, y, s_k, alpha_k, L)
                b_k = (L * alpha_k + (1.0 - L * s_k) ** 2) / (alpha_k * (1.0 - L * s_k))
                c_k = decrease_coefficient(s_k, alpha_k, L)

        elif method == "fb":
            if schedule is not None:
                alpha_k = schedule.alpha(k)
            elif kind == "1/L":
                alpha_k = 1.0 / L
            elif kind == "2/L":
                alpha_k = 2.0 / L
            elif kind == "backtracking":
                alpha_k, L_est, x1, Ax1, f_x1 = _backtrack(
                    work, x, work.smooth_value(x, Ax), grad_x, grad_x, L_est, growth
                )
            else:  # exact
                alpha_k, x1, Ax1 = _engine_line_search(work, x, Ax, grad_x)
            if schedule is not None or kind in ("1/L", "2/L"):
                x1 = work.prox(x - alpha_k * grad_x, alpha_k)
                Ax1 = work.forward(x1)
            if alpha_k == 0.0:
                x1, Ax1, alpha_k = x, Ax, 1.0 / L
            F_x1 = work.smooth_value(x1, Ax1) + work.g_value(x1)
            grad_x1 = work.gradient(x1, Ax1)
            omega = (x - x1) / alpha_k + grad_x1 - grad_x
            residual = float(np.linalg.norm(omega))
            margin = descent_certificate(F_x, F_x1, x, x1, alpha_k)

        else:  # fista
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_mom * t_mom))
            w = (t_mom - 1.0) / t_next
            z = x + w * (x - x_prev)
            # A z follows from linearity of A; no fresh product needed
            Az = Ax + w * (Ax - Ax_prev) if work.fast else None
            grad_z = work.gradient(z, Az)
            if schedule is not None:
                alpha_k = schedule.alpha(k)
            elif kind == "1/L":
                alpha_k = 1.0 / L
            else:  # backtracking
                alpha_k, L_est, x1, Ax1, f_x1 = _backtrack(
                    work, z, work.smooth_value(z, Az), grad_z, grad_z, L_est, growth
                )
            if schedule is not None or kind == "1/L":
                x1 = work.prox(z - alpha_k * grad_z, alpha_k)
                Ax1 = work.forward(x1)
            F_x1 = work.smooth_value(x1, Ax1) + work.g_value(x1)
            grad_x1 = work.gradient(x1, Ax1)
            omega = (z - x1) / alpha_k + grad_x1 - grad_z
            residual = float(np.linalg.norm(omega))
            margin = descent_certificate(F_x, F_x1, x, x1, alpha_k)
            x_prev, Ax_prev, t_mom = x, Ax, t_next

        elapsed += time.perf_counter() - tic
        append(k + 1, elapsed, F_x1, s_col, alpha_k, margin, coup, residual, b_k, c_k)

        if method != "fista":
            x_prev, Ax_prev = x, Ax
        x, Ax, grad_x, F_x = x1, Ax1, grad_x1, F_x1

        if residual <= tol:
            status = "converged"
            break
        if f_target is not None and F_x <= f_target:
            status = "converged"
            break

    arrays = {name: np.asarray(vals, dtype=float) for name, vals in rows.items()}
    arrays["k"] = arrays["k"].astype(int)
    return RunRecord(
        method=method,
        step_rule=label,
        status=status,
        x=x,
        f_star=f_star,
        **arrays,
    )
