"""Exact line search for l1-regularized least squares.

For a fixed point x and gradient-like vector gamma, the prox-gradient path

    p(alpha) = S_{alpha*lam}(x - alpha*gamma),   alpha >= 0,

is continuous and piecewise affine in alpha, so the objective along it,
q(alpha) = 0.5*||A p(alpha) - b||^2 + lam*||p(alpha)||_1, is continuous and
piecewise quadratic.  Its nonsmooth points are the step sizes where a
coordinate of p(alpha) enters or leaves zero,

    alpha = x_i / (gamma_i - lam)   or   x_i / (gamma_i + lam),

of which there are at most 2n.  Sweeping these breakpoints in increasing
order while maintaining the sign pattern of p(alpha), the direction d with
its product A d, the residual A p(alpha) - b, and ||p(alpha)||_1 yields the
quadratic coefficients of every piece at O(p) cost per breakpoint, O(n p)
overall plus the sort: comparable to one gradient evaluation.  The global
minimizer of q over [0, inf) is then read off segment by segment.

The sweep kernel is compiled with numba when available (a pure-Python
fallback keeps the same semantics) and counts its elementary operations so
callers can account for its cost in flop-proportional units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problems import L1LeastSquares, soft_threshold

__all__ = [
    "Breakpoint",
    "QuadraticSegment",
    "LineSearchError",
    "breakpoints",
    "sweep",
    "exact_line_search",
    "count_sweep_operations",
    "segments_to_csv",
    "warmup",
]

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        return deco


class LineSearchError(RuntimeError):
    """The piecewise-quadratic model misbehaved (objective unbounded below)."""


@dataclass(frozen=True)
class Breakpoint:
    """A step size where one coordinate of the prox path crosses zero."""

    alpha: float
    index: int
    event: str  # "activate" | "deactivate"


@dataclass(frozen=True)
class QuadraticSegment:
    """One quadratic piece of alpha -> F(p(x, alpha)).

    On [alpha_lo, alpha_hi] the objective equals
    q0 + q1*(alpha - alpha_lo) + q2*(alpha - alpha_lo)^2 and the prox path
    moves along the constant direction d.  The tail segment has
    alpha_hi = inf.  q2 = 0.5*||A d||^2 >= 0.
    """

    alpha_lo: float
    alpha_hi: float
    q0: float
    q1: float
    q2: float
    d: np.ndarray

    def value(self, alpha: float) -> float:
        t = alpha - self.alpha_lo
        return self.q0 + self.q1 * t + self.q2 * t * t


def _candidate_events(x: np.ndarray, g: np.ndarray, lam: float):
    """All nonnegative breakpoints with the sign each coordinate takes after.

    Candidates with a vanishing denominator never cross (the threshold line
    is parallel to the affine coordinate path) and are dropped; so are
    negative candidates.
    """
    out_a, out_i, out_s = [], [], []
    with np.errstate(divide="ignore", invalid="ignore"):
        for den, sig_after in ((g + lam, 1), (g - lam, -1)):
            a = x / den
            keep = np.isfinite(a) & (a >= 0.0)
            idx = np.nonzero(keep)[0]
            # The active side with sign sig_after is {x_i - alpha*den > 0} for
            # the + boundary and {x_i - alpha*den < 0} for the - one; in both
            # cases the crossing enters that side iff den*sig_after < 0.
            sig = np.where(den[idx] * sig_after < 0, sig_after, 0).astype(np.int8)
            out_a.append(a[idx])
            out_i.append(idx)
            out_s.append(sig)
    alphas = np.concatenate(out_a)
    idxs = np.concatenate(out_i).astype(np.int64)
    sigs = np.concatenate(out_s)
    order = np.lexsort((idxs, alphas))  # ties resolved in coordinate order
    return alphas[order], idxs[order], sigs[order]


def _initial_pattern(x: np.ndarray, g: np.ndarray, lam: float):
    """Sign pattern and direction of p(x, alpha) as alpha -> 0+.

    Coordinates with x_i != 0 start with sign(x_i); zero coordinates
    activate immediately iff |g_i| > lam, with sign -sign(g_i).
    """
    sigma = np.sign(x).astype(np.int8)
    zero = x == 0.0
    act = zero & (np.abs(g) > lam)
    sigma[act] = (-np.sign(g[act])).astype(np.int8)
    d = np.where(sigma != 0, -(g + lam * sigma), 0.0)
    return sigma, d


@njit(cache=True)
def _sweep_kernel(AT, r0, g, d0, sigma0, l1_0, lam, col_sq, bp_alpha, bp_idx, bp_sig):
    """Active-set sweep over the positive breakpoints.

    Maintains the direction d, A d, the residual r = A p(alpha) - b,
    ||p(alpha)||_1 and the scalar products needed for the quadratic
    coefficients, each updated in O(p) per breakpoint.  Returns the segment
    left endpoints and coefficient arrays (the last entry is the unbounded
    tail) plus an elementary-operation count.
    """
    n, p = AT.shape
    m = bp_alpha.shape[0]
    seg_lo = np.empty(m + 1)
    q0 = np.empty(m + 1)
    q1 = np.empty(m + 1)
    q2 = np.empty(m + 1)

    d = d0.copy()
    sigma = sigma0.copy()
    r = r0.copy()
    Ad = np.zeros(p)
    ops = 0
    for i in range(n):
        di = d[i]
        if di != 0.0:
            row = AT[i]
            for j in range(p):
                Ad[j] += di * row[j]
            ops += p
    r2 = 0.0
    adr = 0.0
    ad2 = 0.0
    for j in range(p):
        r2 += r[j] * r[j]
        adr += Ad[j] * r[j]
        ad2 += Ad[j] * Ad[j]
    ops += 3 * p
    l1 = l1_0
    sd = 0.0
    for i in range(n):
        sd += sigma[i] * d[i]
    ops += n

    prev = 0.0
    for e in range(m):
        a = bp_alpha[e]
        seg_lo[e] = prev
        q0[e] = 0.5 * r2 + lam * l1
        q1[e] = adr + lam * sd
        q2[e] = 0.5 * ad2
        dt = a - prev
        if dt != 0.0:
            r2 += dt * (2.0 * adr + dt * ad2)
            adr += dt * ad2
            l1 += dt * sd
            for j in range(p):
                r[j] += dt * Ad[j]
            ops += p
        i = bp_idx[e]
        s_new = bp_sig[e]
        s_old = sigma[i]
        d_old = d[i]
        if s_new != 0:
            d_new = -(g[i] + lam * s_new)
        else:
            d_new = 0.0
        delta = d_new - d_old
        if delta != 0.0:
            row = AT[i]
            acc_adc = 0.0  # <A d, col_i> before the update
            acc_cr = 0.0  # <col_i, r>
            for j in range(p):
                c = row[j]
                acc_adc += Ad[j] * c
                acc_cr += c * r[j]
                Ad[j] += delta * c
            ops += 3 * p
            ad2 += delta * (2.0 * acc_adc + delta * col_sq[i])
            adr += delta * acc_cr
        sd += s_new * d_new - s_old * d_old
        sigma[i] = s_new
        d[i] = d_new
        prev = a

    seg_lo[m] = prev
    q0[m] = 0.5 * r2 + lam * l1
    q1[m] = adr + lam * sd
    q2[m] = 0.5 * ad2
    return seg_lo, q0, q1, q2, ops


_warmed = False


def warmup() -> None:
    """Trigger kernel compilation once so timed runs do not pay for it."""
    global _warmed
    if _warmed:
        return
    AT = np.ascontiguousarray(np.arange(1.0, 5.0).reshape(2, 2))
    _sweep_kernel(
        AT,
        np.zeros(2),
        np.ones(2),
        np.zeros(2),
        np.zeros(2, dtype=np.int8),
        0.0,
        0.5,
        np.ones(2),
        np.array([0.5]),
        np.array([0], dtype=np.int64),
        np.array([1], dtype=np.int8),
    )
    _warmed = True


def _resolve_grad(problem: L1LeastSquares, x, grad):
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({problem.n},)")
    if grad is None:
        grad = problem.gradient(x)
    else:
        grad = np.asarray(grad, dtype=float)
    return x, grad


def _run_kernel(problem: L1LeastSquares, x, grad, r0=None):
    if r0 is None:
        r0 = problem.A @ x - problem.b
    sigma0, d0 = _initial_pattern(x, grad, problem.lam)
    alphas, idxs, sigs = _candidate_events(x, grad, problem.lam)
    pos = alphas > 0.0  # alpha = 0 entries only seed the initial pattern
    l1_0 = float(np.abs(x).sum())
    seg_lo, q0, q1, q2, ops = _sweep_kernel(
        problem.AT,
        np.ascontiguousarray(r0),
        np.ascontiguousarray(grad),
        d0,
        sigma0,
        l1_0,
        problem.lam,
        problem.column_norms_sq,
        np.ascontiguousarray(alphas[pos]),
        np.ascontiguousarray(idxs[pos]),
        np.ascontiguousarray(sigs[pos]),
    )
    # rounding scale of the first segment's slope q1 = <A d, r> + lam <sigma, d>
    ad_norm = math.sqrt(max(2.0 * q2[0], 0.0))
    r_norm = math.sqrt(max(2.0 * (q0[0] - problem.lam * l1_0), 0.0))
    q1_tol = (
        4.0
        * np.finfo(float).eps
        * (problem.n + problem.p)
        * (ad_norm * r_norm + problem.lam * float(np.abs(d0).sum()))
    )
    return seg_lo, q0, q1, q2, int(ops), q1_tol


def breakpoints(problem: L1LeastSquares, x, grad=None) -> list[Breakpoint]:
    """Sorted nonnegative breakpoints of alpha -> p(x, alpha), with ties kept.

    ``grad`` overrides the gradient vector defining the path (defaults to
    grad f(x)); entries at alpha = 0 encode the pattern the sweep starts
    from.
    """
    x, grad = _resolve_grad(problem, x, grad)
    alphas, idxs, sigs = _candidate_events(x, grad, problem.lam)
    return [
        Breakpoint(float(a), int(i), "activate" if s != 0 else "deactivate")
        for a, i, s in zip(alphas, idxs, sigs)
    ]


def _direction_at(x, g, lam, alpha):
    """Closed-form prox-path direction at a given alpha (between breakpoints)."""
    pos = x - alpha * (g + lam) > 0
    neg = x - alpha * (g - lam) < 0
    return np.where(pos, -(g + lam), np.where(neg, -(g - lam), 0.0))


def sweep(problem: L1LeastSquares, x, grad=None) -> list[QuadraticSegment]:
    """Quadratic pieces of alpha -> F(p(x, alpha)) tiling [0, inf).

    Segment directions are recovered from the closed-form activity pattern
    at an interior point, independently of the kernel's incremental state.
    """
    x, grad = _resolve_grad(problem, x, grad)
    seg_lo, q0, q1, q2, _, _ = _run_kernel(problem, x, grad)
    m1 = len(seg_lo)
    out = []
    for j in range(m1):
        hi = float(seg_lo[j + 1]) if j + 1 < m1 else math.inf
        lo = float(seg_lo[j])
        probe = lo + 1.0 if math.isinf(hi) else 0.5 * (lo + hi)
        d = _direction_at(x, grad, problem.lam, probe)
        out.append(
            QuadraticSegment(
                alpha_lo=lo, alpha_hi=hi, q0=float(q0[j]), q1=float(q1[j]),
                q2=float(q2[j]), d=d,
            )
        )
    return out


def count_sweep_operations(problem: L1LeastSquares, x, grad=None) -> int:
    """Elementary operations the sweep performs for this (problem, x)."""
    x, grad = _resolve_grad(problem, x, grad)
    return _run_kernel(problem, x, grad)[4]


def _minimize_segments(seg_lo, q0, q1, q2, q1_tol=0.0):
    """Global minimizer over all segments; ties break to the smallest alpha.

    Value comparisons across segments resolve differences down to roughly
    eps*(1+|F|) only.  When the landscape is flat at that resolution, the
    slope of the first segment decides: it is a product (not a difference of
    objectives), so it certifies descent at gradient precision.  ``q1_tol``
    bounds its rounding noise; below it the point counts as optimal and the
    smallest minimizer, 0, is returned.
    """
    m1 = len(seg_lo)
    width = np.empty(m1)
    width[:-1] = seg_lo[1:] - seg_lo[:-1]
    width[-1] = np.inf
    t = np.zeros(m1)
    pos = q2 > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        vertex = -q1 / (2.0 * q2)
    t[pos] = np.clip(vertex[pos], 0.0, width[pos])
    lin = ~pos & (q1 < 0.0)
    if lin[-1] and q1[-1] < -1e-9 * (1.0 + abs(q0[-1])):
        raise LineSearchError(
            "objective decreases along the unbounded tail segment; "
            "the model cannot be bounded below"
        )
    lin[-1] = False  # flat-tail drift: keep the left endpoint
    t[lin] = width[lin]
    vals = q0 + t * (q1 + q2 * t)
    j = int(np.argmin(vals))  # first minimum = smallest alpha on exact ties
    if q0[0] - vals[j] > 16.0 * np.finfo(float).eps * (1.0 + abs(q0[0])):
        return float(seg_lo[j] + t[j]), float(vals[j])
    if q1[0] >= -q1_tol:
        return 0.0, float(q0[0])
    return float(seg_lo[0] + t[0]), float(vals[0])


def exact_line_search(problem: L1LeastSquares, x, grad=None, debug_csv=None):
    """Globally minimize alpha -> F(p(x, alpha)) over alpha >= 0.

    Returns (alpha_star, p_star, F_star) with p_star = p(x, alpha_star) and
    F_star its directly recomputed objective.  If x already minimizes the
    objective along its prox path, alpha_star = 0 and p_star = x.  With
    ``grad`` given, the path uses that vector in place of grad f(x) (this is
    how the extragradient update searches its second step).  ``debug_csv``
    dumps the swept segments for inspection.
    """
    x, grad = _resolve_grad(problem, x, grad)
    seg_lo, q0, q1, q2, _, q1_tol = _run_kernel(problem, x, grad)
    if debug_csv is not None:
        segments_to_csv(sweep(problem, x, grad), debug_csv)
    alpha, _ = _minimize_segments(seg_lo, q0, q1, q2, q1_tol)
    if alpha == 0.0:
        p_star = x.copy()
    else:
        p_star = soft_threshold(x - alpha * grad, alpha * problem.lam)
    r = problem.A @ p_star - problem.b
    F_star = 0.5 * float(r @ r) + problem.lam * float(np.abs(p_star).sum())
    return alpha, p_star, F_star


def _engine_line_search(work, x, Ax, grad):
    """Solver-internal variant: reuses the cached residual, counts work.

    Returns (alpha_star, p_star, A p_star); alpha_star = 0 signals that x is
    already optimal along the path.
    """
    problem = work.problem
    seg_lo, q0, q1, q2, ops, q1_tol = _run_kernel(problem, x, grad, r0=Ax - problem.b)
    work.units += ops / work.np_cost
    alpha, _ = _minimize_segments(seg_lo, q0, q1, q2, q1_tol)
    if alpha == 0.0:
        return 0.0, x, Ax
    p_star = soft_threshold(x - alpha * grad, alpha * problem.lam)
    Ap = work.forward(p_star)
    return alpha, p_star, Ap


def segments_to_csv(segments, path_or_file) -> None:
    """Write segments as CSV rows ``alpha_lo,alpha_hi,q0,q1,q2``."""
    close = False
    fh = path_or_file
    if not hasattr(fh, "write"):
        fh = open(fh, "w")
        close = True
    try:
        fh.write("alpha_lo,alpha_hi,q0,q1,q2\n")
        for seg in segments:
            fh.write(
                ",".join(
                    format(v, ".17g")
                    for v in (seg.alpha_lo, seg.alpha_hi, seg.q0, seg.q1, seg.q2)
                )
                + "\n"
            )
    finally:
        if close:
            fh.close()
