"""Composite problem oracles and the l1-regularized least-squares instance.

A composite problem is F(x) = f(x) + g(x) with f smooth (L-Lipschitz
gradient) and g convex with a cheap proximal map.  The concrete instance
shipped here is

    F(x) = 0.5 * ||A x - b||^2 + lam * ||x||_1,

whose prox-gradient mapping p(x, s) = S_{s*lam}(x - s * grad f(x)) is the
building block of every solver in this package.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "SmoothOracle",
    "ProxOracle",
    "CompositeProblem",
    "L1LeastSquares",
    "PowerIterationError",
    "soft_threshold",
    "prox_l1",
    "prox_grad_map",
    "lipschitz_estimate",
    "l1_prox_oracle",
    "save_problem",
    "load_problem",
]

Array = np.ndarray


@dataclass(frozen=True)
class SmoothOracle:
    """Differentiable term: value, gradient, and a gradient Lipschitz constant.

    Instances are immutable and safe to share across threads; the callables
    must be pure functions of their argument.
    """

    value: Callable[[Array], float]
    gradient: Callable[[Array], Array]
    lipschitz: float


@dataclass(frozen=True)
class ProxOracle:
    """Convex term queried through its value and proximal map.

    ``prox(v, t)`` must return ``argmin_y { g(y) + ||y - v||^2 / (2 t) }``
    for ``t > 0``.  The value may be extended-real for domains with
    constraints; the l1 instance below is finite everywhere.
    """

    value: Callable[[Array], float]
    prox: Callable[[Array, float], Array]


@dataclass(frozen=True)
class CompositeProblem:
    """Pairing of a smooth oracle f and a prox-capable convex oracle g."""

    f: SmoothOracle
    g: ProxOracle

    def objective(self, x: Array) -> float:
        return float(self.f.value(x)) + float(self.g.value(x))


def soft_threshold(x: Array, a: float) -> Array:
    """Shrink each coordinate of ``x`` toward zero by ``a``.

    Coordinates with ``|x_i| <= a`` (boundary included) map to zero,
    the rest move by ``a`` toward the origin.  This is the proximal
    operator of ``a * ||.||_1``.
    """
    if a < 0:
        raise ValueError(f"threshold must be nonnegative, got {a}")
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= a, 0.0, x - a * np.sign(x))


def prox_l1(x: Array, t: float, lam: float) -> Array:
    """Proximal map of ``lam * ||.||_1`` with step ``t``: S_{t*lam}(x)."""
    if t <= 0:
        raise ValueError(f"prox step must be positive, got {t}")
    if lam < 0:
        raise ValueError(f"l1 weight must be nonnegative, got {lam}")
    return soft_threshold(x, t * lam)


def l1_prox_oracle(lam: float) -> ProxOracle:
    """ProxOracle for g(x) = lam * ||x||_1."""
    if lam < 0:
        raise ValueError(f"l1 weight must be nonnegative, got {lam}")
    return ProxOracle(
        value=lambda x: lam * float(np.abs(x).sum()),
        prox=lambda v, t: prox_l1(v, t, lam),
    )


class PowerIterationError(RuntimeError):
    """Raised when power iteration hits its iteration cap.

    Carries the best spectral estimate found so far in ``best_estimate``.
    """

    def __init__(self, message: str, best_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate


_POWER_SEED = 0x5EED  # fixed start vector: runs are reproducible


def lipschitz_estimate(A: Array, rtol: float = 1e-9, max_iters: int = 100_000) -> float:
    """Largest eigenvalue of A^T A (= sigma_max(A)^2) by power iteration.

    This is the Lipschitz constant of the gradient of 0.5*||Ax - b||^2.
    The Rayleigh quotient converges from below, so the returned value never
    overestimates the true constant beyond roundoff.  Iteration stops when
    the increment and its estimated geometric tail both fall under ``rtol``
    relative to the current value.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or min(A.shape) == 0:
        raise ValueError(f"expected a nonempty matrix, got shape {A.shape}")
    if not np.any(A):
        raise ValueError("zero matrix: no spectral direction to iterate on")
    rng = np.random.Generator(np.random.Philox(_POWER_SEED))
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    eps = np.finfo(float).eps
    lam = 0.0
    delta_prev = np.inf
    for _ in range(max_iters):
        w = A @ v
        lam_new = float(w @ w)  # Rayleigh quotient of A^T A at unit v
        u = A.T @ w
        nrm = float(np.linalg.norm(u))
        if lam_new == 0.0 or nrm == 0.0:
            # start vector fell in the null space; redraw deterministically
            v = rng.standard_normal(A.shape[1])
            v /= np.linalg.norm(v)
            continue
        v = u / nrm
        delta = abs(lam_new - lam)
        lam = lam_new
        if delta <= 64.0 * eps * lam:
            return lam
        if delta <= rtol * lam and np.isfinite(delta_prev) and delta_prev > 0.0:
            # remaining error of a geometric tail with ratio q = delta/delta_prev
            q = delta / delta_prev
            if q < 1.0 and delta * q / (1.0 - q) <= rtol * lam:
                return lam
        delta_prev = delta
    raise PowerIterationError(
        f"power iteration did not converge to rtol={rtol} in {max_iters} iterations",
        best_estimate=lam,
    )


@dataclass(frozen=True)
class L1LeastSquares:
    """min_x 0.5*||A x - b||^2 + lam*||x||_1 with A of shape (p, n).

    Arrays are stored as read-only float64; instances are immutable and all
    methods are pure, so a problem can be shared freely between solver runs.
    """

    A: Array
    b: Array
    lam: float

    def __post_init__(self):
        A = np.ascontiguousarray(self.A, dtype=float)
        b = np.ascontiguousarray(self.b, dtype=float)
        if A.ndim != 2:
            raise ValueError(f"A must be a matrix, got shape {A.shape}")
        if b.shape != (A.shape[0],):
            raise ValueError(f"b has shape {b.shape}, expected ({A.shape[0]},)")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def smooth_value(self, x: Array) -> float:
        r = self.A @ x - self.b
        return 0.5 * float(r @ r)

    def gradient(self, x: Array) -> Array:
        return self.AT @ (self.A @ x - self.b)

    def reg_value(self, x: Array) -> float:
        return self.lam * float(np.abs(x).sum())

    def objective(self, x: Array) -> float:
        return self.smooth_value(x) + self.reg_value(x)

    @functools.cached_property
    def lipschitz(self) -> float:
        return lipschitz_estimate(self.A)

    @functools.cached_property
    def AT(self) -> Array:
        out = np.ascontiguousarray(self.A.T)
        out.setflags(write=False)
        return out

    @functools.cached_property
    def column_norms_sq(self) -> Array:
        out = np.einsum("ij,ij->j", self.A, self.A)
        out.setflags(write=False)
        return out

    @functools.cached_property
    def f(self) -> SmoothOracle:
        return SmoothOracle(
            value=self.smooth_value, gradient=self.gradient, lipschitz=self.lipschitz
        )

    @functools.cached_property
    def g(self) -> ProxOracle:
        return l1_prox_oracle(self.lam)


def prox_grad_map(problem: L1LeastSquares, x: Array, s: float) -> Array:
    """p(x, s) = S_{s*lam}(x - s * grad f(x)).

    Fixed points of ``p(., s)`` for any s > 0 are exactly the critical
    points of the composite objective.
    """
    if s <= 0:
        raise ValueError(f"step must be positive, got {s}")
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({problem.n},)")
    return prox_l1(x - s * problem.gradient(x), s, problem.lam)


def save_problem(problem: L1LeastSquares, path) -> None:
    """Write a problem in the plain-text format (diffable, bit-exact).

    Line 1: ``p n``.  Lines 2..p+1: rows of A, whitespace separated.
    Next line: b.  Last line: lam.  Floats use 17 significant digits so a
    save/load round trip reproduces the arrays exactly.
    """
    with open(path, "w") as fh:
        fh.write(f"{problem.p} {problem.n}\n")
        for row in problem.A:
            fh.write(" ".join(format(v, ".17g") for v in row) + "\n")
        fh.write(" ".join(format(v, ".17g") for v in problem.b) + "\n")
        fh.write(format(problem.lam, ".17g") + "\n")


def load_problem(path) -> L1LeastSquares:
    """Read a problem written by :func:`save_problem`."""
    with open(path) as fh:
        lines = [ln for ln in (raw.strip() for raw in fh) if ln]
    if len(lines) < 3:
        raise ValueError(f"{path}: truncated problem file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"{path}: first line must be 'p n', got {lines[0]!r}")
    p, n = int(header[0]), int(header[1])
    if len(lines) != p + 3:
        raise ValueError(f"{path}: expected {p + 3} lines, found {len(lines)}")
    A = np.array([[float(v) for v in lines[1 + i].split()] for i in range(p)])
    if A.shape != (p, n):
        raise ValueError(f"{path}: matrix block has shape {A.shape}, expected ({p}, {n})")
    b = np.array([float(v) for v in lines[1 + p].split()])
    if b.shape != (p,):
        raise ValueError(f"{path}: b has length {b.shape[0]}, expected {p}")
    lam = float(lines[2 + p])
    return L1LeastSquares(A=A, b=b, lam=lam)
