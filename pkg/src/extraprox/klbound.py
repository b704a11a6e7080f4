"""Worst-case complexity bounds from a Kurdyka-Lojasiewicz model.

Given a desingularizing function phi for the objective near its minimum,
the inverse psi = (phi restricted to [0, r0])^{-1} together with two
constants extracted from the step schedule,

    C  - uniform per-step quadratic decrease constant (regime c3),
    B  - uniform subgradient bound ||omega_{k+1}|| <= B ||x_k - x_{k+1}||,

drives a scalar recursion: with zeta = (sqrt(1 + 2*ell*C/B^2) - 1)/ell and
beta_0 = phi(r0), r0 = F(x_0) - F*,

    beta_{k+1} = argmin_{u >= 0} { psi(u) + (u - beta_k)^2 / (2 zeta) },

i.e. the scalar prox of zeta*psi.  The sequence decreases to zero and
dominates the run:  F(x_k) - F* <= psi(beta_k) and
||x_k - x*|| <= (B/C) beta_k + sqrt(psi(beta_{k-1}) / C).

The power family phi(s) = c * s^(1-theta) with theta in [1/2, 1) is built
in (psi(u) = (u/c)^(1/(1-theta)), whose derivative is Lipschitz on bounded
intervals exactly when theta >= 1/2); arbitrary psi can be supplied by the
caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .solvers import StepSchedule, validate_schedule

__all__ = [
    "KLParams",
    "SmallProxBound",
    "ScalarSolveError",
    "constants",
    "zeta",
    "beta_sequence",
    "bounds",
]


class ScalarSolveError(RuntimeError):
    """The 1-D prox solve for the beta recursion failed to converge."""


def _validate_psi(psi, dpsi, ell, beta0, samples=257):
    us = np.linspace(0.0, beta0, samples)
    dvals = np.array([dpsi(u) for u in us])
    vals = np.array([psi(u) for u in us])
    tol = 1e-9 * (1.0 + abs(vals[-1]))
    if abs(vals[0]) > tol:
        raise ValueError(f"psi(0) must vanish, got {vals[0]}")
    if abs(dvals[0]) > 1e-9 * (1.0 + abs(dvals[-1])):
        raise ValueError(f"psi'(0) must vanish, got {dvals[0]}")
    if np.any(np.diff(vals) < -tol):
        raise ValueError("psi must be increasing on [0, beta0]")
    if np.any(np.diff(dvals) < -1e-12 * (1.0 + abs(dvals[-1]))):
        raise ValueError("psi' must be nondecreasing (psi convex) on [0, beta0]")
    du = us[1] - us[0]
    lips = np.max(np.abs(np.diff(dvals))) / du
    if lips > ell * (1.0 + 1e-6) + 1e-12:
        raise ValueError(
            f"psi' is not {ell}-Lipschitz on [0, beta0]: sampled slope {lips}"
        )


@dataclass(frozen=True)
class KLParams:
    """Desingularization data: inverse function psi, its derivative, and bounds.

    ``theta``/``c`` are set for the power family and None for caller-supplied
    psi.  ``ell`` is a Lipschitz constant of psi' on [0, beta0] and
    ``beta0 = phi(r0)`` where r0 is the initial objective gap.
    """

    psi: Callable[[float], float]
    dpsi: Callable[[float], float]
    ell: float
    beta0: float
    theta: Optional[float] = None
    c: Optional[float] = None

    @staticmethod
    def power(theta: float, c: float, r0: float) -> "KLParams":
        """Power family phi(s) = c * s^(1-theta) on [0, r0].

        psi(u) = (u/c)^m with m = 1/(1-theta) >= 2; its derivative has
        Lipschitz constant m(m-1) c^{-m} beta0^{m-2} on [0, beta0].  Values
        theta < 1/2 are rejected: psi' would not be Lipschitz at 0.
        """
        if not 0.5 <= theta < 1.0:
            raise ValueError(f"theta must lie in [1/2, 1), got {theta}")
        if c <= 0 or r0 <= 0:
            raise ValueError(f"c and r0 must be positive, got c={c}, r0={r0}")
        m = 1.0 / (1.0 - theta)
        beta0 = c * r0 ** (1.0 - theta)

        def psi(u: float) -> float:
            return (u / c) ** m

        def dpsi(u: float) -> float:
            return (m / c) * (u / c) ** (m - 1.0)

        ell = m * (m - 1.0) * c ** (-m) * beta0 ** (m - 2.0)
        return KLParams(psi=psi, dpsi=dpsi, ell=ell, beta0=beta0, theta=theta, c=c)

    @staticmethod
    def custom(psi, dpsi, ell: float, beta0: float) -> "KLParams":
        """Caller-supplied psi; the required properties are sample-checked."""
        if ell <= 0 or beta0 <= 0:
            raise ValueError(f"ell and beta0 must be positive, got {ell}, {beta0}")
        _validate_psi(psi, dpsi, ell, beta0)
        return KLParams(psi=psi, dpsi=dpsi, ell=float(ell), beta0=float(beta0))


def constants(schedule: StepSchedule, L: float):
    """(C, B) for a schedule satisfying regime c3.

    C = L^3 s^2 (1 + L s) / (2 (2 - L^2 s^2)^2 (1 - L s)) at s = s_inf is a
    lower bound on every per-step decrease coefficient; B = 3 / alpha_inf
    bounds the subgradient residual factor.
    """
    report = validate_schedule(schedule, L, regime="c3")
    if not report.ok:
        raise ValueError(
            f"schedule does not satisfy regime c3: violates {report.first_violation!r}"
        )
    s = schedule.s_inf
    u = L * s
    C = L**3 * s**2 * (1.0 + u) / (2.0 * (2.0 - u * u) ** 2 * (1.0 - u))
    B = 3.0 / schedule.alpha_inf
    return C, B


def zeta(ell: float, C: float, B: float) -> float:
    """(sqrt(1 + 2 ell C / B^2) - 1) / ell, the prox step of the beta recursion.

    Evaluated as x / (ell * (sqrt(1+x) + 1)) with x = 2 ell C / B^2, which is
    algebraically identical and stays accurate as ell -> 0, where
    zeta -> C / B^2.
    """
    if ell <= 0 or C <= 0 or B <= 0:
        raise ValueError(f"all inputs must be positive, got ell={ell}, C={C}, B={B}")
    x = 2.0 * ell * C / (B * B)
    return x / (ell * (math.sqrt(1.0 + x) + 1.0))


def _prox_psi_scalar(params: KLParams, zeta_value: float, beta: float) -> float:
    """argmin_{u >= 0} psi(u) + (u - beta)^2 / (2 zeta).

    psi'(0) = 0 forces the minimizer into (0, beta]; it is the unique root of
    h(u) = zeta*psi'(u) + u - beta there.  Solved by bracketed root finding
    with a secant polish so the stationarity residual reaches roundoff.
    """
    dpsi = params.dpsi
    if beta == 0.0:
        return 0.0

    def h(u: float) -> float:
        return zeta_value * dpsi(u) + u - beta

    hi = h(beta)
    if hi <= 0.0:  # psi flat up to beta: prox leaves the point in place
        return beta
    try:
        u = brentq(h, 0.0, beta, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=200)
    except (ValueError, RuntimeError) as exc:
        raise ScalarSolveError(
            f"prox solve failed for beta={beta}, zeta={zeta_value}: {exc}; "
            f"h(0)={h(0.0)}, h(beta)={hi}"
        ) from exc
    # secant polish to push |h| to the floor float allows
    u_prev, h_prev = beta, hi
    h_u = h(u)
    for _ in range(4):
        if h_u == 0.0 or h_u == h_prev:
            break
        step = h_u * (u - u_prev) / (h_u - h_prev)
        u_new = u - step
        if not (0.0 < u_new <= beta):
            break
        u_prev, h_prev = u, h_u
        u, h_u = u_new, h(u_new)
        if abs(h_u) >= abs(h_prev):
            u, h_u = u_prev, h_prev
            break
    if abs(h_u) > 1e-10 * zeta_value * (1.0 + beta):
        raise ScalarSolveError(
            f"prox solve residual {h_u / zeta_value} too large for beta={beta}, "
            f"zeta={zeta_value}"
        )
    return float(u)


def beta_sequence(params: KLParams, zeta_value: float, k_max: int) -> np.ndarray:
    """[beta_0, ..., beta_{k_max}] from the scalar prox recursion.

    For the power family with theta = 1/2 the recursion is the closed form
    beta_{k+1} = beta_k / (1 + 2 zeta / c^2); otherwise each step solves the
    1-D stationarity equation.  The sequence is nonincreasing and tends to 0.
    """
    if zeta_value <= 0:
        raise ValueError(f"zeta must be positive, got {zeta_value}")
    if params.beta0 <= 0:
        raise ValueError(f"beta0 must be positive, got {params.beta0}")
    out = np.empty(k_max + 1)
    out[0] = params.beta0
    if params.theta is not None and params.theta == 0.5:
        ratio = 1.0 / (1.0 + 2.0 * zeta_value / (params.c * params.c))
        for k in range(k_max):
            out[k + 1] = out[k] * ratio
        return out
    for k in range(k_max):
        out[k + 1] = _prox_psi_scalar(params, zeta_value, out[k])
    return out


@dataclass(frozen=True)
class SmallProxBound:
    """Bound table: the beta sequence and the objective/distance envelopes."""

    C: float
    B: float
    zeta: float
    betas: np.ndarray
    objective_bounds: np.ndarray
    distance_bounds: np.ndarray


def bounds(params: KLParams, C: float, B: float, betas: np.ndarray) -> SmallProxBound:
    """Objective and distance envelopes along a beta sequence.

    objective_bounds[k] = psi(beta_k) dominates F(x_k) - F*;
    distance_bounds[k] = (B/C) beta_k + sqrt(psi(beta_{k-1}) / C) dominates
    ||x_k - x*|| for k >= 1 (NaN at k = 0).
    """
    betas = np.asarray(betas, dtype=float)
    obj = np.array([params.psi(b) for b in betas])
    dist = np.full_like(obj, np.nan)
    if len(betas) > 1:
        dist[1:] = (B / C) * betas[1:] + np.sqrt(obj[:-1] / C)
    return SmallProxBound(
        C=C,
        B=B,
        zeta=zeta(params.ell, C, B),
        betas=betas,
        objective_bounds=obj,
        distance_bounds=dist,
    )
