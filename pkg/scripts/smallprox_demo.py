#!/usr/bin/env python3
"""Small-prox complexity envelope versus an actual solver run, at desk scale.

The instance 0.5*(x-1)^2 + 0.1*|x| is 1-strongly convex, so the power-family
desingularization with exponent 1/2 and scale sqrt(2) is valid for it.  The
script prints the certified envelope psi(beta_k) next to the measured
suboptimality of the extragradient run under the c3 step regime.
"""

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from extraprox import klbound
from extraprox.problems import L1LeastSquares
from extraprox.solvers import StepSchedule, run


def main() -> int:
    prob = L1LeastSquares(A=np.array([[1.0]]), b=np.array([1.0]), lam=0.1)
    f_star = 0.095
    L = prob.lipschitz
    sched = StepSchedule.c3_default(L)
    x0 = np.zeros(1)
    r0 = prob.objective(x0) - f_star

    params = klbound.KLParams.power(0.5, math.sqrt(2.0), r0)
    C, B = klbound.constants(sched, L)
    z = klbound.zeta(params.ell, C, B)
    betas = klbound.beta_sequence(params, z, 40)
    table = klbound.bounds(params, C, B, betas)

    rec = run(prob, "eeg", schedule=sched, x0=x0, max_iters=40, tol=0.0,
              f_star=f_star)

    print(f"C = {C:.6f}  B = {B:.6f}  zeta = {z:.6f}  beta0 = {params.beta0:.6f}")
    print(f"{'k':>4} {'beta_k':>12} {'psi(beta_k)':>14} {'F(x_k)-F*':>14}")
    for k in range(0, 41, 4):
        gap = rec.subopt[k] if k < len(rec.subopt) else float("nan")
        print(f"{k:>4} {betas[k]:>12.6f} {table.objective_bounds[k]:>14.3e} {gap:>14.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
