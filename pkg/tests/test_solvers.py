import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extraprox.bench import generate_problem, reference_solve
from extraprox.problems import CompositeProblem, ProxOracle, SmoothOracle
from extraprox.solvers import (
    CERT_TOL,
    Certificates,
    ConfigurationError,
    StepSchedule,
    c3_alpha_cap,
    coupling_certificate,
    decrease_coefficient,
    descent_certificate,
    eeg_step,
    fb_step,
    fista_step,
    run,
    subgrad_bound_c1,
    subgrad_certificate,
    validate_schedule,
)


# -- schedules ---------------------------------------------------------------


def test_validate_c1_example():
    sched = StepSchedule.constant(0.5, 0.9, regime="c1")
    assert validate_schedule(sched, L=1.0).ok


def test_validate_rejects_s_above_alpha():
    sched = StepSchedule.constant(0.6, 0.5)
    report = validate_schedule(sched, L=1.0)
    assert not report.ok
    assert report.first_violation == "0 < s_k <= alpha_k"


def test_validate_c2_alpha_cap():
    sched = StepSchedule.constant(0.4, 0.7, regime="c2")
    report = validate_schedule(sched, L=1.0)
    assert not report.ok
    assert report.first_violation == "alpha_k <= 1/L - s_k"


@pytest.mark.parametrize("L", [0.3, 1.0, 17.2])
def test_default_schedules_valid(L):
    for make in (StepSchedule.c1_default, StepSchedule.c2_default, StepSchedule.c3_default):
        sched = make(L)
        assert validate_schedule(sched, L).ok, (make.__name__, L)


@given(L=st.floats(0.1, 10.0), frac_s=st.floats(0.01, 0.99), frac_a=st.floats(0.0, 1.0))
@settings(max_examples=80, deadline=None)
def test_c2_implies_c1(L, frac_s, frac_a):
    # any schedule inside the c2 box also satisfies the c1 inequalities
    s = frac_s * 0.5 / L
    alpha = s + frac_a * (1.0 / L - s - s)
    sched = StepSchedule.constant(s, alpha, regime="c2")
    if validate_schedule(sched, L).ok:
        assert validate_schedule(StepSchedule.constant(s, alpha, regime="c1"), L).ok


def test_schedule_rejects_unknown_regime():
    with pytest.raises(ConfigurationError):
        StepSchedule.constant(0.1, 0.2, regime="c9")


# -- single steps -------------------------------------------------------------


def _quadratic_no_reg():
    # f = 0.5 ||x||^2 (A = I, b = 0), g = 0
    f = SmoothOracle(
        value=lambda x: 0.5 * float(x @ x), gradient=lambda x: np.asarray(x, float),
        lipschitz=1.0,
    )
    g = ProxOracle(value=lambda x: 0.0, prox=lambda v, t: np.asarray(v, float))
    return CompositeProblem(f=f, g=g)


def test_eeg_step_quadratic_hand_trace():
    prob = _quadratic_no_reg()
    y, x_next = eeg_step(prob, np.array([1.0]), 0.5, 0.5)
    np.testing.assert_allclose(y, [0.5], atol=1e-15)
    np.testing.assert_allclose(x_next, [0.75], atol=1e-15)


def test_eeg_step_lasso_hand_trace(lasso_1d):
    y, x_next = eeg_step(lasso_1d, np.zeros(1), 0.5, 0.5)
    np.testing.assert_allclose(y, [0.45], atol=1e-15)
    np.testing.assert_allclose(x_next, [0.225], atol=1e-15)


def test_eeg_step_fixed_point(lasso_1d):
    x_star = np.array([0.9])
    y, x_next = eeg_step(lasso_1d, x_star, 0.4, 0.8)
    np.testing.assert_allclose(y, x_star, atol=1e-14)
    np.testing.assert_allclose(x_next, x_star, atol=1e-14)


def test_fb_step_matches_eeg_scout(lasso_1d, rng):
    x = rng.normal(size=1)
    y, _ = eeg_step(lasso_1d, x, 0.7, 0.7)
    np.testing.assert_allclose(fb_step(lasso_1d, x, 0.7), y, atol=1e-15)


def test_fb_step_analytic(lasso_1d):
    np.testing.assert_allclose(fb_step(lasso_1d, np.zeros(1), 1.0), [0.9], atol=1e-15)


def test_fb_step_fixed_point(lasso_1d):
    x_star = np.array([0.9])
    np.testing.assert_allclose(fb_step(lasso_1d, x_star, 0.6), x_star, atol=1e-14)


def test_fista_step_first_iteration_is_fb(lasso_1d):
    x = np.array([0.2])
    x_next, t_next = fista_step(lasso_1d, x, x, 1.0, 0.9)
    np.testing.assert_allclose(x_next, fb_step(lasso_1d, x, 0.9), atol=1e-15)
    assert t_next == pytest.approx((1 + math.sqrt(5.0)) / 2)


def test_fista_step_rejects_small_t(lasso_1d):
    with pytest.raises(ValueError):
        fista_step(lasso_1d, np.zeros(1), np.zeros(1), 0.5, 0.9)


def test_fista_two_iteration_reference_trace(lasso_1d):
    # scripted reference re-implementation of the momentum recursion
    alpha, lam = 0.8, lasso_1d.lam

    def ref_prox_step(z):
        v = z - alpha * (z - 1.0)
        return np.sign(v) * max(abs(v) - alpha * lam, 0.0)

    x0 = 0.0
    t0 = 1.0
    t1 = 0.5 * (1 + math.sqrt(1 + 4 * t0 * t0))
    z1 = x0 + ((t0 - 1) / t1) * (x0 - x0)
    x1 = ref_prox_step(z1)
    t2 = 0.5 * (1 + math.sqrt(1 + 4 * t1 * t1))
    z2 = x1 + ((t1 - 1) / t2) * (x1 - x0)
    x2 = ref_prox_step(z2)

    got1, got_t1 = fista_step(lasso_1d, np.array([x0]), np.array([x0]), t0, alpha)
    got2, got_t2 = fista_step(lasso_1d, got1, np.array([x0]), got_t1, alpha)
    np.testing.assert_allclose(got1, [x1], atol=1e-15)
    np.testing.assert_allclose(got2, [x2], atol=1e-15)
    assert got_t2 == pytest.approx(t2, abs=1e-15)


# -- certificates -------------------------------------------------------------


def test_descent_certificate_zero_at_fixed_point():
    x = np.array([0.9])
    assert descent_certificate(0.095, 0.095, x, x, 0.5) == 0.0


def test_descent_certificate_nonnegative_under_c1(lasso_1d):
    prob_big = generate_problem(30, 15, 0.1, seed=0)
    for prob in (lasso_1d, prob_big):
        sched = StepSchedule.c1_default(prob.lipschitz)
        rec = run(prob, "eeg", schedule=sched, x0=np.zeros(prob.n), max_iters=60,
                  tol=0.0)
        margins = rec.descent_margin[1:]
        scale = 1.0 + np.abs(rec.objective[:-1])
        assert np.all(margins >= -CERT_TOL * scale)


def test_descent_sharper_bound_under_c3(lasso_1d):
    # convex f: objective drop >= c_k * ||x_k - x_{k+1}||^2
    L = lasso_1d.lipschitz
    sched = StepSchedule.c3_default(L)
    rec = run(lasso_1d, "eeg", schedule=sched, x0=np.zeros(1), max_iters=50, tol=0.0)
    for i in range(1, len(rec.k)):
        drop = rec.objective[i - 1] - rec.objective[i]
        c_k = rec.c_k[i]
        # reconstruct the squared displacement from the recorded margin
        sq = 2.0 * rec.alpha_k[i] * (rec.objective[i - 1] - rec.objective[i] - rec.descent_margin[i])
        assert drop >= c_k * sq - CERT_TOL * (1 + abs(rec.objective[i - 1]))


def test_coupling_certificate_hand_trace(lasso_1d):
    # continuation of the eeg hand trace: equality holds there
    slack = coupling_certificate(
        np.zeros(1), np.array([0.225]), np.array([0.45]), 0.5, 0.5, L=1.0
    )
    assert slack == pytest.approx(0.0, abs=1e-15)


def test_coupling_certificate_rejects_large_s(lasso_1d):
    with pytest.raises(ValueError):
        coupling_certificate(np.zeros(1), np.zeros(1), np.zeros(1), 1.0, 1.0, L=1.0)


def test_coupling_trivial_when_gradient_constant():
    # linear f: scout and update prox points coincide for s = alpha
    f = SmoothOracle(
        value=lambda x: float(x.sum()), gradient=lambda x: np.ones_like(x), lipschitz=1.0
    )
    g = ProxOracle(value=lambda x: 0.0, prox=lambda v, t: np.asarray(v, float))
    prob = CompositeProblem(f=f, g=g)
    x = np.array([1.0, -2.0])
    y, x_next = eeg_step(prob, x, 0.3, 0.3)
    np.testing.assert_allclose(x_next, y, atol=1e-15)
    assert coupling_certificate(x, x_next, y, 0.3, 0.3, L=1.0) >= 0.0


def test_subgrad_certificate_hand_trace(lasso_1d):
    res, b_k = subgrad_certificate(
        lasso_1d, np.zeros(1), np.array([0.225]), np.array([0.45]), 0.5, 0.5
    )
    assert res == pytest.approx(0.675, abs=1e-15)
    assert b_k == pytest.approx(3.0, abs=1e-15)


def test_subgrad_certificate_zero_at_critical(lasso_1d):
    x = np.array([0.9])
    res, _ = subgrad_certificate(lasso_1d, x, x, x, 0.4, 0.8)
    assert res <= 1e-14


def test_subgrad_bound_uniform_under_c1(rng):
    prob = generate_problem(20, 10, 0.5, seed=3)
    L = prob.lipschitz
    sched = StepSchedule.c1_default(L)
    rec = run(prob, "eeg", schedule=sched, x0=np.zeros(20), max_iters=200, tol=0.0)
    b_cap = subgrad_bound_c1(sched.alpha_inf, sched.s_sup, L)
    valid = np.isfinite(rec.b_k)
    assert np.all(rec.b_k[valid] <= b_cap * (1 + 1e-12))


@given(
    L=st.floats(0.2, 5.0),
    fs=st.floats(0.05, 1.0),
    fa=st.floats(0.0, 1.0),
)
@settings(max_examples=100, deadline=None)
def test_decrease_coefficient_uniform_bound_c3(L, fs, fa):
    # c_k >= C for any steps inside the c3 box
    s = fs * (math.sqrt(5.0) - 1.0) / (2.0 * L)
    cap = c3_alpha_cap(s, L)
    alpha = s + fa * (cap - s)
    u = L * s
    C = L**3 * s**2 * (1 + u) / (2 * (2 - u * u) ** 2 * (1 - u))
    assert decrease_coefficient(s, alpha, L) >= C - 1e-12 * (1 + C)


# -- run ----------------------------------------------------------------------


def test_run_stops_at_critical_start(lasso_1d):
    rec = run(
        lasso_1d,
        "eeg",
        schedule=StepSchedule.c1_default(1.0),
        x0=np.array([0.9]),
        max_iters=50,
        tol=1e-12,
    )
    assert rec.status == "converged"
    assert rec.iterations == 0
    assert rec.residual[0] <= 1e-12


def test_run_converges_1d(lasso_1d):
    for method in ("eeg", "fb", "fista"):
        rec = run(
            lasso_1d,
            method,
            schedule=StepSchedule.c1_default(1.0),
            x0=np.zeros(1),
            max_iters=2000,
            tol=1e-12,
        )
        assert rec.status == "converged"
        np.testing.assert_allclose(rec.x, [0.9], atol=1e-8)
        assert rec.objective[-1] == pytest.approx(0.095, abs=1e-8)


def test_run_objective_monotone_under_c1():
    prob = generate_problem(24, 12, 1.0, seed=7)
    for method in ("eeg", "fb"):
        rec = run(
            prob,
            method,
            schedule=StepSchedule.c1_default(prob.lipschitz),
            x0=np.zeros(24),
            max_iters=300,
            tol=0.0,
        )
        assert np.all(np.diff(rec.objective) <= 1e-12 * (1 + np.abs(rec.objective[:-1])))


def test_run_square_sum_bound_under_c1():
    # sum ||x_{k+1} - x_k||^2 <= 2 alpha_sup (F(x_0) - F*)
    prob = generate_problem(16, 8, 0.0, seed=11)
    sched = StepSchedule.c1_default(prob.lipschitz)
    rec = run(prob, "eeg", schedule=sched, x0=np.zeros(16), max_iters=400, tol=0.0)
    _, f_star = reference_solve(prob, tol=1e-12)
    sq = 2.0 * rec.alpha_k[1:] * (
        rec.objective[:-1] - rec.objective[1:] - rec.descent_margin[1:]
    )
    assert sq.sum() <= 2.0 * sched.alpha_sup * (rec.objective[0] - f_star) + 1e-10


def test_run_c2_step_coupling_inequality():
    # (1/alpha_k)||x_k - x_{k+1}||^2 - L ||x_{k+1} - y_k||^2 >= 0 under c2
    prob = generate_problem(18, 9, 0.5, seed=5)
    L = prob.lipschitz
    sched = StepSchedule.c2_default(L)
    x = np.zeros(18)
    for k in range(150):
        y, x_next = eeg_step(prob, x, sched.s(k), sched.alpha(k))
        lhs = np.linalg.norm(x - x_next) ** 2 / sched.alpha(k)
        rhs = L * np.linalg.norm(x_next - y) ** 2
        assert lhs - rhs >= -1e-10 * (1 + lhs)
        x = x_next


def test_run_sublinear_rate_small_scale(lasso_1d):
    sched = StepSchedule.c2_default(1.0)
    x0 = np.array([3.0])
    rec = run(lasso_1d, "eeg", schedule=sched, x0=x0, max_iters=200, tol=0.0, f_star=0.095)
    x_star = 0.9
    for m in range(1, len(rec.k)):
        bound = (x0[0] - x_star) ** 2 / (2 * m * sched.alpha_inf)
        assert rec.subopt[m] <= bound + 1e-9


def test_run_generic_composite_oracles():
    # the driver also works on plain oracle pairs (no least-squares structure)
    prob = _quadratic_no_reg()
    for method in ("eeg", "fb", "fista"):
        rec = run(prob, method, schedule=StepSchedule.c1_default(1.0),
                  x0=np.array([2.0, -1.0]), max_iters=500, tol=1e-12)
        assert rec.status == "converged"
        np.testing.assert_allclose(rec.x, [0.0, 0.0], atol=1e-10)
    from extraprox.bench import StepRule

    with pytest.raises(ConfigurationError):
        run(prob, "fb", rule=StepRule("exact"), x0=np.zeros(2))


def test_run_rejects_bad_configs(lasso_1d):
    from extraprox.bench import StepRule

    with pytest.raises(ConfigurationError):
        run(lasso_1d, "fista", rule=StepRule("2/L"), x0=np.zeros(1))
    with pytest.raises(ConfigurationError):
        run(lasso_1d, "fista", rule=StepRule("exact"), x0=np.zeros(1))
    with pytest.raises(ConfigurationError):
        run(lasso_1d, "eeg", x0=np.zeros(1))  # neither schedule nor rule
    with pytest.raises(ConfigurationError):
        run(
            lasso_1d,
            "eeg",
            schedule=StepSchedule.constant(0.9, 0.5, regime="c1"),
            x0=np.zeros(1),
        )  # invalid declared regime


def test_run_record_csv_schema(tmp_path, lasso_1d):
    rec = run(
        lasso_1d,
        "eeg",
        schedule=StepSchedule.c1_default(1.0),
        x0=np.zeros(1),
        max_iters=5,
        tol=0.0,
        f_star=0.095,
    )
    path = tmp_path / "trace.csv"
    rec.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == (
        "algo,step_rule,k,time_s,objective,subopt,s_k,alpha_k,"
        "descent_margin,coupling_slack,residual,b_k"
    )
    assert len(lines) == len(rec.k) + 1
    first = lines[1].split(",")
    assert first[0] == "eeg" and first[1] == "schedule:c1" and first[2] == "0"


def test_certificates_dataclass_fields():
    c = Certificates(1.0, 2.0, 3.0, 4.0, 5.0)
    assert (c.descent_margin, c.coupling_slack, c.subgrad_residual_norm, c.b_k, c.c_k) == (
        1.0,
        2.0,
        3.0,
        4.0,
        5.0,
    )
