import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from renewal_lab.controller import ThetaBracket
from renewal_lab.environments import EnvSpec, UnsupportedSystemError, stationary_expectation
from renewal_lab.oracle import (
    BracketError,
    Method,
    closed_form,
    golden_theta_star,
    load_goldens,
    m_function,
    m_function_mc,
    solve_theta_star,
)

P_SWEEP = [round(0.05 * i, 2) for i in range(1, 20)]
Q_SWEEP = [0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75]
THETA_B = 2 - (2 / 0.7) * (math.sqrt(1.7) - 1)


def b_upper_ratio_max(q):
    """Independent oracle: max r/t over the upper boundary of the achievable set."""
    res = minimize_scalar(lambda t: -((2 * t - 1) - (t - 1) ** 2 / q) / t, bounds=(1, 1 + q),
                          method="bounded", options={"xatol": 1e-12})
    return -res.fun, res.x


def test_m_examples():
    assert m_function(EnvSpec.system_a(0.25), 2.5) == 0.0
    assert m_function(EnvSpec.system_a(0.5), 2.0) == 0.0
    for q in (0.25, 0.7):
        assert m_function(EnvSpec.system_b(q), 0.0) == pytest.approx(1 + q, abs=1e-15)
    with pytest.raises(UnsupportedSystemError):
        m_function(EnvSpec.system_c(0.3), 1.0)


def test_mc_examples():
    est, se = m_function_mc(EnvSpec.system_a(0.25), 2.5, 1_000_000, seed=1)
    assert abs(est) <= 4 * se
    est, se = m_function_mc(EnvSpec.system_b(0.7), 0.0, 1_000_000, seed=2)
    assert abs(est - 1.7) <= 4 * se
    for spec in (EnvSpec.system_a(0.3), EnvSpec.system_c(0.3)):
        assert m_function_mc(spec, 1.0, 100, 5) == m_function_mc(spec, 1.0, 100, 5)
    with pytest.raises(ValueError):
        m_function_mc(EnvSpec.system_a(0.3), 1.0, 99, 5)


def test_mc_matches_exact_b():
    spec = EnvSpec.system_b(0.4)
    for th in (0.5, 1.2, 1.8):
        est, se = m_function_mc(spec, th, 200_000, seed=3)
        assert abs(est - m_function(spec, th)) <= 4 * se


def test_solve_examples():
    assert solve_theta_star(EnvSpec.system_a(0.25)).theta_star == 2.5
    assert solve_theta_star(EnvSpec.system_a(0.75)).theta_star == 6 / 3.5
    res = solve_theta_star(EnvSpec.system_b(0.7))
    assert res.theta_star == pytest.approx(1.131884340, abs=1e-9)
    assert res.theta_star == pytest.approx(THETA_B, abs=1e-15)
    assert res.t_star == pytest.approx(math.sqrt(1.7), abs=1e-15)
    assert res.method is Method.CLOSED_FORM


@pytest.mark.parametrize("q", Q_SWEEP)
def test_system_b_against_independent_maximizer(q):
    res = solve_theta_star(EnvSpec.system_b(q))
    best, t = b_upper_ratio_max(q)
    assert res.theta_star == pytest.approx(best, abs=1e-9)
    assert res.t_star == pytest.approx(t, abs=1e-5)
    assert abs(res.r_star / res.t_star - res.theta_star) <= 1e-12


@pytest.mark.parametrize("spec", [EnvSpec.system_a(p) for p in P_SWEEP] + [EnvSpec.system_b(q) for q in Q_SWEEP])
def test_root_and_ratio(spec):
    tol = 1e-9
    res = solve_theta_star(spec, tol)
    assert abs(m_function(spec, res.theta_star)) <= 10 * tol
    assert abs(res.r_star / res.t_star - res.theta_star) <= res.tolerance + 1e-15


@pytest.mark.parametrize("spec", [EnvSpec.system_a(p) for p in (0.05, 0.5, 0.95)] + [EnvSpec.system_b(q) for q in (0.25, 0.75)])
def test_m_strictly_decreasing(spec):
    vals = [m_function(spec, th) for th in np.linspace(-2, 5, 141)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("p", P_SWEEP + [0.5, 0.49, 0.51])
def test_system_a_extreme_points(p):
    spec = EnvSpec.system_a(p)
    low, high = (r / t for t, r in (stationary_expectation(spec, b) for b in (False, True)))
    theta = solve_theta_star(spec).theta_star
    assert theta == pytest.approx(max(low, high), abs=1e-15)
    assert (high >= low) == (p >= 0.5)


@pytest.mark.parametrize("q", [0.25, 0.5, 0.7, 0.75])
def test_curvature_certificate(q):
    spec = EnvSpec.system_b(q)
    res = solve_theta_star(spec)
    rng = np.random.default_rng(99)
    for _ in range(1000):
        m = rng.integers(1, 4)
        w = rng.dirichlet(np.ones(m))
        w[-1] = 1.0 - w[:-1].sum()
        t, r = stationary_expectation(spec, list(zip(w, rng.uniform(1, 2, m))))
        assert r <= res.theta_star * t - (t - res.t_star) ** 2 / q + 1e-9


def test_bad_bracket_is_reported():
    with pytest.raises(BracketError):
        solve_theta_star(EnvSpec.system_a(0.25), bracket=ThetaBracket(2.6, 3.0))
    with pytest.raises(ValueError):
        solve_theta_star(EnvSpec.system_a(0.25), tol=0.0)


def test_system_b_degenerate():
    assert closed_form(EnvSpec.system_b(0.0)).theta_star == 1.0
    # q = 1 has only the curve: max (2t-1-(t-1)^2)/t at t = sqrt(2)
    assert solve_theta_star(EnvSpec.system_b(1.0)).theta_star == pytest.approx(b_upper_ratio_max(1.0)[0], abs=1e-9)


def test_system_c_monte_carlo_solve():
    spec = EnvSpec.system_c(0.3, seed=4)
    res = solve_theta_star(spec, tol=1e-6, bracket=ThetaBracket(0, 50), mc_samples=200_000)
    assert res.method is Method.MONTE_CARLO_BISECTION
    est, se = m_function_mc(spec, res.theta_star, 200_000, seed=4)
    assert abs(est) <= 4 * se
    assert res.tolerance >= 4 * res.std_error
    assert abs(res.r_star / res.t_star - res.theta_star) <= res.tolerance
    again = solve_theta_star(spec, tol=1e-6, bracket=ThetaBracket(0, 50), mc_samples=200_000)
    assert again == res


def test_goldens_cover_system_c_grid():
    entries = load_goldens()
    assert sorted(e["p"] for e in entries) == [0.0, 0.3, 0.6, 0.9]
    thetas = [golden_theta_star(EnvSpec.system_c(p)).theta_star for p in (0.0, 0.3, 0.6, 0.9)]
    # more projects on offer can only raise the optimum
    assert all(a < b for a, b in zip(thetas, thetas[1:]))
    for e in entries:
        assert e["mc_samples"] == 10_000_000
        assert e["std_error"] < 0.02
    assert golden_theta_star(EnvSpec.system_a(0.3)) is None
