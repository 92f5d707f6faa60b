import math

import numpy as np
import pytest

from renewal_lab.decisions import CurveSet, Decision, FiniteSet
from renewal_lab.environments import (
    EnvSpec,
    Environment,
    MomentConstants,
    System,
    UniformBlocks,
    UnsupportedSystemError,
    frames_from_uniforms,
    moments,
    parse_system,
    stationary_expectation,
)

N_DRAWS = 100_000


def first_frame_of_type(spec, wanted, limit=10_000):
    env = Environment(spec)
    for _ in range(limit):
        s, dset = env.next_frame()
        if s == wanted:
            return dset
    raise AssertionError(f"no frame of type {wanted}")


def test_system_a_red_frame():
    assert first_frame_of_type(EnvSpec.system_a(0.25, seed=1), 0) == FiniteSet.of((1, 3))
    assert frames_from_uniforms(EnvSpec.system_a(0.25), np.array([[0.9]])).row(0) == FiniteSet.of((1, 3))


def test_system_a_green_frame():
    assert first_frame_of_type(EnvSpec.system_a(0.25, seed=1), 1) == FiniteSet.of((2, 3), (1, 1))


def test_system_b_frames():
    assert first_frame_of_type(EnvSpec.system_b(0.7, seed=2), 1) == CurveSet(1.0, 2.0)
    assert first_frame_of_type(EnvSpec.system_b(0.7, seed=2), 0) == FiniteSet.of((1, 1))


def test_system_c_frames():
    spec = EnvSpec.system_c(0.6)
    assert first_frame_of_type(spec, 0) == FiniteSet.of((1, 0))
    # N=2 with hand-picked uniforms: u0 in [0.1+0.3, 0.1+0.3+0.3)
    u = np.array([[0.5, 0.0, 1.0 / 9.0, 0.5, 0.2, 0.4, 0.9]])
    dset = frames_from_uniforms(spec, u).row(0)
    assert dset.options[0] == Decision(1, 0)
    assert len(dset.options) == 3
    assert dset.options[1] == Decision(1.0, 10.0)
    assert dset.options[2].t == pytest.approx(2.0)
    assert dset.options[2].r == pytest.approx(40.0)
    # at least one of each count appears
    assert first_frame_of_type(spec, 3).options[0] == Decision(1, 0)


def test_moments():
    assert moments(EnvSpec.system_a(0.3)) == MomentConstants(1, 2, 1, 3, 4, 9)
    assert moments(EnvSpec.system_b(0.3)) == MomentConstants(1, 2, 1, 2, 4, 4)
    assert moments(EnvSpec.system_c(0.3)) == MomentConstants(1, 10, 0, 500, 100, 250000)
    assert Environment(EnvSpec.system_a(0.3)).moments().t_max == 2
    with pytest.raises(ValueError):
        MomentConstants(0, 1, 0, 1, 1, 1)
    with pytest.raises(ValueError):
        MomentConstants(1, 2, 3, 1, 1, 1)


def test_spec_validation():
    with pytest.raises(ValueError):
        EnvSpec.system_a(1.1)
    with pytest.raises(ValueError):
        EnvSpec.system_c(0.95)
    with pytest.raises(ValueError):
        EnvSpec.system_b(float("nan"))
    assert EnvSpec.system_b(1.0).param == 1.0
    assert parse_system("systemB") is System.B
    with pytest.raises(ValueError):
        parse_system("systemD")


def test_stationary_expectation_examples():
    assert stationary_expectation(EnvSpec.system_a(0.25), False) == (1.0, 2.5)
    for p in (0.1, 0.6, 1.0):
        assert stationary_expectation(EnvSpec.system_a(p), True) == pytest.approx((1 + p, 3))
    q, x = 0.7, 1.3
    assert stationary_expectation(EnvSpec.system_b(q), x) == pytest.approx((1 - q + q * x, 1 + q - q * (2 - x) ** 2))
    with pytest.raises(UnsupportedSystemError):
        stationary_expectation(EnvSpec.system_c(0.3), 0)


def test_seed_determinism():
    for spec in (EnvSpec.system_a(0.4, 5), EnvSpec.system_b(0.5, 5), EnvSpec.system_c(0.5, 5)):
        a, b = Environment(spec), Environment(spec)
        assert all(a.next_frame() == b.next_frame() for _ in range(200))
        assert Environment(spec, path=1).next_frame() != Environment(spec, path=2).next_frame() or spec.system is not System.C


@pytest.mark.parametrize("spec", [EnvSpec.system_a(0.4, 8), EnvSpec.system_b(0.5, 8), EnvSpec.system_c(0.5, 8)])
def test_block_draws_match_per_frame_draws(spec):
    env = Environment(spec, path=3)
    block = UniformBlocks(spec, 3)
    fb = frames_from_uniforms(spec, np.concatenate([block.take(7), block.take(13)]))
    for i in range(20):
        s, dset = env.next_frame()
        assert (s, dset) == (int(fb.task_type[i]), fb.row(i))


def draws(spec, n=N_DRAWS):
    return frames_from_uniforms(spec, UniformBlocks(spec, 0).take(n))


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_system_a_type_frequency(p):
    x = draws(EnvSpec.system_a(p, 11)).task_type
    assert abs(x.mean() - p) <= 4 * math.sqrt(p * (1 - p) / len(x))


@pytest.mark.parametrize("p", [0.0, 0.3, 0.9])
def test_system_c_distributions(p):
    fb = draws(EnvSpec.system_c(p, 12))
    probs = [0.1, 0.9 - p, p / 2, p / 2]
    for n, pr in enumerate(probs):
        freq = (fb.task_type == n).mean()
        assert abs(freq - pr) <= 4 * math.sqrt(pr * (1 - pr) / N_DRAWS) + 1e-12
    T = fb.t[:, 1:].ravel()
    A = (fb.r[:, 1:] / fb.t[:, 1:]).ravel()
    assert abs(T.mean() - 5.5) <= 4 * 9 / math.sqrt(12 * len(T))
    assert abs(A.mean() - 25.0) <= 4 * 50 / math.sqrt(12 * len(A))


def in_w(t, r, q, tol=1e-12):
    return 1 - tol <= t <= 1 + q + tol and t - tol <= r <= (2 * t - 1) - (t - 1) ** 2 / q + tol


def test_system_b_expectations_lie_in_w():
    q = 0.7
    spec = EnvSpec.system_b(q)
    rng = np.random.default_rng(2024)
    for _ in range(200):
        m = rng.integers(1, 5)
        w = rng.dirichlet(np.ones(m))
        w[-1] = 1.0 - w[:-1].sum()
        xs = rng.uniform(1, 2, m)
        assert in_w(*stationary_expectation(spec, list(zip(w, xs))), q)
    # extreme points
    assert in_w(*stationary_expectation(spec, 1.0), q)
    assert in_w(*stationary_expectation(spec, 2.0), q)


@pytest.mark.parametrize("spec", [EnvSpec.system_a(0.5, 13), EnvSpec.system_b(0.5, 13), EnvSpec.system_c(0.45, 13)])
def test_moment_soundness(spec):
    fb = draws(spec)
    m = moments(spec)
    rng = np.random.default_rng(7)
    # an arbitrary (random) decision per frame
    score = np.where(fb.valid, rng.random(fb.valid.shape), -1.0)
    j = score.argmax(axis=1)
    rows = np.arange(fb.t.shape[0])
    t, r = fb.t[rows, j], fb.r[rows, j]
    if fb.curve is not None:
        x = rng.uniform(1, 2, len(t))
        t = np.where(fb.curve, x, t)
        r = np.where(fb.curve, 2 - (2 - x) ** 2, r)
    assert m.t_min <= t.min() and t.max() <= m.t_max
    assert m.r_min <= r.min() and r.max() <= m.r_max
    assert (t * t).mean() <= m.c1
    assert (r * r).mean() <= m.c2
