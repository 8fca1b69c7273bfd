import numpy as np
import pytest

import permreg as pr
from permreg import DominanceTable, IndexSet, Interval
from permreg.density import (StepCDF, cdf_L, convolve_smooth, density,
                             eps_near, identity_cdf, lipschitz_modulus,
                             pair_count)


def brute_pairs(sigma, S, T):
    s_idx = S.indices() if isinstance(S, Interval) else S.members
    t_idx = T.indices() if isinstance(T, Interval) else T.members
    return sum(1 for s in s_idx for t in t_idx if sigma(s) < t)


def test_pair_count_examples():
    t4 = DominanceTable(pr.generate("identity", 4))
    assert pair_count(t4, Interval(0, 4), Interval(0, 4)) == 6
    r4 = DominanceTable(pr.generate("reverse", 4))
    assert pair_count(r4, Interval(0, 2), Interval(0, 2)) == 0
    assert density(r4, Interval(0, 4), Interval(0, 4)) == pytest.approx(0.375)


def test_pair_count_oracle(rng):
    for _ in range(30):
        n = int(rng.integers(4, 48))
        sigma = pr.Permutation(rng.permutation(n))
        t = DominanceTable(sigma)
        a, b = sorted(rng.integers(0, n + 1, 2))
        c, d = sorted(rng.integers(0, n + 1, 2))
        S, T = Interval(a, b), Interval(c, d)
        assert pair_count(t, S, T) == brute_pairs(sigma, S, T)
        R = IndexSet(rng.choice(n, size=min(n, 7), replace=False))
        assert pair_count(t, R, T) == brute_pairs(sigma, R, T)


def test_full_T_invariance(rng):
    n = 24
    for _ in range(5):
        sigma = pr.Permutation(rng.permutation(n))
        t = DominanceTable(sigma)
        assert pair_count(t, Interval(0, n), Interval(0, n)) == n * (n - 1) // 2


def test_stepcdf_eval():
    f = StepCDF(np.array([0.25, 0.75]), np.array([0.5, 1.0]))
    assert float(f(0.1)) == 0.0
    assert float(f(0.25)) == 0.5
    assert float(f(0.5)) == 0.5
    assert float(f(2.0)) == 1.0  # clamped
    g = identity_cdf()
    assert float(g(0.3)) == pytest.approx(0.3)
    assert float(g(-1.0)) == 0.0


def test_cdf_L_examples():
    t = DominanceTable(pr.generate("identity", 10))
    f = cdf_L(t, Interval(0, 10))
    assert float(f(0.3)) == pytest.approx(0.3)
    assert float(f(1.0)) == pytest.approx(1.0)
    r = DominanceTable(pr.generate("reverse", 4))
    g = cdf_L(r, Interval(0, 2))  # images {3, 2}
    assert float(g(0.5)) == 0.0


def test_eps_near_reflexive_and_shift():
    f = identity_cdf()
    ok, _, gap = eps_near(f, f, 0.0)
    assert ok and gap <= 0
    xs = np.linspace(0.05, 1.0, 20)
    shifted = StepCDF(xs, np.clip(xs - 0.05, 0, 1), interp="linear")
    assert eps_near(f, shifted, 0.05)[0]
    assert not eps_near(f, shifted, 0.01)[0]


def test_eps_near_symmetry(rng):
    for _ in range(100):
        k = int(rng.integers(1, 8))
        xs1 = np.sort(rng.choice(np.arange(1, 100), k, replace=False)) / 100
        xs2 = np.sort(rng.choice(np.arange(1, 100), k, replace=False)) / 100
        w = rng.random(k)
        f = StepCDF(xs1, np.cumsum(w) / w.sum())
        g = StepCDF(xs2, np.cumsum(w) / w.sum())
        eps = float(rng.choice([0.02, 0.1, 0.3]))
        assert eps_near(f, g, eps)[0] == eps_near(g, f, eps)[0]


def test_lipschitz_modulus():
    assert lipschitz_modulus(identity_cdf(), 0.3) == pytest.approx(1.0)
    step = StepCDF(np.array([0.5]), np.array([1.0]))
    assert lipschitz_modulus(step, 0.1) == pytest.approx(10.0)


def test_lipschitz_modulus_is_tight(rng):
    grid = np.linspace(0, 1, 2001)
    for _ in range(10):
        k = int(rng.integers(2, 9))
        xs = np.sort(rng.choice(np.arange(1, 200), k, replace=False)) / 200
        w = rng.random(k)
        f = StepCDF(xs, np.cumsum(w) / w.sum())
        eps = 0.05
        B = lipschitz_modulus(f, eps)
        dense = np.asarray(f(grid + eps)) - np.asarray(f(grid))
        assert dense.max() <= B * eps + 1e-9
        assert dense.max() >= (B - 1e-6) * eps - 1e-9


def test_convolve_identity_closed_form():
    # fine step approximation of f(x)=x: the smoothed curve is t - delta/2
    # away from the ends, up to the 1/n staircase resolution
    n = 2000
    xs = (np.arange(n) + 1) / n
    f = StepCDF(xs, xs)
    g = convolve_smooth(f, 0.1)
    for t in (0.1, 0.3, 0.7, 1.0):
        assert float(g(t)) == pytest.approx(t - 0.05, abs=1e-3)
    assert float(g(0.0)) == pytest.approx(0.0, abs=1e-3)


def test_convolve_step_is_ramp():
    f = StepCDF(np.array([1e-12]), np.array([1.0]))  # unit mass at ~0
    g = convolve_smooth(f, 0.2)
    assert float(g(0.1)) == pytest.approx(0.5, abs=1e-6)
    assert float(g(0.2)) == pytest.approx(1.0, abs=1e-6)


def test_convolve_vs_quadrature(rng):
    for _ in range(5):
        k = int(rng.integers(2, 8))
        xs = np.sort(rng.choice(np.arange(1, 100), k, replace=False)) / 100
        w = rng.random(k)
        f = StepCDF(xs, np.cumsum(w) / w.sum())
        delta = float(rng.choice([0.05, 0.15]))
        g = convolve_smooth(f, delta)
        for t in rng.random(8) * (1 + delta):
            s = np.linspace(t - delta, t, 4001)
            want = float(np.trapezoid(np.asarray(f(s)), s) / delta)
            assert float(g(t)) == pytest.approx(want, abs=2e-4)
