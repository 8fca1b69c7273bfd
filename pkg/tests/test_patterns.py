import itertools
from math import comb

import numpy as np
import pytest

import permreg as pr
from permreg import DominanceTable, IndexSet
from permreg.density import StepCDF
from permreg.patterns import (DeletionSet, Pattern, _cdf_sweep,
                              concentration_intervals, count_all_patterns,
                              count_pattern, count_pattern_naive,
                              destroy_pattern, longest_monotone_subsequence,
                              pseudomonotone_subset, scatter_property,
                              universality_check, verify_destroyed)
from permreg.uniformity import uniform_partition


def test_pattern_basics():
    tau = Pattern.from_values([2, 0, 1])
    assert tau.m == 3 and tau.key() == (2, 0, 1)
    with pytest.raises(pr.ParseError):
        Pattern.from_values([0, 0, 1])


def test_small_counts():
    s = pr.Permutation(np.array([1, 0, 3, 2]))
    assert count_pattern(s, Pattern.from_values([1, 0])) == 2
    assert count_pattern(s, Pattern.from_values([0, 1])) == 4


def test_counts_identity_reverse():
    n = 30
    ident = pr.generate("identity", n)
    rev = pr.generate("reverse", n)
    assert count_pattern(ident, Pattern.from_values([0, 1])) == comb(n, 2)
    assert count_pattern(ident, Pattern.from_values([0, 1, 2])) == comb(n, 3)
    assert count_pattern(rev, Pattern.from_values([2, 1, 0])) == comb(n, 3)
    assert count_pattern(rev, Pattern.from_values([0, 1])) == 0


def test_engine_matches_naive_exhaustive_s6_s3():
    taus = [Pattern.from_values(list(t)) for t in itertools.permutations(range(3))]
    for word in itertools.permutations(range(6)):
        s = pr.Permutation(np.array(word))
        for tau in taus:
            assert count_pattern(s, tau) == count_pattern_naive(s, tau)


def test_engine_matches_naive_random_m4(rng):
    for _ in range(20):
        s = pr.Permutation(rng.permutation(24))
        tau = Pattern.from_values(list(rng.permutation(4)))
        assert count_pattern(s, tau) == count_pattern_naive(s, tau)


def test_restricted_counts(rng):
    for _ in range(20):
        n = 20
        s = pr.Permutation(rng.permutation(n))
        R = IndexSet(rng.choice(n, size=8, replace=False))
        for m in (2, 3):
            tau = Pattern.from_values(list(rng.permutation(m)))
            assert (count_pattern(s, tau, restriction=R)
                    == count_pattern_naive(s, tau, restriction=R))


def test_count_all_consistency(rng):
    s = pr.Permutation(rng.permutation(18))
    for m in (2, 3, 4):
        counts = count_all_patterns(s, m)
        assert sum(counts.values()) == comb(18, m)
        for key, val in counts.items():
            assert val == count_pattern(s, Pattern.from_values(list(key)))


def test_longest_monotone():
    idx, increasing = longest_monotone_subsequence([3, 1, 4, 2, 5, 9, 2, 6])
    assert increasing and len(idx) >= 4
    idx, increasing = longest_monotone_subsequence(list(range(10)))
    assert increasing and len(idx) == 10
    idx, increasing = longest_monotone_subsequence(list(range(10))[::-1])
    assert not increasing and len(idx) == 10


def test_universality_random(rng):
    s = pr.Permutation(np.random.default_rng(0).permutation(64))
    ok, missing = universality_check(s, 3)
    assert ok, missing


def test_scatter_random():
    s = pr.generate("random", 2048, 5)
    assert scatter_property(s, delta=0.05, eps=0.02, gamma=0.5)[0]


def test_cdf_sweep_identity_shape():
    # step approximation of the uniform CDF; accumulation intervals pick up
    # 5*eps of mass, gaps are 4*eps wide
    n = 1000
    xs = (np.arange(n) + 1) / n
    f = StepCDF(xs, xs)
    acc, gaps = _cdf_sweep(f, 0.05)
    assert len(acc) == 3
    assert len(gaps) == 2
    for lo, hi in gaps:
        assert hi - lo == pytest.approx(0.2, abs=1e-9)


def test_concentration_certified_reverse():
    n, eps = 400, 1 / 12
    s = pr.generate("reverse", n)
    tau = Pattern.from_values([0, 1, 2])
    lam = count_pattern(s, tau)
    assert lam == 0
    U = uniform_partition(s, eps)
    fam = concentration_intervals(s, U, tau, certified_count=lam)
    for blk, mass in zip(fam.per_block, fam.covered):
        assert len(blk) <= 2
        for lo, hi in blk:
            assert hi - lo <= 6 * eps + 1e-9
        assert mass >= 1 - 7 * 3 * eps - 1e-9


def test_pseudomonotone_reverse():
    s = pr.generate("reverse", 500)
    X, rep = pseudomonotone_subset(s, Pattern.from_values([0, 1, 2]), 0.2)
    assert rep["delta_prime"] <= 0.2
    assert rep["size"] == len(X)
    assert rep["size"] >= 2


def test_destroy_and_verify_small(rng):
    for seed in range(3):
        s = pr.generate("random", 40, seed)
        tau = Pattern.from_values([0, 1, 2])
        S, audit = destroy_pattern(s, tau, 0.05)
        ok, wit = verify_destroyed(s, tau, S)
        assert ok, wit
        assert audit["total"] == len(S)


def test_deletion_set_semantics():
    S = DeletionSet()
    S.add(3, 1)
    assert (1, 3) in S and (3, 1) in S and (1, 2) not in S
    assert len(S) == 1
