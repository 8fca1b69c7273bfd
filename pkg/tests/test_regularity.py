import numpy as np
import pytest

import permreg as pr
from permreg import DominanceTable, IndexSet, Interval
from permreg.regularity import (EquitablePartition, RefinePolicy,
                                equitable_partition, exploit_irregular,
                                index_q, is_regular_pair,
                                is_regular_partition, pair_index_q,
                                refine_step, regular_partition)


def test_equitable_partition_shape():
    t = DominanceTable(pr.generate("identity", 10))
    P = equitable_partition(t, 3)
    assert P.k == 3 and P.block_length == 3 and len(P.exceptional) == 1
    total = sum(len(b) for b in P.blocks) + len(P.exceptional)
    assert total == 10


def test_index_q_all_singletons(rng):
    for n in (8, 33):
        sigma = pr.Permutation(rng.permutation(n))
        t = DominanceTable(sigma)
        P = EquitablePartition(n, (), IndexSet(np.arange(n)))
        assert index_q(t, P) == pytest.approx((n - 1) / (2 * n))


def test_index_q_matches_direct(rng):
    for _ in range(20):
        n = int(rng.integers(8, 64))
        sigma = pr.Permutation(rng.permutation(n))
        t = DominanceTable(sigma)
        k = int(rng.integers(1, 5))
        P = equitable_partition(t, k)
        direct = 0.0
        parts = list(P.blocks) + [Interval(int(i), int(i) + 1)
                                  for i in P.exceptional.members]
        for X in parts:
            for Y in parts:
                p = pr.density(t, X, Y)
                direct += len(X) * len(Y) * p * p
        assert index_q(t, P) == pytest.approx(direct / n ** 2, abs=1e-12)


def test_index_q_bounded(rng):
    for _ in range(10):
        n = int(rng.integers(8, 128))
        sigma = pr.Permutation(rng.permutation(n))
        t = DominanceTable(sigma)
        P = equitable_partition(t, int(rng.integers(1, 9)))
        assert 0.0 <= index_q(t, P) <= 1.0 + 1e-12


def test_identity_diagonal_irregular():
    t = DominanceTable(pr.generate("identity", 64))
    C = D = Interval(0, 64)
    ok, wi, wj, gap = is_regular_pair(t, C, D, 0.1)
    assert not ok and gap > 0.1


def test_identity_offdiagonal_regular():
    t = DominanceTable(pr.generate("identity", 64))
    ok, _, _, gap = is_regular_pair(t, Interval(0, 16), Interval(48, 64), 0.2)
    assert ok and gap <= 0.2


def test_exploit_gain():
    t = DominanceTable(pr.generate("identity", 64))
    C = D = Interval(0, 64)
    ok, wi, wj, gap = is_regular_pair(t, C, D, 0.1)
    assert not ok
    cs, ds = exploit_irregular(t, C, D, wi, wj, 0.1)
    gain = pair_index_q(t, cs, ds) - pair_index_q(t, [C], [D])
    assert gain >= 0.1 ** 4 * len(C) * len(D) / 64 ** 2 - 1e-12


def test_refine_step_monotone(rng):
    sigma = pr.Permutation(rng.permutation(256))
    t = DominanceTable(sigma)
    P = equitable_partition(t, 2)
    rep = is_regular_partition(t, P, 0.05)
    if not rep.regular:
        P2 = refine_step(t, P, 0.05, report=rep)
        assert index_q(t, P2) >= index_q(t, P) - 1e-12


def test_driver_smoke():
    sigma = pr.generate("random", 1024, 0)
    P, rep, trace = regular_partition(sigma, 0.25, m=4)
    qs = [step["q"] for step in trace]
    assert all(b >= a - 1e-12 for a, b in zip(qs, qs[1:]))
    assert rep.to_json()["epsilon"] == 0.25


def test_driver_rejects_bad_eps():
    with pytest.raises(pr.ParameterError):
        regular_partition(pr.generate("identity", 16), 0.3)
