import numpy as np
import pytest

import permreg as pr
from permreg import DominanceTable, Interval
from permreg.quasirand import (discrepancy, discrepancy_star, eigenvalue_stat,
                               m_subseq_stat, quasirandom_report,
                               quasirandom_via_uniformity, separability_stat,
                               translation_stat, two_subseq_stat)


def brute_translation(sigma, I, J):
    n = sigma.n
    imgs = set(int(sigma(i)) for i in I.indices())
    total = 0.0
    mean = len(I) * len(J) / n
    for k in range(n):
        hit = sum(1 for j in J.indices() if (j + k) % n in imgs)
        total += (hit - mean) ** 2
    return total


def test_discrepancy_star_identity():
    assert discrepancy_star(pr.generate("identity", 8)) == pytest.approx(2.0)


def test_discrepancy_star_matches_definition(rng):
    n = 40
    sigma = pr.Permutation(rng.permutation(n))
    t = DominanceTable(sigma)
    best = 0.0
    for x in range(n + 1):
        for y in range(n + 1):
            best = max(best, abs(t.counts[x, y] - x * y / n))
    assert discrepancy_star(t) == pytest.approx(best)


def test_discrepancy_exact_brute(rng):
    n = 24
    sigma = pr.Permutation(rng.permutation(n))
    t = DominanceTable(sigma)
    best = 0.0
    for x1 in range(n):
        for x2 in range(x1 + 1, n + 1):
            for y1 in range(n):
                for y2 in range(y1 + 1, n + 1):
                    cnt = t.rect(x1, x2, y1, y2)
                    best = max(best, abs(cnt - (x2 - x1) * (y2 - y1) / n))
    lo, hi = discrepancy(t, mode="exact")
    assert lo == pytest.approx(best) and hi == pytest.approx(best)


def test_discrepancy_bounded_mode():
    t = DominanceTable(pr.generate("random", 300, 2))
    lo, hi = discrepancy(t, mode="bounded")
    assert hi == pytest.approx(4 * lo)


def test_separability_identity_small():
    val = separability_stat(pr.generate("random", 256, 0), grid=16)
    assert val < 40  # loose sanity gate for random input


def test_two_subseq_identity():
    sigma = pr.generate("identity", 30)
    size, stat = two_subseq_stat(sigma, Interval(0, 30), Interval(0, 30))
    assert size == 30 and stat == 30 * 29 // 2  # all ascents, no descents


def test_m_subseq_stat_fields():
    sigma = pr.generate("random", 64, 1)
    out = m_subseq_stat(sigma, pr.Pattern.from_values([0, 1, 2]),
                        Interval(0, 64), Interval(0, 64))
    assert set(out) == {"size", "count", "target", "deviation"}
    assert out["size"] == 64


def test_eigenvalue_identity_full():
    # the full image set sums all n-th roots of unity: zero for each k
    mags = eigenvalue_stat(pr.generate("identity", 16), Interval(0, 16), 4)
    assert np.allclose(mags, 0.0, atol=1e-9)


def test_translation_matches_bruteforce(rng):
    n = 16
    sigma = pr.generate("identity", n)
    I = J = Interval(0, 8)
    got = translation_stat(sigma, I, J)
    assert got == pytest.approx(brute_translation(sigma, I, J))
    assert got == pytest.approx(88.0)
    sigma2 = pr.Permutation(rng.permutation(20))
    I2, J2 = Interval(3, 11), Interval(5, 17)
    assert translation_stat(sigma2, I2, J2) == pytest.approx(
        brute_translation(sigma2, I2, J2))


def test_quasirandom_via_uniformity_random():
    ok, worst = quasirandom_via_uniformity(pr.generate("random", 2048, 0), 0.15)
    assert ok, worst


def test_quasirandom_report_smoke():
    rep = quasirandom_report(pr.generate("random", 256, 4))
    js = rep.to_json()
    assert js["n"] == 256
    assert js["d_star"] <= js["d_upper"] + 1e-9
