import numpy as np
import pytest

import permreg as pr
from permreg import (DominanceTable, Interval, IndexSet, ParameterError,
                     ParseError, Permutation, ResourceLimitError)


def test_parse_roundtrip():
    s = pr.parse_permutation("2 0 1\n")
    assert s.n == 3 and list(s.images) == [2, 0, 1]
    assert pr.format_permutation(s) == "2 0 1\n"


def test_parse_rejects_garbage():
    with pytest.raises(ParseError):
        pr.parse_permutation("")
    with pytest.raises(ParseError):
        pr.parse_permutation("0 x 2")
    with pytest.raises(ParseError):
        pr.parse_permutation("0 0 1")
    with pytest.raises(ParseError):
        pr.parse_permutation("0 3 1")


def test_generators():
    assert list(pr.generate("identity", 4).images) == [0, 1, 2, 3]
    assert list(pr.generate("reverse", 5).images) == [4, 3, 2, 1, 0]
    assert list(pr.generate("interleave", 6).images) == [1, 0, 3, 2, 5, 4]
    with pytest.raises(ParameterError):
        pr.generate("interleave", 5)
    a = pr.generate("random", 50, 7)
    b = pr.generate("random", 50, 7)
    assert a == b
    assert a != pr.generate("random", 50, 8)


def test_interval_and_indexset():
    iv = Interval(2, 5)
    assert len(iv) == 3 and list(iv.indices()) == [2, 3, 4]
    assert Interval(0, 6).contains(iv)
    with pytest.raises(ParameterError):
        Interval(4, 2)
    s = IndexSet(np.array([3, 1, 3]))
    assert len(s) == 2 and list(s.members) == [1, 3]


def test_dominance_matches_bruteforce(rng):
    for _ in range(10):
        n = int(rng.integers(2, 40))
        sigma = Permutation(rng.permutation(n))
        t = DominanceTable(sigma)
        for _ in range(20):
            x = int(rng.integers(0, n + 1))
            y = int(rng.integers(0, n + 1))
            want = sum(1 for s in range(x) if sigma(s) < y)
            assert t.counts[x, y] == want


def test_rect_counts(rng):
    n = 32
    sigma = Permutation(rng.permutation(n))
    t = DominanceTable(sigma)
    for _ in range(50):
        x1, x2 = sorted(rng.integers(0, n + 1, 2))
        y1, y2 = sorted(rng.integers(0, n + 1, 2))
        want = sum(1 for s in range(x1, x2) if y1 <= sigma(s) < y2)
        assert t.rect(x1, x2, y1, y2) == want


def test_size_cap():
    sigma = pr.generate("identity", 64)
    with pytest.raises(ResourceLimitError) as exc:
        DominanceTable(sigma, size_cap=32)
    assert exc.value.required_bytes > 0
