"""Quasirandomness statistics: discrepancies, separability, subsequence
balance, character sums, translation balance, and the uniformity bridge.

The o(.) statements behind these statistics carry no constants, so the
operations report raw values; thresholds live only in calling code.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .core import DominanceTable, IndexSet, Interval, ParameterError, Permutation
from .density import eps_near, identity_cdf
from .patterns import Pattern, count_all_patterns, count_pattern
from .uniformity import uniform_partition

EXACT_D_CAP = 512


def _table(sigma_or_table) -> DominanceTable:
    if isinstance(sigma_or_table, DominanceTable):
        return sigma_or_table
    return DominanceTable(sigma_or_table)


def discrepancy_star(sigma_or_table) -> float:
    """max over initial intervals [0,x), [0,y) of |N(x,y) - xy/n|."""
    t = _table(sigma_or_table)
    n = t.n
    y = np.arange(n + 1, dtype=np.float64)
    best = 0.0
    step = max(1, (1 << 22) // (n + 1))
    for lo in range(0, n + 1, step):
        hi = min(lo + step, n + 1)
        x = np.arange(lo, hi, dtype=np.float64)[:, None]
        dev = np.abs(t.counts[lo:hi].astype(np.float64) - x * y[None, :] / n)
        best = max(best, float(dev.max()))
    return best


def discrepancy(sigma_or_table, mode: str = "bounded"):
    """Interval discrepancy D as (lower, upper).

    exact (n <= 512): for each index pair x1 < x2 the best image interval is
    the max-minus-min of the centered column profile, an O(n^3) scan.
    bounded: [D*, 4 D*] from splitting any rectangle into initial rectangles.
    """
    t = _table(sigma_or_table)
    n = t.n
    if mode == "bounded":
        d = discrepancy_star(t)
        return d, 4 * d
    if mode != "exact":
        raise ParameterError(f"unknown mode {mode!r}")
    if n > EXACT_D_CAP:
        raise ParameterError(f"exact discrepancy is limited to n <= {EXACT_D_CAP}")
    N = t.counts.astype(np.float64)
    y = np.arange(n + 1, dtype=np.float64)
    best = 0.0
    for x1 in range(n):
        lengths = np.arange(1, n - x1 + 1, dtype=np.float64)[:, None]
        g = N[x1 + 1:] - N[x1] - lengths * y[None, :] / n
        best = max(best, float((g.max(axis=1) - g.min(axis=1)).max()))
    return best, best


def separability_stat(sigma_or_table, grid: int = 32) -> float:
    """max over grid-aligned interval pairs (A, B) of
    |#(A x B incidences) - |A||B|/n|; A plays I cap K, B plays J cap K'."""
    if grid < 1:
        raise ParameterError("grid step must be >= 1")
    t = _table(sigma_or_table)
    n = t.n
    pts = np.unique(np.append(np.arange(0, n, grid), n))
    N = t.counts
    a1, a2 = np.meshgrid(pts, pts, indexing="ij")
    keep = a2 > a1
    a1, a2 = a1[keep], a2[keep]
    best = 0.0
    for lo, hi in zip(a1, a2):
        row = (N[hi] - N[lo]).astype(np.float64)
        cnt = row[pts[None, :]] - row[pts[:, None]]
        area = (hi - lo) * (pts[None, :] - pts[:, None]) / n
        best = max(best, float(np.abs(cnt - area).max()))
    return best


def _restriction(sigma: Permutation, I: Interval, J: Interval) -> IndexSet:
    idx = I.indices()
    imgs = sigma.images[idx]
    return IndexSet(idx[(imgs >= J.lo) & (imgs < J.hi)])


def two_subseq_stat(sigma: Permutation, I: Interval, J: Interval):
    """(|I cap sigma^{-1}(J)|, ascent count minus descent count there)."""
    R = _restriction(sigma, I, J)
    if len(R) < 2:
        return len(R), 0
    counts = count_all_patterns(sigma, 2, restriction=R)
    return len(R), counts[(0, 1)] - counts[(1, 0)]


def m_subseq_stat(sigma: Permutation, tau: Pattern, I: Interval, J: Interval):
    """Deviation of the restricted pattern count from C(size, m)/m!."""
    if tau.m > 4:
        raise ParameterError("exact m-subsequence statistic supports m <= 4")
    R = _restriction(sigma, I, J)
    lam = count_pattern(sigma, tau, restriction=R) if len(R) >= tau.m else 0
    from math import factorial
    target = comb(len(R), tau.m) / factorial(tau.m)
    return {"size": len(R), "count": lam, "target": target,
            "deviation": abs(lam - target)}


def eigenvalue_stat(sigma: Permutation, I: Interval, k_max: int):
    """Magnitudes |sum_{s in sigma(I)} e(-k s / n)| for k = 1..k_max."""
    n = sigma.n
    if not 1 <= k_max < n:
        raise ParameterError("need 1 <= k_max < n")
    s = np.mod(sigma.images[I.indices()], n)
    ks = np.arange(1, k_max + 1)
    phases = np.exp(-2j * np.pi * ks[:, None] * s[None, :] / n)
    return np.abs(phases.sum(axis=1))


def translation_stat(sigma_or_table, I: Interval, J: Interval) -> float:
    """sum_k (|sigma(I) cap (J + k)| - |I||J|/n)^2 with cyclic shifts."""
    t = _table(sigma_or_table)
    n = t.n
    chi = np.zeros(n, dtype=np.int64)
    chi[t.sigma.images[I.indices()]] = 1
    lj = len(J)
    if lj == 0 or len(I) == 0:
        return 0.0
    # circular correlation via cumulative sums over a doubled indicator
    window = np.concatenate([chi, chi])
    cs = np.concatenate([[0], np.cumsum(window)])
    starts = (J.lo + np.arange(n)) % n
    overlaps = cs[starts + lj] - cs[starts]
    mean = len(I) * lj / n
    return float(((overlaps - mean) ** 2).sum())


def quasirandom_via_uniformity(sigma_or_table, eps: float, m: int = 2):
    """Build a uniform partition and test each family CDF 2*eps-near the
    identity.  Returns (ok, worst) with worst = (block, alpha, gap)."""
    if not 0 < eps < 0.5:
        raise ParameterError("eps must satisfy 0 < eps < 1/2")
    t = _table(sigma_or_table)
    U = uniform_partition(t, eps, m=m)
    ref = identity_cdf()
    ok_all = True
    worst = None
    for s, f in enumerate(U.family):
        ok, alpha, gap = eps_near(f, ref, 2 * eps)
        if worst is None or gap > worst[2]:
            worst = (s, alpha, gap)
        ok_all = ok_all and ok
    return ok_all, worst


@dataclass
class QuasirandomReport:
    n: int
    d_star: float
    d_lower: float
    d_upper: float
    sp_stat: float
    two_s_size: int
    two_s_stat: int
    m_s: dict
    translation: float
    eigenvalue_profile: list
    near_id: bool
    near_id_worst: tuple

    def to_json(self):
        return {
            "n": self.n,
            "d_star": self.d_star,
            "d_lower": self.d_lower,
            "d_upper": self.d_upper,
            "sp_stat": self.sp_stat,
            "two_s": {"size": self.two_s_size, "stat": self.two_s_stat},
            "m_s": self.m_s,
            "translation": self.translation,
            "eigenvalue_profile": list(map(float, self.eigenvalue_profile)),
            "near_id": self.near_id,
            "near_id_worst": {"block": self.near_id_worst[0],
                              "alpha": self.near_id_worst[1],
                              "gap": self.near_id_worst[2]},
        }


def quasirandom_report(sigma: Permutation, eps: float = 0.15,
                       grid: int | None = None, k_max: int = 8) -> QuasirandomReport:
    t = DominanceTable(sigma)
    n = sigma.n
    full = Interval(0, n)
    half = Interval(0, n // 2) if n >= 2 else full
    d_star = discrepancy_star(t)
    if n <= 128:
        d_lo, d_hi = discrepancy(t, mode="exact")
    else:
        d_lo, d_hi = discrepancy(t, mode="bounded")
    grid = grid or max(1, n // 32)
    size2, stat2 = two_subseq_stat(sigma, full, full)
    tau3 = Pattern.from_values([0, 1, 2])
    ms = m_subseq_stat(sigma, tau3, full, full) if n <= 2048 else \
        {"size": n, "count": None, "target": None, "deviation": None}
    near, worst = quasirandom_via_uniformity(t, eps)
    return QuasirandomReport(
        n=n,
        d_star=d_star,
        d_lower=d_lo,
        d_upper=d_hi,
        sp_stat=separability_stat(t, grid),
        two_s_size=size2,
        two_s_stat=stat2,
        m_s=ms,
        translation=translation_stat(t, half, half),
        eigenvalue_profile=eigenvalue_stat(sigma, full, min(k_max, n - 1)),
        near_id=near,
        near_id_worst=worst,
    )
