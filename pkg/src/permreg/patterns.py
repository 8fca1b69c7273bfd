"""Exact pattern counting and the structural algorithms built on uniform
partitions: concentration intervals, universality, scatter, pseudomonotone
extraction, and pair-deletion pattern destruction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import (DominanceTable, IndexSet, Interval, ParameterError,
                   Permutation)
from .density import cdf_L
from .uniformity import UniformPartition, uniform_partition

ENUM_GUARD = 5_000_000
SWEEP_TOL = 1e-9


@dataclass(frozen=True)
class Pattern:
    perm: Permutation

    @property
    def m(self) -> int:
        return self.perm.n

    @staticmethod
    def from_values(values) -> "Pattern":
        return Pattern(Permutation(np.asarray(values, dtype=np.int64)))

    def key(self):
        return tuple(int(v) for v in self.perm.images)


@dataclass
class ConcentrationFamily:
    epsilon: float
    m: int
    per_block: list  # list per block of [lo, hi) interval pairs in [0, 1)
    covered: list    # fraction of the block's images inside its intervals


@dataclass
class DeletionSet:
    pairs: set = field(default_factory=set)  # tuples (i, j), i < j

    def add(self, i: int, j: int):
        if i == j:
            raise ParameterError("deletion pair needs distinct indices")
        self.pairs.add((min(i, j), max(i, j)))

    def __contains__(self, pair):
        i, j = pair
        return (min(i, j), max(i, j)) in self.pairs

    def __len__(self):
        return len(self.pairs)

    def to_json(self):
        return [[i, j] for i, j in sorted(self.pairs)]


def _as_word(sigma: Permutation, restriction: IndexSet | None) -> np.ndarray:
    """Rank-compressed image word of sigma, optionally restricted."""
    if restriction is None:
        return sigma.images.copy()
    vals = sigma.images[restriction.members]
    return np.argsort(np.argsort(vals, kind="stable"), kind="stable").astype(np.int64)


def _count_ascents(arr: np.ndarray) -> int:
    """Pairs i < j with arr[i] < arr[j], by Fenwick tree."""
    r = len(arr)
    tree = [0] * (r + 1)
    total = 0
    for v in arr:
        v = int(v)
        i = v
        while i > 0:
            total += tree[i]
            i -= i & (-i)
        i = v + 1
        while i <= r:
            tree[i] += 1
            i += i & (-i)
    return total


def _count_all_m3(arr: np.ndarray) -> dict:
    """All six size-3 pattern counts in O(r^2) with prefix dominance counts."""
    r = len(arr)
    out = {key: 0 for key in map(tuple, itertools.permutations(range(3)))}
    if r < 3:
        return out
    table = DominanceTable(Permutation(arr), size_cap=max(r, 1 << 14))
    N = table.counts
    for j in range(1, r - 1):
        a = arr[:j]
        b = int(arr[j])
        NL = N[j + 1]
        la = NL[a]          # values below each a_i among positions <= j
        lb = int(NL[b])     # values below b among positions <= j
        asc = a < b
        dsc = ~asc
        # suffix counts over positions > j
        suf_less_a = a - la
        suf_less_b = b - lb
        suf_gt_b = (r - 1 - b) - (j - lb)
        suf_gt_a = (r - 1 - a) - (j - la)
        out[(0, 1, 2)] += int(asc.sum()) * suf_gt_b
        out[(0, 2, 1)] += int((suf_less_b - suf_less_a)[asc].sum())
        out[(1, 2, 0)] += int(suf_less_a[asc].sum())
        out[(2, 1, 0)] += int(dsc.sum()) * suf_less_b
        out[(2, 0, 1)] += int((suf_less_a - suf_less_b)[dsc].sum())
        out[(1, 0, 2)] += int(suf_gt_a[dsc].sum())
    return out


def _rank_rows(vals: np.ndarray) -> np.ndarray:
    order = np.argsort(vals, axis=1, kind="stable")
    ranks = np.empty_like(order)
    rows = np.arange(vals.shape[0])[:, None]
    ranks[rows, order] = np.arange(vals.shape[1])[None, :]
    return ranks


def _enumerate_counts(arr: np.ndarray, m: int) -> dict:
    r = len(arr)
    from math import comb
    if comb(r, m) > ENUM_GUARD:
        raise ParameterError(
            f"C({r},{m}) combinations exceed the exact-count guard; use the estimator")
    combos = np.fromiter(itertools.chain.from_iterable(
        itertools.combinations(range(r), m)), dtype=np.int64)
    combos = combos.reshape(-1, m)
    ranks = _rank_rows(arr[combos])
    radix = m ** np.arange(m - 1, -1, -1)
    ids = ranks @ radix
    hist = np.bincount(ids, minlength=m ** m)
    out = {}
    for tau in itertools.permutations(range(m)):
        out[tau] = int(hist[int(np.dot(tau, radix))])
    return out


def count_all_patterns(sigma: Permutation, m: int, restriction: IndexSet | None = None) -> dict:
    """Exact counts for every pattern of size m, keyed by one-line tuples."""
    if not 1 <= m <= 6:
        raise ParameterError("exact counting supports 1 <= m <= 6")
    arr = _as_word(sigma, restriction)
    r = len(arr)
    from math import comb
    if m == 1:
        return {(0,): r}
    if m > r:
        return {tau: 0 for tau in map(tuple, itertools.permutations(range(m)))}
    if m == 2:
        asc = _count_ascents(arr)
        return {(0, 1): asc, (1, 0): comb(r, 2) - asc}
    if m == 3:
        return _count_all_m3(arr)
    return _enumerate_counts(arr, m)


def count_pattern(sigma: Permutation, tau: Pattern, restriction: IndexSet | None = None) -> int:
    """Lambda^tau: occurrences of tau in sigma (or in the restriction)."""
    m = tau.m
    if m > 6:
        raise ParameterError("exact counting supports m <= 6; use the estimator")
    arr = _as_word(sigma, restriction)
    if m > len(arr):
        return 0
    if m == 1:
        return len(arr)
    if m == 2:
        asc = _count_ascents(arr)
        from math import comb
        return asc if tau.key() == (0, 1) else comb(len(arr), 2) - asc
    return count_all_patterns(sigma, m, restriction)[tau.key()]


def count_pattern_naive(sigma: Permutation, tau: Pattern, restriction: IndexSet | None = None) -> int:
    """Plain nested enumeration; the oracle for the fast engines (small n)."""
    arr = _as_word(sigma, restriction)
    key = tau.key()
    total = 0
    for combo in itertools.combinations(arr.tolist(), tau.m):
        ranks = tuple(sorted(range(len(combo)), key=combo.__getitem__))
        inv = [0] * len(combo)
        for pos, idx in enumerate(ranks):
            inv[idx] = pos
        if tuple(inv) == key:
            total += 1
    return total


def _cdf_sweep(f, eps: float):
    """The alternating accumulation/gap sweep on a block CDF.

    Returns (accumulation intervals, gap intervals): accumulations each pick
    up 5*eps of mass (the last may take less), gaps have length 4*eps.
    """
    acc, gaps = [], []
    start = 0.0
    while start < 1.0 - SWEEP_TOL:
        base = float(f(start))
        idx = np.searchsorted(f.ys, base + 5 * eps - SWEEP_TOL, side="left")
        r = 1.0 if idx >= len(f.xs) else min(float(f.xs[idx]), 1.0)
        r = max(r, start)
        acc.append((start, r))
        if r >= 1.0 - SWEEP_TOL:
            break
        gaps.append((r, min(r + 4 * eps, 1.0)))
        start = r + 4 * eps
    return acc, gaps


def concentration_intervals(sigma_or_table, U: UniformPartition, tau: Pattern,
                            certified_count: int | None = None) -> ConcentrationFamily:
    """Per-block interval families concentrating the block's image mass.

    Runs the sweep on each f_s, shrinks each accumulation interval by eps at
    both ends, and returns the complement components that contain a gap.  When
    certified_count (an exact pattern count below the (eps*n/2km)^m threshold)
    is supplied, the guarantee of at most m-1 intervals of length <= 6*eps
    covering all but 7*m*eps of each block is asserted.
    """
    m = tau.m
    eps = U.epsilon
    if eps > 1 / (2 * m):
        raise ParameterError("need eps <= 1/(2m)")
    table = sigma_or_table if isinstance(sigma_or_table, DominanceTable) else DominanceTable(sigma_or_table)
    n = table.n
    P = U.partition
    per_block, covered = [], []
    certify = (certified_count is not None
               and certified_count < (eps * n / (2 * P.k * m)) ** m)
    for s, block in enumerate(P.blocks):
        acc, gaps = _cdf_sweep(U.family[s], eps)
        # each gap, widened by eps into the flanking accumulation intervals;
        # the eps-shrunk accumulation intervals carry at most 7*eps mass each
        fam = []
        for g_lo, g_hi in gaps:
            lo = max(g_lo - eps, 0.0)
            hi = min(g_hi + eps, 1.0)
            if fam and lo < fam[-1][1] - SWEEP_TOL:
                fam[-1] = (fam[-1][0], max(fam[-1][1], hi))
            else:
                fam.append((lo, hi))
        # image positions on the same grid as the CDF atoms
        x = (table.sigma.images[block.lo:block.hi] + 1) / n
        inside = np.zeros(len(x), dtype=bool)
        for lo, hi in fam:
            inside |= (x >= lo - SWEEP_TOL) & (x < hi + SWEEP_TOL)
        mass = float(inside.mean()) if len(x) else 0.0
        if certify:
            assert len(fam) <= m - 1, f"block {s}: {len(fam)} intervals"
            assert all(hi - lo <= 6 * eps + 1e-9 for lo, hi in fam)
            assert mass >= 1 - 7 * m * eps - 1e-9, f"block {s}: mass {mass}"
        per_block.append(fam)
        covered.append(mass)
    return ConcentrationFamily(eps, m, per_block, covered)


def universality_check(sigma: Permutation, m: int):
    """True iff every pattern of size m occurs; else reports the first
    missing one in lexicographic order."""
    counts = count_all_patterns(sigma, m)
    for tau in map(tuple, itertools.permutations(range(m))):
        if counts[tau] == 0:
            return False, Pattern.from_values(tau)
    return True, None


def scatter_property(sigma_or_table, delta: float, eps: float, gamma: float):
    """Check that no interval I with |I| >= delta*n maps a fraction above
    gamma into any interval J with |J| <= eps*n, on endpoint lattices of step
    ceil(delta*n/4) and ceil(eps*n/4).  Returns (ok, (I, J, ratio))."""
    for name, v in (("delta", delta), ("eps", eps), ("gamma", gamma)):
        if not 0 < v:
            raise ParameterError(f"{name} must be positive")
    table = sigma_or_table if isinstance(sigma_or_table, DominanceTable) else DominanceTable(sigma_or_table)
    n = table.n
    si = max(1, int(np.ceil(delta * n / 4)))
    sj = max(1, int(np.ceil(eps * n / 4)))
    pi = np.unique(np.append(np.arange(0, n, si), n))
    pj = np.unique(np.append(np.arange(0, n, sj), n))
    min_i = int(np.ceil(delta * n))
    max_j = int(np.floor(eps * n))
    ia, ib = np.meshgrid(pi, pi, indexing="ij")
    keep = (ib - ia) >= min_i
    ia, ib = ia[keep], ib[keep]
    ja, jb = np.meshgrid(pj, pj, indexing="ij")
    keep = (jb - ja <= max_j) & (jb > ja)
    ja, jb = ja[keep], jb[keep]
    if len(ia) == 0 or len(ja) == 0:
        return True, None
    N = table.counts
    cnt = (N[ib[:, None], jb[None, :]] - N[ia[:, None], jb[None, :]]
           - N[ib[:, None], ja[None, :]] + N[ia[:, None], ja[None, :]])
    ratios = cnt / (ib - ia).astype(float)[:, None]
    flat = int(np.argmax(ratios))
    gi, gj = divmod(flat, ratios.shape[1])
    worst = (Interval(int(ia[gi]), int(ib[gi])), Interval(int(ja[gj]), int(jb[gj])),
             float(ratios[gi, gj]))
    return worst[2] <= gamma + 1e-12, worst


def longest_monotone_subsequence(seq):
    """Indices of a longest increasing or decreasing subsequence (patience
    sorting with parent links).  Returns (indices, increasing)."""
    inc = _lis_indices(seq)
    dec = _lis_indices([-x for x in seq])
    if len(inc) >= len(dec):
        return inc, True
    return dec, False


def _lis_indices(seq):
    tails = []      # last value index of each pile
    parents = [-1] * len(seq)
    import bisect
    tail_vals = []
    for i, v in enumerate(seq):
        pos = bisect.bisect_left(tail_vals, v)
        parents[i] = tails[pos - 1] if pos > 0 else -1
        if pos == len(tails):
            tails.append(i)
            tail_vals.append(v)
        else:
            tails[pos] = i
            tail_vals[pos] = v
    out = []
    i = tails[-1] if tails else -1
    while i >= 0:
        out.append(i)
        i = parents[i]
    return out[::-1]


def pseudomonotone_subset(sigma: Permutation, tau: Pattern, delta: float):
    """Extract a large index set on which sigma is nearly monotone.

    Pipeline: a fine uniform partition, one concentration interval per block,
    greedy selection of disjoint intervals, a longest monotone run of the
    interval order, and the union of the matching preimage slices.  Returns
    (X, report) where report carries |X| and the achieved imbalance
    delta' = min(ascent, descent pair counts) / C(|X|, 2).
    """
    if delta <= 0:
        raise ParameterError("delta must be positive")
    m = max(tau.m, 2)
    eta = min(1.0, delta ** 2 / (100 * (m - 1) ** 4))
    eps = eta / (14 * m)
    table = DominanceTable(sigma)
    U = uniform_partition(table, eps, m=1)
    fam = concentration_intervals(table, U, tau)
    import bisect
    chosen = []
    los, his = [], []  # endpoints of accepted intervals, kept sorted
    degenerate = False
    for s, intervals in enumerate(fam.per_block):
        if not intervals:
            continue
        best = max(intervals, key=lambda iv: _block_interval_mass(table, U.partition.blocks[s], iv))
        pos = bisect.bisect_left(los, best[0])
        if pos < len(los) and los[pos] < best[1]:
            continue
        if pos > 0 and his[pos - 1] > best[0]:
            continue
        los.insert(pos, best[0])
        his.insert(pos, best[1])
        chosen.append((s, best))
    if not chosen:
        # fall back to the densest single block slice
        degenerate = True
        s = int(np.argmax(fam.covered)) if fam.covered else 0
        chosen = [(s, (0.0, 1.0))]
    mids = [(lo + hi) / 2 for _, (lo, hi) in chosen]
    run, increasing = longest_monotone_subsequence(mids)
    members = []
    n = sigma.n
    for idx in run:
        s, (lo, hi) = chosen[idx]
        block = U.partition.blocks[s]
        p = (sigma.images[block.lo:block.hi] + 1) / n
        hit = (p >= lo - SWEEP_TOL) & (p < hi + SWEEP_TOL)
        members.append(block.indices()[hit])
    X = IndexSet(np.concatenate(members) if members else np.empty(0, dtype=np.int64))
    from math import comb
    if len(X) >= 2:
        counts = count_all_patterns(sigma, 2, restriction=X)
        dprime = min(counts[(0, 1)], counts[(1, 0)]) / comb(len(X), 2)
    else:
        dprime = 0.0
    report = {"size": len(X), "delta_prime": dprime, "blocks_used": len(run),
              "increasing": increasing, "degenerate": degenerate}
    return X, report


def _block_interval_mass(table, block, iv):
    p = (table.sigma.images[block.lo:block.hi] + 1) / table.n
    return int(((p >= iv[0] - SWEEP_TOL) & (p < iv[1] + SWEEP_TOL)).sum())


def destroy_pattern(sigma: Permutation, tau: Pattern, eps: float):
    """Deletion pairs destroying all copies of tau, built from a uniform
    partition and pruned concentration families.

    Rules: (a) pairs touching the exceptional set or an unconcentrated point,
    (b) pairs inside a single block, (c) pairs whose images are within
    12*eps*n.  Returns (DeletionSet, audit) with per-rule pair counts.
    """
    m = tau.m
    if eps >= 1 / (2 * m):
        raise ParameterError("need eps < 1/(2m)")
    table = DominanceTable(sigma)
    n = table.n
    U = uniform_partition(table, eps, m=1)
    fam = concentration_intervals(table, U, tau)
    P = U.partition
    bad = set(int(x) for x in P.exceptional.members)
    for s, block in enumerate(P.blocks):
        L = len(block)
        pruned = [iv for iv in fam.per_block[s]
                  if _block_interval_mass(table, block, iv) >= eps * L]
        p = (sigma.images[block.lo:block.hi] + 1) / n
        inside = np.zeros(L, dtype=bool)
        for lo, hi in pruned:
            inside |= (p >= lo - SWEEP_TOL) & (p < hi + SWEEP_TOL)
        bad.update(int(x) for x in block.indices()[~inside])
    S = DeletionSet()
    for x in bad:
        for y in range(n):
            if y != x:
                S.add(x, y)
    rule_a = len(S)
    for block in P.blocks:
        for i, j in itertools.combinations(range(block.lo, block.hi), 2):
            S.add(i, j)
    rule_b = len(S) - rule_a
    w = int(np.floor(12 * eps * n))
    inv = np.empty(n, dtype=np.int64)
    inv[sigma.images] = np.arange(n)
    before_c = len(S)
    rule_c_raw = 0
    for d in range(1, w + 1):
        rule_c_raw += n - d
        for v in range(n - d):
            S.add(int(inv[v]), int(inv[v + d]))
    audit = {"rule_a": rule_a, "rule_b": rule_b, "rule_c": rule_c_raw,
             "rule_c_new": len(S) - before_c, "total": len(S)}
    return S, audit


def verify_destroyed(sigma: Permutation, tau: Pattern, S: DeletionSet):
    """True iff every occurrence of tau contains some deleted pair; otherwise
    returns a surviving index set."""
    m = tau.m
    if m > 4:
        raise ParameterError("exhaustive verification supports m <= 4")
    n = sigma.n
    from math import comb
    if comb(n, m) > ENUM_GUARD:
        raise ParameterError("instance too large for exhaustive verification")
    key = tau.key()
    imgs = sigma.images
    for combo in itertools.combinations(range(n), m):
        vals = [int(imgs[i]) for i in combo]
        order = sorted(range(m), key=vals.__getitem__)
        ranks = [0] * m
        for pos, idx in enumerate(order):
            ranks[idx] = pos
        if tuple(ranks) != key:
            continue
        if not any((combo[i], combo[j]) in S.pairs
                   for i in range(m) for j in range(i + 1, m)):
            return False, combo
    return True, None
