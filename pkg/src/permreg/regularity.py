"""Regular partitions: the index q, pair tests, irregularity exploitation,
refinement, and the iterated driver.

A partition is k equal-length interval blocks C_1..C_k plus an exceptional
index set C_0.  For the index q the exceptional set is treated as singletons.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ContractError, DominanceTable, IndexSet, Interval, ParameterError
from .density import density, pair_count

Q_TOL = 1e-12

# auto mode switches to the endpoint lattice when the number of qualifying
# subinterval pairs exceeds this
EXHAUSTIVE_PAIR_BUDGET = 1 << 22


@dataclass(frozen=True)
class EquitablePartition:
    n: int
    blocks: tuple
    exceptional: IndexSet

    def __post_init__(self):
        lens = {len(b) for b in self.blocks}
        if len(lens) > 1:
            raise ContractError("blocks must have equal length")
        covered = sum(len(b) for b in self.blocks) + len(self.exceptional)
        if covered != self.n:
            raise ContractError("partition must cover the ground set exactly")

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def block_length(self) -> int:
        return len(self.blocks[0]) if self.blocks else 0


@dataclass
class RegularityReport:
    epsilon: float
    k: int
    block_length: int
    exceptional_size: int
    q_value: float
    irregular_pairs: list  # (s, t, Interval I, Interval J, gap)
    iterations: list = field(default_factory=list)

    @property
    def regular(self) -> bool:
        n = self.k * self.block_length + self.exceptional_size
        return (len(self.irregular_pairs) <= self.epsilon * self.k ** 2
                and self.exceptional_size <= self.epsilon * n)

    def to_json(self):
        return {
            "epsilon": self.epsilon,
            "k": self.k,
            "block_length": self.block_length,
            "exceptional_size": self.exceptional_size,
            "q": self.q_value,
            "regular": self.regular,
            "irregular_pairs": [
                {"s": s, "t": t, "I": [I.lo, I.hi], "J": [J.lo, J.hi], "gap": gap}
                for s, t, I, J, gap in self.irregular_pairs
            ],
            "iterations": self.iterations,
        }


@dataclass
class RefinePolicy:
    """Desk-scale stand-in for the proof's tower-type constants."""

    rechunk_divisor: int = 81
    min_block: int = 8
    max_parts: int = 4096


class RefinementExhausted(ContractError):
    pass


def equitable_partition(sigma_or_table, k: int) -> EquitablePartition:
    n = sigma_or_table.n
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}")
    length = n // k
    blocks = tuple(Interval(i * length, (i + 1) * length) for i in range(k))
    exc = IndexSet(np.arange(k * length, n))
    return EquitablePartition(n, blocks, exc)


def index_q(table: DominanceTable, partition, exceptional: IndexSet | None = None) -> float:
    """q(P) = sum over ordered part pairs of |X||Y| d^2(X,Y) / n^2, with the
    exceptional set split into singletons.  Accepts an EquitablePartition or a
    plain sequence of interval blocks."""
    if isinstance(partition, EquitablePartition):
        blocks, exc = list(partition.blocks), partition.exceptional
    else:
        blocks, exc = list(partition), exceptional or IndexSet()
    blocks = [b for b in blocks if len(b)]
    n = table.n
    N = table.counts
    P = table.prefix
    c0 = exc.members
    total = 0.0

    if blocks:
        lo = np.array([b.lo for b in blocks])
        hi = np.array([b.hi for b in blocks])
        ln = (hi - lo).astype(float)
        # block x block
        p = (P[hi[:, None], hi[None, :]] - P[hi[:, None], lo[None, :]]
             - P[lo[:, None], hi[None, :]] + P[lo[:, None], lo[None, :]]).astype(float)
        total += float((p * p / (ln[:, None] * ln[None, :])).sum())
        if len(c0):
            # block x singleton {y}: p = N[hi, y] - N[lo, y]
            pby = (N[hi[:, None], c0[None, :]] - N[lo[:, None], c0[None, :]]).astype(float)
            total += float((pby * pby / ln[:, None]).sum())
            # singleton {x} x block: p = max(0, hi - max(lo, sigma(x)+1))
            sx = table.sigma.images[c0]
            pxb = np.maximum(0, hi[None, :] - np.maximum(lo[None, :], sx[:, None] + 1)).astype(float)
            total += float((pxb * pxb / ln[None, :]).sum())
    if len(c0):
        sx = table.sigma.images[c0]
        # singleton x singleton: p in {0,1}, so p^2/(1*1) = p
        total += float((sx[:, None] < c0[None, :]).sum())
    return total / (n * n)


def pair_index_q(table: DominanceTable, Xs, Ys) -> float:
    """q({X_i}, {Y_j}) = sum_ij |X_i||Y_j| d^2(X_i, Y_j) / n^2."""
    n = table.n
    total = 0.0
    for X in Xs:
        for Y in Ys:
            if len(X) == 0 or len(Y) == 0:
                continue
            p = pair_count(table, X, Y)
            total += p * p / (len(X) * len(Y))
    return total / (n * n)


def _lattice(lo: int, hi: int, step: int) -> np.ndarray:
    pts = np.arange(lo, hi, step)
    return np.unique(np.append(pts, hi))


def _interval_pairs(points: np.ndarray, min_len: int):
    """All (lo, hi) with hi - lo >= min_len from a sorted endpoint set."""
    a, b = np.meshgrid(points, points, indexing="ij")
    mask = (b - a) >= min_len
    return a[mask], b[mask]


def is_regular_pair(table: DominanceTable, C: Interval, D: Interval, eps: float,
                    mode: str = "auto"):
    """Check |d(I,J) - d(C,D)| <= eps over subintervals |I| >= eps|C|,
    |J| >= eps|D|.

    exhaustive: every qualifying subinterval pair.  grid: endpoints on a
    lattice of step ceil(eps*len/4); a grid pass implies an exhaustive pass
    only at a larger tolerance (validated empirically at ~3 eps/2).  Returns
    (regular, witness_I, witness_J, gap); the witness maximizes the gap, ties
    to the smallest (I.lo, J.lo).
    """
    if not (0 < eps):
        raise ParameterError("eps must be positive")
    if len(C) < 1 or len(D) < 1:
        raise ParameterError("empty blocks")
    d0 = density(table, C, D)
    min_i = max(1, int(np.ceil(eps * len(C))))
    min_j = max(1, int(np.ceil(eps * len(D))))

    def endpoints(block, min_len, gridded):
        if gridded:
            step = max(1, int(np.ceil(eps * len(block) / 4)))
            return _lattice(block.lo, block.hi, step)
        return np.arange(block.lo, block.hi + 1)

    if mode == "auto":
        ni = (len(C) - min_i + 1) * (len(C) - min_i + 2) // 2
        nj = (len(D) - min_j + 1) * (len(D) - min_j + 2) // 2
        mode = "exhaustive" if ni * nj <= EXHAUSTIVE_PAIR_BUDGET else "grid"
    gridded = mode == "grid"
    ia, ib = _interval_pairs(endpoints(C, min_i, gridded), min_i)
    ja, jb = _interval_pairs(endpoints(D, min_j, gridded), min_j)
    if len(ia) == 0 or len(ja) == 0:
        return True, C, D, 0.0

    P = table.prefix
    ilen = (ib - ia).astype(float)
    jlen = (jb - ja).astype(float)
    best_gap = -1.0
    best = None
    chunk = max(1, EXHAUSTIVE_PAIR_BUDGET // max(1, len(ja)))
    for s in range(0, len(ia), chunk):
        e = min(s + chunk, len(ia))
        p = (P[ib[s:e, None], jb[None, :]] - P[ib[s:e, None], ja[None, :]]
             - P[ia[s:e, None], jb[None, :]] + P[ia[s:e, None], ja[None, :]]).astype(float)
        gaps = np.abs(p / (ilen[s:e, None] * jlen[None, :]) - d0)
        flat = int(np.argmax(gaps))
        gi, gj = divmod(flat, gaps.shape[1])
        g = float(gaps[gi, gj])
        cand = (g, int(ia[s + gi]), int(ja[gj]), s + gi, gj)
        if g > best_gap + 1e-15 or (best is not None and abs(g - best_gap) <= 1e-15
                                    and (cand[1], cand[2]) < (best[1], best[2])):
            best_gap = g
            best = cand
    wi = Interval(int(ia[best[3]]), int(ib[best[3]]))
    wj = Interval(int(ja[best[4]]), int(jb[best[4]]))
    return best_gap <= eps, wi, wj, best_gap


def is_regular_partition(table: DominanceTable, P: EquitablePartition, eps: float,
                         mode: str = "auto") -> RegularityReport:
    """All ordered block pairs (diagonal included) against the eps k^2 budget."""
    if not isinstance(P, EquitablePartition):
        raise ContractError("expected an EquitablePartition")
    irregular = []
    for s, C in enumerate(P.blocks):
        for t, D in enumerate(P.blocks):
            ok, wi, wj, gap = is_regular_pair(table, C, D, eps, mode=mode)
            if not ok:
                irregular.append((s, t, wi, wj, gap))
    return RegularityReport(
        epsilon=eps,
        k=P.k,
        block_length=P.block_length,
        exceptional_size=len(P.exceptional),
        q_value=index_q(table, P),
        irregular_pairs=irregular,
    )


def _tripartition(block: Interval, piece: Interval):
    if not block.contains(piece):
        raise ContractError("witness interval not inside its block")
    parts = [piece]
    if piece.lo > block.lo:
        parts.append(Interval(block.lo, piece.lo))
    if piece.hi < block.hi:
        parts.append(Interval(piece.hi, block.hi))
    return parts


def exploit_irregular(table: DominanceTable, C: Interval, D: Interval,
                      C1: Interval, D1: Interval, eps: float):
    """Split C and D around an irregularity witness; the index must gain at
    least eps^4 |C||D| / n^2.  Returns (pieces_of_C, pieces_of_D)."""
    if len(C1) < eps * len(C) - Q_TOL or len(D1) < eps * len(D) - Q_TOL:
        raise ContractError("witness subintervals too small")
    gap = abs(density(table, C1, D1) - density(table, C, D))
    if gap <= eps:
        raise ContractError(f"witness gap {gap:.6g} does not exceed eps={eps}")
    cs = _tripartition(C, C1)
    ds = _tripartition(D, D1)
    gain = pair_index_q(table, cs, ds) - pair_index_q(table, [C], [D])
    need = eps ** 4 * len(C) * len(D) / table.n ** 2
    if gain < need - Q_TOL:
        raise AssertionError(f"index gain {gain:.3e} below guaranteed {need:.3e}")
    return cs, ds


def refine_step(table: DominanceTable, P: EquitablePartition, eps: float,
                policy: RefinePolicy | None = None,
                report: RegularityReport | None = None) -> EquitablePartition:
    """One refinement round: exploit every irregular pair, take common
    refinements per block, re-chunk into equal intervals, spill leftovers
    into the exceptional set."""
    policy = policy or RefinePolicy()
    if report is None:
        report = is_regular_partition(table, P, eps)
    if report.regular:
        raise ContractError("refine_step requires an irregular partition")
    cuts = {i: {P.blocks[i].lo, P.blocks[i].hi} for i in range(P.k)}
    for s, t, wi, wj, _gap in report.irregular_pairs:
        cuts[s].update((wi.lo, wi.hi))
        cuts[t].update((wj.lo, wj.hi))
    c = P.block_length
    d = max(policy.min_block, c // policy.rechunk_divisor)
    if d < 1 or d > c:
        raise RefinementExhausted(f"cannot re-chunk blocks of length {c} at size {d}")
    new_blocks = []
    leftovers = []
    for i in range(P.k):
        pts = sorted(cuts[i])
        for a, b in zip(pts[:-1], pts[1:]):
            pos = a
            while pos + d <= b:
                new_blocks.append(Interval(pos, pos + d))
                pos += d
            if pos < b:
                leftovers.append(np.arange(pos, b))
    if len(new_blocks) > policy.max_parts:
        raise RefinementExhausted(
            f"refinement would produce {len(new_blocks)} parts (max {policy.max_parts})")
    exc = P.exceptional
    if leftovers:
        exc = exc.union(IndexSet(np.concatenate(leftovers)))
    P2 = EquitablePartition(P.n, tuple(new_blocks), exc)
    q_old = index_q(table, P)
    q_new = index_q(table, P2)
    if q_new < q_old - Q_TOL:
        raise AssertionError(f"refinement decreased the index: {q_old} -> {q_new}")
    return P2


def regular_partition(sigma_or_table, eps: float, m: int = 4,
                      max_iterations: int | None = None,
                      policy: RefinePolicy | None = None,
                      mode: str = "auto"):
    """Iterate refine_step from an equitable m-partition until eps-regular or
    a limit is hit.  Returns (partition, report, trace); on limit exhaustion
    the report is simply not regular and the trace shows the attempts."""
    if not (0 < eps <= 0.25):
        raise ParameterError("eps must satisfy 0 < eps <= 1/4")
    if m < 1:
        raise ParameterError("m must be >= 1")
    table = sigma_or_table if isinstance(sigma_or_table, DominanceTable) else DominanceTable(sigma_or_table)
    if max_iterations is None:
        max_iterations = int(np.ceil(2 / eps ** 5))
    policy = policy or RefinePolicy()
    P = equitable_partition(table, m)
    trace = []
    report = None
    prev_q = -np.inf
    for _ in range(max_iterations):
        report = is_regular_partition(table, P, eps, mode=mode)
        trace.append({"q": report.q_value, "k": report.k,
                      "exceptional_size": report.exceptional_size})
        if report.q_value < prev_q - Q_TOL:
            raise AssertionError("q trace decreased")
        prev_q = report.q_value
        if report.regular:
            break
        try:
            P = refine_step(table, P, eps, policy=policy, report=report)
        except RefinementExhausted:
            break
    report.iterations = trace
    return P, report, trace
