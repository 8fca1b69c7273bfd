"""Uniform partitions: every large subinterval of every block must have an
image CDF eps-near the block's reference CDF f_s.

The subinterval check is exact and fast: for a fixed threshold t, the
condition L(I, t) <= f_s(t+eps)+eps over all subintervals I = [a, b) reduces
to a prefix-count inequality M[b] - M[a] <= (b-a) * bound, which is scanned
with running prefix minima in O(|block| * |thresholds|).  The threshold set
(block image positions plus shifted f_s breakpoints) covers every point where
either side of the nearness sandwich can jump, so a clean scan is a proof.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DominanceTable, IndexSet, Interval, ParameterError, PermError
from .density import StepCDF, cdf_L
from .regularity import EquitablePartition

SWEEP_TOL = 1e-6


class UniformityError(PermError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


@dataclass(frozen=True)
class UniformPartition:
    partition: EquitablePartition
    family: tuple
    epsilon: float

    def __post_init__(self):
        if len(self.family) != self.partition.k:
            raise ParameterError("family size must match the block count")
        for f in self.family:
            if abs(f.final_value - 1.0) > 1e-9:
                raise ParameterError("family CDFs must end at 1")

    def to_json(self):
        P = self.partition
        return {
            "epsilon": self.epsilon,
            "n": P.n,
            "k": P.k,
            "block_length": P.block_length,
            "exceptional_size": len(P.exceptional),
            "blocks": [[b.lo, b.hi] for b in P.blocks],
            "family": [f.to_pairs() for f in self.family],
        }


def _block_violation(table: DominanceTable, block: Interval, f: StepCDF, eps: float):
    """Worst nearness violation over subintervals I of block, |I| >= eps|block|.

    Returns None if every such L(I,.) is eps-near f, else (I, alpha, gap).
    """
    L = len(block)
    mlen = max(1, int(np.ceil(eps * L - SWEEP_TOL)))
    if mlen > L:
        return None
    n = table.n
    pos = (table.sigma.images[block.lo:block.hi] + 1) / n
    thr = np.unique(np.concatenate([pos, np.clip(f.xs + eps, 0.0, 1.0), [0.0]]))
    upper = f(thr + eps) + eps
    lower = f(thr - eps) - eps
    # M[i, t] = images among the first i block points at position <= thr[t]
    below = pos[:, None] <= thr[None, :] + 1e-12
    M = np.zeros((L + 1, len(thr)))
    np.cumsum(below, axis=0, out=M[1:])
    i = np.arange(L + 1, dtype=float)[:, None]
    G = M - i * upper
    H = M - i * lower
    head = L + 1 - mlen
    over = G[mlen:] - np.minimum.accumulate(G[:head], axis=0)
    under = np.maximum.accumulate(H[:head], axis=0) - H[mlen:]
    worst = max(float(over.max()), float(under.max()))
    if worst <= SWEEP_TOL:
        return None
    if over.max() >= under.max():
        r, t = np.unravel_index(int(np.argmax(over)), over.shape)
        b = r + mlen
        a = int(np.argmin(G[:b - mlen + 1, t]))
        gap = (M[b, t] - M[a, t]) / (b - a) - upper[t]
    else:
        r, t = np.unravel_index(int(np.argmax(under)), under.shape)
        b = r + mlen
        a = int(np.argmax(H[:b - mlen + 1, t]))
        gap = lower[t] - (M[b, t] - M[a, t]) / (b - a)
    I = Interval(block.lo + a, block.lo + b)
    return I, float(thr[t]), float(gap)


def verify_uniform(sigma_or_table, U: UniformPartition):
    """Check the partition against its family.  Returns (ok, worst) where
    worst is None or (block index, subinterval, alpha, gap)."""
    table = sigma_or_table if isinstance(sigma_or_table, DominanceTable) else DominanceTable(sigma_or_table)
    P = U.partition
    if len(P.exceptional) > U.epsilon * P.n + 1e-9:
        return False, (-1, None, 0.0, float(len(P.exceptional) - U.epsilon * P.n))
    worst = None
    for s, block in enumerate(P.blocks):
        v = _block_violation(table, block, U.family[s], U.epsilon)
        if v is not None and (worst is None or v[2] > worst[3]):
            worst = (s, v[0], v[1], v[2])
    return worst is None, worst


def uniform_partition(sigma_or_table, eps: float, m: int = 2) -> UniformPartition:
    """Build a uniform partition with the canonical family f_s = L(C_s, .).

    Searches block counts k downward from ceil(4/eps) (the largest count the
    underlying theory asks for) and then upward; for each candidate the exact
    subinterval sweep decides acceptance, with individually failing blocks
    dropped into the exceptional set while its eps*n budget allows.  Singleton
    blocks are trivially uniform, so the search always terminates.
    """
    if not (0 < eps < 0.5):
        raise ParameterError("eps must satisfy 0 < eps < 1/2")
    table = sigma_or_table if isinstance(sigma_or_table, DominanceTable) else DominanceTable(sigma_or_table)
    n = table.n
    if m < 1 or m > n:
        raise ParameterError("need 1 <= m <= n")
    budget = eps * n + 1e-9
    kstar = min(int(np.ceil(4 / eps)), n)
    candidates = [k for k in range(kstar, m - 1, -1)]
    candidates += [k for k in range(kstar + 1, n + 1) if k >= m]
    trace = []
    for k in candidates:
        length = n // k
        if length < 1:
            continue
        leftover = n - k * length
        if leftover > budget:
            trace.append({"k": k, "reason": "exceptional budget"})
            continue
        blocks = [Interval(i * length, (i + 1) * length) for i in range(k)]
        bad = []
        if length > 1:
            for b in blocks:
                if _block_violation(table, b, cdf_L(table, b), eps) is not None:
                    bad.append(b)
                    if leftover + len(bad) * length > budget:
                        break
        if leftover + len(bad) * length > budget:
            trace.append({"k": k, "reason": f"{len(bad)}+ bad blocks"})
            continue
        kept = tuple(b for b in blocks if b not in bad)
        exc = np.concatenate([np.arange(k * length, n)]
                             + [b.indices() for b in bad]) if (leftover or bad) else []
        P = EquitablePartition(n, kept, IndexSet(np.asarray(exc, dtype=np.int64)))
        family = tuple(cdf_L(table, b) for b in kept)
        return UniformPartition(P, family, eps)
    raise UniformityError(f"no uniform partition found for eps={eps}, m={m}", trace)
