"""Ordered-simplex integrals against CDF families, the block-product form
whose total mass estimates pattern counts, and the smoothing comparison.

Integrals are exact: step CDFs contribute atoms, piecewise-linear CDFs
contribute constant densities per segment, and the sweep honors the strict
inequalities of the ordered simplex (coincident atoms never chain).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial, sqrt

import numpy as np

from .core import ParameterError
from .density import StepCDF, convolve_smooth, eps_near, lipschitz_modulus
from .patterns import Pattern
from .uniformity import UniformPartition

TUPLE_GUARD = 200_000
POS_TOL = 1e-12


@dataclass(frozen=True)
class SimplexSpec:
    """Integral of alpha(x_1) df_1(x_1)...df_r(x_r) over 0 <= x_1 < ... < x_r,
    all coordinates up to beta.  The weight alpha must be a step function (or
    None for the constant 1)."""

    r: int
    beta: float
    cdfs: tuple
    weight: object = None

    def __post_init__(self):
        if self.r < 1 or len(self.cdfs) != self.r:
            raise ParameterError("need r >= 1 CDFs")
        if self.beta < 0:
            raise ParameterError("beta must be >= 0")
        if self.weight is not None and getattr(self.weight, "interp", "step") != "step":
            raise ParameterError("weight must be a step function")


@dataclass(frozen=True)
class OmegaForm:
    block_length: int
    pattern: Pattern
    family: tuple

    @property
    def k(self) -> int:
        return len(self.family)

    def __post_init__(self):
        if self.pattern.m > self.k:
            raise ParameterError("pattern size exceeds block count")


def _atoms_and_slope(f: StepCDF):
    """Decompose a CDF into atom masses at its breakpoints plus per-segment
    densities (nonzero only for linear interpolation)."""
    if f.interp == "step":
        masses = np.diff(f.ys, prepend=0.0)
        slopes = np.zeros(len(f.xs))
        return f.xs, masses, slopes
    # linear: mass accrues along segments; any initial value is an atom
    masses = np.zeros(len(f.xs))
    masses[0] = f.ys[0]
    seg = np.diff(f.ys) / np.diff(f.xs) if len(f.xs) > 1 else np.empty(0)
    slopes = np.append(seg, 0.0)  # slope on [xs[i], xs[i+1])
    return f.xs, masses, slopes


def simplex_integral(spec: SimplexSpec) -> float:
    r, beta = spec.r, spec.beta
    decomp = [_atoms_and_slope(f) for f in spec.cdfs]
    knots = np.unique(np.concatenate(
        [d[0] for d in decomp]
        + ([np.asarray(spec.weight.xs)] if spec.weight is not None else [])
        + [np.array([0.0, beta])]))
    knots = knots[knots <= beta + POS_TOL]
    weight = spec.weight if spec.weight is not None else (lambda x: 1.0)
    A = np.zeros(r + 1)
    A[0] = 1.0
    for i, p in enumerate(knots):
        # atoms exactly at p (closure of the simplex at beta)
        w = np.empty(r)
        for l, (xs, masses, _slopes) in enumerate(decomp):
            j = np.searchsorted(xs, p)
            w[l] = masses[j] if j < len(xs) and abs(xs[j] - p) <= POS_TOL else 0.0
        if np.any(w > 0):
            prev = A.copy()
            for l in range(1, r + 1):
                gain = prev[l - 1] * w[l - 1]
                if l == 1:
                    gain *= float(weight(p))
                A[l] += gain
        if i + 1 >= len(knots):
            break
        u, v = p, min(float(knots[i + 1]), beta)
        if v <= u + POS_TOL:
            continue
        c = np.empty(r)
        for l, (xs, _masses, slopes) in enumerate(decomp):
            j = np.searchsorted(xs, u + POS_TOL) - 1
            c[l] = slopes[j] if 0 <= j < len(slopes) else 0.0
        if np.any(c > 0):
            prev = A.copy()
            alpha_seg = float(weight((u + v) / 2))
            length = v - u
            for l in range(1, r + 1):
                acc = 0.0
                prod = 1.0
                for run in range(1, l + 1):
                    prod *= c[l - run] * length / run
                    base = prev[l - run]
                    if l - run == 0:
                        base *= alpha_seg
                    acc += base * prod
                A[l] += acc
    return float(A[r])


def _atom_table(family, beta):
    """Flatten a family of step CDFs into sorted (position, weight, block)
    arrays with group ids for coincident positions."""
    pos, wt, blk = [], [], []
    for s, f in enumerate(family):
        if f.interp != "step":
            return None
        masses = np.diff(f.ys, prepend=0.0)
        keep = (masses > 0) & (f.xs <= beta + POS_TOL)
        pos.append(f.xs[keep])
        wt.append(masses[keep])
        blk.append(np.full(int(keep.sum()), s, dtype=np.int64))
    pos = np.concatenate(pos)
    wt = np.concatenate(wt)
    blk = np.concatenate(blk)
    order = np.argsort(pos, kind="stable")
    pos, wt, blk = pos[order], wt[order], blk[order]
    grp = np.concatenate([[0], np.cumsum(np.diff(pos) > POS_TOL)]) if len(pos) else np.empty(0, dtype=np.int64)
    return pos, wt, blk, grp.astype(np.int64)


def _omega_fast(form: OmegaForm, beta: float) -> float:
    """Weighted word-pattern count over the family's atoms, m <= 3.

    An m-tuple of atoms with strictly increasing positions and blocks forming
    the pattern tau^{-1} (in position order) contributes the product of its
    masses; the tuple sum times |C_1|^m equals the block-sum of simplex
    integrals because distinct blocks and strict positions pick out exactly
    one wedge term.
    """
    m = form.pattern.m
    table = _atom_table(form.family, beta)
    if table is None:
        raise ParameterError("fast path needs step CDFs")
    pos, wt, blk, grp = table
    k = form.k
    scale = float(form.block_length) ** m
    if len(pos) == 0:
        return 0.0
    if m == 1:
        return scale * float(wt.sum())
    pi = np.empty(m, dtype=np.int64)
    pi[form.pattern.perm.images] = np.arange(m)  # tau^{-1}
    # per-group starts so coincident positions never pair up
    ngrp = int(grp[-1]) + 1
    starts = np.searchsorted(grp, np.arange(ngrp))
    first_of_group = starts[grp]
    if m == 2:
        want_asc = pi[0] < pi[1]
        total = 0.0
        cum = np.zeros(k)          # weight per block in earlier groups
        pending = np.zeros(k)
        last_g = 0
        for j in range(len(pos)):
            if grp[j] != last_g:
                cum += pending
                pending[:] = 0.0
                last_g = int(grp[j])
            b = int(blk[j])
            earlier = cum[:b].sum() if want_asc else cum[b + 1:].sum()
            total += wt[j] * earlier
            pending[b] += wt[j]
        return scale * total
    # m == 3: prefix matrix over (group, block) plus per-j vector scans
    P = np.zeros((ngrp + 1, k + 1))
    np.add.at(P, (grp + 1, blk + 1), wt)
    P = np.cumsum(np.cumsum(P, axis=0), axis=1)  # P[g+1, b+1] = wt in groups <= g, blk <= b
    tot_le = P[-1]                               # total weight with blk <= b (index b+1)
    tot_all = tot_le[-1]
    key = tuple(int(x) for x in pi)
    total = 0.0
    for j in range(len(pos)):
        g = int(grp[j])
        hi = first_of_group[j]
        if hi == 0:
            continue
        b = int(blk[j])
        bi = blk[:hi]
        wi = wt[:hi]
        row = P[g + 1]           # weight in groups <= g, cumulative in block
        wtot_le_g = row[-1]
        suf_less = lambda bb: tot_le[bb] - row[bb]          # blk < bb index bb
        if key == (0, 1, 2):
            mask = bi < b
            third = (tot_all - tot_le[b + 1]) - (wtot_le_g - row[b + 1])
            total += wt[j] * third * wi[mask].sum()
        elif key == (0, 2, 1):
            mask = bi < b
            third = (suf_less(b) - suf_less(bi + 1))[mask]
            total += wt[j] * (wi[mask] * third).sum()
        elif key == (1, 2, 0):
            mask = bi < b
            total += wt[j] * (wi[mask] * suf_less(bi)[mask]).sum()
        elif key == (2, 1, 0):
            mask = bi > b
            total += wt[j] * suf_less(b) * wi[mask].sum()
        elif key == (2, 0, 1):
            mask = bi > b
            third = (suf_less(bi) - suf_less(b + 1))[mask]
            total += wt[j] * (wi[mask] * third).sum()
        else:  # (1, 0, 2)
            mask = bi > b
            third = ((tot_all - tot_le[bi + 1]) - (wtot_le_g - row[bi + 1]))[mask]
            total += wt[j] * (wi[mask] * third).sum()
    return scale * total


def omega_integral(form: OmegaForm, beta: float = 1.0, method: str = "auto") -> float:
    """Integral of the block-product form over the ordered simplex up to beta."""
    m = form.pattern.m
    k = form.k
    if method == "auto":
        all_step = all(f.interp == "step" for f in form.family)
        method = "fast" if (m <= 3 and all_step) else "enumerate"
    if method == "fast":
        return _omega_fast(form, beta)
    if comb(k, m) > TUPLE_GUARD:
        raise ParameterError(f"C({k},{m}) block tuples exceed the enumeration guard")
    pi = np.empty(m, dtype=np.int64)
    pi[form.pattern.perm.images] = np.arange(m)
    total = 0.0
    for combo in itertools.combinations(range(k), m):
        cdfs = tuple(form.family[combo[int(pi[j])]] for j in range(m))
        total += simplex_integral(SimplexSpec(m, beta, cdfs))
    return float(form.block_length) ** m * total


def estimate_pattern_count(sigma_or_table, U: UniformPartition, tau: Pattern,
                           smoothed: bool = False, delta: float | None = None) -> dict:
    """Estimate the pattern count from the partition's CDF family, with the
    certified error bound (20*sqrt(eps)*m^2 + 4/k) n^m / (m-1)!."""
    eps = U.epsilon
    if eps > 0.5:
        raise ParameterError("need eps <= 1/2")
    m = tau.m
    k = U.partition.k
    n = U.partition.n
    estimate = omega_integral(OmegaForm(U.partition.block_length, tau, U.family))
    bound = (20 * sqrt(eps) * m * m + 4 / k) * n ** m / factorial(m - 1)
    report = {"estimate": estimate, "bound": bound, "epsilon": eps, "k": k, "m": m}
    if smoothed:
        d = sqrt(eps) if delta is None else delta
        fam = tuple(convolve_smooth(f, d) for f in U.family)
        report["smoothed_estimate"] = omega_integral(
            OmegaForm(U.partition.block_length, tau, fam), beta=1.0 + d,
            method="enumerate")
        report["delta"] = d
    return report


def compare_under_smoothing(F, G, eps: float, B: float, beta: float, alpha=None):
    """Simplex integrals of two families whose members are eps-near, with the
    second family (B, eps)-Lipschitz; the difference is certified against
    r(a+1)(B+1)eps when the hypotheses check out.

    Returns (difference, bound, certified).
    """
    if len(F) != len(G) or not F:
        raise ParameterError("families must align and be nonempty")
    r = len(F)
    a = max(g.domain_end for g in G)
    certified = True
    for f, g in zip(F, G):
        ok, _, _ = eps_near(f, g, eps)
        if not ok:
            certified = False
    for g in G:
        if lipschitz_modulus(g, eps) > B + 1e-9:
            certified = False
    dF = simplex_integral(SimplexSpec(r, beta, tuple(F), alpha))
    dG = simplex_integral(SimplexSpec(r, beta, tuple(G), alpha))
    diff = abs(dF - dG)
    bound = r * (a + 1) * (B + 1) * eps
    if certified and diff > bound + 1e-9:
        raise AssertionError(f"difference {diff} exceeds certified bound {bound}")
    return diff, bound, certified
