"""Pair counts p(S,T), densities d(S,T), image CDFs L(S,.), and CDF calculus.

CDFs are stored as breakpoint lists and evaluated right-continuously.  A block's
image CDF L(S, alpha) = |sigma(S) cap [0, alpha*n)| / |S| is represented with a
breakpoint at (v+1)/n for each image v, which reproduces L exactly on the grid
{k/n}.  Out-of-range arguments clamp to the endpoint values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractError, IndexSet, Interval, DominanceTable, ParameterError, Permutation

NEAR_TOL = 1e-9


def pair_count(table: DominanceTable, S, T: Interval) -> int:
    """p(S, T) = #{(s, t) in S x T : sigma(s) < t}.

    S may be an Interval (O(1) via the prefix table) or an IndexSet.
    """
    c, d = T.lo, T.hi
    if d > table.n or (isinstance(S, Interval) and S.hi > table.n):
        raise ParameterError("interval out of range")
    if isinstance(S, Interval):
        P = table.prefix
        return int(P[S.hi, d] - P[S.hi, c] - P[S.lo, d] + P[S.lo, c])
    imgs = table.sigma.images[S.members]
    return int(np.maximum(0, d - np.maximum(c, imgs + 1)).sum())


def density(table: DominanceTable, S, T: Interval) -> float:
    """d(S, T) = p(S, T) / (|S| |T|)."""
    ns, nt = len(S), len(T)
    if ns == 0 or nt == 0:
        raise ContractError("density undefined for empty S or T")
    return pair_count(table, S, T) / (ns * nt)


@dataclass(frozen=True)
class StepCDF:
    """A nondecreasing CDF on [0, domain_end] given by breakpoints.

    interp="step": right-continuous steps (value 0 below the first breakpoint).
    interp="linear": piecewise-linear interpolation between breakpoints
    (used for smoothed CDFs and reference curves like id(x)=x).
    """

    xs: np.ndarray
    ys: np.ndarray
    domain_end: float = 1.0
    interp: str = "step"

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if len(xs) != len(ys) or len(xs) == 0:
            raise ParameterError("breakpoints and values must align and be nonempty")
        if np.any(np.diff(xs) <= 0):
            raise ParameterError("breakpoint positions must be strictly increasing")
        if np.any(np.diff(ys) < -NEAR_TOL):
            raise ParameterError("CDF values must be nondecreasing")
        if self.interp not in ("step", "linear"):
            raise ParameterError(f"unknown interpolation {self.interp!r}")

    def __call__(self, alpha):
        """Evaluate with clamping: f(a) = f(0) for a < 0, f(end) for a > end."""
        a = np.clip(np.asarray(alpha, dtype=float), 0.0, self.domain_end)
        if self.interp == "step":
            idx = np.searchsorted(self.xs, a, side="right")
            vals = np.concatenate([[0.0], self.ys])[idx]
        else:
            vals = np.interp(a, self.xs, self.ys, left=self.ys[0], right=self.ys[-1])
        return vals if vals.ndim else float(vals)

    @property
    def final_value(self) -> float:
        return float(self.ys[-1])

    def breakpoints(self) -> np.ndarray:
        return self.xs

    def to_pairs(self):
        return [[float(x), float(y)] for x, y in zip(self.xs, self.ys)]

    @staticmethod
    def from_pairs(pairs, domain_end: float = 1.0, interp: str = "step") -> "StepCDF":
        arr = np.asarray(pairs, dtype=float)
        return StepCDF(arr[:, 0], arr[:, 1], domain_end=domain_end, interp=interp)


def identity_cdf() -> StepCDF:
    return StepCDF(np.array([0.0, 1.0]), np.array([0.0, 1.0]), interp="linear")


def cdf_L(table: DominanceTable, S) -> StepCDF:
    """The image CDF L(S, alpha) = |sigma(S) cap [0, alpha n)| / |S| as a StepCDF."""
    if isinstance(S, Interval):
        imgs = table.sigma.images[S.lo:S.hi]
    else:
        imgs = table.sigma.images[S.members]
    if len(imgs) == 0:
        raise ContractError("cdf_L undefined for empty S")
    v = np.sort(imgs)
    n = table.n
    return StepCDF((v + 1) / n, np.arange(1, len(v) + 1) / len(v))


def _critical_points(f: StepCDF, g: StepCDF, eps: float) -> np.ndarray:
    end = max(f.domain_end, g.domain_end)
    pts = np.concatenate([f.xs, g.xs, f.xs - eps, f.xs + eps, g.xs - eps, g.xs + eps,
                          [0.0, end]])
    return np.unique(np.clip(pts, 0.0, end))


def eps_near(f: StepCDF, g: StepCDF, eps: float):
    """Test g(a-eps)-eps <= f(a) <= g(a+eps)+eps for all a (and symmetrically).

    Exact for step and piecewise-linear CDFs: both sides are piecewise
    linear between the critical points checked.  Returns
    (ok, worst_alpha, worst_gap) with gap > 0 meaning violation magnitude.
    """
    if eps < 0:
        raise ParameterError("eps must be >= 0")
    worst_gap = -np.inf
    worst_alpha = 0.0
    for a_side, b_side in ((f, g), (g, f)):
        crit = _critical_points(a_side, b_side, eps)
        fa = a_side(crit)
        hi = b_side(crit + eps) + eps
        lo = b_side(crit - eps) - eps
        gaps = np.maximum(fa - hi, lo - fa)
        i = int(np.argmax(gaps))
        if gaps[i] > worst_gap:
            worst_gap = float(gaps[i])
            worst_alpha = float(crit[i])
    return worst_gap <= NEAR_TOL, worst_alpha, worst_gap


def lipschitz_modulus(f: StepCDF, eps: float) -> float:
    """Smallest B with f(x + eps) - f(x) <= B*eps for all x.

    The difference x -> f(x+eps) - f(x) is piecewise monotone between
    breakpoints and their -eps translates, so those points suffice.
    """
    if eps <= 0:
        raise ParameterError("eps must be > 0")
    xs = np.unique(np.concatenate([f.xs, f.xs - eps, [0.0, -eps, f.domain_end]]))
    diffs = f(xs + eps) - f(xs)
    return float(diffs.max()) / eps


def convolve_smooth(f: StepCDF, delta: float) -> StepCDF:
    """Sliding-window average ftilde(t) = delta^-1 int_{t-delta}^t f(s) ds.

    Input must be a step CDF on [0, end]; f extends by 0 below 0 and by its
    final value above end (the CDF of the underlying measure).  The result is
    piecewise linear with knots at the input breakpoints and their +delta
    translates, so it is computed exactly.
    """
    if delta <= 0:
        raise ParameterError("delta must be > 0")
    if f.interp != "step":
        raise ParameterError("convolve_smooth expects a step CDF")
    end = f.domain_end
    knots = np.unique(np.concatenate([f.xs, f.xs + delta, [0.0, end + delta]]))
    knots = knots[(knots >= 0.0) & (knots <= end + delta)]

    # antiderivative F(t) = int_0^t f, with f = 0 below the first breakpoint
    def F(t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(f.xs, t, side="right")
        base = np.concatenate([[0.0], np.cumsum(f.ys[:-1] * np.diff(f.xs))])
        lastx = np.concatenate([[0.0], f.xs])[idx]
        lasty = np.concatenate([[0.0], f.ys])[idx]
        baseint = np.concatenate([[0.0], base])[idx]
        return baseint + lasty * np.maximum(0.0, t - lastx)

    vals = (F(knots) - F(np.maximum(knots - delta, -delta))) / delta
    return StepCDF(knots, np.clip(vals, 0.0, None), domain_end=end + delta, interp="linear")
