"""Permutation representation, intervals, and the dominance-count table.

Everything downstream queries pair counts p(S, T) = #{(s,t) in S x T : sigma(s) < t}
through the prefix tables built here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_SIZE_CAP = 1 << 14


class PermError(Exception):
    """Base error for this package."""


class ParseError(PermError):
    pass


class ParameterError(PermError):
    pass


class ResourceLimitError(PermError):
    def __init__(self, message, required_bytes):
        super().__init__(message)
        self.required_bytes = required_bytes


class ContractError(PermError):
    """A documented precondition was violated by the caller."""


@dataclass(frozen=True)
class Permutation:
    """A bijection of {0,...,n-1} in one-line form: images[i] = sigma(i)."""

    images: np.ndarray

    def __post_init__(self):
        imgs = np.asarray(self.images, dtype=np.int64)
        object.__setattr__(self, "images", imgs)
        n = len(imgs)
        if n < 1:
            raise ParseError("empty permutation")
        seen = np.zeros(n, dtype=bool)
        for i, v in enumerate(imgs):
            if v < 0 or v >= n:
                raise ParseError(f"value {v} out of range for n={n}")
            if seen[v]:
                raise ParseError(f"duplicate value {v}")
            seen[v] = True

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return int(self.images[i])

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.images, other.images)

    def __hash__(self):
        return hash(self.images.tobytes())


@dataclass(frozen=True)
class Interval:
    """Half-open index interval [lo, hi)."""

    lo: int
    hi: int

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi):
            raise ParameterError(f"bad interval [{self.lo}, {self.hi})")

    def __len__(self) -> int:
        return self.hi - self.lo

    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi)

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


@dataclass(frozen=True)
class IndexSet:
    """A sorted set of distinct indices in {0,...,n-1}."""

    members: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        m = np.unique(np.asarray(self.members, dtype=np.int64))
        object.__setattr__(self, "members", m)
        if len(m) and m[0] < 0:
            raise ParameterError("negative index in IndexSet")

    def __len__(self) -> int:
        return len(self.members)

    def union(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(np.concatenate([self.members, other.members]))


def parse_permutation(text: str) -> Permutation:
    """Parse one line of whitespace-separated images, 0-indexed."""
    tokens = text.split()
    if not tokens:
        raise ParseError("empty input")
    vals = []
    for tok in tokens:
        try:
            vals.append(int(tok))
        except ValueError:
            raise ParseError(f"not an integer: {tok!r}") from None
    return Permutation(np.array(vals, dtype=np.int64))


def format_permutation(sigma: Permutation) -> str:
    return " ".join(str(int(v)) for v in sigma.images) + "\n"


def generate(kind: str, n: int, seed: int = 0) -> Permutation:
    """Deterministic generators: identity, reverse, interleave, random.

    interleave is (1,0,3,2,...,n-1,n-2) and requires n even.
    random uses seeded Fisher-Yates; identical (n, seed) give identical output.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if kind == "identity":
        imgs = np.arange(n)
    elif kind == "reverse":
        imgs = np.arange(n)[::-1].copy()
    elif kind == "interleave":
        if n % 2 != 0:
            raise ParameterError("interleave requires even n")
        imgs = np.arange(n)
        imgs[0::2] += 1
        imgs[1::2] -= 1
    elif kind == "random":
        rng = np.random.default_rng(seed)
        imgs = np.arange(n)
        u = rng.random(n - 1)
        for i in range(n - 1):
            j = i + int(u[i] * (n - i))
            imgs[i], imgs[j] = imgs[j], imgs[i]
    else:
        raise ParameterError(f"unknown generator kind {kind!r}")
    return Permutation(imgs)


class DominanceTable:
    """Prefix counts N[x, y] = #{s < x : sigma(s) < y} on an (n+1)^2 grid.

    Also keeps the column-cumulative table P[x, y] = sum_{t < y} N[x, t],
    which turns any interval pair count p(I, J) into a 4-corner lookup.
    """

    def __init__(self, sigma: Permutation, size_cap: int = DEFAULT_SIZE_CAP):
        n = sigma.n
        if n > size_cap:
            need = (n + 1) * (n + 1) * (4 + 8)
            raise ResourceLimitError(
                f"n={n} exceeds dominance-table cap {size_cap} (~{need} bytes dense)",
                required_bytes=need,
            )
        self.n = n
        self.sigma = sigma
        ind = np.zeros((n + 1, n + 1), dtype=np.int32)
        rows = np.arange(n)
        ind[rows + 1, sigma.images + 1] = 1
        counts = ind.cumsum(axis=0).cumsum(axis=1)
        self.counts = counts  # N
        # P[x, y] = sum_{t < y} N[x, t] (exclusive prefix along y)
        P = np.zeros((n + 1, n + 1), dtype=np.int64)
        np.cumsum(counts[:, :n], axis=1, out=P[:, 1:])
        self.prefix = P

    def rect(self, x1: int, x2: int, y1: int, y2: int) -> int:
        """#{s in [x1,x2) : sigma(s) in [y1,y2)}."""
        N = self.counts
        return int(N[x2, y2]) - int(N[x1, y2]) - int(N[x2, y1]) + int(N[x1, y1])


def build_dominance(sigma: Permutation, size_cap: int = DEFAULT_SIZE_CAP) -> DominanceTable:
    return DominanceTable(sigma, size_cap=size_cap)
