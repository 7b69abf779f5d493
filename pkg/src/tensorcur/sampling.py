"""Seeded index sampling for fibers, slices and tubes.

Randomness comes from numpy's Philox-4x64 counter-based bit generator so
a seed fully determines every draw.  Weighted sampling without replacement
is sequential: each pick is made with probability proportional to the
remaining weights.  It is evaluated in one pass with exponential keys
(Efraimidis-Spirakis), which has exactly that distribution.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SampleSpec",
    "IndexDraw",
    "make_rng",
    "child_rng",
    "slice_probs",
    "tube_probs",
    "draw",
    "draw_without_replacement",
]

DISTRIBUTIONS = ("uniform", "length-squared")


@dataclass(frozen=True)
class SampleSpec:
    count: int
    distribution: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be positive")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")


@dataclass(frozen=True)
class IndexDraw:
    """Selected indices (strictly increasing) and their sampling probabilities."""

    indices: np.ndarray
    probs: np.ndarray

    def __len__(self):
        return len(self.indices)

    @classmethod
    def full(cls, n):
        """Every index of a population of size ``n``, each with probability 1/n."""
        return cls(np.arange(n), np.full(n, 1.0 / n))

    @classmethod
    def of(cls, indices, population):
        """Wrap explicit indices as a uniform draw from ``population`` items."""
        idx = np.unique(np.asarray(indices, dtype=np.int64))
        if idx.size == 0:
            raise ValueError("empty index set")
        if idx[0] < 0 or idx[-1] >= population:
            raise ValueError("index out of range")
        return cls(idx, np.full(idx.size, 1.0 / population))


def make_rng(seed):
    """Philox generator for a seed (int or sequence of ints)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def child_rng(seed, *stream):
    """Independent generator for a named substream, e.g. ``(seed, iteration)``."""
    return make_rng([int(seed), *[int(s) for s in stream]])


def _nonzero_total(sq, what):
    total = float(sq.sum())
    if not total > 0:
        raise ValueError(f"{what} of a zero tensor is undefined")
    return total


def slice_probs(x):
    """Length-squared probabilities of the frontal slices ``x[:, :, i]``."""
    x = np.asarray(x, dtype=np.float64)
    sq = np.einsum("ijk,ijk->k", x, x)
    return sq / _nonzero_total(sq, "slice distribution")


def tube_probs(x):
    """Length-squared probabilities of the tubes ``x[i, j, :]``.

    The result is flattened column-major, i.e. tube ``(i, j)`` sits at
    ``i + I1 * j``.
    """
    x = np.asarray(x, dtype=np.float64)
    sq = np.einsum("ijk,ijk->ij", x, x).ravel(order="F")
    return sq / _nonzero_total(sq, "tube distribution")


def draw(weights, count, rng, distribution="uniform"):
    """Draw ``count`` distinct indices.

    ``weights`` is either the population size (int) or a nonnegative weight
    vector; it is ignored apart from its length when ``distribution`` is
    ``"uniform"``.
    """
    if np.isscalar(weights):
        n = int(weights)
        w = None
    else:
        w = np.asarray(weights, dtype=np.float64)
        n = w.size
    if count < 1:
        raise ValueError("count must be positive")
    if distribution == "uniform":
        if count > n:
            raise ValueError(f"cannot draw {count} of {n} items without replacement")
        idx = np.sort(rng.permutation(n)[:count])
        return IndexDraw(idx, np.full(count, 1.0 / n))
    if distribution != "length-squared":
        raise ValueError(f"unknown distribution {distribution!r}")
    if w is None:
        raise ValueError("length-squared sampling needs a weight vector")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    support = np.flatnonzero(w > 0)
    if count > support.size:
        raise ValueError(f"cannot draw {count} items from a support of {support.size}")
    p = w / w.sum()
    u = rng.random(support.size)
    # log(u) / w is monotone in u**(1/w); largest keys win
    keys = np.log1p(-u) / p[support]
    pick = support[np.argsort(-keys, kind="stable")[:count]]
    idx = np.sort(pick)
    return IndexDraw(idx, p[idx])


def draw_without_replacement(weights, spec):
    """Draw according to a :class:`SampleSpec`, seeded by ``spec.seed``."""
    return draw(weights, spec.count, make_rng(spec.seed), spec.distribution)
