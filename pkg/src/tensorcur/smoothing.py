"""One-dimensional smoothers for sampled fibers.

Samples sit at unit spacing.  Moving averages use a centered window of
``span`` samples that is truncated at the ends of the signal.  The local
regression family (LOESS/LOWESS and robust variants) and Savitzky-Golay
fit a polynomial on the ``span`` nearest samples and evaluate it at the
target point; near the boundaries that window becomes one-sided.

Non-robust smoothers are linear maps, built once per (length, settings)
as a dense operator matrix and applied to all fibers with one product.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .tensor import pinv_stack

__all__ = ["SmootherConfig", "METHODS", "smooth", "smooth_fibers", "smoothing_operator"]

METHODS = ("none", "moving-average", "loess", "lowess", "rloess", "rlowess", "savitzky-golay")
WINDOWS = ("centered", "cumulative", "trailing")

_DEFAULT_DEGREE = {"loess": 2, "rloess": 2, "lowess": 1, "rlowess": 1, "savitzky-golay": 2}


@dataclass(frozen=True)
class SmootherConfig:
    """Smoother settings.

    ``span`` is a window length in samples (int >= 1) or a fraction of the
    signal length in (0, 1].  ``window`` selects the moving-average variant:
    ``centered`` (default), ``cumulative`` (running mean from the start) or
    ``trailing`` (mean of the last ``span`` samples).
    """

    method: str = "moving-average"
    span: float = 5
    degree: int = None
    robust_iterations: int = None
    window: str = "centered"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown smoothing method {self.method!r}; choose from {METHODS}")
        if self.window not in WINDOWS:
            raise ValueError(f"unknown moving-average window {self.window!r}")
        if self._fractional:
            if not self.span > 0:
                raise ValueError("fractional span must lie in (0, 1]")
        elif self.span < 1 or float(self.span) != int(self.span):
            raise ValueError("span must be an integer >= 1 or a fraction in (0, 1]")
        if self.degree is not None and self.degree < 0:
            raise ValueError("degree must be nonnegative")
        if self.robust_iterations is not None and self.robust_iterations < 0:
            raise ValueError("robust_iterations must be nonnegative")
        if (self.degree is not None and not self._fractional
                and self.method in _DEFAULT_DEGREE and self.degree >= self.span):
            raise ValueError("degree must be smaller than span")

    @property
    def _fractional(self):
        return isinstance(self.span, float) and self.span <= 1.0

    @property
    def poly_degree(self):
        if self.degree is not None:
            return self.degree
        return _DEFAULT_DEGREE.get(self.method, 0)

    @property
    def robust_passes(self):
        if self.robust_iterations is not None:
            return self.robust_iterations if self.method in ("rloess", "rlowess") else 0
        return 5 if self.method in ("rloess", "rlowess") else 0

    def window_length(self, n):
        """Samples per window for a signal of length ``n``."""
        k = math.floor(self.span * n) if self._fractional else int(self.span)
        k = max(1, min(k, n))
        if self.method == "moving-average" and self.window == "centered" and k % 2 == 0:
            k -= 1
        return k


@lru_cache(maxsize=256)
def _moving_average_operator(n, k, window):
    h = np.zeros((n, n))
    for i in range(n):
        if window == "centered":
            half = (k - 1) // 2
            lo, hi = max(0, i - half), min(n, i + half + 1)
        elif window == "cumulative":
            lo, hi = 0, i + 1
        else:
            lo, hi = max(0, i - k + 1), i + 1
        h[i, lo:hi] = 1.0 / (hi - lo)
    return h


def _local_windows(n, k):
    """Nearest-``k`` window start for every target sample, and local offsets."""
    starts = np.clip(np.arange(n) - (k - 1) // 2, 0, n - k)
    idx = starts[:, None] + np.arange(k)[None, :]
    offsets = (idx - np.arange(n)[:, None]).astype(np.float64)
    return idx, offsets


def _kernel_weights(offsets, weighted):
    if not weighted:
        return np.ones_like(offsets)
    # tricube that vanishes one sample beyond the farthest window point
    h = np.abs(offsets).max(axis=1, keepdims=True) + 1.0
    return (1.0 - (np.abs(offsets) / h) ** 3) ** 3


def _local_fit_rows(offsets, weights, degree):
    """Rows ``e0ᵀ (Vᵀ W V)⁺ Vᵀ W`` for each target, shape (..., n, k)."""
    v = offsets[..., None] ** np.arange(degree + 1)
    sw = np.sqrt(weights)
    return pinv_stack(sw[..., None] * v)[..., 0, :] * sw


@lru_cache(maxsize=256)
def _local_poly_operator(n, k, degree, weighted):
    degree = min(degree, k - 1)
    idx, offsets = _local_windows(n, k)
    rows = _local_fit_rows(offsets, _kernel_weights(offsets, weighted), degree)
    h = np.zeros((n, n))
    np.put_along_axis(h, idx, rows, axis=1)
    return h


def smoothing_operator(n, cfg):
    """The ``n x n`` matrix of the linear (non-robust) part of ``cfg``."""
    if cfg.method == "none":
        return np.eye(n)
    k = cfg.window_length(n)
    if cfg.method == "moving-average":
        h = _moving_average_operator(n, k, cfg.window)
    else:
        weighted = cfg.method != "savitzky-golay"
        h = _local_poly_operator(n, k, cfg.poly_degree, weighted)
    h.setflags(write=False)
    return h


def _robust_refit(y, fit, cfg):
    n, m = y.shape
    k = cfg.window_length(n)
    degree = min(cfg.poly_degree, k - 1)
    idx, offsets = _local_windows(n, k)
    base = _kernel_weights(offsets, True)
    v = offsets[..., None] ** np.arange(degree + 1)
    floor = 1e-12 * np.maximum(1.0, np.abs(y).max(axis=0))
    active = np.ones(m, dtype=bool)
    for _ in range(cfg.robust_passes):
        resid = y - fit
        scale = np.median(np.abs(resid), axis=0)
        # a vanishing MAD ends reweighting for that column (as R's lowess does)
        active &= scale > floor
        if not active.any():
            break
        cols = np.flatnonzero(active)
        u = resid[:, cols] / (6.0 * scale[cols])
        rw = np.where(np.abs(u) < 1.0, (1.0 - u ** 2) ** 2, 0.0)  # (n, m')
        w = base[None, :, :] * rw.T[:, idx]                        # (m', n, k)
        yw = y[:, cols].T[:, idx]
        new = _weighted_fit_at_center(v, w, yw)                    # (m', n)
        # windows left with too few weighted points get the highest degree
        # they support; an empty window keeps its previous value
        cnt = np.count_nonzero(w > 0, axis=-1)
        for d in range(degree):
            ci, ni = np.nonzero(cnt == d + 1)
            if ci.size:
                new[ci, ni] = _weighted_fit_at_center(
                    v[ni][..., :d + 1], w[ci, ni][None], yw[ci, ni][None])[0]
        ci, ni = np.nonzero(cnt == 0)
        new[ci, ni] = fit[ni, cols[ci]]
        fit = fit.copy()
        fit[:, cols] = new.T
    return fit


def _weighted_fit_at_center(v, w, yw):
    """Intercepts of weighted polynomial fits; v (n, k, p), w and yw (m, n, k)."""
    g = np.einsum("nka,cnk,nkb->cnab", v, w, v)
    b = np.einsum("nka,cnk->cna", v, w * yw)
    # tiny ridge keeps windows with too few nonzero weights solvable
    ridge = 1e-12 * np.trace(g, axis1=-2, axis2=-1)[..., None, None] + 1e-300
    beta = np.linalg.solve(g + ridge * np.eye(g.shape[-1]), b[..., None])[..., 0]
    return beta[..., 0]


def smooth_fibers(m, cfg):
    """Smooth every column of ``m`` independently."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("smooth_fibers expects a matrix")
    if cfg is None or cfg.method == "none":
        return m.copy()
    if not np.all(np.isfinite(m)):
        raise ValueError("cannot smooth non-finite values")
    fit = smoothing_operator(m.shape[0], cfg) @ m
    if cfg.robust_passes:
        fit = _robust_refit(m, fit, cfg)
    return fit


def smooth(signal, cfg):
    """Smooth a one-dimensional signal."""
    y = np.asarray(signal, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("smooth expects a nonempty 1-D signal")
    return smooth_fibers(y[:, None], cfg)[:, 0]
