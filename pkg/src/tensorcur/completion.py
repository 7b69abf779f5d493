"""Approximate-then-mask completion.

Each iteration builds a cross approximation ``X`` of the current estimate
``C`` and then restores the observed entries::

    C <- Ω ⊛ M + (1 - Ω) ⊛ X

The loop stops after ``max_iterations`` or once the relative change of
``C`` drops below ``tolerance``.
"""

from dataclasses import dataclass, field, replace
from functools import partial
import time

import numpy as np

from . import cur
from .metrics import psnr, ssim, WINDOW
from .sampling import child_rng, draw, slice_probs, tube_probs
from .smoothing import SmootherConfig, smooth_fibers
from .tensor import frobenius_norm, unfold

__all__ = [
    "METHODS",
    "CompletionConfig",
    "CompletionTrace",
    "IterationRecord",
    "complete",
    "step",
    "draw_indices",
    "approximate",
    "relative_change",
    "initial_estimate",
]

METHODS = ("matrix-cur", "tucker-cur", "tucker2-cur", "fstd", "slice-tube-cur", "tubal-cur")
INITS = ("observed-zeros", "random-gaussian")

# substream tags for child_rng
_DRAW_STREAM = 1
_INIT_STREAM = 2


@dataclass(frozen=True)
class CompletionConfig:
    """Settings for :func:`complete`.

    ``ranks`` depends on ``method``:

    * ``matrix-cur``: (columns, rows)
    * ``tucker-cur``: one fiber count per mode
    * ``tucker2-cur``: (columns, rows)
    * ``fstd``: indices per mode
    * ``slice-tube-cur``: (frontal slices, tubes)
    * ``tubal-cur``: (lateral slices, horizontal slices)
    """

    method: str = "tucker-cur"
    ranks: tuple = ()
    smoother: SmootherConfig = None
    smooth_modes: tuple = (0, 1)
    max_iterations: int = 100
    tolerance: float = 1e-4
    init: str = "observed-zeros"
    seed: int = 0
    resample_per_iteration: bool = True
    distribution: str = None
    cur_mode: str = "least-squares"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.init not in INITS:
            raise ValueError(f"unknown init {self.init!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        if self.cur_mode not in cur.MODES:
            raise ValueError(f"unknown cur_mode {self.cur_mode!r}")
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))

    @property
    def sampling(self):
        if self.distribution is not None:
            return self.distribution
        return "length-squared" if self.method == "slice-tube-cur" else "uniform"

    def validate(self, shape):
        shape = tuple(shape)
        r = self.ranks
        if any(k < 1 for k in r):
            raise ValueError("ranks must be positive")

        def need(ndim, count):
            if len(shape) != ndim and ndim:
                raise ValueError(f"{self.method} needs a {ndim}-way tensor, got shape {shape}")
            if len(r) != count:
                raise ValueError(f"{self.method} needs {count} ranks, got {r}")

        if self.method == "matrix-cur":
            need(2, 2)
            bounds = (shape[1], shape[0])
        elif self.method in ("tucker-cur", "fstd"):
            need(0, len(shape))
            bounds = shape
        elif self.method == "tucker2-cur":
            need(3, 2)
            bounds = shape[:2]
        elif self.method == "slice-tube-cur":
            need(3, 2)
            bounds = (shape[2], shape[0] * shape[1])
        else:
            need(3, 2)
            bounds = (shape[1], shape[0])
        for k, b in zip(r, bounds):
            if k > b:
                raise ValueError(f"rank {k} exceeds available extent {b} for shape {shape}")


@dataclass
class IterationRecord:
    iteration: int
    rel_change: float
    psnr: float = None
    ssim: float = None
    elapsed_ms: float = 0.0


@dataclass
class CompletionTrace:
    records: list = field(default_factory=list)
    converged: bool = False

    def __len__(self):
        return len(self.records)

    def psnr_at(self, iteration):
        return self.records[iteration - 1].psnr


def relative_change(prev, nxt):
    """``‖next - prev‖_F / ‖prev‖_F``."""
    prev = np.asarray(prev, dtype=np.float64)
    nxt = np.asarray(nxt, dtype=np.float64)
    if prev.shape != nxt.shape:
        raise ValueError("shape mismatch")
    denom = frobenius_norm(prev)
    if denom == 0:
        raise ValueError("relative change from a zero tensor is undefined")
    return frobenius_norm(nxt - prev) / denom


def _fiber_weights(x, n):
    xn = unfold(x, n)
    return np.einsum("ij,ij->j", xn, xn)


def draw_indices(c, cfg, rng):
    """Sample the index sets ``cfg.method`` needs for the tensor ``c``."""
    r = cfg.ranks
    dist = cfg.sampling
    ls = dist == "length-squared"
    if cfg.method == "matrix-cur":
        cols = draw(np.sum(c * c, axis=0) if ls else c.shape[1], r[0], rng, dist)
        rows = draw(np.sum(c * c, axis=1) if ls else c.shape[0], r[1], rng, dist)
        return cols, rows
    if cfg.method in ("tucker-cur", "tucker2-cur"):
        # a mode kept at full rank is not compressed (identity factor)
        return [None if k == c.shape[n] and cfg.method == "tucker-cur" else
                draw(_fiber_weights(c, n) if ls else c.size // c.shape[n], k, rng, dist)
                for n, k in enumerate(r)]
    if cfg.method == "fstd":
        return [draw(c.shape[n], k, rng, "uniform") for n, k in enumerate(r)]
    if cfg.method == "slice-tube-cur":
        i1, i2, i3 = c.shape
        slices = draw(slice_probs(c) if ls else i3, r[0], rng, dist)
        tubes = draw(tube_probs(c) if ls else i1 * i2, r[1], rng, dist)
        return slices, tubes
    lateral = draw(np.einsum("ijk,ijk->j", c, c) if ls else c.shape[1], r[0], rng, dist)
    horizontal = draw(np.einsum("ijk,ijk->i", c, c) if ls else c.shape[0], r[1], rng, dist)
    return lateral, horizontal


def approximate(c, cfg, draws):
    """Low-rank cross approximation of ``c`` from pre-drawn indices."""
    sm = None
    if cfg.smoother is not None and cfg.smoother.method != "none":
        sm = partial(smooth_fibers, cfg=cfg.smoother)
    m = cfg.method
    if m == "matrix-cur":
        return cur.matrix_cur(c, draws[0], draws[1], cfg.cur_mode, smooth=sm).full()
    if m == "tucker-cur":
        return cur.tucker_cur(c, draws, smooth=sm, smooth_modes=cfg.smooth_modes).full()
    if m == "tucker2-cur":
        return cur.tucker2_cur(c, draws[0], draws[1], smooth=sm).full()
    if m == "fstd":
        return cur.fstd(c, draws, smooth=sm, smooth_modes=cfg.smooth_modes).full()
    if m == "slice-tube-cur":
        return cur.slice_tube_cur(c, slices=draws[0], tubes=draws[1], smooth=sm).full()
    return cur.tubal_cur(c, draws[0], draws[1], cfg.cur_mode, smooth=sm).full()


def step(c, m, mask, cfg, iteration=0, draws=None):
    """One approximate-then-mask pass.

    Indices are drawn from the ``(seed, iteration)`` substream unless
    ``draws`` is given, so the result is a pure function of its arguments.
    """
    mask = np.asarray(mask, dtype=bool)
    if draws is None:
        draws = draw_indices(c, cfg, child_rng(cfg.seed, _DRAW_STREAM, iteration))
    x = approximate(c, cfg, draws)
    return np.where(mask, m, x)


def initial_estimate(m, mask, cfg):
    m = np.asarray(m, dtype=np.float64)
    if cfg.init == "observed-zeros":
        return np.where(mask, m, 0.0)
    noise = child_rng(cfg.seed, _INIT_STREAM).standard_normal(m.shape)
    return np.where(mask, m, noise)


def _metrics(ground_truth, c, want_ssim):
    p = psnr(ground_truth, c)
    s = None
    if want_ssim:
        s = ssim(ground_truth, c)
    return p, s


def complete(m, mask, cfg, ground_truth=None, callback=None, track_ssim=True):
    """Complete ``m`` from the entries where ``mask`` is true.

    Returns the final estimate and a :class:`CompletionTrace`.  When a
    ``ground_truth`` is given every iteration records PSNR (and SSIM when
    ``track_ssim`` and the image is large enough).  ``callback(n, c)`` is
    called with each new iterate.
    """
    m = np.asarray(m, dtype=np.float64)
    mask = np.asarray(mask)
    if mask.shape != m.shape:
        raise ValueError(f"mask shape {mask.shape} does not match data {m.shape}")
    if not np.all((mask == 0) | (mask == 1)):
        raise ValueError("mask must be binary")
    mask = mask.astype(bool)
    if not mask.any():
        raise ValueError("mask has no observed entries")
    cfg.validate(m.shape)
    want_ssim = (ground_truth is not None and track_ssim
                 and m.ndim >= 2 and min(m.shape[:2]) >= WINDOW)

    observed = np.where(mask, m, 0.0)
    c = initial_estimate(m, mask, cfg)
    trace = CompletionTrace()
    fixed = None
    if not cfg.resample_per_iteration:
        fixed = draw_indices(c, cfg, child_rng(cfg.seed, _DRAW_STREAM, 0))
    start = time.perf_counter()
    for n in range(cfg.max_iterations):
        nxt = step(c, observed, mask, cfg, n, fixed)
        prev_norm = frobenius_norm(c)
        diff = frobenius_norm(nxt - c)
        change = diff / prev_norm if prev_norm > 0 else (0.0 if diff == 0 else float("inf"))
        c = nxt
        rec = IterationRecord(n + 1, change, elapsed_ms=1000.0 * (time.perf_counter() - start))
        if ground_truth is not None:
            rec.psnr, rec.ssim = _metrics(ground_truth, c, want_ssim)
        trace.records.append(rec)
        if callback is not None:
            callback(n + 1, c)
        if change < cfg.tolerance:
            trace.converged = True
            break
    return c, trace


def with_overrides(cfg, **kw):
    """Copy of ``cfg`` with fields replaced (``None`` values are ignored)."""
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
