"""Cross (CUR) approximations of matrices and tensors.

Every constructor takes the sampled index sets explicitly, so the factors
are a deterministic function of the data and the draws.  Constructors that
feed a completion loop accept an optional ``smooth`` callable which is
applied to the sampled fibers (a matrix whose columns are fibers) before
the middle factor is formed.
"""

from dataclasses import dataclass, field

import numpy as np

from .sampling import IndexDraw, draw, make_rng, slice_probs, tube_probs
from .tensor import fold, mode_n_product, multi_mode_product, pinv_stack, unfold
from .tubal import spectral_map, spectral_pinv, tprod, tprod_chain

__all__ = [
    "MatrixCurModel",
    "TuckerModel",
    "SliceTubeModel",
    "TubalModel",
    "matrix_cur",
    "matrix_cy",
    "tucker_cur",
    "tucker2_cur",
    "fstd",
    "fstd_core",
    "slice_tube_cur",
    "tubal_cur",
    "tubal_cx",
    "reconstruct",
]

MODES = ("least-squares", "intersection")


def _indices(d):
    if isinstance(d, IndexDraw):
        idx = d.indices
    else:
        idx = np.asarray(d, dtype=np.int64).ravel()
    if idx.size == 0:
        raise ValueError("empty index set")
    return idx


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _smooth_columns(m, smooth):
    return m if smooth is None else np.asarray(smooth(m), dtype=np.float64)


@dataclass
class MatrixCurModel:
    c: np.ndarray
    u: np.ndarray
    r: np.ndarray
    mode: str = "least-squares"

    def full(self):
        return self.c @ self.u @ self.r


@dataclass
class TuckerModel:
    """``core ×_1 factors[0] ×_2 factors[1] ...``; ``draws`` records the sampled fibers."""

    core: np.ndarray
    factors: list
    draws: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def shape(self):
        return tuple(f.shape[0] for f in self.factors)

    def full(self):
        return multi_mode_product(self.core, self.factors)


@dataclass
class SliceTubeModel:
    c: np.ndarray   # I1 x I2 x L1 sampled frontal slices
    r: np.ndarray   # L2 x I3 sampled tubes as rows
    u: np.ndarray   # L1 x L2
    d1: np.ndarray  # diagonal of the slice scaling
    d2: np.ndarray  # diagonal of the tube scaling
    slices: IndexDraw = None
    tubes: IndexDraw = None

    def full(self):
        return mode_n_product(self.c, (self.u @ self.r).T, 2)


@dataclass
class TubalModel:
    c: np.ndarray  # I1 x L1 x I3 lateral slices
    u: np.ndarray  # L1 x L2 x I3
    r: np.ndarray  # L2 x I2 x I3 horizontal slices
    mode: str = "least-squares"

    def full(self):
        return tprod_chain(self.c, self.u, self.r)


def reconstruct(model):
    """Dense tensor represented by a CUR model or a ``(c, y)`` pair."""
    if isinstance(model, tuple):
        c, y = model
        return c @ y if np.ndim(c) == 2 else tprod(c, y)
    return model.full()


# -- matrices ---------------------------------------------------------------

def matrix_cur(x, cols, rows, mode="least-squares", smooth=None):
    """``x ≈ C U R`` from sampled columns and rows.

    ``least-squares`` uses ``U = C⁺ X R⁺``; ``intersection`` uses ``U = W⁺``
    with ``W = X[rows, cols]``.  ``smooth`` acts on the sampled columns and
    on the sampled rows.
    """
    _check_mode(mode)
    x = np.asarray(x, dtype=np.float64)
    j = _indices(cols)
    i = _indices(rows)
    c = _smooth_columns(x[:, j], smooth)
    r = _smooth_columns(x[i, :].T, smooth).T
    if mode == "least-squares":
        u = pinv_stack(c) @ x @ pinv_stack(r)
    else:
        u = pinv_stack(x[np.ix_(i, j)])
    return MatrixCurModel(c, u, r, mode)


def matrix_cy(x, cols):
    """Column selection ``x ≈ C Y`` with ``Y = C⁺ X``."""
    x = np.asarray(x, dtype=np.float64)
    c = x[:, _indices(cols)]
    return c, pinv_stack(c) @ x


# -- fiber sampling (Tucker) ------------------------------------------------

def _sampled_fibers(x, n, d):
    idx = _indices(d)
    xn = unfold(x, n)
    if idx.max() >= xn.shape[1] or idx.min() < 0:
        raise ValueError(f"fiber index out of range for mode {n}")
    return xn[:, idx]


def tucker_cur(x, draws, smooth=None, smooth_modes=None):
    """Tucker model whose factors are sampled n-mode fibers.

    ``draws[n]`` indexes columns of ``unfold(x, n)``; a ``None`` entry leaves
    mode ``n`` uncompressed (identity factor).  The core is
    ``x ×_1 A_1⁺ ... ×_N A_N⁺``.  ``smooth`` is applied to the factors of the
    modes in ``smooth_modes`` (all modes by default).
    """
    x = np.asarray(x, dtype=np.float64)
    if len(draws) != x.ndim:
        raise ValueError(f"need one draw per mode ({x.ndim}), got {len(draws)}")
    if smooth_modes is None:
        smooth_modes = range(x.ndim)
    smooth_modes = set(smooth_modes)
    factors, pinvs, warnings = [], [], []
    for n, d in enumerate(draws):
        if d is None:
            factors.append(np.eye(x.shape[n]))
            pinvs.append(None)
            continue
        a = _sampled_fibers(x, n, d)
        if n in smooth_modes:
            a = _smooth_columns(a, smooth)
        a_pinv, rank = pinv_stack(a, return_rank=True)
        if rank < a.shape[1]:
            warnings.append(f"mode {n}: sampled fibers have rank {rank} < {a.shape[1]}")
        factors.append(a)
        pinvs.append(a_pinv)
    core = multi_mode_product(x, pinvs)
    return TuckerModel(core, factors, list(draws), warnings)


def tucker2_cur(x, col_draw, row_draw, smooth=None):
    """Tucker-2 cross approximation of a third-order tensor.

    Columns (mode-0 fibers) and rows (mode-1 fibers) are sampled; the third
    factor is the identity and the core is ``x ×_1 C⁺ ×_2 R⁺``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError("tucker2_cur expects a third-order tensor")
    return tucker_cur(x, [col_draw, row_draw, None], smooth=smooth, smooth_modes=(0, 1))


def _fstd_parts(x, index_sets, smooth=None, smooth_modes=None):
    x = np.asarray(x, dtype=np.float64)
    if len(index_sets) != x.ndim:
        raise ValueError(f"need one index set per mode ({x.ndim})")
    idx = [_indices(s) for s in index_sets]
    for n, i in enumerate(idx):
        if i.min() < 0 or i.max() >= x.shape[n]:
            raise ValueError(f"index out of range in mode {n}")
    if smooth_modes is None:
        smooth_modes = range(x.ndim)
    w = x[np.ix_(*idx)]
    fibers = []
    for n in range(x.ndim):
        grid = [np.arange(x.shape[m]) if m == n else i for m, i in enumerate(idx)]
        a = unfold(x[np.ix_(*grid)], n)
        if n in smooth_modes:
            a = _smooth_columns(a, smooth)
        fibers.append(a)
    return w, fibers


def fstd(x, index_sets, smooth=None, smooth_modes=None):
    """Fast sampling Tucker decomposition from one index set per mode.

    With ``W = x[I_1, I_2, ...]`` and ``A_n`` the n-mode fibers through the
    intersection, the model is ``⟦W; A_1 W_(1)⁺, A_2 W_(2)⁺, ...⟧``.
    """
    w, fibers = _fstd_parts(x, index_sets, smooth, smooth_modes)
    factors, warnings = [], []
    for n, a in enumerate(fibers):
        wn_pinv, rank = pinv_stack(unfold(w, n), return_rank=True)
        if rank < w.shape[n]:
            warnings.append(f"mode {n}: intersection unfolding has rank {rank} < {w.shape[n]}")
        factors.append(a @ wn_pinv)
    draws = [IndexDraw.of(_indices(i), s) for i, s in zip(index_sets, np.shape(x))]
    return TuckerModel(w, factors, draws, warnings)


def fstd_core(x, index_sets):
    """The intersection-based core ``U = W ×_n W_(n)⁺`` and the fiber factors ``A_n``.

    ``⟦U; A_1, A_2, ...⟧`` is the same tensor as :func:`fstd` builds; this
    form is kept for cross-checking.
    """
    w, fibers = _fstd_parts(x, index_sets)
    u = multi_mode_product(w, [pinv_stack(unfold(w, n)) for n in range(w.ndim)])
    return u, fibers


# -- slice-tube sampling ----------------------------------------------------

def slice_tube_cur(x, l1=None, l2=None, seed=0, distribution="length-squared",
                   slices=None, tubes=None, smooth=None):
    """Frontal-slice / tube cross approximation ``x ≈ C ×_3 (U R)ᵀ``.

    ``l1`` frontal slices and ``l2`` tubes are drawn (length-squared by
    default) unless explicit ``slices`` / ``tubes`` draws are given.  Tube
    ``(i, j)`` has flat index ``i + I1 * j``.  ``U = D1 (D2 W D1)⁺ D2`` where
    ``W[t, s]`` is tube ``t`` at slice ``s`` and ``D1``, ``D2`` hold
    ``1 / sqrt(L p)`` for the drawn probabilities.  ``smooth`` acts on the
    columns of the sampled frontal slices.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError("slice_tube_cur expects a third-order tensor")
    i1, i2, i3 = x.shape
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    if slices is None:
        if l1 is None or not 1 <= l1 <= i3:
            raise ValueError(f"l1 must be in [1, {i3}]")
        p = slice_probs(x) if distribution == "length-squared" else i3
        slices = draw(p, l1, rng, distribution)
    if tubes is None:
        if l2 is None or not 1 <= l2 <= i1 * i2:
            raise ValueError(f"l2 must be in [1, {i1 * i2}]")
        q = tube_probs(x) if distribution == "length-squared" else i1 * i2
        tubes = draw(q, l2, rng, distribution)
    s_idx = _indices(slices)
    t_idx = _indices(tubes)
    c = x[:, :, s_idx]
    if smooth is not None:
        c = fold(_smooth_columns(unfold(c, 0), smooth), 0, c.shape)
    r = x.reshape(i1 * i2, i3, order="F")[t_idx]
    w = r[:, s_idx]
    d1 = 1.0 / np.sqrt(len(s_idx) * slices.probs)
    d2 = 1.0 / np.sqrt(len(t_idx) * tubes.probs)
    u = d1[:, None] * pinv_stack(d2[:, None] * w * d1[None, :]) * d2[None, :]
    return SliceTubeModel(c, r, u, d1, d2, slices, tubes)


# -- t-product sampling -----------------------------------------------------

def _smooth_lateral(c, smooth):
    # mode-0 fibers of the lateral slices
    if smooth is None:
        return c
    return fold(_smooth_columns(unfold(c, 0), smooth), 0, c.shape)


def _smooth_horizontal(r, smooth):
    # mode-1 fibers of the horizontal slices
    if smooth is None:
        return r
    return fold(_smooth_columns(unfold(r, 1), smooth), 1, r.shape)


def tubal_cur(x, lateral, horizontal, mode="least-squares", smooth=None):
    """Tubal cross approximation ``x ≈ C * U * R`` under the t-product.

    ``C = x[:, J, :]`` and ``R = x[I, :, :]``.  ``least-squares`` takes
    ``U = C⁺ * x * R⁺``; ``intersection`` takes ``U = W⁺`` with
    ``W = x[I, J, :]``.
    """
    _check_mode(mode)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError("tubal_cur expects a third-order tensor")
    j = _indices(lateral)
    i = _indices(horizontal)
    if j.max() >= x.shape[1] or i.max() >= x.shape[0]:
        raise ValueError("slice index out of range")
    c = _smooth_lateral(x[:, j, :], smooth)
    r = _smooth_horizontal(x[i, :, :], smooth)
    if mode == "least-squares":
        u = spectral_map(lambda cs, xs, rs: spectral_pinv(cs) @ xs @ spectral_pinv(rs), c, x, r)
    else:
        u = spectral_map(spectral_pinv, x[np.ix_(i, j)])
    return TubalModel(c, u, r, mode)


def tubal_cx(x, lateral, smooth=None):
    """Lateral-slice selection ``x ≈ C * Y`` with ``Y = C⁺ * x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError("tubal_cx expects a third-order tensor")
    c = _smooth_lateral(x[:, _indices(lateral), :], smooth)
    y = spectral_map(lambda cs, xs: spectral_pinv(cs) @ xs, c, x)
    return c, y
