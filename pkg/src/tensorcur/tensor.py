"""Dense multilinear kernels.

Tensors are plain ``numpy.ndarray`` objects of dtype float64.  Modes are
0-based numpy axes.  The n-unfolding places the n-mode fibers as columns,
with the remaining modes in ascending order and the lowest of them varying
fastest (column-major ordering of the trailing indices).
"""

import numpy as np

__all__ = [
    "as_tensor",
    "unfold",
    "fold",
    "mode_n_product",
    "multi_mode_product",
    "matrix_pinv",
    "pinv_stack",
    "frobenius_norm",
    "hadamard",
]


def as_tensor(x):
    """Return ``x`` as a float64 array with at least one dimension."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        x = x.reshape(1)
    if 0 in x.shape:
        raise ValueError(f"tensor extents must be positive, got {x.shape}")
    return x


def _check_mode(ndim, n):
    if not 0 <= n < ndim:
        raise ValueError(f"mode {n} out of range for a {ndim}-way tensor")


def unfold(x, n):
    """Mode-``n`` unfolding: an ``I_n x prod(other extents)`` matrix."""
    x = np.asarray(x)
    _check_mode(x.ndim, n)
    return np.reshape(np.moveaxis(x, n, 0), (x.shape[n], -1), order="F")


def fold(m, n, shape):
    """Inverse of :func:`unfold` for a tensor of the given ``shape``."""
    m = np.asarray(m)
    shape = tuple(int(s) for s in shape)
    _check_mode(len(shape), n)
    rest = shape[:n] + shape[n + 1:]
    expected = (shape[n], int(np.prod(rest, dtype=np.int64)))
    if m.shape != expected:
        raise ValueError(f"matrix of shape {m.shape} cannot fold to {shape} along mode {n}")
    return np.moveaxis(np.reshape(m, (shape[n],) + rest, order="F"), 0, n)


def mode_n_product(x, b, n):
    """``x ×_n b``: contract mode ``n`` of ``x`` with the columns of ``b``."""
    x = np.asarray(x)
    b = np.asarray(b)
    _check_mode(x.ndim, n)
    if b.ndim != 2 or b.shape[1] != x.shape[n]:
        raise ValueError(
            f"matrix of shape {b.shape} incompatible with mode {n} of extent {x.shape[n]}")
    y = np.tensordot(b, x, axes=(1, n))
    return np.moveaxis(y, 0, n)


def multi_mode_product(x, matrices, modes=None):
    """Apply ``x ×_{m1} B1 ×_{m2} B2 ...``; ``None`` entries are skipped."""
    if modes is None:
        modes = range(len(matrices))
    for b, n in zip(matrices, modes):
        if b is not None:
            x = mode_n_product(x, b, n)
    return x


def pinv_stack(a, tol=None, return_rank=False, shared=False):
    """SVD pseudoinverse of a matrix or of a stack of matrices (last two axes).

    Singular values below ``tol * sigma_max`` are treated as zero.  The
    default relative cutoff is ``eps * max(rows, cols)``.  With ``shared``
    the cutoff uses the largest singular value of the whole stack, as for
    one block-diagonal matrix.  With ``return_rank`` the numerical rank of
    each matrix is returned as well.
    """
    a = np.asarray(a)
    rows, cols = a.shape[-2:]
    if tol is None:
        tol = np.finfo(np.float64).eps * max(rows, cols)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError(f"SVD did not converge in pseudoinverse: {err}") from err
    if shared:
        cutoff = tol * np.max(s, initial=0.0)
    else:
        cutoff = tol * s[..., :1]
    keep = s > cutoff
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    v = np.swapaxes(vh, -1, -2).conj()
    pinv = (v * s_inv[..., None, :]) @ np.swapaxes(u, -1, -2).conj()
    if return_rank:
        return pinv, np.count_nonzero(keep, axis=-1)
    return pinv


def matrix_pinv(m, tol=None):
    """Moore-Penrose pseudoinverse of a real matrix."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("matrix_pinv expects a nonempty 2-D array")
    return pinv_stack(m, tol)


def frobenius_norm(x):
    return float(np.sqrt(np.sum(np.square(np.asarray(x, dtype=np.float64)))))


def hadamard(x, y):
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    return x * y
