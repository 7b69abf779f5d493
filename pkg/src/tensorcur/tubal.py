"""t-product algebra for third-order tensors.

All products are evaluated frontal-slice-wise in the Fourier domain along
the tubes (mode 2).  Real inputs have conjugate-symmetric spectra, so only
the first ``I_3 // 2 + 1`` spectral slices are computed and the inverse
transform is a real FFT.
"""

import numpy as np

from .tensor import pinv_stack

__all__ = [
    "fft_tubes",
    "ifft_tubes",
    "tprod",
    "ttranspose",
    "tpinv",
    "tqr",
    "tubal_identity",
    "spectral_map",
    "spectral_pinv",
]

IMAG_TOL = 1e-8


def _check3(x, name="x"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"{name} must be a third-order tensor, got shape {x.shape}")
    return x


def fft_tubes(x):
    """Unnormalized DFT of every tube ``x[i, j, :]``."""
    return np.fft.fft(np.asarray(x), axis=2)


def ifft_tubes(s):
    """Inverse of :func:`fft_tubes`, returned as a real tensor.

    Raises if the imaginary residue is larger than ``IMAG_TOL`` relative to
    the result, which means the spectrum was not conjugate-symmetric.
    """
    y = np.fft.ifft(s, axis=2)
    scale = max(1.0, float(np.max(np.abs(y.real), initial=0.0)))
    resid = float(np.max(np.abs(y.imag), initial=0.0))
    if resid > IMAG_TOL * scale:
        raise ValueError(f"inverse FFT has imaginary residue {resid:.3g}; input spectrum is not real")
    return np.ascontiguousarray(y.real)


def _to_half(x):
    # (I3', I1, I2) stack of spectral slices
    return np.moveaxis(np.fft.rfft(x, axis=2), 2, 0)


def _from_half(stack, n):
    return np.fft.irfft(np.moveaxis(stack, 0, 2), n=n, axis=2)


def spectral_map(fn, *tensors):
    """Apply ``fn`` to the stacked spectral frontal slices of ``tensors``.

    ``fn`` receives arrays of shape ``(k, rows, cols)`` and must return one
    such array (or a tuple of them) that commutes with complex conjugation;
    matrix products, pseudoinverses and QR all qualify.
    """
    xs = [_check3(t) for t in tensors]
    n = xs[0].shape[2]
    if any(t.shape[2] != n for t in xs):
        raise ValueError("tube lengths differ")
    out = fn(*[_to_half(t) for t in xs])
    if isinstance(out, tuple):
        return tuple(_from_half(o, n) for o in out)
    return _from_half(out, n)


def tprod(x, y):
    """t-product ``x * y`` of an ``I1 x I2 x I3`` and an ``I2 x I4 x I3`` tensor."""
    x = _check3(x, "x")
    y = _check3(y, "y")
    if x.shape[1] != y.shape[0] or x.shape[2] != y.shape[2]:
        raise ValueError(f"t-product shape mismatch: {x.shape} * {y.shape}")
    return spectral_map(np.matmul, x, y)


def tprod_chain(*tensors):
    """t-product of several tensors, computed with a single transform each."""
    xs = [_check3(t) for t in tensors]
    for a, b in zip(xs, xs[1:]):
        if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
            raise ValueError(f"t-product shape mismatch: {a.shape} * {b.shape}")

    def chain(*stacks):
        out = stacks[0]
        for s in stacks[1:]:
            out = out @ s
        return out

    return spectral_map(chain, *xs)


def ttranspose(x):
    """Tensor transpose: transpose every frontal slice and reverse slices 2..I3."""
    x = _check3(x)
    order = np.r_[0, np.arange(x.shape[2] - 1, 0, -1)]
    return np.ascontiguousarray(np.transpose(x, (1, 0, 2))[:, :, order])


def spectral_pinv(stack, tol=None):
    """Pseudoinverse of every spectral slice with one cutoff for the stack.

    The spectral slices are the diagonal blocks of the block-circulant
    matrix, so the cutoff follows that matrix: ``tol`` (default
    ``eps * max(I1, I2) * I3``) times its largest singular value.  A slice
    holding only round-off is then treated as zero instead of inverted.
    """
    if tol is None:
        n3 = 2 * (stack.shape[0] - 1) + 1
        tol = np.finfo(np.float64).eps * max(stack.shape[-2:]) * n3
    return pinv_stack(stack, tol, shared=True)


def tpinv(x, tol=None):
    """Tensor Moore-Penrose pseudoinverse under the t-product."""
    return spectral_map(lambda s: spectral_pinv(s, tol), x)


def tqr(x):
    """Tubal QR ``x = q * r`` from reduced QR of every spectral slice."""
    x = _check3(x)
    return spectral_map(lambda s: tuple(np.linalg.qr(s, mode="reduced")), x)


def tubal_identity(n, tube_length):
    e = np.zeros((n, n, tube_length))
    e[:, :, 0] = np.eye(n)
    return e
