import numpy as np
import pytest

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def rel_err(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.linalg.norm((a - b).ravel()) / np.linalg.norm(b.ravel()))


# -- independent oracles -----------------------------------------------------

def circ_tprod(x, y):
    """t-product through the block-circulant matrix, fold(circ(X) unfold(Y))."""
    i1, i2, i3 = x.shape
    _, i4, _ = y.shape
    circ = np.zeros((i1 * i3, i2 * i3))
    for r in range(i3):
        for c in range(i3):
            circ[r * i1:(r + 1) * i1, c * i2:(c + 1) * i2] = x[:, :, (r - c) % i3]
    unf = np.vstack([y[:, :, k] for k in range(i3)])
    out = circ @ unf
    return np.stack([out[k * i1:(k + 1) * i1] for k in range(i3)], axis=2)


def naive_dft(x):
    n = x.shape[-1]
    k = np.arange(n)
    f = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return x @ f.T


def unfold_loop(x, n):
    """Unfolding by the column-major offset formula, one entry at a time."""
    shape = x.shape
    rest = [m for m in range(x.ndim) if m != n]
    cols = int(np.prod([shape[m] for m in rest]))
    out = np.empty((shape[n], cols))
    for idx in np.ndindex(*shape):
        col, stride = 0, 1
        for m in rest:
            col += idx[m] * stride
            stride *= shape[m]
        out[idx[n], col] = x[idx]
    return out


def tucker_instance(rng, shape, ranks):
    """Random tensor of exact Tucker rank ``ranks`` (generic factors)."""
    x = rng.standard_normal(ranks)
    for n, (s, r) in enumerate(zip(shape, ranks)):
        a = rng.standard_normal((s, r))
        x = np.moveaxis(np.tensordot(a, x, axes=(1, n)), 0, n)
    return x


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def astronaut():
    data = pytest.importorskip("skimage.data")
    img = data.astronaut().astype(np.float64)
    return img.reshape(256, 2, 256, 2, 3).mean(axis=(1, 3))
