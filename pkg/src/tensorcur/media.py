"""Image/video I/O, observation masks and synthetic low-rank tensors."""

from dataclasses import dataclass
import os
import re

import numpy as np
from PIL import Image

from .sampling import make_rng
from .tensor import mode_n_product
from .tubal import tprod

__all__ = [
    "load_media",
    "save_media",
    "MaskSpec",
    "make_mask",
    "parse_lines",
    "save_mask",
    "synth",
    "reshape_cm",
]

PATTERNS = ("random", "columns", "rows", "grid", "file")


# -- media ------------------------------------------------------------------

def _load_png(path):
    with Image.open(path) as im:
        if im.mode in ("L", "LA", "1", "I", "I;16"):
            arr = np.asarray(im.convert("L"))
        else:
            arr = np.asarray(im.convert("RGB"))
    return arr.astype(np.float64)


def _frame_key(name):
    nums = re.findall(r"\d+", name)
    return (int(nums[-1]) if nums else -1, name)


def load_media(path):
    """Load an image, a frame directory or a ``.npy`` tensor as float64.

    RGB PNGs become ``H x W x 3``, grayscale PNGs ``H x W``.  A directory of
    numbered PNG frames becomes ``H x W x F`` (grayscale) or
    ``H x W x 3 x F`` (colour), frames sorted by their trailing number.
    """
    path = os.fspath(path)
    if os.path.isdir(path):
        names = sorted((n for n in os.listdir(path) if n.lower().endswith(".png")), key=_frame_key)
        if not names:
            raise ValueError(f"no PNG frames in {path}")
        frames = [_load_png(os.path.join(path, n)) for n in names]
        shapes = {f.shape for f in frames}
        if len(shapes) != 1:
            raise ValueError(f"frames in {path} have mixed sizes: {sorted(shapes)}")
        return np.stack(frames, axis=-1)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    if path.lower().endswith(".npy"):
        return np.asarray(np.load(path), dtype=np.float64)
    try:
        return _load_png(path)
    except OSError as err:
        raise ValueError(f"cannot read image {path}: {err}") from err


def _to_uint8(x):
    return np.clip(np.rint(x), 0, 255).astype(np.uint8)


def _save_png(x, path):
    if x.ndim == 3 and x.shape[2] == 1:
        x = x[:, :, 0]
    if x.ndim == 2:
        img = Image.fromarray(_to_uint8(x), mode="L")
    elif x.ndim == 3 and x.shape[2] == 3:
        img = Image.fromarray(_to_uint8(x), mode="RGB")
    else:
        raise ValueError(f"cannot write a tensor of shape {x.shape} as one PNG")
    # fixed metadata so identical data gives identical bytes
    img.save(path, format="PNG", optimize=False, compress_level=6)


def save_media(x, path, video=False):
    """Write ``x`` as a PNG, a frame directory (``video``) or ``.npy``.

    PNG output is clamped to [0, 255] and rounded to the nearest integer.
    For video the last mode indexes frames written as ``frame_0001.png`` ...
    """
    x = np.asarray(x, dtype=np.float64)
    path = os.fspath(path)
    if path.lower().endswith(".npy"):
        np.save(path, x)
        return
    if video:
        os.makedirs(path, exist_ok=True)
        width = max(4, len(str(x.shape[-1])))
        for f in range(x.shape[-1]):
            _save_png(x[..., f], os.path.join(path, f"frame_{f + 1:0{width}d}.png"))
        return
    _save_png(x, path)


def reshape_cm(x, shape):
    """Column-major reshape, used for the ``--reshape`` option."""
    x = np.asarray(x)
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape)) != x.size:
        raise ValueError(f"cannot reshape {x.shape} to {shape}")
    return np.reshape(x, shape, order="F")


# -- masks ------------------------------------------------------------------

def parse_lines(spec, n):
    """Parse a line-index spec for an axis of length ``n``.

    Accepts ``"3,4,5"``, ranges ``"10-19"`` (inclusive) and periodic blocks
    ``"every:W:P[:O]"`` meaning ``W`` consecutive lines out of every ``P``,
    starting at offset ``O`` (default 0).
    """
    if isinstance(spec, (list, tuple, np.ndarray)):
        idx = np.asarray(spec, dtype=np.int64)
    else:
        spec = str(spec).strip()
        if spec.startswith("every:"):
            parts = [int(p) for p in spec.split(":")[1:]]
            if len(parts) not in (2, 3):
                raise ValueError(f"bad block spec {spec!r}")
            width, period = parts[:2]
            offset = parts[2] if len(parts) == 3 else 0
            if width < 1 or period < width:
                raise ValueError(f"bad block spec {spec!r}")
            pos = np.arange(n)
            return np.flatnonzero(((pos - offset) % period) < width)
        out = []
        for tok in filter(None, (t.strip() for t in spec.split(","))):
            if "-" in tok[1:]:
                a, b = tok.split("-", 1)
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(tok))
        idx = np.asarray(out, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError(f"line index out of range [0, {n})")
    return np.unique(idx)


@dataclass(frozen=True)
class MaskSpec:
    """Missing-entry pattern.

    ``random`` removes ``round(ratio * size)`` entries uniformly.  ``columns``
    and ``rows`` remove whole pixel columns/rows in every channel and frame;
    ``grid`` removes both.  ``file`` reads a PNG where 0 marks missing and
    255 observed pixels.
    """

    pattern: str = "random"
    ratio: float = 0.0
    columns: object = None
    rows: object = None
    path: str = None
    seed: int = 0

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown mask pattern {self.pattern!r}; choose from {PATTERNS}")
        if self.pattern == "random" and not 0 <= self.ratio < 1:
            raise ValueError("ratio must lie in [0, 1)")
        if self.pattern == "file" and not self.path:
            raise ValueError("file mask needs a path")


def make_mask(shape, spec):
    """Boolean observation mask (True = observed) for data of ``shape``."""
    shape = tuple(int(s) for s in shape)
    total = int(np.prod(shape))
    if spec.pattern == "random":
        mask = np.ones(total, dtype=bool)
        k = int(round(spec.ratio * total))
        if k:
            mask[make_rng(spec.seed).permutation(total)[:k]] = False
        mask = mask.reshape(shape, order="F")
    elif spec.pattern == "file":
        with Image.open(spec.path) as im:
            plane = np.asarray(im.convert("L"))
        if not np.all((plane == 0) | (plane == 255)):
            raise ValueError("mask PNG must contain only 0 and 255")
        if plane.shape != shape[:2]:
            raise ValueError(f"mask PNG is {plane.shape}, data is {shape[:2]}")
        mask = np.broadcast_to((plane == 255).reshape(plane.shape + (1,) * (len(shape) - 2)),
                               shape).copy()
    else:
        if len(shape) < 2:
            raise ValueError("line masks need at least two modes")
        mask = np.ones(shape, dtype=bool)
        if spec.pattern in ("columns", "grid"):
            if spec.columns is None:
                raise ValueError("column pattern needs column indices")
            mask[:, parse_lines(spec.columns, shape[1])] = False
        if spec.pattern in ("rows", "grid"):
            if spec.rows is None:
                raise ValueError("row pattern needs row indices")
            mask[parse_lines(spec.rows, shape[0])] = False
    if not mask.any():
        raise ValueError("mask leaves no observed entries")
    return mask


def save_mask(mask, path):
    """Write the first plane of a mask as a 0/255 PNG."""
    mask = np.asarray(mask, dtype=bool)
    plane = mask.reshape(mask.shape[:2] + (-1,), order="F")
    if mask.ndim > 2 and not np.all(plane == plane[:, :, :1]):
        raise ValueError("mask differs across channels/frames; save it as .npy instead")
    Image.fromarray(np.where(plane[:, :, 0], 255, 0).astype(np.uint8), mode="L").save(path)


# -- synthetic data ---------------------------------------------------------

def _orthonormal(rng, n, r):
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return q


def synth(shape, ranks, noise=0.0, seed=0, kind="tucker"):
    """Random tensor of exact low rank plus optional Gaussian noise.

    ``kind="tucker"``: Gaussian core of size ``ranks`` times orthonormal
    factors.  ``kind="tubal"``: ``A * B`` with ``A`` of size
    ``I1 x r x I3`` and ``B`` of size ``r x I2 x I3`` (``ranks = (r,)``).
    ``noise`` is the standard deviation relative to the RMS of the clean
    tensor.
    """
    shape = tuple(int(s) for s in shape)
    ranks = tuple(int(r) for r in ranks)
    rng = make_rng(seed)
    if kind == "tucker":
        if len(ranks) != len(shape) or any(not 1 <= r <= s for r, s in zip(ranks, shape)):
            raise ValueError(f"ranks {ranks} invalid for shape {shape}")
        x = rng.standard_normal(ranks)
        for n, (s, r) in enumerate(zip(shape, ranks)):
            x = mode_n_product(x, _orthonormal(rng, s, r), n)
    elif kind == "tubal":
        if len(shape) != 3 or len(ranks) != 1 or not 1 <= ranks[0] <= min(shape[:2]):
            raise ValueError(f"tubal rank {ranks} invalid for shape {shape}")
        r = ranks[0]
        x = tprod(rng.standard_normal((shape[0], r, shape[2])),
                  rng.standard_normal((r, shape[1], shape[2])))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if noise:
        rms = np.sqrt(np.mean(x ** 2))
        x = x + noise * rms * rng.standard_normal(shape)
    return x
