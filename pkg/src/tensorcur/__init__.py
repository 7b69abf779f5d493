"""Cross (CUR) tensor approximation and approximate-then-mask completion."""

from .completion import (
    CompletionConfig,
    CompletionTrace,
    IterationRecord,
    complete,
    relative_change,
    step,
)
from .cur import (
    MatrixCurModel,
    SliceTubeModel,
    TubalModel,
    TuckerModel,
    fstd,
    matrix_cur,
    matrix_cy,
    reconstruct,
    slice_tube_cur,
    tubal_cur,
    tubal_cx,
    tucker2_cur,
    tucker_cur,
)
from .media import MaskSpec, load_media, make_mask, save_media, synth
from .metrics import MetricReport, evaluate, psnr, ssim
from .sampling import IndexDraw, SampleSpec, draw_without_replacement, slice_probs, tube_probs
from .smoothing import SmootherConfig, smooth, smooth_fibers
from .tensor import fold, mode_n_product, multi_mode_product, pinv_stack, unfold
from .tubal import tpinv, tprod, tqr, ttranspose

__version__ = "0.1.0"

__all__ = [
    "CompletionConfig",
    "CompletionTrace",
    "IterationRecord",
    "complete",
    "relative_change",
    "step",
    "MatrixCurModel",
    "SliceTubeModel",
    "TubalModel",
    "TuckerModel",
    "fstd",
    "matrix_cur",
    "matrix_cy",
    "reconstruct",
    "slice_tube_cur",
    "tubal_cur",
    "tubal_cx",
    "tucker2_cur",
    "tucker_cur",
    "MaskSpec",
    "load_media",
    "make_mask",
    "save_media",
    "synth",
    "MetricReport",
    "evaluate",
    "psnr",
    "ssim",
    "IndexDraw",
    "SampleSpec",
    "draw_without_replacement",
    "slice_probs",
    "tube_probs",
    "SmootherConfig",
    "smooth",
    "smooth_fibers",
    "fold",
    "mode_n_product",
    "multi_mode_product",
    "pinv_stack",
    "unfold",
    "tpinv",
    "tprod",
    "tqr",
    "ttranspose",
]
