"""PSNR and SSIM.

SSIM uses an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03 and
dynamic range 255; the local statistics are evaluated only where the window
fits inside the image and then averaged.  Inputs with more than two modes
are scored plane by plane (channels, then frames) and averaged.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

__all__ = ["MetricReport", "psnr", "ssim", "evaluate", "PSNR_CAP"]

PSNR_CAP = 99.0
WINDOW = 11
SIGMA = 1.5
K1, K2 = 0.01, 0.03


def psnr(ref, test, peak=255.0):
    """Peak signal-to-noise ratio in dB, capped at ``PSNR_CAP``."""
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {test.shape}")
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = np.mean((ref - test) ** 2)
    if mse == 0:
        return PSNR_CAP
    return float(min(PSNR_CAP, 10.0 * np.log10(peak * peak / mse)))


def _gaussian_window():
    t = np.arange(WINDOW) - (WINDOW - 1) / 2
    g = np.exp(-(t ** 2) / (2 * SIGMA ** 2))
    return g / g.sum()


def _filter_valid(img, g):
    out = correlate1d(img, g, axis=0, mode="constant")
    out = correlate1d(out, g, axis=1, mode="constant")
    h = WINDOW // 2
    return out[h:img.shape[0] - h, h:img.shape[1] - h]


def _ssim_plane(a, b, data_range):
    g = _gaussian_window()
    c1 = (K1 * data_range) ** 2
    c2 = (K2 * data_range) ** 2
    mu_a = _filter_valid(a, g)
    mu_b = _filter_valid(b, g)
    saa = _filter_valid(a * a, g) - mu_a * mu_a
    sbb = _filter_valid(b * b, g) - mu_b * mu_b
    sab = _filter_valid(a * b, g) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * sab + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (saa + sbb + c2)
    return float(np.mean(num / den))


def _planes(x):
    # (H, W, ...) -> list of H x W planes in column-major order of the rest
    rest = x.shape[2:]
    flat = x.reshape(x.shape[:2] + (-1,), order="F")
    return [flat[:, :, k] for k in range(flat.shape[2])], rest


def ssim(ref, test, data_range=255.0):
    """Mean structural similarity; multi-plane inputs average per plane."""
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {test.shape}")
    if ref.ndim < 2:
        raise ValueError("ssim needs at least a 2-D image")
    if min(ref.shape[:2]) < WINDOW:
        raise ValueError(f"image {ref.shape[:2]} is smaller than the {WINDOW}x{WINDOW} window")
    pa, _ = _planes(ref)
    pb, _ = _planes(test)
    return float(np.mean([_ssim_plane(a, b, data_range) for a, b in zip(pa, pb)]))


@dataclass
class MetricReport:
    psnr: float
    ssim: float
    per_frame: list = field(default_factory=list)  # (psnr, ssim) per frame

    def as_dict(self):
        return {"psnr_db": self.psnr, "ssim": self.ssim,
                "per_frame": [{"psnr_db": p, "ssim": s} for p, s in self.per_frame]}


def evaluate(ref, test, video=False, peak=255.0):
    """PSNR over all entries and SSIM; with ``video`` the last mode indexes frames."""
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    s = ssim(ref, test, peak) if min(ref.shape[:2]) >= WINDOW else float("nan")
    per_frame = []
    if video:
        for f in range(ref.shape[-1]):
            a, b = ref[..., f], test[..., f]
            fs = ssim(a, b, peak) if min(a.shape[:2]) >= WINDOW else float("nan")
            per_frame.append((psnr(a, b, peak), fs))
    return MetricReport(psnr(ref, test, peak), s, per_frame)
