"""Report figures: PSNR/SSIM traces, ratio sweeps and image panels."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_trace", "plot_sweep", "plot_panel"]

# fixed metadata keeps PNG output byte-stable between runs
_META = {"Software": None}


def _save(fig, path):
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)


def plot_trace(trace, path, title=None):
    """PSNR (left axis) and SSIM (right axis) against iteration."""
    it = [r.iteration for r in trace.records]
    ps = [np.nan if r.psnr is None else r.psnr for r in trace.records]
    ss = [np.nan if r.ssim is None else r.ssim for r in trace.records]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(it, ps, color="tab:blue", lw=1.5)
    ax.set_xlabel("iteration")
    ax.set_ylabel("PSNR (dB)", color="tab:blue")
    if not np.all(np.isnan(ss)):
        ax2 = ax.twinx()
        ax2.plot(it, ss, color="tab:red", lw=1.2, ls="--")
        ax2.set_ylabel("SSIM", color="tab:red")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_sweep(rows, path):
    """Final PSNR and SSIM against missing ratio, one line per method."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for method in sorted({r["method"] for r in rows}):
        sel = sorted((r for r in rows if r["method"] == method), key=lambda r: r["ratio"])
        x = [r["ratio"] for r in sel]
        axes[0].plot(x, [r["psnr_db"] for r in sel], marker="o", label=method)
        axes[1].plot(x, [r["ssim"] for r in sel], marker="o", label=method)
    axes[0].set_ylabel("PSNR (dB)")
    axes[1].set_ylabel("SSIM")
    for ax in axes:
        ax.set_xlabel("missing ratio")
        ax.grid(alpha=0.3)
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def _show(ax, img, title):
    img = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    ax.imshow(img, cmap="gray" if img.ndim == 2 else None, vmin=0, vmax=255)
    ax.set_title(title, fontsize=9)
    ax.axis("off")


def plot_panel(images, titles, path):
    """Side-by-side images (e.g. original, masked, reconstruction)."""
    fig, axes = plt.subplots(1, len(images), figsize=(3 * len(images), 3.2))
    for ax, img, t in zip(np.atleast_1d(axes), images, titles):
        _show(ax, np.asarray(img), t)
    fig.tight_layout()
    _save(fig, path)
