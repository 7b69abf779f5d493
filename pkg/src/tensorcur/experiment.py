"""Experiment configuration and the end-to-end completion run.

An experiment is one JSON document::

    {
      "input": "astronaut.png",
      "out": "runs/astro95",
      "reshape": null,
      "mask": {"pattern": "random", "ratio": 0.95, "seed": 0},
      "completion": {
        "method": "tucker-cur", "ranks": [37, 37, 3],
        "max_iterations": 100, "tolerance": 1e-4, "seed": 0,
        "smoother": {"method": "moving-average", "span": 5}
      },
      "report": {"plot": false, "timing": false}
    }

``mask`` takes the :class:`MaskSpec` fields, ``completion`` the
:class:`CompletionConfig` fields and ``completion.smoother`` the
:class:`SmootherConfig` fields.
"""

from dataclasses import asdict, dataclass, field, fields
import csv
import io
import json
import os
import shutil
import tempfile
import time

import numpy as np

from .completion import CompletionConfig, complete
from .media import MaskSpec, load_media, make_mask, reshape_cm, save_media
from .metrics import WINDOW, psnr, ssim
from .smoothing import SmootherConfig

__all__ = ["ExperimentConfig", "load_config", "config_from_dict", "run", "trace_csv",
           "TRACE_HEADER"]

TRACE_HEADER = ("iteration", "rel_change", "psnr_db", "ssim", "elapsed_ms")


@dataclass(frozen=True)
class ExperimentConfig:
    input: str
    out: str
    mask: MaskSpec = field(default_factory=MaskSpec)
    completion: CompletionConfig = field(default_factory=CompletionConfig)
    reshape: tuple = None
    plot: bool = False
    timing: bool = False


def _pick(cls, d, what):
    d = dict(d or {})
    known = {f.name for f in fields(cls)}
    extra = set(d) - known
    if extra:
        raise ValueError(f"unknown {what} keys: {sorted(extra)}")
    return d


def config_from_dict(d):
    """Build an :class:`ExperimentConfig` from parsed JSON."""
    d = dict(d)
    top = {"input", "out", "mask", "completion", "reshape", "report"}
    if set(d) - top:
        raise ValueError(f"unknown config keys: {sorted(set(d) - top)}")
    for key in ("input", "out"):
        if not d.get(key):
            raise ValueError(f"config needs {key!r}")
    comp = _pick(CompletionConfig, d.get("completion"), "completion")
    if comp.get("smoother") is not None:
        comp["smoother"] = SmootherConfig(**_pick(SmootherConfig, comp["smoother"], "smoother"))
    for key in ("ranks", "smooth_modes"):
        if key in comp:
            comp[key] = tuple(comp[key])
    report = dict(d.get("report") or {})
    if set(report) - {"plot", "timing"}:
        raise ValueError(f"unknown report keys: {sorted(set(report) - {'plot', 'timing'})}")
    reshape = d.get("reshape")
    return ExperimentConfig(
        input=d["input"],
        out=d["out"],
        mask=MaskSpec(**_pick(MaskSpec, d.get("mask"), "mask")),
        completion=CompletionConfig(**comp),
        reshape=None if reshape is None else tuple(int(s) for s in reshape),
        plot=bool(report.get("plot", False)),
        timing=bool(report.get("timing", False)),
    )


def load_config(path):
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def config_to_dict(cfg):
    comp = asdict(cfg.completion)
    return {
        "input": cfg.input,
        "out": cfg.out,
        "reshape": None if cfg.reshape is None else list(cfg.reshape),
        "mask": asdict(cfg.mask),
        "completion": comp,
        "report": {"plot": cfg.plot, "timing": cfg.timing},
    }


def _fmt(v):
    if v is None:
        return ""
    return repr(float(v))


def trace_csv(trace, timing=False):
    """Trace as CSV text; ``elapsed_ms`` stays empty unless ``timing``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(TRACE_HEADER)
    for r in trace.records:
        w.writerow([r.iteration, _fmt(r.rel_change), _fmt(r.psnr), _fmt(r.ssim),
                    _fmt(r.elapsed_ms) if timing else ""])
    return buf.getvalue()


def _image_like(x, video):
    if video:
        return x.ndim in (3, 4)
    return x.ndim == 2 or (x.ndim == 3 and x.shape[2] in (1, 3))


def run(cfg, log=None):
    """Run one experiment and write its artifacts into ``cfg.out``.

    Everything is written into a scratch directory first and moved into
    place only after the run succeeded, so a failure leaves no outputs.
    Returns the summary dictionary.
    """
    if not os.path.exists(cfg.input):
        raise FileNotFoundError(f"input not found: {cfg.input}")
    truth = load_media(cfg.input)
    video = os.path.isdir(cfg.input)
    mask = make_mask(truth.shape, cfg.mask)
    work_shape = truth.shape if cfg.reshape is None else tuple(cfg.reshape)
    m = reshape_cm(truth, work_shape)
    omega = reshape_cm(mask, work_shape)
    cfg.completion.validate(work_shape)

    want_ssim = truth.ndim >= 2 and min(truth.shape[:2]) >= WINDOW
    scores = []

    def on_iter(n, c):
        est = reshape_cm(c, truth.shape)
        scores.append((psnr(truth, est), ssim(truth, est) if want_ssim else None))
        if log is not None:
            log(f"iter {n:4d}  psnr {scores[-1][0]:.3f} dB")

    start = time.perf_counter()
    est, trace = complete(np.where(omega, m, 0.0), omega, cfg.completion, callback=on_iter)
    wall = time.perf_counter() - start
    for rec, (p, s) in zip(trace.records, scores):
        rec.psnr, rec.ssim = p, s
    est = reshape_cm(est, truth.shape)
    masked = np.where(mask, truth, 0.0)
    final = trace.records[-1]

    summary = {
        "input": cfg.input,
        "shape": list(truth.shape),
        "work_shape": list(work_shape),
        "frames": int(truth.shape[-1]) if video else None,
        "method": cfg.completion.method,
        "ranks": list(cfg.completion.ranks),
        "smoother": None if cfg.completion.smoother is None else cfg.completion.smoother.method,
        "missing_ratio": float(1.0 - mask.mean()),
        "masked_psnr_db": psnr(truth, masked),
        "masked_ssim": ssim(truth, masked) if want_ssim else None,
        "psnr_db": final.psnr,
        "ssim": final.ssim,
        "iterations": len(trace),
        "converged": trace.converged,
    }
    if cfg.timing:
        summary["elapsed_s"] = wall

    parent = os.path.dirname(os.path.abspath(cfg.out))
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix=".tensorcur-", dir=parent)
    try:
        ext = "" if video else (".png" if _image_like(truth, video) else ".npy")
        save_media(masked, os.path.join(tmp, "masked" + ext), video=video)
        save_media(est, os.path.join(tmp, "reconstruction" + ext), video=video)
        with open(os.path.join(tmp, "trace.csv"), "w", newline="") as fh:
            fh.write(trace_csv(trace, cfg.timing))
        with open(os.path.join(tmp, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(os.path.join(tmp, "config.json"), "w") as fh:
            json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
            fh.write("\n")
        if cfg.plot:
            from .plotting import plot_panel, plot_trace
            plot_trace(trace, os.path.join(tmp, "trace.png"), title=cfg.completion.method)
            if _image_like(truth, False):
                plot_panel([truth, masked, est],
                           ["original", f"masked {summary['masked_psnr_db']:.2f} dB",
                            f"{cfg.completion.method} {final.psnr:.2f} dB"],
                           os.path.join(tmp, "panel.png"))
        os.makedirs(cfg.out, exist_ok=True)
        for name in sorted(os.listdir(tmp)):
            dst = os.path.join(cfg.out, name)
            if os.path.isdir(dst):
                shutil.rmtree(dst)
            shutil.move(os.path.join(tmp, name), dst)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    return summary
