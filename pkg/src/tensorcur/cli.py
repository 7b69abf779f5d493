"""Command line interface: ``tensorcur {synth,mask,complete,eval,bench}``."""

import argparse
from concurrent.futures import ThreadPoolExecutor
import csv
import json
import os
import sys

import numpy as np

from .completion import METHODS, CompletionConfig, complete
from .experiment import ExperimentConfig, load_config, run
from .media import MaskSpec, load_media, make_mask, save_mask, synth
from .metrics import evaluate, psnr
from .smoothing import METHODS as SMOOTHERS, SmootherConfig

__all__ = ["main", "build_parser"]


class CliError(Exception):
    pass


def _dims(text, sep="x"):
    try:
        vals = tuple(int(t) for t in str(text).replace(",", sep).split(sep) if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like 64{sep}64{sep}48, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty dimension list")
    return vals


def _ranks(text):
    return _dims(text, ",")


def _span(text):
    v = float(text)
    return int(v) if v > 1 and v == int(v) else v


def _add_completion_flags(p):
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--ranks", type=_ranks, help="comma-separated ranks / sample counts")
    p.add_argument("--samples-lateral", type=int, help="tubal-cur lateral slices")
    p.add_argument("--samples-horizontal", type=int, help="tubal-cur horizontal slices")
    p.add_argument("--smooth", choices=SMOOTHERS, help="fiber smoother")
    p.add_argument("--span", type=_span, help="smoother span (samples, or fraction <= 1)")
    p.add_argument("--iters", type=int, help="maximum iterations")
    p.add_argument("--tol", type=float, help="relative-change tolerance")
    p.add_argument("--seed", type=int)
    p.add_argument("--init", choices=("observed-zeros", "random-gaussian"))
    p.add_argument("--fixed-samples", action="store_true",
                   help="draw indices once instead of every iteration")


def _add_mask_flags(p):
    p.add_argument("--mask", help="mask pattern (random, columns, rows, grid) or a mask PNG")
    p.add_argument("--ratio", type=float, help="missing ratio for random masks")
    p.add_argument("--columns", help="columns to remove, e.g. 3,4,5 or every:6:48")
    p.add_argument("--rows", help="rows to remove, same syntax as --columns")
    p.add_argument("--mask-seed", type=int)


def build_parser():
    ap = argparse.ArgumentParser(prog="tensorcur", description="Cross tensor approximation "
                                 "and approximate-then-mask completion of images and videos.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a random low-rank tensor")
    p.add_argument("--shape", type=_dims, required=True)
    p.add_argument("--ranks", type=_ranks, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=("tucker", "tubal"), default="tucker")
    p.add_argument("--out", required=True, help=".npy path")

    p = sub.add_parser("mask", help="write an observation mask")
    p.add_argument("--input", help="media whose shape the mask takes")
    p.add_argument("--shape", type=_dims)
    _add_mask_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help=".png (0 missing, 255 observed) or .npy")

    p = sub.add_parser("complete", help="mask an input and complete it")
    p.add_argument("--input")
    p.add_argument("--config", help="JSON experiment config; flags override it")
    p.add_argument("--out")
    p.add_argument("--reshape", type=_dims, help="column-major working shape, e.g. 64x64x48")
    _add_completion_flags(p)
    _add_mask_flags(p)
    p.add_argument("--plot", action="store_true", help="also render trace and panel figures")
    p.add_argument("--timing", action="store_true", help="record wall-clock times")
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("eval", help="PSNR/SSIM of a test image against a reference")
    p.add_argument("ref")
    p.add_argument("test")
    p.add_argument("--video", action="store_true")

    p = sub.add_parser("bench", help="sweep missing ratios and write PSNR/SSIM curves")
    p.add_argument("--input", required=True)
    p.add_argument("--runs", nargs="+", required=True,
                   help="METHOD:RANKS entries, e.g. tucker-cur:37,37,3")
    p.add_argument("--ratios", type=lambda s: [float(t) for t in s.split(",")],
                   default=[0.5, 0.7, 0.8, 0.9, 0.95])
    p.add_argument("--smooth", choices=SMOOTHERS)
    p.add_argument("--span", type=_span, default=5)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")
    return ap


def _mask_spec(args, base=None, seed=0):
    base = base or MaskSpec()
    kw = {}
    if args.mask is not None:
        if args.mask in ("random", "columns", "rows", "grid"):
            kw["pattern"] = args.mask
        else:
            kw["pattern"], kw["path"] = "file", args.mask
    for name in ("ratio", "columns", "rows"):
        if getattr(args, name) is not None:
            kw[name] = getattr(args, name)
    if "pattern" not in kw and ("columns" in kw or "rows" in kw) and base.pattern == "random":
        kw["pattern"] = "grid" if "columns" in kw and "rows" in kw else (
            "columns" if "columns" in kw else "rows")
    if args.mask_seed is not None:
        kw["seed"] = args.mask_seed
    elif seed is not None:
        kw["seed"] = seed
    d = {**base.__dict__, **kw}
    return MaskSpec(**d)


def _completion_cfg(args, base):
    d = dict(base.__dict__)
    if args.method:
        d["method"] = args.method
    if args.ranks:
        d["ranks"] = args.ranks
    if args.samples_lateral is not None or args.samples_horizontal is not None:
        if d["method"] != "tubal-cur":
            raise CliError("--samples-lateral/--samples-horizontal apply to tubal-cur only")
        if args.samples_lateral is None or args.samples_horizontal is None:
            raise CliError("give both --samples-lateral and --samples-horizontal")
        d["ranks"] = (args.samples_lateral, args.samples_horizontal)
    if args.smooth is not None or args.span is not None:
        sm = d["smoother"] or SmootherConfig()
        sm_kw = dict(sm.__dict__)
        if args.smooth is not None:
            sm_kw["method"] = args.smooth
        if args.span is not None:
            sm_kw["span"] = args.span
        d["smoother"] = SmootherConfig(**sm_kw)
    for flag, key in (("iters", "max_iterations"), ("tol", "tolerance"),
                      ("seed", "seed"), ("init", "init")):
        if getattr(args, flag) is not None:
            d[key] = getattr(args, flag)
    if args.fixed_samples:
        d["resample_per_iteration"] = False
    if not d["ranks"]:
        raise CliError(f"{d['method']} needs --ranks")
    return CompletionConfig(**d)


def _cmd_complete(args):
    if args.config:
        if not os.path.isfile(args.config):
            raise CliError(f"config not found: {args.config}")
        base = load_config(args.config)
    else:
        if not args.input or not args.out:
            raise CliError("complete needs --input and --out (or --config)")
        base = ExperimentConfig(input=args.input, out=args.out)
    seed = args.seed if args.seed is not None else (None if args.config else 0)
    cfg = ExperimentConfig(
        input=args.input or base.input,
        out=args.out or base.out,
        mask=_mask_spec(args, base.mask, seed),
        completion=_completion_cfg(args, base.completion),
        reshape=args.reshape or base.reshape,
        plot=args.plot or base.plot,
        timing=args.timing or base.timing,
    )
    log = None if args.quiet else (lambda s: print(s, file=sys.stderr))
    summary = run(cfg, log=log)
    print(json.dumps(summary, sort_keys=True))


def _cmd_synth(args):
    x = synth(args.shape, args.ranks, args.noise, args.seed, args.kind)
    if not args.out.lower().endswith(".npy"):
        raise CliError("synth writes .npy files")
    np.save(args.out, x)
    print(json.dumps({"out": args.out, "shape": list(x.shape), "ranks": list(args.ranks),
                      "kind": args.kind}, sort_keys=True))


def _cmd_mask(args):
    if args.input:
        shape = load_media(args.input).shape
    elif args.shape:
        shape = args.shape
    else:
        raise CliError("mask needs --input or --shape")
    mask = make_mask(shape, _mask_spec(args, seed=args.seed))
    if args.out.lower().endswith(".npy"):
        np.save(args.out, mask)
    else:
        save_mask(mask, args.out)
    print(json.dumps({"out": args.out, "shape": list(shape),
                      "missing": int(mask.size - mask.sum())}, sort_keys=True))


def _cmd_eval(args):
    for p in (args.ref, args.test):
        if not os.path.exists(p):
            raise CliError(f"not found: {p}")
    ref, test = load_media(args.ref), load_media(args.test)
    video = args.video or os.path.isdir(args.ref)
    print(json.dumps(evaluate(ref, test, video=video).as_dict(), sort_keys=True))


def _parse_run(text):
    if ":" not in text:
        raise CliError(f"bench run must look like METHOD:RANKS, got {text!r}")
    method, ranks = text.split(":", 1)
    if method not in METHODS:
        raise CliError(f"unknown method {method!r}")
    return method, _ranks(ranks)


def _bench_job(truth, method, ranks, ratio, args):
    smoother = SmootherConfig(args.smooth, args.span) if args.smooth else None
    cfg = CompletionConfig(method=method, ranks=ranks, smoother=smoother,
                           max_iterations=args.iters, tolerance=args.tol, seed=args.seed)
    mask = make_mask(truth.shape, MaskSpec("random", ratio, seed=args.seed))
    m = np.where(mask, truth, 0.0)
    est, trace = complete(m, mask, cfg, ground_truth=truth)
    return method, ranks, ratio, psnr(truth, m), trace


def _cmd_bench(args):
    if not os.path.exists(args.input):
        raise CliError(f"input not found: {args.input}")
    truth = load_media(args.input)
    runs = [_parse_run(r) for r in args.runs]
    for method, ranks in runs:
        CompletionConfig(method=method, ranks=ranks).validate(truth.shape)
    for r in args.ratios:
        MaskSpec("random", r)
    jobs = [(m, rk, r) for m, rk in runs for r in args.ratios]
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        results = list(pool.map(lambda j: _bench_job(truth, *j, args), jobs))

    curves, finals = [], []
    for method, ranks, ratio, masked_psnr, trace in results:
        label = f"{method}({','.join(map(str, ranks))})"
        for rec in trace.records:
            curves.append([label, ratio, rec.iteration, rec.rel_change, rec.psnr, rec.ssim])
        last = trace.records[-1]
        finals.append({"method": label, "ratio": ratio, "masked_psnr_db": masked_psnr,
                       "psnr_db": last.psnr, "ssim": last.ssim, "iterations": len(trace)})
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "curves.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["method", "ratio", "iteration", "rel_change", "psnr_db", "ssim"])
        w.writerows([[c[0], c[1], c[2]] + ["" if v is None else repr(float(v)) for v in c[3:]]
                     for c in curves])
    cols = ["method", "ratio", "masked_psnr_db", "psnr_db", "ssim", "iterations"]
    with open(os.path.join(args.out, "results.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, cols, lineterminator="\r\n")
        w.writeheader()
        w.writerows(finals)
    if args.plot:
        from .plotting import plot_sweep
        plot_sweep(finals, os.path.join(args.out, "sweep.png"))
    print(json.dumps({"out": args.out, "results": finals}, sort_keys=True))


_COMMANDS = {"synth": _cmd_synth, "mask": _cmd_mask, "complete": _cmd_complete,
             "eval": _cmd_eval, "bench": _cmd_bench}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except (CliError, ValueError, FileNotFoundError, OSError) as err:
        print(f"tensorcur {args.command}: error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
