"""Command-line entry point.

Precedence for every setting: built-in defaults < ``--config`` file < flags.
Errors end the process with status 2 and one line ``error: <category>: <message>``
on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import container
from .adc import AdcConfig, compute_adc_map
from .classifiers import classify, load_model, save_model
from .errors import DwSpectralError, InvalidInputError
from .features import build_training_set, make_roi_masks
from .metrics import evaluation_report
from .pipeline import (
    acquisition_from_config,
    evaluation_domain,
    load_config,
    load_phantom,
    noise_from_config,
    phantom_from_config,
    run_fcm,
    run_pipeline,
    save_phantom,
    train_supervised,
    write_report,
)
from .render import render_volume
from .signal import synthesize_dwi


def _config(args, overrides: dict | None = None) -> dict:
    return load_config(getattr(args, "config", None), overrides or {})


def cmd_phantom(args) -> None:
    ov = {}
    if args.grid:
        ov["grid"] = args.grid
    if args.roi_slice is not None:
        ov["roi"] = {"slice": args.roi_slice}
    cfg = _config(args, ov)
    phantom = phantom_from_config(cfg)
    save_phantom(args.out, phantom)
    r = cfg["roi"]
    container.write_volume(Path(args.out) / "roi", make_roi_masks(phantom, r["slice"], r["max_per_class"]))


def cmd_synth(args) -> None:
    ov: dict = {}
    if args.b_values:
        ov["acquisition"] = {"b_values": args.b_values}
    noise = {}
    if args.noise:
        noise["kind"] = args.noise
    if args.snr is not None:
        noise["snr"], noise["sigma"] = args.snr, None
    if args.sigma is not None:
        noise["sigma"] = args.sigma
    if noise:
        ov["noise"] = noise
    cfg = _config(args, ov)
    phantom = load_phantom(args.phantom)
    acq = acquisition_from_config(cfg)
    container.write_volume(args.out, synthesize_dwi(phantom, acq, noise_from_config(cfg, phantom, acq, args.seed)))


def cmd_adc(args) -> None:
    cfg = _config(args)["adc"]
    dwi = container.read_multispectral(args.dwi)
    conf = AdcConfig(args.c if args.c is not None else cfg["c"], args.floor if args.floor is not None else cfg["floor"])
    container.write_volume(args.out, compute_adc_map(dwi, None, conf, args.mode or cfg["mode"]))


def cmd_train(args) -> None:
    cfg = _config(args)
    if args.method == "fcm":
        if not args.adc:
            raise InvalidInputError("fcm training needs --adc")
        model, _ = run_fcm(container.read_volume(args.adc), cfg)
    else:
        if not (args.dwi and args.roi):
            raise InvalidInputError(f"{args.method} training needs --dwi and --roi")
        ts = build_training_set(container.read_multispectral(args.dwi), container.read_volume(args.roi), args.slices)
        model = train_supervised(args.method, ts, cfg, args.seed)
    save_model(args.out, model)


def cmd_classify(args) -> None:
    model = load_model(args.model)
    if model.kind == "fcm":
        if not args.adc:
            raise InvalidInputError("an fcm model classifies --adc")
        vol = container.read_volume(args.adc)
    else:
        if not args.dwi:
            raise InvalidInputError("supervised models classify --dwi")
        vol = container.read_multispectral(args.dwi)
    container.write_volume(args.out, classify(model, vol))


def cmd_evaluate(args) -> None:
    truth = container.read_volume(args.truth)
    preds = {}
    for item in args.pred:
        name, sep, path = item.partition("=")
        if not sep:
            raise InvalidInputError(f"--pred expects NAME=DIR, got {item!r}")
        preds[name] = container.read_volume(path)
    report = evaluation_report(truth, preds, args.kappa_literal, evaluation_domain(truth.grid, args.slices))
    if args.out:
        write_report(args.out, args.table, report)
    else:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def cmd_render(args) -> None:
    meta = container.read_meta(args.volume)
    if meta.get("bands", 1) > 1:
        ms = container.read_multispectral(args.volume)
        for i in range(ms.n_bands):
            render_volume(ms.band(i), args.out, args.slices, prefix=f"band{i}")
    else:
        render_volume(container.read_volume(args.volume), args.out, args.slices)


def cmd_pipeline(args) -> None:
    cfg = _config(args, {"seed": args.seed} if args.seed is not None else {})
    if cfg.get("seed") is None:
        raise InvalidInputError("pipeline requires --seed (or a seed in the config)")
    run_pipeline(cfg, args.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dwspectral", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("phantom", help="write a brain phantom and its ROI masks")
    s.add_argument("--out", required=True)
    s.add_argument("--config")
    s.add_argument("--grid", type=int, nargs=3, metavar=("NX", "NY", "NZ"))
    s.add_argument("--roi-slice", type=int)
    s.set_defaults(func=cmd_phantom)

    s = sub.add_parser("synth", help="synthesize diffusion-weighted volumes from a phantom")
    s.add_argument("--phantom", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--config")
    s.add_argument("--b-values", type=float, nargs="+")
    s.add_argument("--noise", choices=["none", "gaussian", "rician"])
    s.add_argument("--snr", type=float)
    s.add_argument("--sigma", type=float)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("adc", help="compute the ADC map")
    s.add_argument("--dwi", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--config")
    s.add_argument("--mode", choices=["faithful", "masked"])
    s.add_argument("--floor", type=float)
    s.add_argument("--c", type=float)
    s.set_defaults(func=cmd_adc)

    s = sub.add_parser("train", help="train one classifier")
    s.add_argument("--method", required=True, choices=["mlp", "rbf", "poly", "fcm"])
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--config")
    s.add_argument("--dwi")
    s.add_argument("--roi")
    s.add_argument("--adc")
    s.add_argument("--slices", type=int, nargs="+", help="zero-based slice indices for ROI samples")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("classify", help="label a volume with a trained model")
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--dwi")
    s.add_argument("--adc")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("evaluate", help="confusion matrix, accuracy, kappa and volume report")
    s.add_argument("--truth", required=True)
    s.add_argument("--pred", required=True, nargs="+", metavar="NAME=DIR")
    s.add_argument("--out", help="JSON report path (stdout if omitted)")
    s.add_argument("--table", help="text table path (with --out)")
    s.add_argument("--slices", type=int, nargs="+")
    s.add_argument("--kappa-literal", action="store_true",
                   help="divide chance agreement by the sum of squared cells")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("render", help="export slices as PGM images")
    s.add_argument("--volume", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--slices", type=int, nargs="+")
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("pipeline", help="run every stage from one config")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--config")
    s.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except DwSpectralError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, NotADirectoryError) as exc:
        print(f"error: invalid-input: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
