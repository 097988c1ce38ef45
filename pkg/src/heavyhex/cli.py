"""Command-line entry point: ``heavyhex <subcommand> ...``.

Exit status is 0 on success, 1 when inputs fail validation (one line
``error: ...`` on stderr) and 2 for usage errors.  Every subcommand prints
its resolved configuration, including the seed, to stderr before working.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .canonical import SpanNotMaterialized
from .code import build_layout, check_distance
from .dataset import CANONICAL_METHODS, VERSION as DATASET_VERSION, DatasetError, canonicalize, generate, load
from .decoders import (
    MODEL_VERSION,
    TrainConfig,
    default_hidden,
    load_models,
    save_models,
    train_decoders,
)
from .evaluation import BENCH_METHODS, bench_gauge, logical_error_rate, logical_error_rate_instances
from .noise import MODELS, NoiseConfig, p_step_for
from .pipeline import (
    ConfigError,
    RunConfig,
    baseline_decoders,
    load_config,
    points_csv,
    resolve_config,
    run_sweep,
    write_sweep,
)


def _err(*a):
    print(*a, file=sys.stderr)


def _show_config(name: str, conf: dict):
    _err(f"{name} config: " + json.dumps(conf, sort_keys=True))


def _noise_from(args) -> NoiseConfig:
    if args.p_step is not None and args.q is not None:
        raise ValueError("give either --p-step or --q, not both")
    if args.p_step is None and args.q is None:
        raise ValueError("one of --p-step or --q is required")
    p = args.p_step if args.p_step is not None else p_step_for(args.q, args.steps)
    return NoiseConfig(args.model, p, args.steps, args.syndrome_noise, args.seed)


def _add_noise_args(p: argparse.ArgumentParser):
    p.add_argument("--d", type=int, required=True, help="code distance (odd, >= 3)")
    p.add_argument("--model", choices=MODELS, default="bitflip")
    p.add_argument("--p-step", type=float, help="per-step error probability")
    p.add_argument("--q", type=float, help="per-cycle error probability (alternative to --p-step)")
    p.add_argument("--steps", type=int, default=11, help="faulty steps per cycle (default 11)")
    p.add_argument("--syndrome-noise", action="store_true", help="flip each syndrome bit with the cycle probability")
    p.add_argument("--seed", type=int, default=0)


# ---------------------------------------------------------------- commands


def cmd_layout(args) -> int:
    check_distance(args.d)
    _show_config("layout", {"d": args.d, "seed": None})
    layout = build_layout(args.d)
    if args.json:
        print(json.dumps(layout.to_json(), sort_keys=True))
    else:
        info = layout.to_json()
        for key in ("x_gauge_generators", "z_gauge_generators", "z_stabilizers", "x_stabilizers"):
            print(f"{key}: {len(info[key])}")
            for supp in info[key]:
                print("  " + " ".join(map(str, supp)))
    return 0


def cmd_gen_data(args) -> int:
    check_distance(args.d)
    noise = _noise_from(args)
    if args.n < 1:
        raise ValueError(f"N must be >= 1, got {args.n}")
    conf = {"d": args.d, **noise.to_dict(), "n": args.n, "canonical": args.canonical, "out": str(args.out)}
    _show_config("gen-data", conf)
    ds = generate(build_layout(args.d), noise, args.n, args.canonical, extra_header=conf)
    ds.write(args.out)
    _err(f"wrote {len(ds)} records to {args.out}")
    return 0


def cmd_canonicalize(args) -> int:
    _show_config("canonicalize", {"data": str(args.data), "method": args.method, "out": str(args.out), "seed": None})
    ds = load(args.data)
    try:
        ds = canonicalize(ds, args.method)
    except SpanNotMaterialized as ex:
        raise DatasetError(str(ex)) from None
    ds.write(args.out)
    _err(f"wrote {len(ds)} records to {args.out}")
    return 0


def cmd_train(args) -> int:
    ds = load(args.data)
    hidden = args.hidden or default_hidden(ds.d)
    cfg = TrainConfig(args.batch, args.epochs, args.lr, args.instances, args.seed, hidden)
    if args.lr <= 0:
        raise ValueError("learning rate must be > 0")
    if cfg.batch_size > len(ds):
        raise ValueError(f"batch_size {cfg.batch_size} exceeds dataset size {len(ds)}")
    conf = {"data": str(args.data), "labels": args.labels, "target": args.target, "hidden": hidden,
            "epochs": args.epochs, "batch": args.batch, "lr": args.lr, "instances": args.instances,
            "seed": args.seed, "workers": args.workers, "out": str(args.out)}
    _show_config("train", conf)
    decs, traces = train_decoders(ds, cfg, args.labels, target=args.target, workers=args.workers)
    meta = {"config": conf, "dataset": ds.header, "final_loss": [t[-1] if t else None for t in traces]}
    save_models(args.out, decs, meta)
    _err(f"wrote {len(decs)} models to {args.out}")
    return 0


def cmd_eval(args) -> int:
    check_distance(args.d)
    noise = _noise_from(args)
    if args.trials < 1:
        raise ValueError("trials must be >= 1")
    conf = {"d": args.d, **noise.to_dict(), "trials": args.trials, "decoder": args.decoder,
            "models": str(args.models) if args.models else None}
    _show_config("eval", conf)
    layout = build_layout(args.d)
    points = []
    if args.decoder == "ffnn":
        if not args.models:
            raise ValueError("--models is required for the ffnn decoder")
        decs = load_models(args.models)
        if decs[0].d != args.d:
            raise ValueError(f"models were trained for d={decs[0].d}, not d={args.d}")
        pt, rates = logical_error_rate_instances(decs, layout, noise, args.trials, noise.seed, labels=decs[0].labels)
        _err("instance rates: " + ", ".join(f"{r:.6g}" for r in rates))
        points.append(pt)
    else:
        if args.decoder == "lookup" and args.d != 3:
            raise ValueError("lookup decoding is only supported for d=3")
        for dec in baseline_decoders(layout, noise.model, noise.q, [args.decoder]):
            points.append(logical_error_rate(dec, layout, noise, args.trials, noise.seed))
    text = points_csv(points, conf)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


_SWEEP_FLAGS = (
    "d", "model", "p_step", "q", "steps", "n_train", "trials", "seed", "canonical", "labels",
    "decoders", "hidden", "epochs", "batch", "lr", "instances", "out", "axis",
)


def cmd_sweep(args) -> int:
    file_values = load_config(args.config) if args.config else {}
    overrides = {}
    for key in _SWEEP_FLAGS:
        v = getattr(args, key)
        if v is not None:
            overrides[key] = v
    if args.syndrome_noise:
        overrides["syndrome_noise"] = True
    if args.workers is not None:
        overrides["workers"] = args.workers
    cfg: RunConfig = resolve_config(file_values, overrides)
    _show_config("sweep", cfg.to_dict())
    res = run_sweep(cfg, log=_err)
    paths = write_sweep(res, cfg, figures=not args.no_figures)
    sys.stdout.write(paths["csv"].read_text())
    print("---")
    print(json.dumps({"pseudo_thresholds": res.pseudo_thresholds, "threshold": res.threshold}, sort_keys=True))
    for k, p in paths.items():
        _err(f"wrote {k}: {p}")
    return 0


def cmd_bench_gauge(args) -> int:
    check_distance(args.d)
    methods = args.methods.split(",")
    conf = {"d": args.d, "n": args.n, "methods": methods, "q": args.q, "seed": args.seed}
    _show_config("bench-gauge", conf)
    rows = bench_gauge(args.d, args.n, methods, q=args.q, seed=args.seed)
    print("method,d,n,seconds,distinct_labels")
    for r in rows:
        print(f"{r['method']},{r['d']},{r['n']},{r['seconds']:.6f},{r['distinct_labels']}")
    return 0


# ---------------------------------------------------------------- parser


def _list(conv):
    def parse(text):
        return [conv(t) for t in text.replace(",", " ").split()]

    return parse


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heavyhex", description=__doc__.splitlines()[0])
    ap.add_argument(
        "--version",
        action="version",
        version=f"heavyhex {__version__} (dataset format v{DATASET_VERSION}, model format v{MODEL_VERSION})",
    )
    ap.add_argument("--workers", type=int, default=None, help="worker processes for training (default 1)")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("layout", help="print stabilizer and gauge supports")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("gen-data", help="sample a labelled dataset (JSON lines)")
    _add_noise_args(p)
    p.add_argument("--n", type=int, required=True, help="number of records")
    p.add_argument("--canonical", choices=CANONICAL_METHODS, default="exact")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("canonicalize", help="fill canonical labels of an existing dataset")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--method", choices=("search", "rank", "exact", "phase"), default="exact")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_canonicalize)

    p = sub.add_parser("train", help="train neural decoders on a dataset")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--labels", choices=("raw", "canonical"), default="canonical")
    p.add_argument("--target", choices=("x", "z"), default=None, help="error type to predict (default from noise model)")
    p.add_argument("--hidden", type=int, default=0, help="hidden units (0: 128/256/512 for d=3/5/7)")
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--batch", type=int, default=10_000)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--instances", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="Monte Carlo logical error rate of one decoder")
    _add_noise_args(p)
    p.add_argument("--decoder", choices=("ffnn", "mwpm", "lookup"), default="mwpm")
    p.add_argument("--models", type=Path, help="model file from 'train' (ffnn decoder)")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--out", type=Path, help="CSV output (default stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="full sweep from a key = value config file; flags override keys")
    p.add_argument("--config", type=Path)
    p.add_argument("--d", type=_list(int))
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--p-step", dest="p_step", type=_list(float))
    p.add_argument("--q", type=_list(float))
    p.add_argument("--steps", type=int)
    p.add_argument("--syndrome-noise", action="store_true")
    p.add_argument("--n-train", dest="n_train", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--canonical", choices=CANONICAL_METHODS)
    p.add_argument("--labels", type=_list(str))
    p.add_argument("--decoders", type=_list(str))
    p.add_argument("--hidden", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--instances", type=int)
    p.add_argument("--axis", choices=("q_effective", "p_step"))
    p.add_argument("--out", help="output directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench-gauge", help="time bit-flip canonicalisation methods")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--methods", default="none,search,rank", help=f"comma-separated subset of {','.join(BENCH_METHODS)}")
    p.add_argument("--q", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench_gauge)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    workers = args.workers
    if workers is not None and workers < 1:
        _err("error: --workers must be >= 1")
        return 1
    if args.command != "sweep":
        args.workers = workers or 1
    try:
        return args.func(args)
    except (ConfigError, DatasetError, FileNotFoundError, ValueError) as ex:
        msg = str(ex).splitlines()[0] if str(ex) else type(ex).__name__
        _err(f"error: {msg}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
