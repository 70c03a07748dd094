"""Command-line front end: generate, preprocess, train, evaluate, sweep."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from . import __version__
from .experiment import ExperimentConfig, OPTIMIZERS, default_suite, sweep
from .ingest import DataFormatError, generate_synthetic, load_csv, write_csv
from .metrics import evaluate
from .network import Architecture, ArchitectureError, init_weights, load_model, save_model
from .preprocess import dataset_from_features, preprocess_pipeline, write_preprocessed
from .backprop import train_backprop
from .rprop import train_rprop

log = logging.getLogger("originnet")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_DATA = 4
EXIT_RUNTIME = 5

DEFAULTS = ExperimentConfig()

EPILOG = f"""\
defaults: lr {DEFAULTS.epsilon}, momentum {DEFAULTS.alpha}, epochs {DEFAULTS.max_epochs}, \
target {DEFAULTS.error_target:g}, eta-plus {DEFAULTS.eta_plus}, eta-minus {DEFAULTS.eta_minus}, \
delta-max {DEFAULTS.delta_max:g}, delta-min {DEFAULTS.delta_min:g}, delta-init {DEFAULTS.delta_init}, \
sigma {DEFAULTS.sigma}, repeats 30, seed 0, jobs 1.

exit codes: 0 ok; 2 usage error (unknown subcommand or bad flag); 3 input file missing;
4 invalid data, model or architecture; 5 other runtime failure.

environment: ORIGINNET_LOG sets log verbosity (DEBUG, INFO, WARNING, ERROR)."""


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def parse_architecture(s: str) -> Architecture:
    """Parse dash notation such as ``47-15-4``."""
    parts = s.strip().split("-")
    if len(parts) < 2:
        raise ArchitectureError(f"architecture {s!r} needs at least input and output sizes")
    sizes = []
    for p in parts:
        if not p.isdigit() or int(p) < 1:
            raise ArchitectureError(f"architecture {s!r}: bad layer size {p!r}")
        sizes.append(int(p))
    return Architecture(tuple(sizes))


def _arch_type(s):
    try:
        return parse_architecture(s)
    except ArchitectureError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _add_hyper(p):
    g = p.add_argument_group("hyperparameters")
    g.add_argument("--lr", type=float, default=DEFAULTS.epsilon, help="backprop learning rate")
    g.add_argument("--momentum", type=float, default=DEFAULTS.alpha, help="backprop momentum")
    g.add_argument("--epochs", type=int, default=DEFAULTS.max_epochs, help="maximum epochs")
    g.add_argument("--target", type=float, default=DEFAULTS.error_target, help="training MSE target")
    g.add_argument("--eta-plus", type=float, default=DEFAULTS.eta_plus, help="rprop increase factor")
    g.add_argument("--eta-minus", type=float, default=DEFAULTS.eta_minus, help="rprop decrease factor")
    g.add_argument("--delta-max", type=float, default=DEFAULTS.delta_max, help="rprop upper step bound")
    g.add_argument("--delta-min", type=float, default=DEFAULTS.delta_min, help="rprop lower step bound")
    g.add_argument("--delta-init", type=float, default=DEFAULTS.delta_init, help="rprop initial step")
    g.add_argument("--sigma", type=float, default=DEFAULTS.sigma, help="sigmoid slope")
    g.add_argument("--init-range", type=float, default=DEFAULTS.init_half_width,
                   help="half-width of the uniform weight initialisation")
    g.add_argument("--online", action="store_true", help="per-sample backprop updates instead of per-epoch")


def _config(args) -> ExperimentConfig:
    return replace(
        DEFAULTS, epsilon=args.lr, alpha=args.momentum, max_epochs=args.epochs,
        error_target=args.target, eta_plus=args.eta_plus, eta_minus=args.eta_minus,
        delta_max=args.delta_max, delta_min=args.delta_min, delta_init=args.delta_init,
        sigma=args.sigma, init_half_width=args.init_range,
        backprop_mode="online" if args.online else "batch",
        stratified=getattr(args, "stratified", False),
        accuracy_mode=getattr(args, "accuracy_mode", "exact"),
    )


class _Formatter(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    pass


def build_parser() -> argparse.ArgumentParser:
    fmt = _Formatter
    parser = argparse.ArgumentParser(
        prog="originnet", description="Origin classification from metabolite profiles with "
        "sigmoid MLPs trained by backpropagation or RPROP.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("generate", help="write a synthetic 94x47 metabolite CSV", formatter_class=fmt)
    p.add_argument("--seed", type=int, default=42, help="generator seed")
    p.add_argument("--out", required=True, help="CSV to write")

    p = sub.add_parser("preprocess", help="zero-replace, log10 and z-score a raw CSV", formatter_class=fmt)
    p.add_argument("--data", required=True, help="raw metabolite CSV")
    p.add_argument("--out", required=True, help="feature CSV; provenance goes to <out>.provenance.json")
    p.add_argument("--floor", type=float, default=1e-5, help="replacement value for zeros")
    p.add_argument("--axis", choices=("row", "column"), default="row", help="normalisation axis")

    for name, helptext in (("train", "train one network on the full dataset"),
                           ("evaluate", "score a saved model on a dataset"),
                           ("sweep", "repeated random-split protocol over architectures")):
        p = sub.add_parser(name, help=helptext, formatter_class=fmt, epilog=EPILOG if name != "evaluate" else None)
        p.add_argument("--data", required=True, help="metabolite CSV (raw unless --preprocessed)")
        p.add_argument("--preprocessed", action="store_true",
                       help="--data is already a preprocess output")
        p.add_argument("--out", required=True, help={"train": "model JSON to write",
                                                      "evaluate": "result JSON to write",
                                                      "sweep": "report JSON to write"}[name])
        p.add_argument("--accuracy-mode", choices=("exact", "argmax"), default="exact",
                       help="exact: thresholded vector must equal the code; argmax: largest output")
        if name == "evaluate":
            p.add_argument("--model", required=True, help="model JSON written by train")
            continue
        p.add_argument("--seed", type=int, default=0, help="weight-init seed (train) or master seed (sweep)")
        if name == "train":
            p.add_argument("--arch", type=_arch_type, required=True, help="e.g. 47-15-4")
            p.add_argument("--optimizer", choices=OPTIMIZERS, default="backprop")
            p.add_argument("--history", help="epoch history JSON (default <out>.history.json)")
        else:
            p.add_argument("--arch", type=_arch_type, action="append",
                           help="restrict the suite to this architecture (repeatable)")
            p.add_argument("--optimizer", choices=OPTIMIZERS, action="append",
                           help="restrict the suite to this optimizer (repeatable)")
            p.add_argument("--repeats", type=int, default=30, help="random splits per suite entry")
            p.add_argument("--csv", help="also write the summary table as CSV")
            p.add_argument("--jobs", type=int, default=1, help="parallel sweep entries")
            p.add_argument("--stratified", action="store_true", help="stratify splits by origin")
        _add_hyper(p)
    return parser


def _load_dataset(args):
    if args.preprocessed:
        return dataset_from_features(load_csv(args.data, allow_negative=True))
    return preprocess_pipeline(load_csv(args.data))


def cmd_generate(args):
    m = generate_synthetic(args.seed)
    write_csv(m, args.out)
    print(f"wrote {m.shape[0]}x{m.shape[1]} synthetic matrix to {args.out}")


def cmd_preprocess(args):
    raw = load_csv(args.data)
    ds = preprocess_pipeline(raw, floor=args.floor, axis=args.axis)
    sidecar = write_preprocessed(ds, args.out, raw.metabolites)
    print(f"wrote features to {args.out}, provenance to {sidecar}")
    if ds.provenance.constant_rows:
        log.warning("constant rows mapped to zero: %s", list(ds.provenance.constant_rows))


def cmd_train(args):
    ds = _load_dataset(args)
    cfg = _config(args)
    net = init_weights(args.arch, args.seed, cfg.init_half_width, cfg.sigma)
    if args.arch.n_inputs != ds.features.shape[1] or args.arch.n_outputs != len(ds.vocabulary):
        raise CliError(f"architecture {args.arch} does not fit data with {ds.features.shape[1]} "
                       f"features and {len(ds.vocabulary)} classes", EXIT_DATA)
    if args.optimizer == "backprop":
        net, hist = train_backprop(net, ds, cfg.backprop())
    else:
        net, hist = train_rprop(net, ds, cfg.rprop())
    save_model(net, args.out)
    hist_path = args.history or f"{args.out}.history.json"
    hist.write_json(hist_path)
    res = evaluate(net, ds, cfg.accuracy_mode)
    print(f"{args.arch} {args.optimizer}: {hist.stop_reason} after {hist.epochs_used} epochs, "
          f"training MSE {hist.mse[-1]:.5f}, accuracy {res.accuracy_percent:.2f}%")


def cmd_evaluate(args):
    ds = _load_dataset(args)
    net = load_model(args.model)
    res = evaluate(net, ds, args.accuracy_mode)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(res.to_dict(), fh, indent=2)
        fh.write("\n")
    print(f"accuracy {res.accuracy_percent:.2f}% ({res.n_correct}/{res.n_total}), "
          f"MSE {res.mse:.5f}, R2 {res.r2:.4f}")


def cmd_sweep(args):
    ds = _load_dataset(args)
    cfg = _config(args)
    suite = default_suite(ds.features.shape[1], len(ds.vocabulary))
    if args.arch:
        wanted = {str(a) for a in args.arch}
        suite = [(a, o) for a, o in suite if str(a) in wanted]
        known = {str(a) for a, _ in suite}
        suite += [(a, o) for a in args.arch if str(a) not in known for o in OPTIMIZERS]
    if args.optimizer:
        suite = [(a, o) for a, o in suite if o in args.optimizer]
    if not suite:
        raise CliError("the --arch/--optimizer filters leave an empty suite", EXIT_USAGE)
    if args.repeats < 1:
        raise CliError("--repeats must be >= 1", EXIT_USAGE)
    report = sweep(ds, suite, cfg, args.seed, args.repeats, max(args.jobs, 1))
    report.write_json(args.out)
    if args.csv:
        report.write_csv(args.csv)
    print(report.format_table())


COMMANDS = {"generate": cmd_generate, "preprocess": cmd_preprocess, "train": cmd_train,
            "evaluate": cmd_evaluate, "sweep": cmd_sweep}


def main(argv=None) -> int:
    level = os.environ.get("ORIGINNET_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except CliError as e:
        print(f"originnet: error: {e}", file=sys.stderr)
        return e.code
    except FileNotFoundError as e:
        print(f"originnet: error: {e}", file=sys.stderr)
        return EXIT_MISSING
    except (DataFormatError, ArchitectureError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"originnet: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # noqa: BLE001
        log.debug("unhandled failure", exc_info=True)
        print(f"originnet: error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
