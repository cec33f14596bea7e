"""
Command-line surface.

Flags that map onto configuration use dotted destinations ("metric.mode",
"train.alpha", ...) so they can be applied as overrides on top of the TOML
file. Usage errors raise ValidationError and exit with code 1.
"""

import argparse
import sys
from typing import Any, Callable, Dict, List, Optional

from src import __version__
from src.config import load_config, set_config
from src.pipeline import AnalysisPipeline, read_gamma_file
from src.utils.errors import EXIT_OK, EXIT_RUNTIME, ValidationError, exit_code_for
from src.utils.file_manager import FileManager
from src.utils.logger import Logger

SYNTH_DEFAULTS = {"points": ("uniform_cube", 1000), "blobs": ("blobs", 0), "graph": ("ring", 64)}


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors raise instead of exiting."""

    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--seed", type=int, dest="seed", help="Run seed")
    parser.add_argument("--output-dir", dest="output_dir", help="Directory for results and manifest.json")
    parser.add_argument("--quiet", action="store_const", const=False, dest="show_progress",
                        help="Disable progress bars")
    parser.add_argument("--verbose", action="store_const", const=True, dest="verbose",
                        help="Show debug messages")


def _metric(parser: argparse.ArgumentParser):
    parser.add_argument("--grid-count", type=int, dest="metric.grid_count", help="Number of thresholds K")
    parser.add_argument("--mode", choices=["hard", "smooth"], dest="metric.mode")
    parser.add_argument("--k", type=float, dest="metric.k", help="Sigmoid smoothing factor")
    parser.add_argument("--fac", type=float, dest="metric.fac", help="Gradient scaling factor")
    parser.add_argument("--normalizer", choices=["bounded", "paper_literal"], dest="metric.normalizer_mode")


def _layout(parser: argparse.ArgumentParser):
    parser.add_argument("--layout", choices=["BD", "BDHW", "BND"], help="Axis layout of NPY inputs")


def _training(parser: argparse.ArgumentParser):
    parser.add_argument("--widths", type=int, nargs="+", dest="train.widths", help="Layer widths")
    parser.add_argument("--activation", choices=["relu", "tanh"], dest="train.activation")
    parser.add_argument("--lr", type=float, dest="train.lr")
    parser.add_argument("--epochs", type=int, dest="train.epochs")
    parser.add_argument("--batch-size", type=int, dest="train.batch_size")
    parser.add_argument("--eval-size", type=int, dest="train.eval_size")
    parser.add_argument("--data-csv", dest="data.csv_path", help="Train on a CSV dataset instead of blobs")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="run_pipeline", description="Feature-network self-similarity toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("ssrate", help="SS_rate of one activation dump (NPY)")
    p.add_argument("input")
    p.add_argument("--epsilon", type=float, dest="metric.epsilon", help="Also report the edge count at this threshold")
    _layout(p)
    _metric(p)
    _common(p)

    p = sub.add_parser("boxcurve", help="Box-count curve of one activation dump")
    p.add_argument("input")
    p.add_argument("--plot", action="store_true", help="Also write boxcurve.svg")
    _layout(p)
    _metric(p)
    _common(p)

    p = sub.add_parser("invariance", help="Cross-layer invariance of several dumps")
    p.add_argument("kind", choices=["stat", "geom"])
    p.add_argument("inputs", nargs="+")
    p.add_argument("--target-dim", type=int, dest="invariance.target_dim")
    p.add_argument("--method", choices=["pca", "cmds"], dest="invariance.method")
    p.add_argument("--literal-d", action="store_const", const=True, dest="invariance.literal_d")
    p.add_argument("--fit-percentiles", type=float, nargs=2, dest="invariance.fit_percentiles")
    p.add_argument("--fit-points", type=int, dest="invariance.fit_points")
    _layout(p)
    _common(p)

    p = sub.add_parser("embed", help="MDS scatter (SVG + CSV) of a tensor or distance matrix")
    p.add_argument("input", help="NPY tensor or CSV distance matrix")
    p.add_argument("--labels", help="Headerless CSV with one group id per node")
    p.add_argument("--dim", type=int, dest="embed.dim")
    _layout(p)
    _common(p)

    p = sub.add_parser("boxcover", help="Reference box covering of an edge list")
    p.add_argument("edges")
    p.add_argument("--theta", type=int, nargs="+", default=[1, 2, 3], help="Box sizes")
    p.add_argument("--nodes", type=int, help="Node count (isolated nodes included)")
    _common(p)

    p = sub.add_parser("train", help="Train the MLP, optionally with the SS_rate penalty")
    p.add_argument("--alpha", type=float, dest="train.alpha", help="Penalty weight")
    p.add_argument("--penalty-fac", type=float, dest="train.penalty_fac", help="Penalty gradient scaling factor")
    p.add_argument("--gamma", type=float, dest="train.gamma_target", help="Scalar target for every layer")
    p.add_argument("--gamma-file", help="gamma.json written by calibrate")
    p.add_argument("--clip-norm", type=float, dest="train.clip_norm")
    p.add_argument("--compare", action="store_true", help="Baseline vs penalized over several seeds")
    p.add_argument("--repeats", type=int, dest="train.repeats")
    _training(p)
    _metric(p)
    _common(p)

    p = sub.add_parser("calibrate", help="Per-layer gamma from an unpenalized run")
    _training(p)
    _metric(p)
    _common(p)

    p = sub.add_parser("gradcheck", help="Finite-difference gradient self-test")
    _common(p)

    p = sub.add_parser("synth", help="Synthetic point sets, blob datasets and graphs")
    p.add_argument("kind", choices=sorted(SYNTH_DEFAULTS))
    p.add_argument("name", nargs="?", help="points: uniform_cube|segment|cantor; graph: ring|path|star|random_connected")
    p.add_argument("--n", type=int, help="Number of points or nodes")
    p.add_argument("--dim", type=int, help="Ambient dimension (points) or feature dimension (blobs)")
    p.add_argument("--depth", type=int, default=7, help="Cantor depth")
    p.add_argument("--p", type=float, default=0.2, help="Extra-edge probability (random_connected)")
    p.add_argument("--classes", type=int, dest="data.classes")
    p.add_argument("--per-class", type=int, dest="data.per_class")
    p.add_argument("--separation", type=float, dest="data.separation")
    _common(p)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = vars(args)
    overrides = {key: value for key, value in values.items()
                 if "." in key or key in ("seed", "output_dir", "show_progress", "verbose")}
    if values.get("data.csv_path"):
        overrides["data.source"] = "csv"
    if values.get("command") == "synth" and values.get("kind") == "blobs" and values.get("dim"):
        overrides["data.dim"] = values["dim"]
    return overrides


def _run_synth(pipeline: AnalysisPipeline, args) -> dict:
    name, n = SYNTH_DEFAULTS[args.kind]
    params = {"depth": args.depth, "p": args.p}
    if args.dim is not None:
        params["dim"] = args.dim
    return pipeline.synth(args.kind, args.name or name, args.n or n, **params)


def _run_train(pipeline: AnalysisPipeline, args) -> dict:
    gamma = read_gamma_file(args.gamma_file) if args.gamma_file else None
    return pipeline.train(gamma=gamma, compare=args.compare)


COMMANDS: Dict[str, Callable[[AnalysisPipeline, argparse.Namespace], dict]] = {
    "ssrate": lambda p, a: p.ssrate(a.input, a.layout),
    "boxcurve": lambda p, a: p.boxcurve(a.input, a.layout, a.plot),
    "invariance": lambda p, a: p.invariance(a.kind, a.inputs, a.layout),
    "embed": lambda p, a: p.embed(a.input, a.layout, a.labels),
    "boxcover": lambda p, a: p.boxcover(a.edges, a.theta, a.nodes),
    "train": _run_train,
    "calibrate": lambda p, a: p.calibrate(),
    "gradcheck": lambda p, a: p.gradcheck(),
    "synth": _run_synth,
}


def _summary_line(command: str, payload: dict) -> Optional[str]:
    if command == "ssrate":
        return f"ss_rate {payload['ss_rate']:.12g}"
    if command == "gradcheck":
        return (
            f"dSS/dC max relative error {payload['distance_max_relative_error']:.3e}; "
            f"parameter max relative error {payload['parameter_max_relative_error']:.3e}; "
            f"{'PASS' if payload['passed'] else 'FAIL'}"
        )
    return None


def cli_dispatch(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one subcommand and map the outcome to an exit code.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        int: 0 success, 1 validation error, 2 runtime error
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        Logger.configure(verbose=bool(args.verbose))
        config = set_config(load_config(args.config, _overrides(args)))
        FileManager.write_manifest(config.output_dir, args.command, argv, config.to_dict(), config.seed)
        payload = COMMANDS[args.command](AnalysisPipeline(config), args)
        line = _summary_line(args.command, payload)
        if line:
            print(line)
        if args.command == "gradcheck" and not payload["passed"]:
            Logger.log_error("Gradient check failed")
            return EXIT_RUNTIME
        return EXIT_OK
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)
    except KeyboardInterrupt:
        Logger.log_warning("Interrupted by user")
        return EXIT_RUNTIME
    except Exception as e:
        Logger.log_error(f"{type(e).__name__}: {e}")
        return exit_code_for(e)
