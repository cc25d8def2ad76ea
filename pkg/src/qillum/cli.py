"""Command-line entry point: figure sweeps to CSV, ``verify`` and ``show-config``.

Precedence for every parameter, lowest first: built-in defaults, per-figure
defaults, ``--textparams``, the ``--config`` file, command-line flags.  A
scalar flag for a swept axis (``--eta`` on ``eps-vs-p``) collapses that grid
to the single value.
"""
from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import checks
from .config import GRID_KEYS, RunConfig, format_config, load_config
from .errors import NumericalHealthError, ParameterError, QillumError
from .experiments import (
    COLUMNS,
    DEFAULT_GRIDS,
    FIGURE_DEFAULTS,
    FIGURES,
    GRID_AXES,
    SweepSpec,
    columns_help,
    emit_csv,
    format_csv,
    run_sweep,
    sweep_comments,
)

EXIT_OK = 0
EXIT_PARAM = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

TEXT_PARAMS = {"eta": 0.01, "p": 0.9}

FIGURE_HELP = {
    "convergence": "exponents versus truncation dimension D",
    "norm-ratio": "spectral-norm ratio of the PS-DE and ICO interference terms",
    "eps-vs-p": "exponents versus loss survival probability p",
    "eps-vs-eta": "exponents versus target reflectivity eta",
    "gamma-sweep": "exponents versus control decoherence gamma (eta defaults to 0.05)",
}

# CLI dest -> config key
SCALAR_FLAGS = {
    "eta": "eta",
    "p": "p",
    "thermal_n": "thermal_n",
    "nt": "nt",
    "dim": "dim",
    "gamma": "gamma",
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for numerical health
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAM, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("grid must not be empty")
    return values


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("grid must not be empty")
    return values


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("parameters")
    g.add_argument("--eta", type=float, help="target reflectivity (default 0.1)")
    g.add_argument("--p", type=float, help="loss survival probability (default 0.8)")
    g.add_argument("--thermal-n", type=float, help="thermal mean photon number N (default 0.5)")
    g.add_argument("--nt", type=float, help="probe mean photon number N_t (default 0.01)")
    g.add_argument("--dim", type=int, help="truncation dimension D per mode (default 10)")
    g.add_argument("--gamma", type=float, help="control decoherence coefficient (default 1)")
    g.add_argument("--tol-s", type=float, help="golden-section tolerance on s (default 1e-6)")
    g.add_argument("--jobs", type=int, help="worker processes (default 1)")
    g.add_argument("--config", help="key = value config file")


def _add_grids(p: argparse.ArgumentParser, figure: str) -> None:
    g = p.add_argument_group("grids")
    for axis in GRID_AXES[figure]:
        conv = _int_list if axis == "dim" else _float_list
        default = ",".join(str(v) for v in DEFAULT_GRIDS[figure][axis])
        g.add_argument(f"--{axis}-grid", type=conv, metavar="LIST", help=f"comma-separated {axis} values (default {default})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qillum", description="Quantum illumination with superposed causal orders: sweeps and checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for figure in FIGURES:
        sp = sub.add_parser(
            figure,
            help=FIGURE_HELP[figure],
            description=FIGURE_HELP[figure],
            epilog="CSV columns:\n" + columns_help(figure),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        _add_common(sp)
        _add_grids(sp, figure)
        sp.add_argument("--out", help="output CSV path (default: stdout)")
        if figure == "convergence":
            sp.add_argument("--textparams", action="store_true",
                            help=f"use eta={TEXT_PARAMS['eta']}, p={TEXT_PARAMS['p']} instead of the default eta=0.1, p=0.8")
    vp = sub.add_parser("verify", help="run the acceptance checks; exit 0 only if all pass")
    vp.add_argument("--jobs", type=int, default=1, help="worker processes for the sweeps (default 1)")
    cp = sub.add_parser("show-config", help="print the effective configuration in config-file syntax")
    _add_common(cp)
    cp.add_argument("--figure", choices=FIGURES, help="include this figure's defaults and grids")
    return parser


def resolve_config(args: argparse.Namespace, figure: str | None) -> RunConfig:
    cfg = RunConfig()
    if figure is not None:
        cfg = cfg.with_params(**FIGURE_DEFAULTS.get(figure, {}))
    if getattr(args, "textparams", False):
        cfg = cfg.with_params(**TEXT_PARAMS)
    if args.config:
        cfg = load_config(args.config, cfg)

    flags = {SCALAR_FLAGS[k]: getattr(args, k) for k in SCALAR_FLAGS if getattr(args, k) is not None}
    if flags:
        cfg = cfg.with_params(**flags)
    if args.tol_s is not None:
        cfg.tol_s = args.tol_s
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if figure is not None:
        for axis in GRID_AXES[figure]:
            grid = getattr(args, f"{axis}_grid", None)
            if grid is not None:
                cfg.grids[axis] = grid
            if axis in flags:  # an explicit scalar flag pins the swept axis
                cfg.grids[axis] = [flags[axis]]
        # grids for axes this figure does not sweep are ignored
        cfg.grids = {a: v for a, v in cfg.grids.items() if a in GRID_AXES[figure]}
    return cfg


def _run_figure(args: argparse.Namespace) -> int:
    figure = args.command
    cfg = resolve_config(args, figure)
    spec = SweepSpec(figure, cfg.params, cfg.grids, cfg.tol_s, cfg.jobs)
    rows = run_sweep(spec)
    comments = sweep_comments(spec)
    if args.out:
        emit_csv(rows, args.out, COLUMNS[figure], comments)
    else:
        sys.stdout.write(format_csv(rows, COLUMNS[figure], comments))
    return EXIT_OK


def _run_verify(args: argparse.Namespace) -> int:
    if args.jobs < 1:
        raise ParameterError(f"jobs must be >= 1, got {args.jobs}")
    results = checks.run_all(jobs=args.jobs, echo=print)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return EXIT_OK if n_pass == len(results) else EXIT_PARAM


def _show_config(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, args.figure)
    grids = DEFAULT_GRIDS[args.figure] if args.figure else {}
    sys.stdout.write(format_config(cfg, grids))
    if args.figure is None:
        for figure in FIGURES:
            for axis in GRID_AXES[figure]:
                key = next(k for k, a in GRID_KEYS.items() if a == axis)
                values = ", ".join(str(v) for v in DEFAULT_GRIDS[figure][axis])
                print(f"# {figure}: {key} = {values}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _run_verify(args)
        if args.command == "show-config":
            return _show_config(args)
        return _run_figure(args)
    except NumericalHealthError as exc:
        print(f"qillum: numerical health error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParameterError, QillumError) as exc:
        print(f"qillum: parameter error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"qillum: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
