"""Command-line interface: run experiments, sweep parameters, dump codebooks.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical divergence.
Options may come from a `key = value` config file (# starts a comment);
explicit flags override file values.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from .coclustering import (CoclusterConfig, build_codebook, cocluster,
                           prune_codebook, save_codebook_csv,
                           save_partial_codebook_csv)
from .errors import DataError, DivergenceError
from .pipeline import (SWEEPABLE, ExperimentConfig, report_csv, run_pipeline,
                       sweep, sweep_csv, write_text)
from .ratings import load_ratings, mean_fill_rows

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGENCE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; the contract here is 1.
    def error(self, message):
        raise _UsageError(message)


def _add_common_options(p):
    p.add_argument("--config", help="key = value options file")
    p.add_argument("--source", help="source-domain ratings file")
    p.add_argument("--target", help="target-domain ratings file")
    p.add_argument("--method", choices=("proposed", "mmmf", "cbt"))
    p.add_argument("--k1", type=int, help="user clusters")
    p.add_argument("--k2", type=int, help="item clusters")
    p.add_argument("--th", type=float, help="codebook pruning threshold (%%)")
    p.add_argument("--eps", type=float, help="codebook pruning margin")
    p.add_argument("--latent-dim", type=int, dest="latent_dim",
                   help="codebook latent dimension")
    p.add_argument("--lambda", type=float, dest="lam",
                   help="factorization regularization weight")
    p.add_argument("--lambda1", type=float, help="row-sum penalty weight")
    p.add_argument("--lambda2", type=float, help="negativity penalty weight")
    p.add_argument("--step", type=float, help="gradient step size")
    p.add_argument("--train-fraction", type=float, dest="train_fraction")
    p.add_argument("--runs", type=int, help="number of repeated runs")
    p.add_argument("--seed", type=int, help="base random seed")
    p.add_argument("--restarts", type=int, help="co-clustering restarts")
    p.add_argument("--max-users", type=int, dest="max_users")
    p.add_argument("--max-items", type=int, dest="max_items")
    p.add_argument("--raw-scores", action="store_true", dest="raw_scores",
                   default=None, help="evaluate raw scores instead of "
                   "decoded ratings")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--no-figures", action="store_true",
                   help="skip rendering figures next to the CSV")


def _build_parser():
    parser = _Parser(prog="mmcbt", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment", parser_class=_Parser)
    _add_common_options(run_p)

    sweep_p = sub.add_parser("sweep", help="sweep one hyperparameter",
                             parser_class=_Parser)
    _add_common_options(sweep_p)
    sweep_p.add_argument("--param", required=True, choices=SWEEPABLE,
                         help="hyperparameter to sweep")
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated sweep values")

    cb_p = sub.add_parser("codebook",
                          help="emit codebook and partial codebook CSVs",
                          parser_class=_Parser)
    _add_common_options(cb_p)
    return parser


def parse_config_file(path) -> dict[str, str]:
    """Read `key = value` lines; '#' starts a comment, blank lines ignored."""
    options = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for ln, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise _UsageError(f"{path}: line {ln}: expected key = value")
                key, value = line.split("=", 1)
                options[key.strip().lower().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return options


_BOOL_TRUE = ("1", "true", "yes", "on")
_BOOL_FALSE = ("0", "false", "no", "off")


def _coerce(name, value, target_type):
    if target_type is bool:
        lowered = str(value).strip().lower()
        if lowered in _BOOL_TRUE:
            return True
        if lowered in _BOOL_FALSE:
            return False
        raise _UsageError(f"option {name}: expected a boolean, got {value!r}")
    try:
        return target_type(value)
    except (TypeError, ValueError):
        raise _UsageError(f"option {name}: expected {target_type.__name__}, "
                          f"got {value!r}") from None


def build_config(args) -> ExperimentConfig:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    values = {}
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    type_map = {"str": str, "int": int, "float": float, "bool": bool}
    if args.config:
        for key, raw in parse_config_file(args.config).items():
            if key not in types:
                raise _UsageError(f"unknown config key {key!r}")
            values[key] = _coerce(key, raw, type_map[types[key]])
    for key in types:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    try:
        return ExperimentConfig(**values)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _emit_report(text, out, render_figure) -> None:
    """Write the CSV (stdout if no path) and render its companion figure."""
    if out is None:
        sys.stdout.write(text)
        return
    write_text(text, out)
    print(f"wrote {out}")
    if render_figure is not None:
        fig_path = str(Path(out).with_suffix(".png"))
        render_figure(fig_path)
        print(f"wrote {fig_path}")


def _cmd_run(args) -> int:
    cfg = build_config(args)
    if not cfg.source or not cfg.target:
        raise _UsageError("run requires --source and --target")
    report = run_pipeline(cfg)

    def render(fig_path):
        from .plots import save_run_figure
        save_run_figure(report, fig_path)

    _emit_report(report_csv(report), args.out,
                 None if args.no_figures else render)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = build_config(args)
    if not cfg.source or not cfg.target:
        raise _UsageError("sweep requires --source and --target")
    labels = [tok.strip() for tok in args.values.split(",") if tok.strip()]
    if not labels:
        raise _UsageError("--values must list at least one value")
    caster = int if args.param in ("k1", "k2") else float
    try:
        values = [caster(tok) for tok in labels]
    except ValueError:
        raise _UsageError(f"--values for {args.param} must be "
                          f"{caster.__name__}s") from None
    reports = sweep(cfg, args.param, values)

    def render(fig_path):
        from .plots import save_sweep_figure
        save_sweep_figure(args.param, values, reports, fig_path)

    _emit_report(sweep_csv(args.param, values, reports, labels=labels),
                 args.out, None if args.no_figures else render)
    return EXIT_OK


def _cmd_codebook(args) -> int:
    cfg = build_config(args)
    if not cfg.source:
        raise _UsageError("codebook requires --source")
    source = load_ratings(cfg.source, cfg.max_users, cfg.max_items)
    filled = mean_fill_rows(source)
    mem = cocluster(filled, CoclusterConfig(cfg.k1, cfg.k2,
                                            max_iters=cfg.cocluster_iters,
                                            seed=cfg.seed,
                                            restarts=cfg.restarts))
    cb = build_codebook(filled, mem, cfg.k1, cfg.k2)
    pcb = prune_codebook(cb, filled, mem, cfg.th, cfg.eps)
    base = Path(args.out) if args.out else Path("codebook")
    if base.suffix == ".csv":
        base = base.with_suffix("")
    cb_path = base.parent / f"{base.name}_codebook.csv"
    pcb_path = base.parent / f"{base.name}_partial_codebook.csv"
    save_codebook_csv(cb, cb_path)
    save_partial_codebook_csv(pcb, pcb_path)
    print(f"wrote {cb_path}")
    print(f"wrote {pcb_path} ({pcb.n_retained}/{pcb.values.size} cells retained)")
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "codebook": _cmd_codebook}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
