"""Command-line interface.

Subcommands: ``run`` (full analysis of one dataset), ``sweep-folds``
(fold-count sensitivity), ``split-run`` (independent analyses of the
fine/coarse precision partitions), and ``synth`` (synthetic quadratic
benchmark generator).  Reports are JSON or flat CSV; when an output path
is given, figures are rendered next to it unless ``--no-plot``.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 numerical error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import (
    ConfigError,
    DataError,
    ParseError,
    SchemaError,
    SupersetError,
    UnknownColumnError,
)
from .pipeline import (
    RunConfig,
    analyze,
    build_report,
    split_run,
    sweep_folds,
)
from .report import sweep_to_csv, to_csv, to_json
from .synth import SynthConfig, generate

DIABETES_COLUMNS = ("AGE", "SEX", "BMI", "BP", "S1", "S2", "S3", "S4", "S5", "S6", "Y")


def _detect_delimiter(header_line: str) -> str | None:
    for d in ("\t", ",", ";"):
        if d in header_line:
            return d
    return None  # fall back to whitespace splitting


def ingest(
    path: str, response: str | None = None, log_response: str | None = None
) -> tuple[Dataset, str]:
    """Read a delimited numeric file into a dataset.

    The delimiter (tab, comma, semicolon, or whitespace) is detected
    from the header row.  The canonical progression file (columns AGE
    SEX BMI BP S1..S6 Y) is recognized and defaults its response to Y;
    other files need an explicit response column.  With ``log_response``
    set, the response is replaced by its natural (``"e"``) or base-10
    (``"10"``) logarithm.

    Returns the dataset and the response column name.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3:
        raise SchemaError(f"{path}: need a header row and at least two data rows")
    delim = _detect_delimiter(lines[0])
    split = (lambda s: [c.strip() for c in s.split(delim)]) if delim else str.split
    header = split(lines[0])
    if len(header) < 2:
        raise SchemaError(f"{path}: header must name at least two columns")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = split(line)
        if len(cells) != len(header):
            raise SchemaError(
                f"{path}: row {lineno} has {len(cells)} cells, expected {len(header)}"
            )
        values = []
        for name, cell in zip(header, cells):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: row {lineno}, column {name}: "
                    f"cannot parse {cell!r} as a number"
                ) from None
            if not math.isfinite(v):
                raise ParseError(
                    f"{path}: row {lineno}, column {name}: non-finite value {cell!r}"
                )
            values.append(v)
        rows.append(values)

    if response is None:
        if tuple(header) == DIABETES_COLUMNS or "Y" in header:
            response = "Y"
        else:
            raise SchemaError(
                f"{path}: no column named 'Y'; pass --response "
                f"(columns: {', '.join(header)})"
            )
    if response not in header:
        raise UnknownColumnError(
            f"response column {response!r} not in {path} "
            f"(columns: {', '.join(header)})"
        )
    arr = np.array(rows, dtype=float)
    r_idx = header.index(response)
    y = arr[:, r_idx]
    if log_response is not None:
        bad = np.flatnonzero(y <= 0.0)
        if bad.size:
            raise DataError(
                f"{path}: row {int(bad[0]) + 2}: response {y[bad[0]]} is not "
                "positive; cannot take its logarithm"
            )
        y = np.log(y) if log_response == "e" else np.log10(y)
    keep = [j for j in range(len(header)) if j != r_idx]
    dataset = Dataset(y=y, X=arr[:, keep], names=tuple(header[j] for j in keep))
    return dataset, response


def dataset_to_csv(dataset: Dataset, response_name: str = "y") -> str:
    """Comma-separated text of a dataset, response column last."""
    lines = [",".join(list(dataset.names) + [response_name])]
    for i in range(dataset.n):
        cells = [format(v, ".17g") for v in dataset.X[i]]
        cells.append(format(dataset.y[i], ".17g"))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _write_text(out, text)
        print(f"wrote {out}", file=sys.stderr)


def _figure_path(out: str, suffix: str) -> str:
    base = Path(out)
    return str(base.with_name(f"{base.stem}_{suffix}.png"))


def _load(config: RunConfig) -> tuple[Dataset, str]:
    if config.data is None:
        raise ConfigError("no dataset given; pass --data PATH")
    return ingest(config.data, config.response, config.log_response)


def cmd_run(config: RunConfig) -> int:
    """Full analysis: ingest, both posteriors, superset probability, report."""
    dataset, response = _load(config)
    result = analyze(dataset, config)
    rep = build_report(result, dataset, source=str(config.data))
    rep["dataset"]["response"] = response
    text = to_json(rep) if config.format == "json" else to_csv(rep)
    _emit(text, config.out)
    print(
        f"superset probability: {rep['probability']:.6f} "
        f"({'strict' if rep['strict'] else 'inclusive'}, {config.folds} folds, "
        f"seed {config.seed}, n={dataset.n}, p={dataset.p})",
        file=sys.stderr,
    )
    if config.plot and config.out:
        from .plots import save_posterior_figure

        fig = save_posterior_figure(rep, _figure_path(config.out, "posteriors"))
        print(f"wrote {fig}", file=sys.stderr)
    return 0


def cmd_sweep_folds(config: RunConfig, m_min: int = 2, m_max: int = 15) -> int:
    """Fold-sensitivity sweep emitting 'folds,probability' CSV rows."""
    dataset, _ = _load(config)
    rows = sweep_folds(dataset, config, m_min, m_max)
    _emit(sweep_to_csv(rows), config.out)
    probs = [p for _, p in rows]
    print(
        f"swept folds {m_min}..{m_max}: probability range "
        f"[{min(probs):.6f}, {max(probs):.6f}]",
        file=sys.stderr,
    )
    if config.plot and config.out:
        from .plots import save_sweep_figure

        fig = save_sweep_figure(
            rows, _figure_path(config.out, "sweep"), reference_folds=config.folds
        )
        print(f"wrote {fig}", file=sys.stderr)
    return 0


def cmd_split_run(config: RunConfig) -> int:
    """Independent analyses of the fine- and coarse-precision partitions."""
    dataset, response = _load(config)
    split = split_run(dataset, config, source=str(config.data))
    for part in ("fine", "coarse"):
        split[part]["dataset"]["response"] = response
    text = to_json(split) if config.format == "json" else to_csv(split)
    _emit(text, config.out)
    print(
        f"fine probability: {split['fine']['probability']:.6f} "
        f"(n={split['fine']['dataset']['n']}); "
        f"coarse probability: {split['coarse']['probability']:.6f} "
        f"(n={split['coarse']['dataset']['n']})",
        file=sys.stderr,
    )
    if config.plot and config.out:
        from .plots import save_split_figure

        fig = save_split_figure(split, _figure_path(config.out, "split"))
        print(f"wrote {fig}", file=sys.stderr)
    return 0


def cmd_synth(config: SynthConfig, out: str) -> int:
    """Generate the synthetic quadratic benchmark and write it as CSV."""
    dataset = generate(config)
    _write_text(out, dataset_to_csv(dataset, response_name="y"))
    print(
        f"wrote {out}: n={dataset.n}, columns {', '.join(dataset.names)}, y "
        f"(seed {config.seed})",
        file=sys.stderr,
    )
    return 0


def _comma_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _comma_names(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="delimited dataset file")
    p.add_argument("--response", default=None, help="response column name")
    p.add_argument(
        "--log-response",
        nargs="?",
        const="e",
        default=None,
        choices=("e", "10"),
        help="log-transform the response (natural log, or base 10)",
    )
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds")
    p.add_argument("--seed", type=int, default=0, help="fold-assignment seed")
    p.add_argument(
        "--hyper-a", type=float, default=3.0, help="mixing prior parameter (> 2)"
    )
    p.add_argument(
        "--inclusive",
        action="store_true",
        help="count equal subsets as containment (default strict)",
    )
    p.add_argument(
        "--include-empty",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="include the empty subset in the model space",
    )
    p.add_argument(
        "--precision-cols",
        type=_comma_names,
        default=("BP", "S4"),
        metavar="COLS",
        help="comma-separated precision columns for split-run",
    )
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument(
        "--plot",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="render figures next to --out (default: on when --out is set)",
    )
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    plot = args.plot
    if plot is None:
        plot = args.out is not None
    elif plot and args.out is None:
        raise ConfigError("--plot needs --out to know where figures go")
    return RunConfig(
        data=args.data,
        response=args.response,
        log_response=args.log_response,
        folds=args.folds,
        seed=args.seed,
        hyper_a=args.hyper_a,
        inclusive=args.inclusive,
        include_empty=args.include_empty,
        precision_columns=args.precision_cols,
        out=args.out,
        format=args.format,
        plot=plot,
        jobs=args.jobs,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supersetprob",
        description=(
            "Quantify how much posterior mass a linear model puts on strict "
            "supersets of the covariates favored by a local-constant model."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full analysis of one dataset")
    _add_run_options(p_run)
    p_run.set_defaults(handler=lambda a: cmd_run(_config_from_args(a)))

    p_sweep = sub.add_parser(
        "sweep-folds", help="probability for a range of fold counts (CSV output)"
    )
    _add_run_options(p_sweep)
    p_sweep.add_argument("--m-min", type=int, default=2, help="smallest fold count")
    p_sweep.add_argument("--m-max", type=int, default=15, help="largest fold count")
    p_sweep.set_defaults(
        handler=lambda a: cmd_sweep_folds(_config_from_args(a), a.m_min, a.m_max)
    )

    p_split = sub.add_parser(
        "split-run", help="separate analyses of fine and coarse precision rows"
    )
    _add_run_options(p_split)
    p_split.set_defaults(handler=lambda a: cmd_split_run(_config_from_args(a)))

    p_synth = sub.add_parser("synth", help="generate the synthetic benchmark CSV")
    p_synth.add_argument("--out", required=True, help="output CSV path")
    p_synth.add_argument("--n-per", type=int, default=40, help="rows per grid point")
    p_synth.add_argument(
        "--grid",
        type=_comma_floats,
        default=(-2.0, -1.0, 0.0, 1.0, 2.0),
        help="comma-separated grid of true-covariate values",
    )
    p_synth.add_argument("--alpha", type=float, default=0.0, help="intercept")
    p_synth.add_argument("--beta1", type=float, default=1.0, help="linear coefficient")
    p_synth.add_argument(
        "--beta2", type=float, default=1.0, help="quadratic coefficient"
    )
    p_synth.add_argument(
        "--noise-sd", type=float, default=0.5, help="response noise std dev"
    )
    p_synth.add_argument(
        "--distractors", type=int, default=2, help="independent noise columns"
    )
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(
        handler=lambda a: cmd_synth(
            SynthConfig(
                n_per_point=a.n_per,
                grid=a.grid,
                alpha=a.alpha,
                beta1=a.beta1,
                beta2=a.beta2,
                noise_sd=a.noise_sd,
                distractors=a.distractors,
                seed=a.seed,
            ),
            a.out,
        )
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except SupersetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
