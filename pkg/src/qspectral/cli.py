"""Command-line interface.

Subcommands cover the full workflow: simulate a series, compute raw or
rank-based periodogram tables, smooth them, tabulate oracle truth values,
run RMSE replication studies, and analyze an empirical return series end
to end.  Tables go to --out or stdout as CSV; rmse writes a JSON report.

Kernel outputs are on the periodogram scale throughout: the truth
subcommand multiplies the spectral density kernel by 2*pi so its rows are
directly comparable with periodogram and smooth output.
"""

from __future__ import annotations

import argparse
import contextlib
import sys

import numpy as np

from .experiments import STUDY_MODELS, ExperimentConfig, rmse_study
from .io import load_series, table_output_rows, write_json_report, write_output_rows, write_series
from .periodogram import MODES, periodogram_table
from .simulate import IID_DISTRIBUTIONS, INNOVATIONS, Ar1Spec, simulate_ar1, simulate_iid
from .smoothing import daniell_weights, smooth_table
from .truth import SpectralTruth, spectral_truth

_GRID = "0.05,0.25,0.5,0.75,0.95"

# the reference empirical analysis smooths n = 11844 returns with Daniell
# spans (200, 100); analyze scales those spans to the input length
_REFERENCE_SPANS = ((200, 11844), (100, 11844))


def default_spans(n: int) -> tuple:
    return tuple(max(1, round(s * n / ref)) for s, ref in _REFERENCE_SPANS)


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ValueError(f"could not parse {text!r} as comma-separated numbers") from None


def _parse_ints(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ValueError(f"could not parse {text!r} as comma-separated integers") from None


def _parse_spans(text: str, ns: tuple) -> object:
    """'10,4' applies to every n; '2,1;10,4' pairs groups with the n list."""
    groups = [g for g in text.split(";") if g.strip()]
    if len(groups) == 1:
        return _parse_ints(groups[0])
    if len(groups) != len(ns):
        raise ValueError(
            f"{len(groups)} span groups for {len(ns)} series lengths; "
            "give one group or one per n"
        )
    return {int(n): _parse_ints(g) for n, g in zip(ns, groups)}


def _parse_column(text):
    if text is None:
        return None
    return int(text) if text.lstrip("+-").isdigit() else text


@contextlib.contextmanager
def _open_out(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _cmd_simulate(args) -> int:
    if args.model == "ar1":
        spec = Ar1Spec(theta=args.theta, innovation=args.innovation,
                       burn_in=args.burn_in, seed=args.seed)
        y = simulate_ar1(spec, args.n)
    else:
        y = simulate_iid(args.innovation, args.n, args.seed)
    with _open_out(args.out) as fh:
        write_series(y, fh)
    return 0


def _taus_for(args) -> tuple:
    if args.taus is not None:
        return _parse_floats(args.taus)
    # the ordinary periodogram does not depend on the quantile grid; one
    # placeholder pair keeps its table small
    return (0.5,) if getattr(args, "mode", "rank") == "ordinary" else _parse_floats(_GRID)


def _cmd_periodogram(args) -> int:
    y = load_series(args.input, _parse_column(args.column))
    tab = periodogram_table(y, _taus_for(args), mode=args.mode)
    kind = "ordinary" if args.mode == "ordinary" else "raw"
    rows = table_output_rows(tab, kind, full_pairs=args.full_pairs)
    with _open_out(args.out) as fh:
        write_output_rows(rows, fh)
    return 0


def _cmd_smooth(args) -> int:
    y = load_series(args.input, _parse_column(args.column))
    tab = periodogram_table(y, _taus_for(args), mode=args.mode)
    sm = smooth_table(tab, daniell_weights(_parse_ints(args.spans)))
    rows = table_output_rows(sm, "smoothed", full_pairs=args.full_pairs)
    with _open_out(args.out) as fh:
        write_output_rows(rows, fh)
    return 0


def _cmd_truth(args) -> int:
    from .series import fourier_frequencies

    taus = _parse_floats(args.taus) if args.taus is not None else _parse_floats(_GRID)
    freqs = fourier_frequencies(args.n).frequencies
    truth = spectral_truth(
        args.model, taus, freqs, theta=args.theta, scaled=(args.mode == "raw"),
        lag_cap=args.lag_cap, mc_length=args.mc_length, seed=args.seed,
    )
    two_pi = SpectralTruth(truth.taus, truth.omegas, truth.mode,
                           2.0 * np.pi * truth.re, 2.0 * np.pi * truth.im)
    rows = table_output_rows(two_pi, "truth", full_pairs=args.full_pairs)
    with _open_out(args.out) as fh:
        write_output_rows(rows, fh)
    return 0


def _cmd_rmse(args) -> int:
    ns = _parse_ints(args.n)
    cfg = ExperimentConfig(
        model=args.model,
        theta=args.theta,
        n=ns,
        replications=args.runs,
        taus=_parse_floats(args.taus) if args.taus is not None else _parse_floats(_GRID),
        spans=_parse_spans(args.spans, ns),
        mode=args.mode,
        master_seed=args.seed,
        lag_cap=args.lag_cap,
        mc_length=args.mc_length,
    )
    report = rmse_study(cfg).report
    with _open_out(args.out) as fh:
        write_json_report(report, fh)
    return 0


def _cmd_analyze(args) -> int:
    y = load_series(args.input, _parse_column(args.column))
    taus = _parse_floats(args.taus) if args.taus is not None else _parse_floats(_GRID)
    spans = _parse_ints(args.spans) if args.spans is not None else default_spans(len(y))
    tab = periodogram_table(y, taus, mode="rank")
    sm = smooth_table(tab, daniell_weights(spans))
    rows = table_output_rows(sm, "smoothed", full_pairs=args.full_pairs)
    with _open_out(args.out) as fh:
        write_output_rows(rows, fh)
    return 0


def _add_io_flags(p, with_mode=True):
    p.add_argument("input", help="CSV file holding the series")
    p.add_argument("--column", default=None,
                   help="column of the input file: 0-based index or header name")
    p.add_argument("--taus", default=None,
                   help=f"comma-separated quantile levels (default {_GRID})")
    if with_mode:
        p.add_argument("--mode", choices=MODES, default="rank")
    p.add_argument("--full-pairs", action="store_true",
                   help="emit all ordered quantile pairs, not only tau1 <= tau2")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qspectral",
        description="Quantile-based spectral density kernel estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a simulated series as CSV")
    p.add_argument("--model", choices=("ar1", "iid"), default="ar1")
    p.add_argument("--theta", type=float, default=-0.3)
    p.add_argument("--innovation", default="gaussian",
                   choices=sorted(set(INNOVATIONS) | set(IID_DISTRIBUTIONS)),
                   help="innovation law (ar1) or marginal law (iid)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=500)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("periodogram", help="periodogram kernel table of a series")
    _add_io_flags(p)
    p.set_defaults(func=_cmd_periodogram)

    p = sub.add_parser("smooth", help="smoothed periodogram kernel table")
    _add_io_flags(p)
    p.add_argument("--spans", default="10,4",
                   help="comma-separated Daniell spans, e.g. 10,4")
    p.set_defaults(func=_cmd_smooth)

    p = sub.add_parser("truth", help="oracle kernel values on the periodogram scale")
    p.add_argument("--model", choices=STUDY_MODELS, default="gaussian-ar1")
    p.add_argument("--theta", type=float, default=-0.3)
    p.add_argument("--taus", default=None)
    p.add_argument("--n", type=int, required=True,
                   help="series length fixing the Fourier grid")
    p.add_argument("--mode", choices=("rank", "raw"), default="rank",
                   help="rank: unscaled kernel; raw: scaled by marginal densities")
    p.add_argument("--lag-cap", type=int, default=50)
    p.add_argument("--mc-length", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full-pairs", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_truth)

    p = sub.add_parser("rmse", help="replication study: RMSE against oracle truth")
    p.add_argument("--model", choices=STUDY_MODELS, default="gaussian-ar1")
    p.add_argument("--theta", type=float, default=-0.3)
    p.add_argument("--n", default="500", help="comma-separated series lengths")
    p.add_argument("--runs", type=int, default=200, help="replication count")
    p.add_argument("--taus", default=None)
    p.add_argument("--spans", default="10,4",
                   help="span groups per n, ';'-separated, e.g. 2,1;10,4")
    p.add_argument("--mode", choices=MODES, default="rank")
    p.add_argument("--seed", type=int, default=20240917)
    p.add_argument("--lag-cap", type=int, default=50)
    p.add_argument("--mc-length", type=int, default=1_000_000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_rmse)

    p = sub.add_parser("analyze",
                       help="rank periodogram + smoothing for an empirical series")
    _add_io_flags(p, with_mode=False)
    p.add_argument("--spans", default=None,
                   help="Daniell spans (default: scaled from the reference "
                        "analysis, 200,100 at n=11844)")
    p.set_defaults(func=_cmd_analyze)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
