"""photon-detect command line: ``photon-detect <experiment> --config run.toml [--out file.csv] [--reproducible]``."""

from __future__ import annotations

import argparse
import datetime
import sys

import numpy as np

from . import experiments as ex
from .config import EXPERIMENTS, RunConfig, parse_config
from .errors import ConfigurationError, NumericError, OutcomeImpossibleError, UndefinedMetricError
from .table import ResultTable, provenance_for, render_table

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _lineshape(setup: ex.LineshapeConfig) -> ResultTable:
    scan = ex.run_lineshape(setup)
    rows = list(zip(scan.abscissa, scan.probability, scan.reference))
    return ResultTable(["detuning", "probability", "analytic_reference"], rows,
                       footer={"fwhm_times_T": ex.fwhm(scan) * setup.window_length})


def _mzi(setup: ex.MziConfig) -> ResultTable:
    scan, metrics = ex.run_mzi(setup)
    return ResultTable(["x", "probability"], list(zip(scan.abscissa, scan.probability)),
                       footer={"V": metrics.visibility, "D": metrics.distinguishability})


def _commutator(setup) -> ResultTable:
    ms, sec = setup
    points = [(p.j, p.k, p.x, p.y) for p in sec.points]
    report = ex.run_commutator_report(ms, points, sec.times, sec.cutoff)
    rows = [(r.j, r.k, *r.x, *r.y, r.t, r.numeric.real, r.numeric.imag, r.analytic.real, r.analytic.imag,
             r.difference) for r in report]
    cols = ["j", "k", "x0", "x1", "x2", "y0", "y1", "y2", "t",
            "numeric_re", "numeric_im", "analytic_re", "analytic_im", "difference"]
    return ResultTable(cols, rows, footer={"max_difference": max(r.difference for r in report)})


def _povm(setup: ex.IndirectConfig) -> ResultTable:
    probs, total = ex.run_povm_check(setup)
    return ResultTable(["sum_p", "deviation"], [(total, abs(total - 1.0))],
                       footer={f"p_{r}": p for r, p in enumerate(probs)})


def _scaling(setup: ex.IndirectConfig, target: float, halvings: int) -> ResultTable:
    pts = ex.run_perturbation_scaling(setup, target, halvings)
    rows = [(p.coupling, p.p_first_order, p.p_exact, p.abs_error, p.rel_error) for p in pts]
    footer = {}
    for n in range(len(pts) - 1):
        footer[f"rel_error_ratio_{n}"] = pts[n].rel_error / pts[n + 1].rel_error
        footer[f"abs_error_ratio_{n}"] = pts[n].abs_error / pts[n + 1].abs_error
    return ResultTable(["coupling", "p_first_order", "p_exact", "abs_error", "rel_error"], rows, footer=footer)


def run(config: RunConfig, reproducible: bool = True) -> ResultTable:
    """Run the configured experiment and return its table with provenance attached."""
    name = config.experiment
    if name == "lineshape":
        table = _lineshape(config.setup)
    elif name == "mzi":
        table = _mzi(config.setup)
    elif name == "commutator":
        table = _commutator(config.setup)
    elif name == "povm-check":
        table = _povm(config.setup)
    else:
        sec = config.model.perturbation_scaling
        table = _scaling(config.setup, sec.target_probability, sec.halvings)
    stamp = None if reproducible else datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    table.provenance = provenance_for(name, config.digest(), config.echo(), stamp)
    return table


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="photon-detect", description="Photon detection operator experiments")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=True, help="TOML run configuration")
    ap.add_argument("--out", help="output CSV (overrides [output].path; stdout when neither is set)")
    ap.add_argument("--reproducible", action="store_true", help="omit the timestamp line")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.seterr(all="ignore")
    try:
        config = parse_config(args.config, args.experiment)
    except ConfigurationError as err:
        print(f"photon-detect: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"photon-detect: cannot read config: {err}", file=sys.stderr)
        return EXIT_IO
    try:
        table = run(config, reproducible=args.reproducible)
    except ConfigurationError as err:
        print(f"photon-detect: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, UndefinedMetricError, OutcomeImpossibleError) as err:
        print(f"photon-detect: numeric error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render_table(table)
    out = args.out or config.output_path
    try:
        if out:
            with open(out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as err:
        print(f"photon-detect: cannot write output: {err}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
