"""Command line entry point: ``chemolab {check,simulate,classify,poincare,sweep}``.

Exit codes: 0 success or definite verdict, 1 runtime or config failure,
2 indeterminate verdict, 3 periodic iteration did not converge.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import analysis
from . import hypothesis as hyp
from .config import ConfigError, ScenarioConfig, override, parse_config, render
from .pde import SimulationError, TrajectorySummary, simulate

EXIT_OK, EXIT_FAILURE, EXIT_INDETERMINATE, EXIT_NO_CONVERGENCE = 0, 1, 2, 3


def _num(x: float) -> str:
    return repr(float(f"{x:.12g}"))


def _csv_num(x: float) -> str:
    return f"{x:.17g}"


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _condition_lines(name: str, cond: hyp.Condition, needs: str | None = None) -> list[str]:
    if not cond.margins:
        return [f"{name} = fails (requires {needs})" if needs else f"{name} = fails"]
    lines = [f"{name} = {'holds' if cond.holds else 'fails'} ({_num(cond.min_margin)})"]
    lines += [f"  {name}: {label} : {_num(m)}" for label, m in cond.margins]
    return lines


def report_lines(report: hyp.HypothesisReport, params) -> list[str]:
    out = [f"dimension = {report.dimension}"]
    out += _condition_lines("h1", report.h1)
    out += _condition_lines("h2", report.h2)
    out += _condition_lines("h3", report.h3)
    if report.A_bar:
        out.append(f"A_bar = {_num(report.A_bar[0])}, {_num(report.A_bar[1])}")
    if report.B_bar:
        out.append(f"B_bar = {_num(report.B_bar[0])}, {_num(report.B_bar[1])}")
    out += _condition_lines("h4", report.h4, "h1")
    out += _condition_lines("h5", report.h5, "h2")
    out += _condition_lines("instability_1_9", report.instability)
    for name, cond in report.extinction.items():
        out += _condition_lines(name, cond)
    if report.alpha_beta:
        out.append(f"alpha = {_num(report.alpha_beta[0])}, beta = {_num(report.alpha_beta[1])}")
    if report.lv_rect:
        out.append("lv_rect = " + ", ".join(_num(x) for x in report.lv_rect))
    if params.chi1 == 0 and params.chi2 == 0:
        out.append("note = chi1 = chi2 = 0: H4 and H5 coincide (both reduce to instability_1_9)")
    return out


def cmd_check(config: ScenarioConfig) -> tuple[str, int]:
    model = config.model()
    report = hyp.evaluate(model.extrema, config.params, config.domain.dim)
    return "\n".join(report_lines(report, config.params)) + "\n", EXIT_OK


def run(config: ScenarioConfig) -> TrajectorySummary:
    return simulate(config.model(), config.initial_state(), config.time.t_final, config.time.stepper(),
                    config.time.sample_every)


def write_summary(summary: TrajectorySummary, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TrajectorySummary.COLUMNS)
    for row in summary.rows():
        w.writerow([_csv_num(x) for x in row])
    fh.flush()


def cmd_simulate(config: ScenarioConfig, out=None) -> int:
    try:
        summary = run(config)
    except SimulationError as exc:
        with _output(out) as fh:
            write_summary(exc.summary or TrajectorySummary(), fh)
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    with _output(out) as fh:
        write_summary(summary, fh)
    return EXIT_OK


def classify_config(config: ScenarioConfig):
    """Simulate and classify; returns (verdict, extra evidence lines)."""
    summary = run(config)
    a = config.analysis
    stats = analysis.tail_stats(summary, a.tail_fraction)
    verdict = analysis.classify(stats, a.eps_extinction, a.eta_persistence)
    lines = []
    if verdict.label == analysis.EXTINCTION:
        model = config.model()
        report = hyp.evaluate(model.extrema, config.params, config.domain.dim)
        if report.alpha_beta:
            alpha, beta = report.alpha_beta
            ok = analysis.check_extinction_limits(stats, alpha, beta, a.band_tol, config.params.l, config.params.lam)
            lines.append(f"alpha_beta_band = {'pass' if ok else 'fail'}")
        else:
            lines.append("alpha_beta_band = n/a")
        if report.h1.margins[0][1] > 0:
            bound = analysis.extinction_u_bound(model.extrema, config.params, stats.l2_hat)
            lines.append(f"u_tail_bound = {_num(bound)}")
    elif verdict.label == analysis.PERSISTENCE:
        lines.append(f"empirical_floor_u = {_num(stats.l1_hat)}")
        lines.append(f"empirical_floor_v = {_num(stats.l2_hat)}")
    return verdict, lines


def cmd_classify(config: ScenarioConfig) -> tuple[str, int]:
    try:
        verdict, extra = classify_config(config)
    except SimulationError as exc:
        return f"simulation failed: {exc}\n", EXIT_FAILURE
    except analysis.TailError as exc:
        return f"verdict = {analysis.INDETERMINATE}\nreason = {exc}\n", EXIT_INDETERMINATE
    s = verdict.stats
    lines = [f"verdict = {verdict.label}"]
    lines += [f"{name} = {_num(getattr(s, name))}" for name in ("L1_hat", "l1_hat", "L2_hat", "l2_hat")]
    if s.Lw_hat is not None:
        lines += [f"Lw_hat = {_num(s.Lw_hat)}", f"lw_hat = {_num(s.lw_hat)}"]
    lines += [f"tail_fraction = {_num(s.tail_fraction)}", f"eps_extinction = {_num(verdict.eps_extinction)}",
              f"eta_persistence = {_num(verdict.eta_persistence)}"]
    lines += extra
    code = EXIT_INDETERMINATE if verdict.label == analysis.INDETERMINATE else EXIT_OK
    return "\n".join(lines) + "\n", code


def cmd_poincare(config: ScenarioConfig, out=None) -> tuple[str, int]:
    try:
        period = config.coefficients.common_period()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if period is None:
        period = config.analysis.poincare_period
    model = config.model()
    state = config.initial_state()
    try:
        result = analysis.poincare_fixed_point(model, (state.u, state.v), tol=config.analysis.tol_poincare,
                                               max_iter=config.analysis.max_iter, stepper=config.time.stepper(),
                                               period=period)
    except SimulationError as exc:
        return f"simulation failed: {exc}\n", EXIT_FAILURE
    grid = model.grid
    z = result.state
    header = ["x", "y"][:grid.dim] + ["u", "v", "w"]
    with _output(out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        cols = [c.ravel() for c in grid.coords] + [z.u.ravel(), z.v.ravel(), z.w.ravel()]
        for row in zip(*cols):
            w.writerow([_csv_num(float(x)) for x in row])
    lines = [f"period = {_num(period)}", f"residual = {result.residual:.6e}", f"iterations = {result.iterations}",
             f"converged = {'yes' if result.converged else 'no'}"]
    if result.within_upper_bounds is not None:
        lines.append(f"within_upper_bounds = {'yes' if result.within_upper_bounds else 'no'}")
    return "\n".join(lines) + "\n", EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


SWEEP_COLUMNS = ("value", "verdict", "L1_hat", "l1_hat", "L2_hat", "l2_hat", "error")


def _sweep_row(job):
    text, key, value = job
    try:
        config = override(parse_config(text), key, value)
        verdict, _ = classify_config(config)
        s = verdict.stats
        return [value, verdict.label] + [_csv_num(x) for x in (s.L1_hat, s.l1_hat, s.L2_hat, s.l2_hat)] + [""]
    except Exception as exc:  # recorded per row, the sweep carries on
        return [value, "", "", "", "", "", f"{type(exc).__name__}: {exc}"]


def sweep_workers() -> int:
    env = os.environ.get("CHEMOLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep_rows(config: ScenarioConfig, key: str, values, workers: int | None = None) -> list[list]:
    """One row per value, in input order whatever the worker count."""
    text = render(config)
    jobs = [(text, key, str(v).strip()) for v in values]
    workers = sweep_workers() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        return [_sweep_row(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_sweep_row, jobs))


def cmd_sweep(config: ScenarioConfig, key: str, values, out=None, workers: int | None = None) -> int:
    rows = sweep_rows(config, key, values, workers)
    with _output(out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        w.writerows(rows)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chemolab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", help="evaluate every closed-form condition and bound")
    p.add_argument("config")
    p = sub.add_parser("simulate", help="run the scenario and write the sampled summary CSV")
    p.add_argument("config")
    p.add_argument("-o", "--output", default=None)
    p = sub.add_parser("classify", help="simulate and classify the long-time behaviour")
    p.add_argument("config")
    p = sub.add_parser("poincare", help="compute a periodic coexistence state")
    p.add_argument("config")
    p.add_argument("-o", "--output", default=None)
    p = sub.add_parser("sweep", help="classify over a list of values of one scalar key")
    p.add_argument("config")
    p.add_argument("--key", required=True)
    p.add_argument("--values", required=True, help="comma separated")
    p.add_argument("-o", "--output", default=None)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            config = parse_config(fh.read())
        if args.command == "check":
            text, code = cmd_check(config)
        elif args.command == "simulate":
            return cmd_simulate(config, args.output)
        elif args.command == "classify":
            text, code = cmd_classify(config)
        elif args.command == "poincare":
            text, code = cmd_poincare(config, args.output)
            if args.output in (None, "-"):
                sys.stderr.write(text)
                return code
        else:
            values = [v for v in args.values.split(",") if v.strip()]
            return cmd_sweep(config, args.key, values, args.output)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
