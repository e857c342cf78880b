"""Command-line experiment runner.

Subcommands: ``simulate`` (trajectory CSV + metadata), ``analyze`` (period,
conserved-quantity drift, time averages, equilibrium certification, written
as a machine-parseable JSON report), ``sweep`` (random-grid periodicity
summary), ``plot`` (deterministic SVG from a trajectory CSV), ``verify``
(seeded oracle cross-checks).

Exit codes: 0 success, 2 input error, 3 integration failure, 4 a requested
acceptance threshold failed (reports are still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, dynamics, oracle
from .config import ExperimentConfig, SweepSettings, load_config
from .errors import InputError, IntegrationError
from .svgplot import line_plot_svg

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTEGRATION = 3
EXIT_THRESHOLD = 4


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _meta(cfg: ExperimentConfig, extra: dict) -> dict:
    payload = {
        "label": cfg.label,
        "game": cfg.game.describe(),
        "field": cfg.field_kind,
        "initial_state": [float(v) for v in cfg.initial_state],
        "integrator": {
            "method": cfg.integrator.method,
            "step": cfg.integrator.step,
            "abs_tol": cfg.integrator.abs_tol,
            "rel_tol": cfg.integrator.rel_tol,
            "max_step": cfg.integrator.max_step,
            "max_time": cfg.integrator.max_time,
            "sample_interval": cfg.integrator.sample_interval,
        },
    }
    payload.update(extra)
    return payload


# ----------------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------------


def run_simulate(cfg: ExperimentConfig, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        traj = dynamics.integrate(cfg.game, cfg.initial_state, cfg.integrator, cfg.field_kind)
    except IntegrationError as err:
        if err.trajectory is not None:
            err.trajectory.write_csv(out_dir / "trajectory.csv")
        _write_json(
            out_dir / "meta.json",
            _meta(cfg, {"status": "integration_failure", "error": str(err)}),
        )
        print(f"integration failure: {err}", file=sys.stderr)
        return EXIT_INTEGRATION
    traj.write_csv(out_dir / "trajectory.csv")
    _write_json(
        out_dir / "meta.json",
        _meta(
            cfg,
            {
                "status": "ok",
                "samples": len(traj),
                "max_boundary_excursion": traj.metadata["max_boundary_excursion"],
            },
        ),
    )
    print(f"wrote {out_dir / 'trajectory.csv'} ({len(traj)} samples)")
    return EXIT_OK


# ----------------------------------------------------------------------------
# analyze
# ----------------------------------------------------------------------------


def _check(report: dict, name: str, value: float, threshold: float, ok: bool) -> None:
    report["checks"].append(
        {"name": name, "value": value, "threshold": threshold, "passed": bool(ok)}
    )


def _single_gene_closed_form(cfg: ExperimentConfig) -> bool:
    game = cfg.game
    return (
        game.n == 1
        and game.m == 1
        and game.f.table[0] != game.f.table[1]
        and game.g.table[0] != game.g.table[1]
    )


def run_analyze(cfg: ExperimentConfig, out_dir: Path) -> int:
    if not cfg.analyses:
        raise InputError("analyze requires a nonempty 'analyses' list in the config")
    out_dir.mkdir(parents=True, exist_ok=True)
    game = cfg.game
    settings = cfg.analysis
    report: dict = _meta(cfg, {"analyses": {}, "checks": []})
    sections = report["analyses"]

    fixed = analysis.classify_fixed_point(game, cfg.initial_state, settings.fixed_tol)
    if "classify" in cfg.analyses:
        sections["classify"] = fixed.as_dict()

    needs_period = bool(
        {"period", "hamiltonian", "averages", "ce"} & set(cfg.analyses)
    )
    period_est = None
    if needs_period and not fixed.is_fixed:
        period_est = analysis.detect_period(
            game,
            cfg.initial_state,
            cfg.integrator,
            field_kind=cfg.field_kind,
            return_tol=settings.return_tol,
            fixed_tol=settings.fixed_tol,
        )

    if "period" in cfg.analyses:
        if fixed.is_fixed:
            sections["period"] = {"skipped": "initial state is a fixed point"}
        elif period_est is None:
            sections["period"] = {"found": False}
            _check(report, "period_found", 0.0, 1.0, False)
        else:
            sections["period"] = {
                "found": True,
                "period": period_est.period,
                "return_error": period_est.return_error,
                "crossings_used": period_est.crossings_used,
            }
            _check(
                report,
                "period_return_error",
                period_est.return_error,
                settings.return_tol,
                period_est.return_error <= settings.return_tol,
            )

    aligned = None
    if period_est is not None and {"averages", "ce"} & set(cfg.analyses):
        aligned_cfg = cfg.integrator.replace(
            max_time=settings.horizon_periods * period_est.period,
            sample_interval=period_est.period / settings.samples_per_period,
        )
        aligned = dynamics.integrate(game, cfg.initial_state, aligned_cfg, cfg.field_kind)

    if "hamiltonian" in cfg.analyses:
        if fixed.is_fixed or period_est is None:
            sections["hamiltonian"] = {
                "skipped": "fixed start" if fixed.is_fixed else "no period found"
            }
            if not fixed.is_fixed:
                _check(report, "hamiltonian_period_available", 0.0, 1.0, False)
        else:
            drift_cfg = cfg.integrator.replace(
                max_time=settings.drift_periods * period_est.period,
                sample_interval=period_est.period / settings.drift_points,
            )
            drift_traj = dynamics.integrate(game, cfg.initial_state, drift_cfg, cfg.field_kind)
            section: dict = {"periods": settings.drift_periods}
            profile_cfg = cfg.integrator.replace(
                max_time=settings.rate_profile_time,
                sample_interval=cfg.integrator.sample_interval,
            )
            rate_a = analysis.rate_profile(
                game.f, cfg.initial_state[: game.n], profile_cfg, team="A"
            )
            rate_b = analysis.rate_profile(
                game.g, cfg.initial_state[game.n :], profile_cfg, team="B"
            )
            hvals = analysis.hamiltonian_values(
                rate_a, rate_b, game.nash_p, game.nash_q, drift_traj.f, drift_traj.g
            )
            scale = max(1.0, abs(float(np.median(hvals))))
            drift_rel = float(hvals.max() - hvals.min()) / scale
            section["quadrature"] = {
                "value": float(np.median(hvals)),
                "drift": float(hvals.max() - hvals.min()),
                "drift_relative": drift_rel,
            }
            _check(
                report,
                "hamiltonian_drift_quadrature",
                drift_rel,
                settings.drift_tol,
                drift_rel <= settings.drift_tol,
            )
            if _single_gene_closed_form(cfg):
                closed = np.array(
                    [
                        analysis.closed_form_h_single_gene(game.nash_p, game.nash_q, fv, gv)
                        for fv, gv in zip(drift_traj.f, drift_traj.g)
                    ]
                )
                scale = max(1.0, abs(float(np.median(closed))))
                closed_rel = float(closed.max() - closed.min()) / scale
                section["closed_form"] = {
                    "value": float(np.median(closed)),
                    "drift": float(closed.max() - closed.min()),
                    "drift_relative": closed_rel,
                }
                _check(
                    report,
                    "hamiltonian_drift_closed_form",
                    closed_rel,
                    settings.drift_tol,
                    closed_rel <= settings.drift_tol,
                )
            sections["hamiltonian"] = section

    if "averages" in cfg.analyses:
        if aligned is None:
            sections["averages"] = {
                "skipped": "fixed start" if fixed.is_fixed else "no period found"
            }
            if not fixed.is_fixed:
                _check(report, "averages_period_available", 0.0, 1.0, False)
        else:
            av = analysis.time_averages(
                game, aligned, use_integer_periods=True, period=period_est.period
            )
            sections["averages"] = {
                "horizon": av.horizon,
                "periods_used": av.periods_used,
                "f_bar": av.f_bar,
                "g_bar": av.g_bar,
                "uA_bar": av.utility_bar,
                "u0_bar": av.u0_bar.tolist(),
                "u1_bar": av.u1_bar.tolist(),
                "uhat_bar": av.uhat_bar.tolist(),
                "regret_gap": av.regret_gap,
            }
            dev_f = abs(av.f_bar - game.nash_p)
            dev_g = abs(av.g_bar - game.nash_q)
            dev_u = abs(av.utility_bar - game.value)
            _check(report, "f_bar_vs_nash", dev_f, settings.avg_tol, dev_f <= settings.avg_tol)
            _check(report, "g_bar_vs_nash", dev_g, settings.avg_tol, dev_g <= settings.avg_tol)
            _check(report, "uA_bar_vs_value", dev_u, settings.avg_tol, dev_u <= settings.avg_tol)
            _check(
                report,
                "regret_gap",
                av.regret_gap,
                settings.regret_tol,
                av.regret_gap <= settings.regret_tol,
            )

    if "ce" in cfg.analyses:
        if aligned is None:
            sections["ce"] = {
                "skipped": "fixed start" if fixed.is_fixed else "no period found"
            }
            if not fixed.is_fixed:
                _check(report, "ce_period_available", 0.0, 1.0, False)
        else:
            pi = analysis.empirical_profile_distribution(game, aligned)
            ce = analysis.certify_correlated_equilibrium(game, pi, tol=settings.ce_tol)
            sections["ce"] = ce.as_dict()
            _check(
                report,
                "min_ce_slack",
                ce.min_ce_slack,
                -settings.ce_tol,
                ce.min_ce_slack >= -settings.ce_tol,
            )

    if "chasing" in cfg.analyses:
        traj = aligned
        if traj is None and not fixed.is_fixed:
            traj = dynamics.integrate(game, cfg.initial_state, cfg.integrator, cfg.field_kind)
        if traj is None:
            sections["chasing"] = {"skipped": "fixed start"}
        else:
            chase = analysis.chasing_check(
                game, traj, field_kind=cfg.field_kind, guard=settings.chasing_guard
            )
            sections["chasing"] = chase.as_dict()
            _check(
                report,
                "chasing_violations",
                float(chase.violations_a + chase.violations_b),
                0.0,
                chase.ok,
            )

    passed = all(entry["passed"] for entry in report["checks"])
    report["passed"] = passed
    _write_json(out_dir / "report.json", report)
    for entry in report["checks"]:
        tag = "PASS" if entry["passed"] else "FAIL"
        print(f"[{tag}] {entry['name']}: {entry['value']:.6g} (threshold {entry['threshold']:.6g})")
    print(f"report: {out_dir / 'report.json'}")
    return EXIT_OK if passed else EXIT_THRESHOLD


# ----------------------------------------------------------------------------
# sweep
# ----------------------------------------------------------------------------


def run_sweep(cfg: ExperimentConfig, out_dir: Path, seed: int | None = None) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    game = cfg.game
    settings = cfg.sweep or SweepSettings()
    if seed is not None:
        settings = SweepSettings(
            count=settings.count,
            seed=seed,
            margin=settings.margin,
            min_periodic_fraction=settings.min_periodic_fraction,
        )
    rng = np.random.default_rng(settings.seed)
    dim = game.n + game.m
    states = settings.margin + (1.0 - 2.0 * settings.margin) * rng.random((settings.count, dim))
    rows = []
    periodic = 0
    for index in range(settings.count):
        z0 = states[index]
        gap = min(float(np.min(z0)), float(np.min(1.0 - z0)))
        tracker = {"gap": gap}

        def monitor(step, tracker=tracker):
            state_gap = float(np.min(np.minimum(step.y1, 1.0 - step.y1)))
            tracker["gap"] = min(tracker["gap"], state_gap)

        try:
            est = analysis.detect_period(
                game,
                z0,
                cfg.integrator,
                field_kind=cfg.field_kind,
                return_tol=cfg.analysis.return_tol,
                fixed_tol=cfg.analysis.fixed_tol,
                monitor=monitor,
            )
        except InputError:
            est = None  # landed on a fixed point: not periodic
        if est is not None:
            periodic += 1
        rows.append((z0, est, tracker["gap"]))

    csv_path = out_dir / "sweep.csv"
    with open(csv_path, "w") as handle:
        cols = (
            ["index"]
            + [f"x_{i + 1}" for i in range(game.n)]
            + [f"y_{j + 1}" for j in range(game.m)]
            + ["periodic", "period", "return_error", "min_boundary_distance"]
        )
        handle.write(",".join(cols) + "\n")
        for index, (z0, est, gap) in enumerate(rows):
            values = [format(v, ".17g") for v in z0]
            if est is None:
                tail = ["0", "nan", "nan"]
            else:
                tail = [
                    "1",
                    format(est.period, ".17g"),
                    format(est.return_error, ".17g"),
                ]
            handle.write(",".join([str(index)] + values + tail + [format(gap, ".17g")]) + "\n")
    fraction = periodic / settings.count
    summary = {
        "count": settings.count,
        "periodic": periodic,
        "fraction": fraction,
        "min_periodic_fraction": settings.min_periodic_fraction,
        "seed": settings.seed,
        "passed": fraction >= settings.min_periodic_fraction,
    }
    _write_json(out_dir / "sweep_summary.json", summary)
    print(
        f"sweep: {periodic}/{settings.count} periodic "
        f"(required fraction {settings.min_periodic_fraction})"
    )
    return EXIT_OK if summary["passed"] else EXIT_THRESHOLD


# ----------------------------------------------------------------------------
# plot
# ----------------------------------------------------------------------------


def _running_average(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    if times.size == 1:
        return values.copy()
    increments = 0.5 * (values[1:] + values[:-1]) * np.diff(times)
    cumulative = np.concatenate([[0.0], np.cumsum(increments)])
    elapsed = times - times[0]
    out = np.where(elapsed > 0, cumulative / np.where(elapsed > 0, elapsed, 1.0), values[0])
    return out


def run_plot(
    csv_path: Path,
    out_dir: Path,
    fields: list[str] | None,
    phase: list[str] | None,
    running_average: bool,
    title: str | None,
) -> int:
    traj = dynamics.Trajectory.read_csv(csv_path)
    columns = traj.columns()

    def column(name: str) -> np.ndarray:
        if name not in columns:
            raise InputError(
                f"unknown column {name!r}; available: {', '.join(columns)}"
            )
        return columns[name]

    out_dir.mkdir(parents=True, exist_ok=True)
    if phase:
        if len(phase) != 2:
            raise InputError("--phase needs exactly two columns, e.g. --phase x_1,y_1")
        xs, ys = column(phase[0]), column(phase[1])
        svg = line_plot_svg(
            [(f"{phase[1]} vs {phase[0]}", xs, ys)],
            title=title or f"phase: {phase[0]} vs {phase[1]}",
            xlabel=phase[0],
            ylabel=phase[1],
        )
    else:
        names = fields or ["f", "g"]
        series = []
        for name in names:
            values = column(name)
            if running_average:
                values = _running_average(traj.times, values)
            label = f"avg {name}" if running_average else name
            series.append((label, traj.times, values))
        svg = line_plot_svg(
            series,
            title=title or ("running averages" if running_average else "time series"),
            xlabel="t",
            ylabel="",
        )
    path = out_dir / "plot.svg"
    path.write_text(svg)
    print(f"wrote {path}")
    return EXIT_OK


# ----------------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------------


def run_verify(seed: int, cases: int) -> int:
    results = oracle.verification_suite(seed=seed, cases=cases)
    failed = False
    for result in results:
        tag = "PASS" if result.passed else "FAIL"
        failed = failed or not result.passed
        print(
            f"[{tag}] {result.name}: cases={result.cases} "
            f"max_error={result.max_error:.3e} tolerance={result.tolerance:.3e}"
        )
    return EXIT_THRESHOLD if failed else EXIT_OK


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teamrep",
        description="Replicator dynamics for two-team zero-sum games with Boolean phenotypes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="experiment config (JSON)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--max-time", type=float, default=None, help="override integration horizon")
        p.add_argument("--seed", type=int, default=None, help="override the random seed")

    p_sim = sub.add_parser("simulate", help="integrate and write trajectory.csv + meta.json")
    add_common(p_sim)

    p_an = sub.add_parser("analyze", help="run the configured analyses and write report.json")
    add_common(p_an)
    p_an.add_argument(
        "--tol", type=float, default=None, help="override the period return tolerance"
    )

    p_sw = sub.add_parser("sweep", help="periodicity sweep over random initial states")
    add_common(p_sw)

    p_plot = sub.add_parser("plot", help="render a trajectory CSV as a deterministic SVG")
    p_plot.add_argument("csv", help="trajectory CSV path")
    p_plot.add_argument("--out", required=True, help="output directory")
    p_plot.add_argument("--fields", default=None, help="comma-separated columns to plot against t")
    p_plot.add_argument("--phase", default=None, help="two comma-separated columns for a phase plot")
    p_plot.add_argument(
        "--running-average", action="store_true", help="plot running time-averages of the fields"
    )
    p_plot.add_argument("--title", default=None)

    p_ver = sub.add_parser("verify", help="run seeded oracle cross-checks")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--cases", type=int, default=200)
    return parser


def _load_with_overrides(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    integrator = cfg.integrator
    if args.max_time is not None:
        integrator = integrator.replace(max_time=args.max_time)
    analysis_settings = cfg.analysis
    if getattr(args, "tol", None) is not None:
        from dataclasses import replace

        analysis_settings = replace(analysis_settings, return_tol=args.tol)
    from dataclasses import replace

    return replace(cfg, integrator=integrator, analysis=analysis_settings)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return run_simulate(_load_with_overrides(args), Path(args.out))
        if args.command == "analyze":
            return run_analyze(_load_with_overrides(args), Path(args.out))
        if args.command == "sweep":
            return run_sweep(_load_with_overrides(args), Path(args.out), seed=args.seed)
        if args.command == "plot":
            fields = args.fields.split(",") if args.fields else None
            phase = args.phase.split(",") if args.phase else None
            return run_plot(
                Path(args.csv), Path(args.out), fields, phase, args.running_average, args.title
            )
        if args.command == "verify":
            return run_verify(args.seed, args.cases)
        raise InputError(f"unknown command {args.command!r}")
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except IntegrationError as err:
        print(f"integration failure: {err}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
