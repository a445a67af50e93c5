"""Experiment orchestration: run the configured ensemble, apply the
diagnostics, and emit the report and CSV files."""

import csv
import os

import numpy as np

from . import control_loop, diagnostics, schemes
from .config import ExperimentConfig
from .control_loop import PlantSpec
from .diagnostics import StabilityReport, Verdict
from .errors import QuantstabError

EXIT_CODES = {"pass": 0, "fail": 2, "inconclusive": 3}

# seed namespaces for the diagnostic sub-ensembles
_MAIN, _AMS, _ERGO = 0, 1, 2


def _scheme_runner(config: ExperimentConfig, domain):
    """Build runner(initial, n_trajs, length, salt) -> (x, s) for the
    configured scheme, with seeds namespaced by diagnostic domain."""
    kind, scheme, source = config.kind, config.scheme, config.source
    burn = {} if config.burn_in is None else {"burn_in": config.burn_in}

    if kind == "DeltaMod":
        def runner(initial, n, length, salt):
            x, s = schemes.delta_mod_ensemble(
                source, scheme["m"], n, length, s0=initial,
                master_seed=(config.seed, domain, salt), **burn)
            return x, s[:, :length]
    elif kind == "GoodmanGersho":
        policy = scheme["_policy"]
        log2_b = float(scheme.get("log2_b", 0.0))

        def runner(initial, n, length, salt):
            x, j = schemes.gg_ensemble(
                source, policy, n, length, j0=int(initial), log2_b=log2_b,
                master_seed=(config.seed, domain, salt), **burn)
            s = log2_b + j[:, :length] * policy.spacing.ratio  # log2(delta) paths
            return x, s
    elif kind == "CustomScheme":
        from .sources import sample_paths

        def runner(initial, n, length, salt):
            x = sample_paths(source, n, length,
                             master_seed=(config.seed, domain, salt), **burn)
            s = schemes.linear_paths(x, scheme["c"], scheme["d"], initial)
            return x, s[:, :length]
    else:
        raise QuantstabError(f"no scheme runner for {kind}")
    return runner


def _common_diagnostics(config, x, s, runner_factory, report):
    """Tightness, occupation, time averages, AMS, ergodicity on (x, s)."""
    diag = config.diagnostics
    report.tightness_curve = diagnostics.tightness_curve(s, diag.m_grid)
    m_max = float(diag.m_grid[-1])
    stat = report.tightness_curve[m_max]
    report.verdicts["tight"] = Verdict(
        status="pass" if stat <= diag.tight_threshold else "fail",
        statistic=stat, tolerance=diag.tight_threshold,
        reason=f"tightness at M = {m_max}")

    edges = sorted({float(sign * m) for m in diag.m_grid for sign in (-1, 1)})
    hist = diagnostics.occupation_histogram(s, edges)
    report.extras["occupation"] = hist
    checkpoints = [max(1, s.shape[1] // 4), max(1, s.shape[1] // 2), s.shape[1]]
    prefix_hists = [diagnostics.occupation_histogram(s[:, :t], edges)
                    for t in checkpoints]
    report.occupation_l1_deltas = [
        diagnostics.l1_distance(h1, h2)
        for h1, h2 in zip(prefix_hists[:-1], prefix_hists[1:])]

    functionals = [diagnostics.make_functional(f) for f in diag.functionals]
    if diag.run_ergodicity and len(diag.initials) >= 3 and len(functionals) >= 3:
        verdict, table = diagnostics.ergodicity_consistency(
            runner_factory(_ERGO), diag.initials, functionals, config.horizon,
            se_multiplier=diag.se_multiplier, abs_floor=diag.abs_floor)
        report.verdicts["ergodic_consistent"] = verdict
        report.time_averages = table
    if diag.run_ams and len(diag.shifts) >= 2 and len(diag.initials) >= 2:
        ams_T = diag.ams_horizon or min(config.horizon, 20_000)
        report.verdicts["ams_consistent"] = diagnostics.ams_consistency(
            runner_factory(_AMS), diag.initials, diag.shifts, ams_T,
            n_trajs=diag.ams_trajs, window=diag.ams_window,
            se_multiplier=diag.se_multiplier, abs_floor=diag.abs_floor,
            tight_m=m_max)
    report.tolerances = {"tight_threshold": diag.tight_threshold,
                         "se_multiplier": diag.se_multiplier,
                         "abs_floor": diag.abs_floor}
    return report


def run_experiment(config: ExperimentConfig, out_dir=None, threads=1):
    """Execute the configured experiment; returns (report, exit_code) and
    writes report.txt plus the CSV artifacts into out_dir."""
    out_dir = out_dir or config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    report = StabilityReport()

    if config.kind == "ZoomControl":
        _run_zoom(config, report, threads)
    else:
        runner_factory = lambda domain: _scheme_runner(config, domain)
        main_runner = runner_factory(_MAIN)
        initial0 = config.scheme.get("s0", config.diagnostics.initials[0])
        x, s = main_runner(initial0, config.n_trajs, config.horizon, 0)
        if config.kind == "DeltaMod":
            precheck = schemes.check_delta_mod_stability(
                config.source, config.scheme["m"], max(10_000, 100_000))
            report.extras["precheck"] = precheck
        _common_diagnostics(config, x, s, runner_factory, report)

    _emit(config, report, out_dir)
    return report, EXIT_CODES[report.worst_status()]


def _run_zoom(config, report, threads):
    scheme = config.scheme
    zoom = scheme["_zoom"]
    plant = PlantSpec(a=zoom.a, b=zoom.b, noise_std=scheme["noise_std"],
                      seed=config.seed, x0=scheme["x0"])
    ensemble = control_loop.run_ensemble(
        plant, zoom, config.horizon, config.n_trajs,
        master_seed=(config.seed, _MAIN), threads=threads)
    report.extras["ensemble"] = ensemble
    report.extras["notes"] = scheme.get("_notes", [])

    diag = config.diagnostics
    finite_x = np.clip(ensemble.x, -control_loop.DIVERGENCE_GUARD,
                       control_loop.DIVERGENCE_GUARD)
    report.tightness_curve = diagnostics.tightness_curve(finite_x, diag.m_grid)
    edges = sorted({float(sign * m) for m in diag.m_grid for sign in (-1, 1)})
    report.extras["occupation"] = diagnostics.occupation_histogram(finite_x, edges)

    curve = control_loop.moment_curve(ensemble)
    report.extras["moment_curve"] = curve
    frac_diverged = float(np.mean(ensemble.diverged))
    late, mid = float(curve[-1]), float(curve[len(curve) // 2])
    ratio = late / mid if mid > 0 else float("inf")
    if frac_diverged > 0.0 or ratio > 10.0:
        status = "fail"
    elif ratio <= 2.0:
        status = "pass"
    else:
        status = "inconclusive"
    report.verdicts["stable"] = Verdict(
        status=status, statistic=ratio, tolerance=2.0,
        reason=f"moment ratio T vs T/2; diverged fraction {frac_diverged:.4f}")
    report.tolerances = {"plateau_ratio": 2.0, "divergence_ratio": 10.0}


def _emit(config, report, out_dir):
    def path(name):
        return os.path.join(out_dir, name)

    with open(path("tightness_curve.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["M", "value"])
        for m, value in sorted(report.tightness_curve.items()):
            writer.writerow([repr(m), repr(value)])

    hist = report.extras.get("occupation")
    if hist is not None:
        edges = hist.edges[0]
        lo = np.concatenate(([-np.inf], edges))
        hi = np.concatenate((edges, [np.inf]))
        with open(path("occupation.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_lo", "bin_hi", "mass"])
            for i in range(hist.mass.size):
                writer.writerow([repr(float(lo[i])), repr(float(hi[i])),
                                 repr(float(hist.mass[i]))])

    if report.time_averages:
        with open(path("time_averages.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["functional", "initial", "value", "stderr"])
            for (fname, initial), (value, stderr) in sorted(report.time_averages.items()):
                writer.writerow([fname, repr(float(initial)), repr(value), repr(stderr)])

    ensemble = report.extras.get("ensemble")
    if ensemble is not None:
        control_loop.write_ensemble_csv(path("ensemble.csv"), ensemble)
        control_loop.write_trajectory_csv(path("trajectory_0.csv"), ensemble, 0)

    with open(path("report.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"experiment.kind = {config.kind}\n")
        fh.write(f"experiment.seed = {config.seed}\n")
        precheck = report.extras.get("precheck")
        if precheck is not None:
            fh.write(f"precheck.passed = {precheck.passed}\n")
            fh.write(f"precheck.p_upper = {precheck.p_upper!r}\n")
            fh.write(f"precheck.p_lower = {precheck.p_lower!r}\n")
            if precheck.analytic_upper is not None:
                fh.write(f"precheck.analytic_upper = {precheck.analytic_upper!r}\n")
                fh.write(f"precheck.analytic_lower = {precheck.analytic_lower!r}\n")
        for note in report.extras.get("notes", []):
            fh.write(f"note = {note}\n")
        for i, delta in enumerate(report.occupation_l1_deltas):
            fh.write(f"occupation.l1_delta_{i} = {delta!r}\n")
        for key, value in sorted(report.tolerances.items()):
            fh.write(f"tolerances.{key} = {value!r}\n")
        for name, verdict in sorted(report.verdicts.items()):
            fh.write(f"verdicts.{name} = {verdict.status}\n")
            fh.write(f"verdicts.{name}.statistic = {verdict.statistic!r}\n")
            fh.write(f"verdicts.{name}.tolerance = {verdict.tolerance!r}\n")
            if verdict.reason:
                fh.write(f"verdicts.{name}.reason = {verdict.reason}\n")
        fh.write(f"exit_status = {EXIT_CODES[report.worst_status()]}\n")
