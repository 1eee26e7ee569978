"""Command-line front end: ``talbot simulate | quench | oracle-check``.

Exit codes: 0 success, 1 invalid configuration, 2 numeric failure (fit or
oracle check), 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import ValidationError

from . import io as tio
from ._validation import DomainError
from .analytic import (
    averaged_overlap_exact,
    averaged_overlap_from_weights,
    density_overlap,
    weight_even,
    weight_even_dual,
    weight_odd,
    weight_odd_dual,
)
from .config import RunConfig, format_validation_error, load_config
from .disorder import DisorderModel, block_rng, correlator_profile_for_quench, sample_phases
from .lattice import talbot_time
from .oracle import monte_carlo_average, overlap_by_quadrature
from .quench import (
    FitError,
    PARAM_NAMES,
    analyze_quench,
    bound_curves,
    count_resolvable_revivals,
    fit_damped_sine,
    reference_length,
    synthesize_signal,
    transport_bounds,
    xi_from_decay,
)

log = logging.getLogger("talbot_coherence")

OUT_DIR_ENV = "TALBOT_OUT_DIR"
DEFAULT_OUT_DIR = "talbot-out"

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class NumericFailure(RuntimeError):
    """Outputs were written but a fit or oracle check failed."""


def _period(config: RunConfig) -> float:
    params = config.lattice.params()
    return config.analysis.talbot_time or talbot_time(params.M, params.d)


def _xi_ref(config: RunConfig, period: float) -> float:
    decay = config.analysis.reference_decay
    return math.inf if math.isinf(decay) else xi_from_decay(decay, period)


def _default_amplitude(params) -> float:
    return 2.0 * params.plateau * math.exp(-params.exponent_factor)


def _times(config: RunConfig) -> np.ndarray:
    return np.linspace(0.0, config.sweep.t_max, config.sweep.n_points)


def _write_trace(path: Path, signal) -> None:
    header = ["time_s", "signal"]
    columns = [signal.times, signal.values]
    if signal.sigmas is not None:
        header.append("sigma")
        columns.append(signal.sigmas)
    tio.write_csv(path, header, columns)


def _write_fit(path: Path, fit) -> None:
    err = fit.stderr
    tio.write_csv(path, ["parameter", "value", "stderr"], [
        list(PARAM_NAMES) + ["residual_norm"],
        [getattr(fit, n) for n in PARAM_NAMES] + [fit.residual_norm],
        [err[n] for n in PARAM_NAMES] + [math.nan],
    ])


def cmd_simulate(config: RunConfig, out_dir: Path) -> dict:
    """Synthesize one Talbot trace for the configured disorder model and fit it."""
    params = config.lattice.params()
    seed = config.output.seed
    period = _period(config)
    xi_ref = _xi_ref(config, period)
    model = config.disorder.build()
    profile = model.profile(config.disorder.n_max)
    amplitude = _default_amplitude(params)
    noise_sigma = config.analysis.noise * amplitude
    times = _times(config)
    signal = synthesize_signal(params, profile, xi_ref, times, noise_sigma, seed, period=period)

    _write_trace(out_dir / "trace.csv", signal)
    tio.write_csv(out_dir / "correlator.csv", ["N", "C_N"], [np.arange(profile.n_max + 1), profile.values])

    summary = {
        "talbot_time_model_s": period,
        "xi_ref_sites": xi_ref,
        "coherence_length_sites": model.coherence_length,
        "revival_markers_s": tio.revival_markers(period, config.sweep.t_max),
    }
    fit = None
    try:
        fit = fit_damped_sine(signal, talbot_time_guess=period)
    except (FitError, DomainError) as exc:
        summary["fit_error"] = str(exc)
    if fit is not None:
        _write_fit(out_dir / "fit.csv", fit)
        summary["fit"] = {n: getattr(fit, n) for n in PARAM_NAMES}
        summary["resolvable_revivals"] = count_resolvable_revivals(fit, config.sweep.t_max, noise_sigma)

    if config.output.format == "csv+svg":
        curve = None
        if fit is not None:
            grid = np.linspace(0.0, config.sweep.t_max, 1000)
            curve = (grid * 1e6, fit.predict(grid))
        tio.plot_trace(
            out_dir / "trace.svg", signal.times, signal.values, signal.sigmas, period, curve,
            title=f"{model.kind} phases",
        )
    return summary


def _schedule(config: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    sched = config.analysis.schedule
    t_q = np.asarray(sched.t_q, dtype=float)
    rate = 1.0 / config.analysis.tunnelling_time
    if sched.kind == "explicit":
        xi = np.asarray(sched.xi_coh, dtype=float)
    else:
        ballistic, diffusive = transport_bounds(rate, t_q)
        xi = ballistic if sched.kind == "ballistic" else diffusive
    order = np.argsort(t_q)
    return t_q[order], xi[order]


def cmd_quench(config: RunConfig, out_dir: Path) -> dict:
    """Synthesize a reference and one trace per t_Q, then extract xi_coh(t_Q) and its exponent."""
    params = config.lattice.params()
    seed = config.output.seed
    n_max = config.disorder.n_max
    period = _period(config)
    xi_ref_model = _xi_ref(config, period)
    noise_sigma = config.analysis.noise * _default_amplitude(params)
    times = _times(config)
    t_q, xi_true = _schedule(config)

    reference = synthesize_signal(params, correlator_profile_for_quench(math.inf, n_max), xi_ref_model, times,
                                  noise_sigma, seed, period=period)
    _write_trace(out_dir / "traces" / "reference.csv", reference)
    xi_ref, xi_ref_err, ref_fit = reference_length(reference, talbot_time_guess=_theory_period(config))

    signals = {}
    for i, (tq, xi) in enumerate(zip(t_q, xi_true)):
        sig = synthesize_signal(params, correlator_profile_for_quench(xi, n_max), xi_ref_model, times,
                                noise_sigma, seed + 1 + i, period=period)
        signals[float(tq)] = sig
        _write_trace(out_dir / "traces" / f"tq_{tq * 1e3:010.4f}ms.csv", sig)

    series = analyze_quench(signals, xi_ref, xi_ref_err, talbot_time_guess=ref_fit.talbot_time_fit)
    rate = 1.0 / config.analysis.tunnelling_time
    first = np.flatnonzero(np.isfinite(series.xi_coh))
    anchor = (series.t_Q[first[0]], series.xi_coh[first[0]]) if first.size else None
    ballistic, diffusive = bound_curves(rate, series.t_Q, anchor)

    tio.write_csv(
        out_dir / "summary.csv",
        ["t_q_s", "xi_coh_model", "xi0", "xi0_err", "xi_coh", "xi_coh_err", "long_range", "talbot_time_fit_s",
         "ballistic_bound", "diffusive_bound"],
        [series.t_Q, xi_true, series.xi0, series.xi0_err, series.xi_coh, series.xi_coh_err, series.long_range,
         series.talbot_times, ballistic, diffusive],
    )
    pl = series.power_law
    tio.write_csv(
        out_dir / "power_law.csv",
        ["alpha", "alpha_err", "prefactor", "n_used", "xi_ref", "xi_ref_err", "reference_talbot_time_s"],
        [[series.alpha], [series.alpha_err], [math.nan if pl is None else pl.prefactor],
         [0 if pl is None else pl.n_used], [xi_ref], [xi_ref_err], [ref_fit.talbot_time_fit]],
    )
    if config.output.format == "csv+svg":
        grid = np.geomspace(series.t_Q.min(), series.t_Q.max(), 200)
        bounds = bound_curves(rate, grid, anchor)
        curve = None if pl is None or anchor is None else pl.curve(grid, anchor=anchor)
        tio.plot_quench(out_dir / "quench.svg", series, grid, bounds, curve)

    summary = {
        "alpha": series.alpha,
        "alpha_err": series.alpha_err,
        "xi_ref": xi_ref,
        "xi_ref_err": xi_ref_err,
        "failures": series.failures,
        "long_range_t_q_s": [float(t) for t in series.t_Q[series.long_range]],
    }
    if pl is None:
        raise NumericFailure(f"power-law fit impossible: {series.failures.get('power_law')}", summary)
    return summary


def _theory_period(config: RunConfig) -> float:
    params = config.lattice.params()
    return talbot_time(params.M, params.d)


def cmd_oracle_check(config: RunConfig, out_dir: Path) -> dict:
    """Compare closed forms against the independent numerical paths."""
    params = config.lattice.params()
    oc = config.oracle
    seed = config.output.seed
    rng = block_rng(seed, 0)
    checks = []

    dev = 0.0
    uniform = DisorderModel("independent-uniform")
    for i in range(oc.n_configs):
        phases = sample_phases(uniform, (-oc.half_width, oc.half_width), seed + 1 + i)
        for tau in oc.taus:
            quad = overlap_by_quadrature(tau, params, phases, oc.grid_step, oc.padding, check_resolution=False)
            dev = max(dev, abs(quad.value - density_overlap(tau, params, phases).value))
    checks.append(("overlap_vs_quadrature", dev, 1e-6))

    walk = DisorderModel("gaussian-random-walk", oc.mc_epsilon)
    profile = walk.profile(config.disorder.n_max)
    z = 0.0
    for j, tau in enumerate(oc.mc_taus):
        mc = monte_carlo_average(tau, params, walk, oc.mc_samples, seed + 1000 + j)
        exact = averaged_overlap_exact(tau, params, profile).value
        se = max(mc.standard_error, 1e-12)
        z = max(z, abs(mc.value - exact) / se)
    checks.append(("averaged_overlap_vs_monte_carlo_sigma", z, 3.0))

    dev = 0.0
    for _ in range(oc.n_duality):
        L = int(rng.integers(-3, 4))
        tau = float(rng.uniform(0.05, 3.0))
        dev = max(dev, abs(weight_even(L, tau, params) - weight_even_dual(L, tau, params)),
                  abs(weight_odd(L, tau, params) - weight_odd_dual(L, tau, params)))
    checks.append(("weights_vs_dual_weights", dev, 1e-10))

    dev = 0.0
    for _ in range(10):
        xi = float(rng.uniform(0.5, 20.0))
        prof = correlator_profile_for_quench(xi, config.disorder.n_max)
        tau = float(rng.uniform(0.0, 3.0))
        dev = max(dev, abs(averaged_overlap_exact(tau, params, prof).value
                           - averaged_overlap_from_weights(tau, params, prof).value))
    checks.append(("double_sum_vs_weight_decomposition", dev, 1e-9))

    rows = [(name, d, tol, d <= tol) for name, d, tol in checks]
    tio.write_csv(out_dir / "report.csv", ["check", "max_deviation", "tolerance", "passed"], list(zip(*rows)))
    for name, d, tol, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<40s} max deviation {d:.3e}  tolerance {tol:.1e}")
    summary = {name: {"max_deviation": d, "tolerance": tol, "passed": bool(ok)} for name, d, tol, ok in rows}
    if not all(r[3] for r in rows):
        raise NumericFailure("oracle check failed", summary)
    return summary


COMMANDS = {"simulate": cmd_simulate, "quench": cmd_quench, "oracle-check": cmd_oracle_check}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="talbot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=func.__doc__.splitlines()[0])
        p.add_argument("--config", type=Path, help="YAML run configuration")
        p.add_argument("--out", type=Path, help=f"output directory (default: ${OUT_DIR_ENV} or ./{DEFAULT_OUT_DIR})")
        p.add_argument("--seed", type=int, help="override the configured seed (unsigned 64-bit)")
        p.add_argument("--format", choices=["csv", "csv+svg"], help="output formats")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _resolve_out(args, config: RunConfig) -> Path:
    if args.out is not None:
        return args.out
    if config.output.dir:
        return Path(config.output.dir)
    return Path(os.environ.get(OUT_DIR_ENV, DEFAULT_OUT_DIR))


def run(command: str, config: RunConfig, out_dir: Path, config_path: Optional[Path] = None) -> dict:
    """Run one command with manifest bookkeeping.  Raises on failure."""
    config = config.with_seed()
    started = datetime.now(timezone.utc)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs = {"config": config_path} if config_path else None
    try:
        summary = COMMANDS[command](config, out_dir)
    except NumericFailure as exc:
        tio.write_manifest(out_dir, command, config.snapshot(), config.output.seed, started, inputs,
                           {"status": "numeric failure", "error": str(exc.args[0]), "summary": exc.args[1]})
        raise
    tio.write_manifest(out_dir, command, config.snapshot(), config.output.seed, started, inputs,
                       {"status": "ok", "summary": summary})
    return summary


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config)
        updates = {}
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise DomainError("--seed must be an unsigned 64-bit integer")
            updates["seed"] = args.seed
        if args.format is not None:
            updates["format"] = args.format
        if updates:
            config = config.model_copy(update={"output": config.output.model_copy(update=updates)})
    except ValidationError as exc:
        print(f"invalid configuration:\n{format_validation_error(exc)}", file=sys.stderr)
        return EXIT_INVALID
    except (DomainError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        run(args.command, config, _resolve_out(args, config), args.config)
    except NumericFailure as exc:
        print(f"numeric failure: {exc.args[0]}", file=sys.stderr)
        return EXIT_NUMERIC
    except FitError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
