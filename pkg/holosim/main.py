"""Main holosim application."""

import argparse
import logging
import math
import sys
from typing import Callable, Dict, List, Optional

import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn
from rich.table import Table

from holosim import __version__
from holosim.errors import ConfigError, HolosimError, InsensitiveConfigurationError
from holosim.experiment import holometer
from holosim.experiment.holometer import Family, HolometerConfig, RadiationPressureParams
from holosim.experiment.noise_sim import NoiseModel, run_campaign
from holosim.utils.config import COMMANDS, RunConfig, get_config, parse_overrides
from holosim.utils.parallel import ordered_map
from holosim.utils.report import CsvReport
from holosim.validation import run_checks

console = Console(stderr=True)
logger = logging.getLogger("holosim")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

TWB_CROSSING_REFERENCES = (0.683, 0.776)
RP_DEPARTURE = 0.1


def display_banner():
    """Display application banner."""
    banner = f"""
    ╔═══════════════════════════════════════╗
    ║         holosim v{__version__:<21}║
    ║  Quantum-Light Holometer Simulator    ║
    ╚═══════════════════════════════════════╝
    """
    console.print(banner, style="bold cyan")


def setup_logging(level: str):
    """Route library logging through rich on stderr."""
    numeric = getattr(logging, str(level).upper(), None)
    if not isinstance(numeric, int):
        raise ConfigError(f"unknown log level {level!r}")
    logging.basicConfig(
        level=numeric,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True, show_path=False)],
        force=True,
    )


def _progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        console=console,
        transient=True,
    )


def _sweep(description: str, fn: Callable, items: List, workers: int) -> List:
    with _progress() as progress:
        task = progress.add_task(description, total=len(items))
        return ordered_map(fn, items, workers, on_done=lambda: progress.advance(task))


def linear_grid(lo: float, hi: float, n: int, name: str) -> np.ndarray:
    if n < 2 or not lo < hi:
        raise ConfigError(f"degenerate {name} grid: [{lo}, {hi}] with {n} points")
    return np.linspace(lo, hi, n)


def log_grid(lo: float, hi: float, n: int, name: str) -> np.ndarray:
    if lo <= 0:
        raise ConfigError(f"{name} grid needs a positive lower bound, got {lo}")
    return np.exp(linear_grid(math.log(lo), math.log(hi), n, name))


def _safe(fn: Callable[[], float]) -> float:
    try:
        return fn()
    except InsensitiveConfigurationError:
        return float("nan")


def run_validate(config: RunConfig, out: Optional[str]) -> int:
    """Run the self-check suite and report each check."""
    console.print(Panel.fit("[cyan]Running oracle, closed-form and invariant checks...[/cyan]", title="Validate"))
    with console.status("Checking..."):
        results = run_checks(seed=config.seed, cutoff=config.cutoff)

    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("check")
    table.add_column("measured", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("pass", justify="center")
    for result in results:
        mark = "[green]✓[/green]" if result.passed else "[red]✗[/red]"
        measured = result.detail or f"{result.measured:.3e}"
        table.add_row(result.name, measured, f"{result.tolerance:.1e}", mark)
    console.print(table)

    report = CsvReport("validate", ["check", "measured", "tolerance", "passed"], config.items())
    for result in results:
        report.add_row(result.name, result.measured, result.tolerance, result.passed)
    report.save(out)

    failed = [r for r in results if not r.passed]
    if failed:
        console.print(f"[red]{len(failed)} of {len(results)} checks failed[/red]")
        return EXIT_FAILED
    console.print(f"[green]✓ All {len(results)} checks passed[/green]")
    return EXIT_OK


def run_sweep_fig2(config: RunConfig, out: Optional[str]) -> int:
    """Squeezed-light log10 U0 over central phase and squeezing strength."""
    phis = linear_grid(config.phi_min, config.phi_max, config.n_phi, "phi0")
    lams = log_grid(config.lam_min, config.lam_max, config.n_lambda, "lambda")
    points = [(float(lam), float(phi)) for lam in lams for phi in phis]

    def evaluate(point):
        lam, phi0 = point
        setting = HolometerConfig(
            Family.SQ, mu=config.mu, lam=lam, theta_alpha=config.theta_alpha,
            theta_sq=config.theta_sq, phi0_1=phi0, phi0_2=phi0,
        )
        try:
            return math.log10(holometer.u0(setting))
        except InsensitiveConfigurationError:
            return float("inf")

    values = _sweep("Sweeping phi0 x lambda...", evaluate, points, config.workers)
    report = CsvReport("sweep-fig2", ["phi0", "lambda", "log10_u0"], config.items())
    for (lam, phi0), value in zip(points, values):
        report.add_row(phi0, lam, value)
    report.save(out)
    return EXIT_OK


def run_sweep_eta(config: RunConfig, out: Optional[str]) -> int:
    """U0 and U2 ratios against the classical U0 over detection efficiency."""
    etas = [float(eta) for eta in linear_grid(config.eta_min, config.eta_max, config.n_eta, "eta")]
    rp = RadiationPressureParams(config.tau, config.mass, config.omega)

    def evaluate(eta):
        sq = HolometerConfig.default(Family.SQ, config.mu, config.lam, eta)
        twb = HolometerConfig.default(Family.TWB, config.mu, config.lam, eta)
        baseline = _safe(lambda: holometer.u0(sq.classical()))
        return (
            eta,
            _safe(lambda: holometer.u0(sq)) / baseline,
            _safe(lambda: holometer.u0(twb)) / baseline,
            _safe(lambda: holometer.u2(sq, None, rp)) / baseline,
            _safe(lambda: holometer.u2(twb, None, rp)) / baseline,
        )

    rows = _sweep("Sweeping eta...", evaluate, etas, config.workers)
    report = CsvReport(
        "sweep-eta", ["eta", "ratio_sq", "ratio_twb", "ratio_sq_u2", "ratio_twb_u2"], config.items()
    )
    for row in rows:
        report.add_row(*row)

    twb = HolometerConfig.default(Family.TWB, config.mu, config.lam)
    try:
        crossing = holometer.efficiency_crossing(twb)
    except HolosimError as exc:
        logger.warning("no TWB efficiency crossing: %s", exc)
        crossing = float("nan")
    high_resource = holometer.high_resource_crossing()
    report.add_note("twb_crossing_eta", crossing)
    report.add_note("twb_crossing_eta_high_resource", high_resource)
    report.add_note("twb_crossing_reference_values", ",".join(str(v) for v in TWB_CROSSING_REFERENCES))
    console.print(f"TWB beats the classical baseline for eta > [bold]{crossing:.6f}[/bold]")
    console.print(
        f"High-resource crossing (mu={holometer.HIGH_RESOURCE_MU:g}, lambda={holometer.HIGH_RESOURCE_LAMBDA:g}): "
        f"[bold]{high_resource:.6f}[/bold] (references {TWB_CROSSING_REFERENCES[0]}, {TWB_CROSSING_REFERENCES[1]})"
    )
    report.save(out)
    return EXIT_OK


def run_sweep_mu(config: RunConfig, out: Optional[str]) -> int:
    """Uncertainty ratios versus mu/R, with and without radiation pressure."""
    rp = RadiationPressureParams(config.tau, config.mass, config.omega)
    scale = rp.R
    xs = [float(x) for x in log_grid(config.mu_over_r_min, config.mu_over_r_max, config.n_mu, "mu/R")]

    def evaluate(x):
        mu = x * scale
        sq = HolometerConfig.default(Family.SQ, mu, config.lam, config.eta)
        twb = HolometerConfig.default(Family.TWB, mu, config.lam, config.eta)
        baseline = _safe(lambda: holometer.u0(sq.classical()))
        return (
            x,
            _safe(lambda: holometer.u0(sq)) / baseline,
            _safe(lambda: holometer.u0(twb)) / baseline,
            _safe(lambda: holometer.u2(sq, None, rp)) / baseline,
            _safe(lambda: holometer.u2(twb, None, rp)) / baseline,
        )

    rows = _sweep("Sweeping mu/R...", evaluate, xs, config.workers)
    report = CsvReport(
        "sweep-mu",
        ["mu_over_R", "ratio_sq_u0", "ratio_twb_u0", "ratio_sq_u2", "ratio_twb_u2"],
        config.items(),
    )
    for row in rows:
        report.add_row(*row)

    report.add_note("R", scale)
    for label, u0_col, u2_col in (("sq", 1, 3), ("twb", 2, 4)):
        threshold = next(
            (row[0] for row in rows if row[u2_col] / row[u0_col] - 1.0 > RP_DEPARTURE),
            float("nan"),
        )
        report.add_note(f"rp_threshold_mu_over_R_{label}", threshold)
        report.add_note(f"rp_threshold_mu_{label}", threshold * scale)
    report.save(out)
    return EXIT_OK


def run_estimate(config: RunConfig, out: Optional[str]) -> int:
    """Monte Carlo campaign recovering an injected phase covariance."""
    setting = HolometerConfig.default(
        config.family.upper(), config.mu, config.lam, config.eta,
        theta_alpha=config.theta_alpha, theta_sq=config.theta_sq,
    )
    noise = NoiseModel.around(setting, config.sigma, config.rho)

    with console.status(f"Running {config.n_samples} samples per configuration..."):
        result = run_campaign(setting, None, noise, config.n_samples, config.seed, config.mode)

    console.print(Panel.fit(
        f"estimate:   {result.estimate:.6e} rad²\n"
        f"std error:  {result.std_error:.3e} rad²\n"
        f"true value: {result.true_value:.6e} rad²",
        title="Covariance estimate",
    ))
    report = CsvReport("estimate", ["estimate", "std_error", "n_samples", "true_value"], config.items())
    report.add_row(result.estimate, result.std_error, result.n_samples, result.true_value)
    report.save(out)
    return EXIT_OK


COMMAND_RUNNERS: Dict[str, Callable[[RunConfig, Optional[str]], int]] = {
    "validate": run_validate,
    "sweep-fig2": run_sweep_fig2,
    "sweep-eta": run_sweep_eta,
    "sweep-mu": run_sweep_mu,
    "estimate": run_estimate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holosim",
        description="holosim - correlated-interferometer simulator with quantum light",
        epilog="Any other setting can be given as --key value (e.g. --mu 1e4 --lambda 0.5).",
        allow_abbrev=False,
    )
    parser.add_argument("command", choices=COMMANDS, help="What to run")
    parser.add_argument("--config", type=str, default=None, help="key=value settings file")
    parser.add_argument("--out", type=str, default=None, help="CSV output path (default: stdout)")
    parser.add_argument("--seed", type=int, default=None, help="Random seed (default: 0)")
    parser.add_argument("--quiet", action="store_true", help="Skip the banner and settings table")
    parser.add_argument("--version", action="version", version=f"holosim {__version__}")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)

    try:
        overrides = parse_overrides(extra)
        if args.seed is not None:
            overrides["seed"] = args.seed
        config = get_config(args.command, args.config, overrides)
        setup_logging(config.log_level)
    except ConfigError as exc:
        console.print(f"[red]Configuration error: {exc}[/red]")
        return EXIT_USAGE

    if not args.quiet:
        display_banner()
        config.display(console)

    try:
        return COMMAND_RUNNERS[args.command](config, args.out)
    except HolosimError as exc:
        console.print(f"[red]{type(exc).__name__}: {exc}[/red]")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
