"""
Command-line interface for CVQD.

Provides commands for training generative and restoration denoisers, running
backward chains, forward diffusion, the verification suites and sweeps.
"""

import functools
import logging
import sys
from contextlib import contextmanager
from typing import Any, Callable, Iterator, Optional, Tuple

import click

from cvqd.constants import Role
from cvqd.constants import RuntimeConstants as RC
from cvqd.constants import VerifyConstants as VC
from cvqd.exceptions import ConfigError, CvqdError, VerificationFailed
from cvqd.experiments.service import ChainOutcome, ExperimentService, TrainOutcome, utc_now
from cvqd.experiments.sweeps import (
    SWEEP_PARAMETERS,
    restore_sweep,
    run_sweep,
    sweep_phases,
    write_restore_sweep,
    write_sweep,
)
from cvqd.storage.checkpoints import checkpoint_load
from cvqd.storage.config import DEFAULT_PROFILE, load_config
from cvqd.storage.files import write_json
from cvqd.training.trainer import MetricsRow, ProgressCallback
from cvqd.utils.config_validator import validate_profiles
from cvqd.utils.formatting import format_fidelity, format_metrics_row, format_report
from cvqd.utils.validation import (
    parse_values,
    validate_occupation,
    validate_suites,
    validate_transmissivity,
)
from cvqd.verify.base import VerifyContext
from cvqd.verify.register_all import register_all_suites
from cvqd.verify.registry import suite_registry

# Setup logging
logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
logger = logging.getLogger(__name__)

METRICS_LOG_EVERY = 100

DEFAULT_SWEEP_VALUES = {
    "alpha": RC.COHERENT_SWEEP_VALUES,
    "r": RC.SQUEEZED_SWEEP_VALUES,
}


def handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """Report CvqdError as '❌ Error: ...' and exit with the error's code."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except CvqdError as e:
            click.echo(f"❌ Error: {e}", err=True)
            if logging.getLogger().level == logging.DEBUG:
                raise
            sys.exit(e.exit_code)

    return wrapper


def run_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """--config, --seed, --out and --profile, shared by the config-driven commands."""
    decorators = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(dir_okay=False),
            help="TOML config file (keys as in the hyperparameter tables)",
        ),
        click.option("--seed", type=int, help="Override the config seed"),
        click.option(
            "--out", type=click.Path(file_okay=False), default=".", help="Output directory"
        ),
        click.option(
            "--profile",
            type=click.Choice(["desk", "paper"]),
            default=DEFAULT_PROFILE,
            help=f"Default hyperparameters (default: {DEFAULT_PROFILE})",
        ),
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


@contextmanager
def training_progress(total: int, label: str = "Training") -> Iterator[ProgressCallback]:
    """Progress bar advanced once per training iteration."""
    with click.progressbar(length=total, label=label) as bar:

        def advance(row: MetricsRow) -> None:
            bar.update(1)
            if row.iteration % METRICS_LOG_EVERY == 0:
                logger.debug(format_metrics_row(row))

        yield advance


def _echo_training(outcome: TrainOutcome) -> None:
    summary = outcome.result.summary
    click.echo(f"\n✓ Training finished after {len(outcome.result.metrics)} iterations")
    if summary is not None:
        click.echo(f"  • Best loss: {summary.best_loss:.6f} (iteration {summary.best_iteration})")
        click.echo(f"  • Converged: {'yes' if summary.converged else 'no'}")
    for path in outcome.outputs:
        click.echo(f"  • Wrote {path}")


def _echo_chain(outcome: ChainOutcome) -> None:
    if outcome.final_fidelity is not None:
        click.echo("\n📊 Backward chain:")
        click.echo(f"  • Start fidelity: {format_fidelity(outcome.start_fidelity)}")
        click.echo(f"  • Final fidelity: {format_fidelity(outcome.final_fidelity)}")
    for path in outcome.outputs:
        click.echo(f"  • Wrote {path}")


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging")
def cli(verbose: bool) -> None:
    """CVQD: continuous-variable quantum diffusion"""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


# ============================================================================
# Training
# ============================================================================


@cli.command("train-gen")
@run_options
@handle_errors
def train_gen(config_path: Optional[str], seed: Optional[int], out: str, profile: str) -> None:
    """Train a generative denoiser for the config's target state."""
    started = utc_now()
    cfg = load_config(config_path, Role.GENERATIVE, profile, {"seed": seed})
    spec = cfg.target_spec()
    if spec is None:
        raise ConfigError("train-gen needs a target (set 'target' in the config)")
    click.echo(f"📂 Training generative denoiser for {spec.label()}")
    click.echo(f"  c={cfg.cutoff}, L={cfg.layers}, T={cfg.total_timesteps}, nbar={cfg.nbar}")

    service = ExperimentService(out)
    with training_progress(cfg.max_iters) as progress:
        outcome = service.train_generative(cfg, progress)
    _echo_training(outcome)
    service.write_manifest(
        "train-gen", started, outcome.outputs, config_path, profile, cfg.seed
    )


@cli.command("train-restore")
@run_options
@handle_errors
def train_restore(config_path: Optional[str], seed: Optional[int], out: str, profile: str) -> None:
    """Train a restoration denoiser on random coherent states."""
    started = utc_now()
    cfg = load_config(config_path, Role.RESTORATION, profile, {"seed": seed})
    click.echo(f"📂 Training restoration denoiser, s_max={cfg.s_max}, nbar={cfg.nbar}")
    click.echo(f"  c={cfg.cutoff}, L={cfg.layers}, T={cfg.total_timesteps}")

    service = ExperimentService(out)
    with training_progress(cfg.max_iters) as progress:
        outcome = service.train_restoration(cfg, progress)
    _echo_training(outcome)
    service.write_manifest(
        "train-restore", started, outcome.outputs, config_path, profile, cfg.seed
    )


# ============================================================================
# Backward chains
# ============================================================================


@cli.command()
@click.option("--checkpoint", required=True, type=click.Path(dir_okay=False), help="Checkpoint")
@click.option("--nbar", type=float, help="Thermal start occupation (default: trained nbar)")
@click.option("--start-eta", type=float, help="Start from the target after loss eta instead")
@click.option("--out", type=click.Path(file_okay=False), default=".", help="Output directory")
@handle_errors
def generate(checkpoint: str, nbar: Optional[float], start_eta: Optional[float], out: str) -> None:
    """Generate a state from noise with a generative checkpoint."""
    started = utc_now()
    validate_occupation(nbar)
    if start_eta is not None:
        validate_transmissivity(start_eta, "start-eta")
    service = ExperimentService(out)
    outcome = service.generate(checkpoint, nbar=nbar, start_eta=start_eta)
    _echo_chain(outcome)
    service.write_manifest(
        "generate",
        started,
        outcome.outputs,
        parameters={"checkpoint": checkpoint, "nbar": nbar, "start_eta": start_eta},
    )


@cli.command()
@click.option("--checkpoint", required=True, type=click.Path(dir_okay=False), help="Checkpoint")
@click.option("--state", "state_path", type=click.Path(dir_okay=False), help="Noisy state JSON")
@click.option(
    "--reference", "reference_path", type=click.Path(dir_okay=False), help="Clean state JSON"
)
@click.option("--s", "s", type=float, help="Synthetic input: clean coherent amplitude")
@click.option("--phase", type=float, default=0.0, help="Synthetic input: coherent phase")
@click.option("--eta-ch", type=float, help="Synthetic input: channel transmissivity")
@click.option("--nbar", type=float, help="Synthetic input: channel occupation")
@click.option("--out", type=click.Path(file_okay=False), default=".", help="Output directory")
@handle_errors
def restore(
    checkpoint: str,
    state_path: Optional[str],
    reference_path: Optional[str],
    s: Optional[float],
    phase: float,
    eta_ch: Optional[float],
    nbar: Optional[float],
    out: str,
) -> None:
    """Restore a corrupted state with a restoration checkpoint."""
    started = utc_now()
    if eta_ch is not None:
        validate_transmissivity(eta_ch, "eta-ch")
    validate_occupation(nbar)
    service = ExperimentService(out)
    outcome = service.restore(
        checkpoint,
        state_path=state_path,
        reference_path=reference_path,
        s=s,
        phase=phase,
        eta_ch=eta_ch,
        nbar=nbar,
    )
    _echo_chain(outcome)
    service.write_manifest(
        "restore",
        started,
        outcome.outputs,
        parameters={
            "checkpoint": checkpoint,
            "state": state_path,
            "reference": reference_path,
            "s": s,
            "phase": phase,
            "eta_ch": eta_ch,
            "nbar": nbar,
        },
    )


# ============================================================================
# Forward process
# ============================================================================


@cli.command()
@run_options
@click.option("--t", "t", type=int, help="Write the diffused state at this timestep")
@click.option("--curve", is_flag=True, help="Write F(rho_0, rho_t) for t = 0..T")
@handle_errors
def diffuse(
    config_path: Optional[str],
    seed: Optional[int],
    out: str,
    profile: str,
    t: Optional[int],
    curve: bool,
) -> None:
    """Forward-diffuse the config's target state."""
    started = utc_now()
    cfg = load_config(config_path, Role.GENERATIVE, profile, {"seed": seed})
    service = ExperimentService(out)
    outcome = service.diffuse(cfg, t=t, curve=curve)
    if outcome.curve:
        endpoint = outcome.curve[-1]
        click.echo(f"📊 F(rho_0, rho_{endpoint[0]}) = {format_fidelity(endpoint[1])}")
    for path in outcome.outputs:
        click.echo(f"  • Wrote {path}")
    service.write_manifest(
        "diffuse",
        started,
        outcome.outputs,
        config_path,
        profile,
        cfg.seed,
        {"t": t, "curve": curve},
    )


@cli.command()
@run_options
@click.option(
    "--role",
    type=click.Choice([role.value for role in Role]),
    default=Role.GENERATIVE.value,
    help="Which profile family supplies defaults",
)
@handle_errors
def schedule(
    config_path: Optional[str], seed: Optional[int], out: str, profile: str, role: str
) -> None:
    """Write the noise schedule (t, eta_t, eta_bar_t) of a config."""
    started = utc_now()
    cfg = load_config(config_path, role, profile, {"seed": seed})
    service = ExperimentService(out)
    path = service.write_schedule(cfg)
    click.echo(f"✓ Wrote {path}")
    service.write_manifest("schedule", started, [path], config_path, profile, cfg.seed)


# ============================================================================
# Verification
# ============================================================================


@cli.command()
@click.option(
    "--suite",
    "suites",
    multiple=True,
    type=click.Choice(list(VC.SUITES)),
    help="Suite to run (repeatable, default: all)",
)
@click.option("--inject-fault", type=click.Choice(list(VC.FAULTS)), help="Perturb the suites")
@click.option("--seed", type=int, default=0, help="Seed of the randomized checks")
@click.option("--out", type=click.Path(file_okay=False), help="Write verify_report.json here")
@handle_errors
def verify(
    suites: Tuple[str, ...], inject_fault: Optional[str], seed: int, out: Optional[str]
) -> None:
    """Run the verification suites; exits 3 if any check fails."""
    started = utc_now()
    register_all_suites()
    validate_profiles()
    selection = validate_suites(suites) if suites else None
    report = suite_registry.run(selection, VerifyContext(fault=inject_fault, seed=seed))
    for line in format_report(report):
        click.echo(line)

    if out is not None:
        service = ExperimentService(out)
        path = write_json(service.path(RC.VERIFY_REPORT_FILE), report.model_dump(mode="json"))
        click.echo(f"  • Wrote {path}")
        service.write_manifest(
            "verify",
            started,
            [path],
            seed=seed,
            parameters={"suites": report.suites, "fault": inject_fault},
        )
    if not report.passed:
        raise VerificationFailed(f"{len(report.failures)} verification check(s) failed")


# ============================================================================
# Sweeps
# ============================================================================


@cli.command()
@run_options
@click.option(
    "--param", required=True, type=click.Choice(list(SWEEP_PARAMETERS)), help="Swept parameter"
)
@click.option("--values", help="Comma-separated parameter values (default: per parameter)")
@click.option(
    "--nbar", "nbars", multiple=True, type=float, help="Environment occupation (repeatable)"
)
@handle_errors
def sweep(
    config_path: Optional[str],
    seed: Optional[int],
    out: str,
    profile: str,
    param: str,
    values: Optional[str],
    nbars: Tuple[float, ...],
) -> None:
    """Train and generate once per parameter value and record the final fidelity."""
    started = utc_now()
    cfg = load_config(config_path, Role.GENERATIVE, profile, {"seed": seed})
    swept = parse_values(values, "values") if values else list(DEFAULT_SWEEP_VALUES[param])
    for nbar in nbars:
        validate_occupation(nbar)
    occupations = list(nbars) or [cfg.nbar]
    click.echo(f"📂 Sweeping {param} over {swept} with nbar in {occupations}")

    total = len(swept) * len(occupations) * cfg.max_iters
    with training_progress(total, label="Sweep") as progress:
        rows = run_sweep(param, swept, cfg, occupations, lambda value, nbar: progress)

    service = ExperimentService(out)
    path = write_sweep(service.path(RC.SUMMARY_FILE), rows)
    click.echo("\n📊 Sweep results:")
    click.echo(f"{'param':>8} {'nbar':>6} {'fidelity':>10} {'iters':>6}")
    for row in rows:
        fid = format_fidelity(row.fidelity)
        click.echo(f"{row.param:>8.3f} {row.nbar:>6.2f} {fid:>10} {row.iters:>6}")
    click.echo(f"  • Wrote {path}")
    service.write_manifest(
        "sweep",
        started,
        [path],
        config_path,
        profile,
        cfg.seed,
        {"param": param, "values": swept, "nbar": occupations},
    )


@cli.command("restore-sweep")
@click.option("--checkpoint", required=True, type=click.Path(dir_okay=False), help="Checkpoint")
@click.option("--eta-ch", required=True, type=float, help="Channel transmissivity")
@click.option("--nbar", type=float, help="Channel occupation (default: trained nbar)")
@click.option("--amplitudes", help="Comma-separated clean amplitudes (default: 0.3,0.5,0.7)")
@click.option("--phases", type=click.IntRange(min=1), default=RC.RESTORE_SWEEP_PHASES)
@click.option("--out", type=click.Path(file_okay=False), default=".", help="Output directory")
@handle_errors
def restore_sweep_command(
    checkpoint: str,
    eta_ch: float,
    nbar: Optional[float],
    amplitudes: Optional[str],
    phases: int,
    out: str,
) -> None:
    """Restore coherent states of several amplitudes, averaging over phases."""
    started = utc_now()
    validate_transmissivity(eta_ch, "eta-ch")
    validate_occupation(nbar)
    loaded = checkpoint_load(checkpoint, Role.RESTORATION)
    occupation = loaded.cfg.nbar if nbar is None else nbar
    levels = parse_values(amplitudes, "amplitudes") if amplitudes else RC.RESTORE_SWEEP_AMPLITUDES
    phase_grid = sweep_phases(phases)

    rows, curves = restore_sweep(loaded, eta_ch, occupation, levels, phase_grid)
    service = ExperimentService(out)
    outputs = write_restore_sweep(service.out_dir, rows, curves)
    click.echo(f"\n📊 Restoration sweep (eta_ch={eta_ch}, nbar={occupation}, {phases} phases):")
    for row in rows:
        click.echo(
            f"  • s={row.s:.2f}: mean {format_fidelity(row.mean_fidelity)}, "
            f"min {format_fidelity(row.min_fidelity)}"
        )
    for path in outputs:
        click.echo(f"  • Wrote {path}")
    service.write_manifest(
        "restore-sweep",
        started,
        outputs,
        parameters={
            "checkpoint": checkpoint,
            "eta_ch": eta_ch,
            "nbar": occupation,
            "amplitudes": list(levels),
            "phases": phases,
        },
    )


def main() -> None:
    """Main CLI entry point."""
    cli()


if __name__ == "__main__":
    main()
