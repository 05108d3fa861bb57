"""seesawtrack CLI - multi-agent target tracking experiments."""

import logging
import sys
from pathlib import Path
from typing import Optional

import click
from jsonschema import ValidationError

from src.manager.config_manager import load_config_with_full_precedence
from src.manager.preset_manager import run_custom, run_preset
from src.model.preset import PRESETS


@click.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Path to scenario file (default: ./scenario.json if present)",
)
@click.option(
    "--preset",
    type=click.Choice(sorted(PRESETS)),
    default=None,
    help="Run a named experiment instead of the configured scenario",
)
@click.option("--seed", type=click.IntRange(min=0), default=None,
              help="Base seed; replication r uses seed + r (overrides config file and env)")
@click.option("--reps", type=click.IntRange(min=1), default=None,
              help="Number of replications (default: preset's own, or 1)")
@click.option("--steps", type=click.IntRange(min=1), default=None,
              help="Time steps per replication (overrides config file and env)")
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("results"),
    show_default=True,
    help="Directory for result files",
)
@click.option("--parallel", type=click.IntRange(min=1), default=1, show_default=True,
              help="Worker processes for replications")
@click.option("--log-raw", is_flag=True, help="Keep trajectories of every replication")
@click.option("--verbose", is_flag=True, help="Log progress of each replication")
def main(
    config_path: Optional[Path],
    preset: Optional[str],
    seed: Optional[int],
    reps: Optional[int],
    steps: Optional[int],
    out_dir: Path,
    parallel: int,
    log_raw: bool,
    verbose: bool,
):
    """Simulate agents that steer to track moving targets.

    Each agent filters its own measurements, shares estimates and
    Fisher information with reachable peers, and picks its next heading
    and height by a stochastic gradient step on the predicted
    information gain, taking turns with its group. Results are written
    as plot-ready CSV plus a JSON summary.
    """
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cli_overrides = {
            "seed": seed,
            "n_steps": steps,
            "log_raw": True if log_raw else None,
        }
        if verbose and config_path:
            click.echo(f"Loading configuration from: {config_path}")

        config = load_config_with_full_precedence(
            config_file=config_path,
            cli_overrides=cli_overrides,
        )

        if preset:
            if verbose:
                click.echo(f"Running preset {preset} with base seed {config.seed}")
            written = run_preset(
                preset, config.seed, out_dir, base=config, n_reps=reps,
                parallelism=parallel, log_raw=config.log_raw,
            )
        else:
            if verbose:
                click.echo(
                    f"Running {reps or 1} replication(s) of {config.n_agents} agents, "
                    f"{config.n_targets} targets, {config.n_steps} steps"
                )
            written = run_custom(
                config, config.seed, out_dir, n_reps=reps or 1,
                parallelism=parallel, log_raw=config.log_raw,
            )

        click.echo(f"Wrote {len(written)} files to {out_dir}")
        if verbose:
            for path in written:
                click.echo(f"  {path}")

    except FileNotFoundError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(1)
    except ValidationError as e:
        click.echo(f"Error: summary failed validation: {e.message}", err=True)
        sys.exit(1)
    except ValueError as e:
        click.echo(f"Configuration error: {e}", err=True)
        sys.exit(1)
    except OSError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
