import asyncio
import json
import sys
from pathlib import Path
from typing import List, Optional

import asyncclick as click
from pydantic import ValidationError

from app.config.settings import BaseConfig
from app.constants.status import Status
from app.experiments import (
    ExperimentConfig,
    ReplicaResult,
    aggregate,
    list_experiments,
    load_config,
    run_replica,
    write_replica,
    write_run_summary,
)
from app.lib.exception import QTEException
from app.utils.logger import logger

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ValidationError):
        return EXIT_CONFIG
    if isinstance(exc, QTEException):
        if exc.code == Status.CONFIG_ERROR:
            return EXIT_CONFIG
        if exc.code in (Status.NUMERICAL_ABORT, Status.SINGULAR_SYSTEM):
            return EXIT_NUMERICAL
    return EXIT_FAILURE


def resolve_config(
    config_path: str, seed: Optional[int], repeat: Optional[int], exact_shots: bool
) -> ExperimentConfig:
    config = load_config(config_path).with_overrides(seed=seed, replicas=repeat)
    if exact_shots:
        config = config.with_exact_shots()
    return config


async def run_replicas(config: ExperimentConfig) -> List[ReplicaResult]:
    """Replicas run in worker threads, at most QTE_THREADS at a time."""
    semaphore = asyncio.Semaphore(BaseConfig.QTE_THREADS)

    async def run_one(replica: int) -> ReplicaResult:
        async with semaphore:
            return await asyncio.to_thread(run_replica, config, replica)

    return list(await asyncio.gather(*(run_one(replica) for replica in range(config.replicas))))


def _report_partial(exc: QTEException):
    partial = exc.partial
    steps = getattr(partial, "steps", None)
    if steps is not None:
        logger.error(f"aborted after {len(steps)} completed steps")
    samples = getattr(partial, "samples", None)
    if samples is not None:
        logger.error(f"aborted after {len(samples)} completed chain samples")


@click.group()
async def cli():
    """Variational quantum time evolution benchmarks."""


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--out", "out", default=None, help="Output directory (default: config output_path or QTE_OUTPUT_DIR).")
@click.option("--seed", type=int, default=None, help="Master seed; overrides the config.")
@click.option("--repeat", type=click.IntRange(min=1), default=None, help="Number of seeded replicas.")
@click.option("--exact-shots", is_flag=True, default=False, help="Use exact expectation values everywhere.")
async def run(config_path: str, out: Optional[str], seed: Optional[int], repeat: Optional[int], exact_shots: bool):
    """Run one experiment document and write its CSV tables and summary JSON."""
    try:
        config = resolve_config(config_path, seed, repeat, exact_shots)
        directory = Path(out or config.output_path or Path(BaseConfig.QTE_OUTPUT_DIR) / config.experiment.value)
        logger.info(f"{config.experiment.value}: {config.replicas} replica(s), seed {config.seed}, output {directory}")

        results = await run_replicas(config)
        for result in results:
            write_replica(directory, config, result)
        summary = write_run_summary(directory, config, results, aggregate(results))
        logger.info(f"{config.experiment.value}: done, summary at {summary}")
    except ValidationError as exc:
        logger.error(f"invalid run config {config_path}: {exc}")
        sys.exit(EXIT_CONFIG)
    except QTEException as exc:
        logger.error(f"{exc.code.name}: {exc.msg}")
        _report_partial(exc)
        sys.exit(exit_code_for(exc))
    except Exception as exc:
        logger.exception(f"run failed: {exc}")
        sys.exit(EXIT_FAILURE)


@cli.command("list")
async def list_command():
    """Print the experiment manifest as JSON."""
    click.echo(json.dumps(list_experiments(), indent=2))


def main():
    asyncio.run(cli())


if __name__ == "__main__":
    main()
