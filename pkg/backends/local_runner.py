"""Detached supervisor for one local job.

Started by the local backend as ``python -m backends.local_runner``. Waits for
an execution slot, runs the worker without a shell and records the outcome.
"""
import logging
import os
import subprocess
import time

import click

from config.logger_setup import setup_logging
from core.commands import quote_for_log, split_arguments
from core.event_log import EventLog, JobEvent, Manager, Status
from utils.locking import acquire_slot

logger = logging.getLogger(__name__)

QUEUE_NAME = "local"


def _event(job_name, manager, status, exit_status=None, placed=True):
    return JobEvent(job_name=job_name, time=int(time.time()), manager=manager, status=status,
                    queue_name=QUEUE_NAME if placed else "", host_name=os.uname().nodename if placed else "",
                    exit_status=exit_status)


def run_job(job_name, argv, stdout_path, stderr_path, event_log):
    """Runs ``argv`` with redirected streams; returns the worker's exit status or None."""
    event_log.append(_event(job_name, Manager.EXECUTION, Status.ACTIVE))
    try:
        with open(stdout_path, "w") as out, open(stderr_path, "w") as err:
            returncode = subprocess.run(argv, stdout=out, stderr=err, stdin=subprocess.DEVNULL).returncode
    except OSError as e:
        logger.error(f"Cannot run {argv[0]}: {e}")
        event_log.append(_event(job_name, Manager.DISPATCH, Status.FAILED))
        return None
    if returncode < 0:
        logger.warning(f"{job_name} killed by signal {-returncode}")
        event_log.append(_event(job_name, Manager.DISPATCH, Status.FAILED))
        return None
    event_log.append(_event(job_name, Manager.DISPATCH, Status.DONE, exit_status=returncode))
    return returncode


@click.command()
@click.option("--job-name", required=True)
@click.option("--executable", required=True)
@click.option("--arguments", default="")
@click.option("--stdout", "stdout_path", required=True)
@click.option("--stderr", "stderr_path", required=True)
@click.option("--slots", type=int, default=1)
@click.option("--separator", default=" ")
@click.option("--operators", default="")
def main(job_name, executable, arguments, stdout_path, stderr_path, slots, separator, operators):
    setup_logging()
    event_log = EventLog(".")
    try:
        argv = [executable] + split_arguments(arguments, separator)
    except ValueError as e:
        logger.error(f"Cannot split arguments of {job_name}: {e}")
        event_log.append(_event(job_name, Manager.DISPATCH, Status.FAILED))
        return
    with acquire_slot(".", slots):
        logger.info(f"{job_name}: {quote_for_log(argv, operators)}")
        run_job(job_name, argv, stdout_path, stderr_path, event_log)


if __name__ == "__main__":
    main()
