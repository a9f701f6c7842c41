"""A deterministic stand-in for a grid metascheduler.

Hosts are declared in ``sim_hosts`` as ``queue@host:allow|deny[:max_delay]``.
A job is dispatched to the best-ranked host; a host that denies execution
fails the attempt, loses one rank point and the job is dispatched again. The
whole trace of a job is computed at submission, each event stamped at its
simulated time, and becomes visible as the clock reaches it.
"""
import json
import logging
import os
import random
from dataclasses import asdict, dataclass
from typing import List

from backends.base import Backend
from core.errors import CommandLineError, InternalParsingError
from core.event_log import JobEvent, Manager, Status
from utils.locking import file_lock

logger = logging.getLogger(__name__)

HOSTS_FILENAME = ".sweep_sim_hosts"


@dataclass
class SimHost:
    queue: str
    name: str
    permits_execution: bool
    max_delay: int = 0
    rank: int = 0


def parse_sim_hosts(declaration) -> List[SimHost]:
    hosts = []
    for word in declaration.split():
        parts = word.split(":")
        location, access = parts[0], parts[1] if len(parts) > 1 else ""
        queue, at, name = location.partition("@")
        if not at or not queue or not name or access not in ("allow", "deny") or len(parts) > 3:
            raise CommandLineError(f"invalid sim_hosts entry '{word}', expected queue@host:allow|deny[:max_delay]")
        max_delay = 0
        if len(parts) == 3:
            if not parts[2].isdigit():
                raise CommandLineError(f"invalid delay in sim_hosts entry '{word}'")
            max_delay = int(parts[2])
        hosts.append(SimHost(queue=queue, name=name, permits_execution=access == "allow", max_delay=max_delay))
    if not hosts:
        raise CommandLineError("sim_hosts declares no hosts")
    return hosts


class SimulatedBackend(Backend):
    name = "simulated"

    def __init__(self, cfg, workdir=".", clock=None):
        super().__init__(cfg, workdir, clock)
        self.hosts = parse_sim_hosts(cfg.sim_hosts)
        self.hosts_path = os.path.join(workdir, HOSTS_FILENAME)

    def _load_ranks(self):
        if not os.path.exists(self.hosts_path):
            return
        try:
            with open(self.hosts_path, "r", encoding="utf-8") as handle:
                saved = {(h["queue"], h["name"]): h["rank"] for h in json.load(handle)}
        except (ValueError, KeyError, TypeError) as e:
            raise InternalParsingError(f"corrupt simulator state {self.hosts_path}: {e}") from e
        for host in self.hosts:
            host.rank = saved.get((host.queue, host.name), 0)

    def _save_ranks(self):
        with open(self.hosts_path, "w", encoding="utf-8") as handle:
            json.dump([asdict(h) for h in self.hosts], handle, indent=2)

    def _best_host(self):
        # max() keeps the first of equally ranked hosts, i.e. declaration order
        return max(self.hosts, key=lambda h: h.rank)

    def trace(self, job_name, start):
        """Every event of one job, from submission to its final state."""
        rng = random.Random(f"{self.cfg.rng_seed}:{job_name}")
        clock = start
        events = []

        def emit(manager, status, host=None, exit_status=None, delay_from=None):
            nonlocal clock
            if delay_from is not None and delay_from.max_delay:
                clock += rng.randint(0, delay_from.max_delay)
            events.append(JobEvent(job_name=job_name, time=clock, manager=manager, status=status,
                                   queue_name=host.queue if host else "", host_name=host.name if host else "",
                                   exit_status=exit_status))

        emit(Manager.DISPATCH, Status.PENDING)
        for attempt in range(1, self.cfg.sim_retry_cap + 1):
            host = self._best_host()
            emit(Manager.DISPATCH, Status.PROLOG, delay_from=host)
            emit(Manager.DISPATCH, Status.WRAPPER, host, delay_from=host)
            if not host.permits_execution:
                emit(Manager.EXECUTION, Status.FAILED, host, delay_from=host)
                emit(Manager.DISPATCH, Status.EPILOG_FAIL, host)
                emit(Manager.DISPATCH, Status.PENDING)
                host.rank -= 1
                logger.debug(f"{job_name}: attempt {attempt} denied by {host.name}, rank now {host.rank}")
                continue
            emit(Manager.EXECUTION, Status.PENDING, host)
            emit(Manager.EXECUTION, Status.ACTIVE, host, delay_from=host)
            emit(Manager.EXECUTION, Status.DONE, host, delay_from=host)
            emit(Manager.DISPATCH, Status.EPILOG_STD, host)
            emit(Manager.DISPATCH, Status.EPILOG, host, delay_from=host)
            emit(Manager.DISPATCH, Status.DONE, host, exit_status=0, delay_from=host)
            return events
        logger.warning(f"{job_name}: no host accepted the job after {self.cfg.sim_retry_cap} attempts")
        emit(Manager.DISPATCH, Status.FAILED)
        return events

    def submit_job(self, template_path, job_name):
        start = self.now()
        with file_lock(self.hosts_path):
            self._load_ranks()
            events = self.trace(job_name, start)
            self._save_ranks()
        self.event_log.append(*events)
        return f"{job_name}@{start}"

    def kill_job(self, entry, sig=None):
        logger.info(f"Killing simulated job {entry.job_id} ({sig or 'TERM'})")
        self.event_log.append(JobEvent(job_name=entry.job_name, time=self.now(),
                                       manager=Manager.DISPATCH, status=Status.FAILED))
