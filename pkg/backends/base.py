import logging
import time
from abc import ABC, abstractmethod

from core.errors import ExecutionError
from core.event_log import EventLog, job_state, visible_history

logger = logging.getLogger(__name__)


class Backend(ABC):
    """Where submitted templates run and how their events are observed.

    Job events live in the shared event log unless a backend says otherwise
    through ``supports_events``.
    """

    name = "base"
    supports_events = True

    def __init__(self, cfg, workdir=".", clock=None):
        self.cfg = cfg
        self.workdir = workdir
        self.clock = clock or time.time
        self.event_log = EventLog(workdir)

    def now(self):
        return int(self.clock())

    @abstractmethod
    def submit_job(self, template_path, job_name):
        """Hands one template over and returns its job id."""

    @abstractmethod
    def kill_job(self, entry, sig=None):
        ...

    def history(self):
        """Every logged event, read once and keyed by job name."""
        return self.event_log.by_job()

    def events(self, entry, history=None):
        history = self.history() if history is None else history
        own = [e for e in history.get(entry.job_name, []) if e.time >= entry.epoch]
        return visible_history(own, self.now())

    def state(self, entry, history=None):
        return job_state(self.events(entry, history))

    def purge_job(self, entry):
        logger.debug(f"Purged {entry.job_name} ({entry.job_id})")

    def wait_jobs(self, entries, poll_seconds=0.5, timeout=None):
        """Blocks until every job in ``entries`` has a terminal event."""
        deadline = None if timeout is None else time.monotonic() + timeout
        pending = list(entries)
        while pending:
            history = self.history()
            pending = [e for e in pending if not any(ev.is_terminal for ev in self.events(e, history))]
            if pending:
                if deadline is not None and time.monotonic() > deadline:
                    raise ExecutionError(f"{len(pending)} jobs still running after {timeout}s")
                logger.debug(f"Waiting for {len(pending)} jobs")
                time.sleep(poll_seconds)
