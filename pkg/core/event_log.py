"""Append-only job event log shared by the local and simulated backends.

Each line of ``.sweep_events`` is one status transition in the same eight
comma-separated fields that ``--info`` prints.
"""
import logging
import os
import time
from enum import Enum
from typing import Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from core.errors import FileCloseError, InternalParsingError
from utils.locking import file_lock

logger = logging.getLogger(__name__)

EVENTS_FILENAME = ".sweep_events"
HEADER = "JOB_NAME,LOCALTIME,TIME,MANAGER,STATUS,QUEUE_NAME,HOST_NAME,EXIT_STATUS"
FIELDS = ["job_name", "localtime", "time", "manager", "status", "queue_name", "host_name", "exit_status"]


class Manager(str, Enum):
    DISPATCH = "DISPATCH"
    EXECUTION = "EXECUTION"


class Status(str, Enum):
    PENDING = "PENDING"
    PROLOG = "PROLOG"
    WRAPPER = "WRAPPER"
    ACTIVE = "ACTIVE"
    DONE = "DONE"
    FAILED = "FAILED"
    EPILOG = "EPILOG"
    EPILOG_STD = "EPILOG_STD"
    EPILOG_FAIL = "EPILOG_FAIL"


class JobState(str, Enum):
    UNSUBMITTED = "unsubmitted"
    RUNNING = "running"
    SUCCESSFUL = "successful"
    UNSUCCESSFUL = "unsuccessful"


def localtime(epoch):
    return time.asctime(time.localtime(epoch))


class JobEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    job_name: str
    time: int
    manager: Manager
    status: Status
    queue_name: str = ""
    host_name: str = ""
    exit_status: Optional[int] = None

    @field_validator("exit_status", mode="before")
    @classmethod
    def _empty_exit(cls, value):
        return None if value == "" else value

    @property
    def localtime(self):
        return localtime(self.time)

    @property
    def is_terminal(self):
        if self.manager is not Manager.DISPATCH:
            return False
        if self.status is Status.DONE:
            return self.exit_status is not None
        return self.status is Status.FAILED

    def row(self):
        exit_status = "" if self.exit_status is None else str(self.exit_status)
        return [self.job_name, self.localtime, str(self.time), self.manager.value, self.status.value,
                self.queue_name, self.host_name, exit_status]


def format_event(e):
    return ",".join(e.row())


def visible_history(events, now=None):
    """Time-ordered events up to and including the first terminal one."""
    if now is not None:
        events = [e for e in events if e.time <= now]
    history = []
    for e in sorted(events, key=lambda e: e.time):
        history.append(e)
        if e.is_terminal:
            break
    return history


def job_state(events):
    """Outcome of a submitted job from its visible history."""
    if not events or not events[-1].is_terminal:
        return JobState.RUNNING
    last = events[-1]
    if last.status is Status.DONE and last.exit_status == 0:
        return JobState.SUCCESSFUL
    return JobState.UNSUCCESSFUL


class EventLog:
    def __init__(self, workdir="."):
        self.path = os.path.join(workdir, EVENTS_FILENAME)

    def append(self, *events):
        frame = pd.DataFrame([e.row() for e in events], columns=FIELDS)
        try:
            with file_lock(self.path):
                with open(self.path, "a", encoding="utf-8", newline="") as handle:
                    frame.to_csv(handle, header=False, index=False)
        except OSError as e:
            raise FileCloseError(f"cannot append to {self.path}: {e.strerror or e}") from e
        for event in events:
            logger.debug(f"Event {format_event(event)}")

    def _frame(self):
        if not os.path.exists(self.path):
            return None
        try:
            with file_lock(self.path):
                return pd.read_csv(self.path, header=None, names=FIELDS, dtype=str, keep_default_na=False)
        except pd.errors.EmptyDataError:
            return None
        except (pd.errors.ParserError, ValueError) as e:
            raise InternalParsingError(f"corrupt event log {self.path}: {e}") from e

    def _events(self, frame):
        events = []
        for index, record in zip(frame.index, frame.to_dict("records")):
            record.pop("localtime")
            try:
                events.append(JobEvent.model_validate(record))
            except ValidationError as e:
                raise InternalParsingError(f"corrupt event log {self.path}, row {index + 1}: "
                                           f"{e.errors()[0]['msg']}") from e
        return events

    def read(self) -> List[JobEvent]:
        frame = self._frame()
        return [] if frame is None else self._events(frame)

    def by_job(self) -> Dict[str, List[JobEvent]]:
        """The whole log in one read, grouped by job name in file order."""
        frame = self._frame()
        if frame is None:
            return {}
        return {name: self._events(group) for name, group in frame.groupby("job_name", sort=False)}

    def for_job(self, job_name, since=None):
        return [e for e in self.by_job().get(job_name, [])
                if since is None or e.time >= since]
