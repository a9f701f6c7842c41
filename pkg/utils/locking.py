import fcntl
import logging
import os
import time
from contextlib import contextmanager

logger = logging.getLogger(__name__)


@contextmanager
def file_lock(path):
    """Holds an exclusive advisory lock on ``<path>.lock`` for the block."""
    with open(f"{path}.lock", "a") as handle:
        fcntl.flock(handle, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(handle, fcntl.LOCK_UN)


@contextmanager
def acquire_slot(directory, slots, poll_seconds=0.2):
    """Blocks until one of ``slots`` execution slots in ``directory`` is free."""
    while True:
        for slot in range(slots):
            handle = open(os.path.join(directory, f".sweep_slot.{slot}"), "a")
            try:
                fcntl.flock(handle, fcntl.LOCK_EX | fcntl.LOCK_NB)
            except BlockingIOError:
                handle.close()
                continue
            logger.debug(f"Acquired execution slot {slot}")
            try:
                yield slot
            finally:
                fcntl.flock(handle, fcntl.LOCK_UN)
                handle.close()
            return
        time.sleep(poll_seconds)
