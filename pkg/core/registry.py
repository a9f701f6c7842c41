import logging
import os
from typing import Dict, Iterable

import pandas as pd
from pydantic import BaseModel, ValidationError

from core.errors import FileCloseError, InternalParsingError
from utils.locking import file_lock

logger = logging.getLogger(__name__)

REGISTRY_FILENAME = ".sweep_registry"


class RegistryEntry(BaseModel):
    """Which backend job was made from which template, and when."""

    filename: str
    job_name: str
    job_id: str
    epoch: int
    purged: bool = False


COLUMNS = list(RegistryEntry.model_fields)


class JobRegistry:
    """Template to job association, one row per template, tab-separated."""

    def __init__(self, workdir="."):
        self.path = os.path.join(workdir, REGISTRY_FILENAME)

    def _load(self):
        if not os.path.exists(self.path):
            return {}
        try:
            frame = pd.read_csv(self.path, sep="\t", dtype=str, keep_default_na=False)
        except pd.errors.EmptyDataError:
            return {}
        except (pd.errors.ParserError, ValueError) as e:
            raise InternalParsingError(f"corrupt registry {self.path}: {e}") from e
        if list(frame.columns) != COLUMNS:
            raise InternalParsingError(f"corrupt registry {self.path}: unexpected columns {list(frame.columns)}")
        entries = {}
        for number, record in enumerate(frame.to_dict("records"), start=1):
            try:
                entry = RegistryEntry.model_validate(record)
            except ValidationError as e:
                raise InternalParsingError(f"corrupt registry {self.path}, row {number}: "
                                           f"{e.errors()[0]['msg']}") from e
            entries[entry.filename] = entry
        return entries

    def _save(self, entries):
        frame = pd.DataFrame([e.model_dump() for e in entries.values()], columns=COLUMNS)
        frame["purged"] = frame["purged"].astype(int)
        try:
            frame.to_csv(self.path, sep="\t", index=False)
        except OSError as e:
            raise FileCloseError(f"cannot write {self.path}: {e.strerror or e}") from e

    def load(self) -> Dict[str, RegistryEntry]:
        with file_lock(self.path):
            return self._load()

    def live(self) -> Dict[str, RegistryEntry]:
        return {name: e for name, e in self.load().items() if not e.purged}

    def record(self, entry):
        """Adds ``entry``, replacing any earlier job of the same template."""
        self.record_all([entry])

    def record_all(self, new_entries: Iterable[RegistryEntry]):
        """Adds every entry in one rewrite of the registry."""
        with file_lock(self.path):
            entries = self._load()
            for entry in new_entries:
                if entry.filename in entries:
                    logger.debug(f"Replacing registry entry of {entry.filename}")
                entries[entry.filename] = entry
            self._save(entries)

    def mark_purged(self, filenames: Iterable[str]):
        filenames = set(filenames)
        with file_lock(self.path):
            entries = self._load()
            for name in filenames & entries.keys():
                entries[name] = entries[name].model_copy(update={"purged": True})
            self._save(entries)
