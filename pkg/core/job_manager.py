import logging
import os
import time

import click

from config.logger_setup import paint
from core.commands import parse_signal
from core.errors import BackendUnavailableError, NoJobFoundError
from core.event_log import HEADER, JobState, format_event
from core.registry import JobRegistry, RegistryEntry
from core.templates import (SelectorKind, delete_templates, discover_templates, parse_template_file,
                            resolve_selector)

logger = logging.getLogger(__name__)

ENDED_KINDS = frozenset({SelectorKind.FINISHED, SelectorKind.SUCCESSFUL, SelectorKind.UNSUCCESSFUL})


def create_backend(cfg, workdir=".", clock=None):
    if cfg.backend == "local":
        from backends.local_backend import LocalBackend
        return LocalBackend(cfg, workdir, clock)
    elif cfg.backend == "simulated":
        from backends.simulated_backend import SimulatedBackend
        return SimulatedBackend(cfg, workdir, clock)
    elif cfg.backend == "external":
        from backends.external_backend import ExternalBackend
        return ExternalBackend(cfg, workdir, clock)
    raise BackendUnavailableError(f"unknown backend '{cfg.backend}'")


class JobManager:
    """Submits, purges, kills and reports on the jobs made from templates."""

    def __init__(self, cfg, workdir=".", backend=None):
        self.cfg = cfg
        self.workdir = workdir
        self.backend = backend or create_backend(cfg, workdir)
        self.registry = JobRegistry(workdir)

    def _check_run_state(self, selector):
        if selector.needs_run_state and not self.backend.supports_events:
            click.echo(paint(f"WARNING: the {self.backend.name} backend cannot tell how jobs ended "
                             f"({self.cfg.gridway_ps} output is not read); '{selector}' matches nothing"), err=True)
            raise NoJobFoundError(f"no job found coming from template for '{selector}'")

    def job_states(self, live=None):
        """State of every template's current job, keyed by template filename."""
        live = self.registry.live() if live is None else live
        if not self.backend.supports_events:
            return {name: JobState.RUNNING for name in live}
        history = self.backend.history()
        return {name: self.backend.state(entry, history) for name, entry in live.items()}

    def select(self, selector):
        self._check_run_state(selector)
        live = self.registry.live()
        states = self.job_states(live) if selector.is_state else None
        return resolve_selector(selector, discover_templates(self.cfg, self.workdir), states), live

    def _job_name(self, path, template):
        fields = parse_template_file(path, self.cfg)
        return fields.get(self.cfg.Template_job_name) or template.filename

    def submit(self, selector):
        matched, _ = self.select(selector)
        if not matched:
            raise NoJobFoundError(f"no job template matches '{selector}'")
        submitted = []
        try:
            for template in matched:
                path = os.path.join(self.workdir, template.filename)
                job_name = self._job_name(path, template)
                epoch = self.backend.now()
                job_id = self.backend.submit_job(path, job_name)
                submitted.append(RegistryEntry(filename=template.filename, job_name=job_name,
                                               job_id=job_id, epoch=epoch))
                logger.info(f"Submitted {template.filename} as job {job_id}")
        finally:
            # Jobs handed over before a failure are still recorded
            if submitted:
                self.registry.record_all(submitted)
        click.echo(f"Submitted {len(matched)} jobs from templates")
        return len(matched)

    def delete(self, selector):
        self._check_run_state(selector)
        states = self.job_states() if selector.is_state else None
        return delete_templates(selector, self.cfg, self.workdir, states)

    def _live_jobs(self, selector):
        matched, live = self.select(selector)
        return [live[t.filename] for t in matched if t.filename in live]

    def purge(self, selector):
        self._check_run_state(selector)
        if selector.kind in ENDED_KINDS:
            # An outcome selector only sees jobs that have ended
            self.backend.wait_jobs(self._listed_jobs())
        entries = self._live_jobs(selector)
        if not entries:
            raise NoJobFoundError(f"no job found coming from template for '{selector}'")
        self.backend.wait_jobs(entries)
        for entry in entries:
            self.backend.purge_job(entry)
        self.registry.mark_purged(e.filename for e in entries)
        click.echo(f"Purged {len(entries)} jobs from templates")
        return len(entries)

    def kill(self, selector, sig=None):
        parse_signal(sig)
        entries = self._live_jobs(selector)
        if self.backend.supports_events:
            history = self.backend.history()
            entries = [e for e in entries if self.backend.state(e, history) is JobState.RUNNING]
        if not entries:
            raise NoJobFoundError(f"no running job found coming from template for '{selector}'")
        for entry in entries:
            self.backend.kill_job(entry, sig)
        click.echo(f"Killed {len(entries)} jobs from templates")
        return len(entries)

    def _listed_jobs(self):
        live = self.registry.live()
        return [live[t.filename] for t in discover_templates(self.cfg, self.workdir) if t.filename in live]

    def snapshot(self, mode, entries=None, history=None):
        """CSV lines for one ``now`` or ``history`` report, header first."""
        entries = self._listed_jobs() if entries is None else entries
        history = self.backend.history() if history is None else history
        lines = [HEADER]
        for entry in entries:
            events = self.backend.events(entry, history)
            if not events:
                continue
            lines += [format_event(e) for e in (events if mode == "history" else events[-1:])]
        return lines

    def info(self, mode):
        if not self.backend.supports_events:
            raise BackendUnavailableError(f"the {self.backend.name} backend cannot report job status")
        if mode != "evolution":
            for line in self.snapshot(mode):
                click.echo(line)
            return

        try:
            first = True
            while True:
                entries, history = self._listed_jobs(), self.backend.history()
                if not first:
                    click.echo("")
                for line in self.snapshot("now", entries, history):
                    click.echo(line)
                first = False
                if all(self.backend.state(e, history) is not JobState.RUNNING for e in entries):
                    break
                time.sleep(self.cfg.info_poll_seconds)
        except KeyboardInterrupt:
            logger.debug("Evolution report interrupted")
