import logging
import os

from backends.base import Backend
from core.commands import parse_signal, resolve_executable, stream_command
from core.errors import BackendUnavailableError, ExecutionError

logger = logging.getLogger(__name__)


class ExternalBackend(Backend):
    """Delegates to the configured scheduler commands (gwsubmit, gwkill, gwwait).

    Job ids cannot be read back from arbitrary submit output, so the template
    filename stands in for the job id and no event history is available.
    """

    name = "external"
    supports_events = False

    def _command(self, name):
        bin_dir = os.path.join(self.cfg.gridway_dir_var, "bin") if self.cfg.gridway_dir_var else ""
        resolved = resolve_executable(name, bin_dir, self.workdir)
        if resolved is None:
            raise ExecutionError(f"command not found: {name}")
        return resolved

    def submit_job(self, template_path, job_name):
        filename = os.path.basename(template_path)
        argv = [self._command(self.cfg.gridway_submit)]
        if self.cfg.gridway_submit_flag:
            argv.append(self.cfg.gridway_submit_flag)
        argv.append(filename)
        stream_command(argv, cwd=self.workdir)
        return filename

    def kill_job(self, entry, sig=None):
        argv = [self._command(self.cfg.gridway_kill)]
        if sig is not None:
            parse_signal(sig)
            argv.append(f"-{sig}")
        stream_command(argv + [entry.job_id], cwd=self.workdir)

    def wait_jobs(self, entries, poll_seconds=0.5, timeout=None):
        ids = [e.job_id for e in entries]
        if ids:
            stream_command([self._command(self.cfg.gridway_wait)] + ids, cwd=self.workdir)

    def events(self, entry, history=None):
        raise BackendUnavailableError(f"the {self.name} backend cannot report job events")
