import logging
import os
import subprocess
import sys
from pathlib import Path

import psutil

from backends.base import Backend
from core.commands import parse_signal, resolve_executable
from core.event_log import JobEvent, Manager, Status
from core.templates import parse_template_file

logger = logging.getLogger(__name__)

REPO_ROOT = Path(__file__).resolve().parents[1]


class LocalBackend(Backend):
    """Runs each template as a process on this machine, ``max_parallel`` at a time."""

    name = "local"

    def submit_job(self, template_path, job_name):
        cfg = self.cfg
        fields = parse_template_file(template_path, cfg)
        executable = fields.get(cfg.Template_executable, "")
        resolved = resolve_executable(executable, base_dir=self.workdir) if executable else None
        runner = [
            sys.executable, "-m", "backends.local_runner",
            f"--job-name={job_name}",
            f"--executable={resolved or executable}",
            f"--arguments={fields.get(cfg.Template_arguments, '')}",
            f"--stdout={fields.get(cfg.Template_stdout_file, os.devnull)}",
            f"--stderr={fields.get(cfg.Template_stderr_file, os.devnull)}",
            f"--slots={cfg.max_parallel}",
            f"--separator={cfg.separation_char_cli}",
            f"--operators={cfg.unix_operators}",
        ]
        self.event_log.append(JobEvent(job_name=job_name, time=self.now(),
                                       manager=Manager.DISPATCH, status=Status.PENDING))
        env = dict(os.environ)
        env["PYTHONPATH"] = os.pathsep.join(filter(None, [str(REPO_ROOT), env.get("PYTHONPATH")]))
        process = subprocess.Popen(runner, cwd=self.workdir, env=env, stdin=subprocess.DEVNULL,
                                   stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
                                   start_new_session=True)
        logger.info(f"Started runner {process.pid} for {job_name}")
        return str(process.pid)

    def kill_job(self, entry, sig=None):
        signum = parse_signal(sig)
        try:
            runner = psutil.Process(int(entry.job_id))
            workers = runner.children(recursive=True)
        except (psutil.NoSuchProcess, ValueError):
            logger.debug(f"Runner of {entry.job_name} is gone")
            return
        if workers:
            for worker in workers:
                logger.info(f"Sending {signum.name} to {worker.pid} ({entry.job_name})")
                worker.send_signal(signum)
            return
        # Not started yet: the runner never gets to record an outcome.
        runner.send_signal(signum)
        self.event_log.append(JobEvent(job_name=entry.job_name, time=self.now(),
                                       manager=Manager.DISPATCH, status=Status.FAILED))
