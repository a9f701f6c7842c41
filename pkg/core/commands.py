import os
import shlex
import shutil
import signal
import subprocess
import logging

import click

from core.errors import CommandLineError, ExecutionError

logger = logging.getLogger(__name__)


def split_arguments(arguments, separator=" "):
    """Splits an ARGUMENTS value; double quotes group, nothing else is special."""
    lexer = shlex.shlex(arguments, posix=True)
    lexer.whitespace_split = True
    lexer.whitespace = separator
    lexer.quotes = '"'
    lexer.escape = ''
    lexer.commenters = ''
    return list(lexer)


def quote_for_log(argv, operators):
    """Renders argv for a log line, quoting words that hold shell operators."""
    return " ".join(shlex.quote(word) if any(c in operators for c in word) else word for word in argv)


def resolve_executable(name, search_dir="", base_dir="."):
    """Looks ``name`` up under ``search_dir`` first, then as a path, then on PATH."""
    if search_dir:
        candidate = os.path.join(search_dir, name)
        if os.path.isfile(candidate) and os.access(candidate, os.X_OK):
            return candidate
    path = os.path.join(base_dir, name)
    if os.path.exists(path):
        return os.path.abspath(path)
    return shutil.which(name)


def parse_signal(token):
    """Accepts ``9``, ``KILL`` or ``SIGKILL``."""
    if token is None:
        return signal.SIGTERM
    if token.isdigit():
        try:
            return signal.Signals(int(token))
        except ValueError:
            raise CommandLineError(f"unknown signal number '{token}'") from None
    name = token.upper()
    name = name if name.startswith("SIG") else f"SIG{name}"
    try:
        return signal.Signals[name]
    except KeyError:
        raise CommandLineError(f"unknown signal '{token}'") from None


def stream_command(argv, cwd=None):
    """Runs a command, echoing its output line by line as it arrives."""
    logger.info(f"Running: {' '.join(argv)}")
    try:
        process = subprocess.Popen(argv, cwd=cwd, stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
                                   text=True, errors="replace", bufsize=1)
    except OSError as e:
        raise ExecutionError(f"cannot execute {argv[0]}: {e.strerror or e}") from e
    for line in process.stdout:
        click.echo(line, nl=False)
    process.stdout.close()
    returncode = process.wait()
    if returncode != 0:
        raise ExecutionError(f"{argv[0]} exited with status {returncode}")
    return returncode
