"""Exit-status aware exceptions.

Every failure the tool reports maps to one of the documented exit codes:

    0 success                        5 error opening file
    1 wrong command-line syntax      6 error closing file
    2 system execution error         7 no job found coming from template
    3 file not found / requirement   8 internal computation error
    4 parameter file syntax          9 internal parsing error
"""
import os
from enum import IntEnum

import click


class ExitCode(IntEnum):
    SUCCESS = 0
    COMMAND_LINE = 1
    EXECUTION = 2
    REQUIREMENT = 3
    PARAMETER_SYNTAX = 4
    FILE_OPEN = 5
    FILE_CLOSE = 6
    NO_JOB_FOUND = 7
    COMPUTATION = 8
    INTERNAL_PARSING = 9


class SweepError(click.ClickException):
    exit_code = ExitCode.COMPUTATION


class CommandLineError(click.UsageError):
    exit_code = ExitCode.COMMAND_LINE


class ExecutionError(SweepError):
    exit_code = ExitCode.EXECUTION


class RequirementError(SweepError):
    exit_code = ExitCode.REQUIREMENT


class BackendUnavailableError(RequirementError):
    pass


class ParameterSyntaxError(SweepError):
    exit_code = ExitCode.PARAMETER_SYNTAX

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class FileOpenError(SweepError):
    exit_code = ExitCode.FILE_OPEN


class FileCloseError(SweepError):
    exit_code = ExitCode.FILE_CLOSE


class NoJobFoundError(SweepError):
    exit_code = ExitCode.NO_JOB_FOUND


class ComputationError(SweepError):
    exit_code = ExitCode.COMPUTATION


class InternalParsingError(SweepError):
    exit_code = ExitCode.INTERNAL_PARSING


def read_input_file(path, default_suffix=""):
    """Reads a required text input, mapping OS failures to exit codes.

    When ``path`` is missing but ``path + default_suffix`` exists, the
    suffixed file is read instead.
    """
    if default_suffix and not os.path.exists(path) and os.path.exists(path + default_suffix):
        path = path + default_suffix
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except FileNotFoundError as e:
        raise RequirementError(f"file not found: {path}") from e
    except OSError as e:
        raise FileOpenError(f"cannot open {path}: {e.strerror or e}") from e
    except UnicodeDecodeError as e:
        raise FileOpenError(f"cannot read {path} as UTF-8 text: {e.reason} at byte {e.start}") from e
