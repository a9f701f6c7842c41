import logging
from typing import Literal, Optional

import psutil
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.errors import CommandLineError

logger = logging.getLogger(__name__)


def _logical_cpus():
    return psutil.cpu_count(logical=True) or 1


class ConfigTable(BaseModel):
    """Every tunable of the tool. Defaults are the documented ones."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    job_template_wildcard: str = "${JT_ID}"
    job_template_prefix: str = ""
    job_template_suffix: str = ".jt"
    std_output_dir: str = "."
    std_error_dir: str = "."
    input_file_default_suffix: str = ".in"
    comment_char: str = Field("#", min_length=1, max_length=1)
    keyassignment_char: str = Field("=", min_length=1, max_length=1)
    separation_char: str = Field(",", min_length=1, max_length=1)
    separation_char_cli: str = Field(" ", min_length=1, max_length=1)
    separation_char_filename: str = Field("_", min_length=1, max_length=1)
    jt_id_to_arg_separation: str = Field("_", min_length=1, max_length=1)
    unix_operators: str = "&|<>;()`"
    gridway_submit: str = "gwsubmit"
    gridway_submit_flag: str = ""
    gridway_ps: str = "gwps"
    gridway_kill: str = "gwkill"
    gridway_wait: str = "gwwait"
    gridway_dir_var: str = ""
    use_bignum: int = Field(0, ge=0, le=1)
    huge_number_points: int = 10000
    inode_size_kB: int = 4

    Template_executable: str = "EXECUTABLE"
    Template_arguments: str = "ARGUMENTS"
    Template_stdout_file: str = "STDOUT_FILE"
    Template_stderr_file: str = "STDERR_FILE"
    Template_job_name: str = "NAME"
    Template_encloser_char: str = ""
    Template_end_of_line: str = ""

    backend: Literal["local", "simulated", "external"] = "local"
    rng_seed: Optional[int] = None
    info_poll_seconds: int = Field(10, ge=0)
    max_parallel: int = Field(default_factory=_logical_cpus, ge=1)
    sim_hosts: str = "prod@egee.srce.hr:deny gilda@grid.acad.bg:deny default@gridway.org:allow"
    sim_retry_cap: int = Field(5, ge=1)


def load_defaults():
    return ConfigTable()


def apply_override(table, assignment):
    """Returns a copy of ``table`` with one ``KEY=VALUE`` assignment applied."""
    key, sep, value = assignment.partition("=")
    key = key.strip()
    if not sep or not key:
        raise CommandLineError(f"malformed --config assignment '{assignment}', expected KEY=VALUE")
    if key not in ConfigTable.model_fields:
        raise CommandLineError(f"unknown configuration key '{key}'")
    if key == "rng_seed" and value == "":
        value = None
    data = table.model_dump()
    data[key] = value
    try:
        updated = ConfigTable.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise CommandLineError(f"invalid value '{value}' for '{key}': {first['msg']}") from e
    logger.debug(f"Config override {key}={value!r}")
    return updated


def build_config(assignments):
    """Applies ``--config`` assignments in command-line order, last writer wins."""
    table = load_defaults()
    for assignment in assignments:
        table = apply_override(table, assignment)
    return table
