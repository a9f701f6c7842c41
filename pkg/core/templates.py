"""Job-template files: rendering, naming, discovery, selection and deletion."""
import logging
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import click

from config.logger_setup import paint
from core.enumerator import Sweep
from core.errors import CommandLineError, FileCloseError, FileOpenError, NoJobFoundError, RequirementError
from core.event_log import JobState
from core.wildcard import SubstitutionContext, substitute
from utils.sanitizer import filename_argument

logger = logging.getLogger(__name__)


@dataclass
class JobTemplate:
    label: str
    filename: str
    lines: List[str] = field(default_factory=list)

    @property
    def text(self):
        return "".join(f"{line}\n" for line in self.lines)


@dataclass(frozen=True)
class TemplateFile:
    """A template found on disk, ordered by its index."""
    index: int
    filename: str


class SelectorKind(str, Enum):
    ALL = "all"
    SUBMITTED = "submitted"
    UNSUBMITTED = "unsubmitted"
    FINISHED = "finished"
    UNFINISHED = "unfinished"
    SUCCESSFUL = "successful"
    UNSUCCESSFUL = "unsuccessful"
    RANGE = "range"


# Selectors that need to know how a job ended, not only whether it was submitted.
RUN_STATE_KINDS = frozenset({SelectorKind.FINISHED, SelectorKind.UNFINISHED,
                             SelectorKind.SUCCESSFUL, SelectorKind.UNSUCCESSFUL})
TEMPLATE_SELECTORS = frozenset(SelectorKind) - {SelectorKind.RANGE}
JOB_SELECTORS = TEMPLATE_SELECTORS - {SelectorKind.SUBMITTED, SelectorKind.UNSUBMITTED}

_RANGE = re.compile(r"(\d+)-(\d+)")

_MATCHES = {
    SelectorKind.SUBMITTED: lambda state: state is not JobState.UNSUBMITTED,
    SelectorKind.UNSUBMITTED: lambda state: state is JobState.UNSUBMITTED,
    SelectorKind.FINISHED: lambda state: state in (JobState.SUCCESSFUL, JobState.UNSUCCESSFUL),
    SelectorKind.UNFINISHED: lambda state: state is JobState.RUNNING,
    SelectorKind.SUCCESSFUL: lambda state: state is JobState.SUCCESSFUL,
    SelectorKind.UNSUCCESSFUL: lambda state: state is JobState.UNSUCCESSFUL,
}


@dataclass(frozen=True)
class Selector:
    kind: SelectorKind
    first: Optional[int] = None
    last: Optional[int] = None

    @property
    def is_state(self):
        return self.kind not in (SelectorKind.ALL, SelectorKind.RANGE)

    @property
    def needs_run_state(self):
        return self.kind in RUN_STATE_KINDS

    @classmethod
    def parse(cls, token, allowed=TEMPLATE_SELECTORS):
        match = _RANGE.fullmatch(token)
        if match:
            first, last = int(match.group(1)), int(match.group(2))
            if first > last:
                raise CommandLineError(f"empty range '{token}': FROM must not exceed TO")
            return cls(SelectorKind.RANGE, first, last)
        try:
            kind = SelectorKind(token)
        except ValueError:
            kind = None
        if kind is None or kind is SelectorKind.RANGE or kind not in allowed:
            choices = ", ".join(sorted(k.value for k in allowed))
            raise CommandLineError(f"invalid selector '{token}', expected one of {choices} or FROM-TO")
        return cls(kind)

    def __str__(self):
        if self.kind is SelectorKind.RANGE:
            return f"{self.first}-{self.last}"
        return self.kind.value


def template_stem(point, worker_basename, cfg):
    sep = cfg.separation_char_filename
    head = f"{point.label}{cfg.jt_id_to_arg_separation}{worker_basename}"
    return sep.join([head] + [filename_argument(c, sep) for c in point.coordinates])


def _std_path(directory, name):
    if directory in ("", "."):
        return name
    return f"{directory.rstrip('/')}/{name}"


def render_template(point, worker_path, appendix, cfg):
    basename = os.path.basename(worker_path)
    stem = template_stem(point, basename, cfg)
    enc, eol = cfg.Template_encloser_char, cfg.Template_end_of_line

    def line(key, value):
        return f"{key} = {enc}{value}{enc}{eol}"

    lines = [
        line(cfg.Template_job_name, f"{point.label}{cfg.jt_id_to_arg_separation}{basename}"),
        line(cfg.Template_executable, worker_path),
        line(cfg.Template_arguments, cfg.separation_char_cli.join(point.coordinates)),
        line(cfg.Template_stdout_file, _std_path(cfg.std_output_dir, f"{stem}.out")),
        line(cfg.Template_stderr_file, _std_path(cfg.std_error_dir, f"{stem}.err")),
    ]
    if appendix is not None:
        ctx = SubstitutionContext(tuple(point.coordinates), point.label)
        lines += [substitute(extra, ctx, cfg.job_template_wildcard) for extra in appendix.lines]
    filename = f"{cfg.job_template_prefix}{stem}{cfg.job_template_suffix}"
    return JobTemplate(label=point.label, filename=filename, lines=lines)


def parse_template_file(path, cfg):
    """Reads the core key/value lines of a template back into a dict."""
    values = {}
    enc, eol = cfg.Template_encloser_char, cfg.Template_end_of_line
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as e:
        raise FileOpenError(f"cannot open {path}: {e.strerror or e}") from e
    except UnicodeDecodeError as e:
        raise FileOpenError(f"cannot read {path} as UTF-8 text: {e.reason} at byte {e.start}") from e
    for line in lines:
        key, sep, value = line.partition(" = ")
        if not sep:
            continue
        if eol and value.endswith(eol):
            value = value[:-len(eol)]
        if enc and len(value) >= 2 * len(enc) and value.startswith(enc) and value.endswith(enc):
            value = value[len(enc):-len(enc)]
        values.setdefault(key, value)
    return values


def _write(path, template):
    if os.path.exists(path):
        logger.debug(f"Overwriting existing template {path}")
    try:
        handle = open(path, "w", encoding="utf-8")
    except OSError as e:
        raise FileOpenError(f"cannot open {path}: {e.strerror or e}") from e
    try:
        with handle:
            handle.write(template.text)
    except OSError as e:
        raise FileCloseError(f"cannot write {path}: {e.strerror or e}") from e


def create_templates(spec, worker, appendix, cfg, workdir=".", rng=None):
    if not worker:
        raise RequirementError("a worker executable is required (-w/--worker)")
    if not os.path.isfile(os.path.join(workdir, worker)):
        raise RequirementError(f"worker file not found: {worker}")

    sweep = Sweep(spec, cfg, rng)
    total = sweep.size
    if total > cfg.huge_number_points:
        click.echo(paint(f"WARNING: composing {total} job templates will take about "
                         f"{total * cfg.inode_size_kB} kB of disk space"), err=True)

    count = 0
    for point in sweep.points():
        template = render_template(point, worker, appendix, cfg)
        _write(os.path.join(workdir, template.filename), template)
        count += 1
    logger.info(f"Wrote {count} templates into {os.path.abspath(workdir)}")
    click.echo(f"Composed {count} job templates")
    return count


def template_pattern(cfg):
    return re.compile(rf"^{re.escape(cfg.job_template_prefix)}(\d+)"
                      rf"{re.escape(cfg.jt_id_to_arg_separation)}.*{re.escape(cfg.job_template_suffix)}$")


def discover_templates(cfg, workdir="."):
    pattern = template_pattern(cfg)
    found = []
    for name in os.listdir(workdir):
        match = pattern.match(name)
        if match and os.path.isfile(os.path.join(workdir, name)):
            found.append(TemplateFile(index=int(match.group(1)), filename=name))
    return sorted(found, key=lambda t: (t.index, t.filename))


def resolve_selector(selector, templates, states: Optional[Dict[str, JobState]] = None):
    if selector.kind is SelectorKind.ALL:
        return list(templates)
    if selector.kind is SelectorKind.RANGE:
        return [t for t in templates if selector.first <= t.index <= selector.last]
    states = states or {}
    matches = _MATCHES[selector.kind]
    return [t for t in templates if matches(states.get(t.filename, JobState.UNSUBMITTED))]


def delete_templates(selector, cfg, workdir=".", states=None):
    matched = resolve_selector(selector, discover_templates(cfg, workdir), states)
    if selector.is_state and not matched:
        raise NoJobFoundError(f"no job template matches '{selector}'")
    for template in matched:
        path = os.path.join(workdir, template.filename)
        try:
            os.remove(path)
        except OSError as e:
            raise FileOpenError(f"cannot delete {path}: {e.strerror or e}") from e
        logger.debug(f"Deleted {path}")
    click.echo(f"Deleted {len(matched)} job templates")
    return len(matched)
