import logging
import os
from typing import List, Literal, Optional

import click
from dotenv import load_dotenv
from pydantic import BaseModel

from config.logger_setup import paint, setup_logging
from config.settings import build_config
from core.errors import CommandLineError, ExitCode, read_input_file

logger = logging.getLogger(__name__)

PROG_NAME = "sweepman"
__version__ = "1.0.0"

LICENSE_TEXT = f"""{PROG_NAME} {__version__}, a parameter-sweep job template manager.

MIT License

Permission is hereby granted, free of charge, to any person obtaining a copy
of this software and associated documentation files (the "Software"), to deal
in the Software without restriction, including without limitation the rights
to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
copies of the Software, and to permit persons to whom the Software is
furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in all
copies or substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
SOFTWARE."""

GRIDWAY_BANNER = """WARNING: GridWay location not set up.
This means that the usability of this tool is limited to create and delete
job templates. Please identify your $GW_LOCATION directory and set the
parameter to that value with "--config gridway_dir_var=value"."""

INFO_MODES = ("history", "now", "evolution")
SUBCOMMANDS = ("create", "delete", "submit", "purge", "kill", "info", "version", "license")


class Invocation(BaseModel):
    subcommand: Literal["create", "delete", "submit", "purge", "kill", "info", "version", "license"]
    argument: Optional[str] = None
    worker: Optional[str] = None
    template: Optional[str] = None
    signal: Optional[str] = None
    debug: bool = False
    config: List[str] = []


class SweepCommand(click.Command):
    """Reports click's own usage errors with the command-line exit code."""

    def parse_args(self, ctx, args):
        try:
            return super().parse_args(ctx, args)
        except click.UsageError as e:
            e.exit_code = ExitCode.COMMAND_LINE
            raise


def build_invocation(create=None, delete=None, submit=None, purge=None, kill=None, info=None,
                     version=False, show_license=False, worker=None, template=None, sig=None,
                     debug=False, config=()):
    from core.templates import JOB_SELECTORS, TEMPLATE_SELECTORS, Selector

    given = {"create": create, "delete": delete, "submit": submit, "purge": purge, "kill": kill,
             "info": info, "version": version or None, "license": show_license or None}
    chosen = [name for name, value in given.items() if value is not None]
    if len(chosen) != 1:
        raise CommandLineError("exactly one subcommand is required: " + ", ".join(f"--{s}" for s in SUBCOMMANDS))
    subcommand = chosen[0]
    if (worker is not None or template is not None) and subcommand != "create":
        raise CommandLineError("--worker and --template only apply to --create")
    if sig is not None and subcommand != "kill":
        raise CommandLineError("--signal only applies to --kill")

    argument = given[subcommand] if subcommand not in ("version", "license") else None
    if subcommand in ("delete", "submit"):
        Selector.parse(argument, TEMPLATE_SELECTORS)
    elif subcommand in ("purge", "kill"):
        Selector.parse(argument, JOB_SELECTORS)
    return Invocation(subcommand=subcommand, argument=argument, worker=worker, template=template,
                      signal=sig, debug=debug, config=list(config))


def _create(invocation, cfg):
    from core.grammar import parse_parameter_file, parse_template_appendix
    from core.templates import create_templates

    spec = parse_parameter_file(read_input_file(invocation.argument, cfg.input_file_default_suffix), cfg)
    appendix = None
    if invocation.template:
        appendix = parse_template_appendix(read_input_file(invocation.template, cfg.input_file_default_suffix), cfg)
    create_templates(spec, invocation.worker, appendix, cfg)


def _dispatch(invocation):
    if invocation.subcommand == "version":
        click.echo(f"{PROG_NAME} {__version__}")
        return ExitCode.SUCCESS
    if invocation.subcommand == "license":
        click.echo(LICENSE_TEXT)
        return ExitCode.SUCCESS

    load_dotenv()
    cfg = build_config(invocation.config)
    if cfg.backend == "external" and not (cfg.gridway_dir_var or os.getenv("GW_LOCATION")):
        click.echo(paint(GRIDWAY_BANNER), err=True)

    if invocation.subcommand == "create":
        _create(invocation, cfg)
        return ExitCode.SUCCESS

    # Lifecycle commands need a backend
    from core.job_manager import JobManager
    from core.templates import JOB_SELECTORS, Selector

    manager = JobManager(cfg)
    if invocation.subcommand == "info":
        manager.info(invocation.argument)
    elif invocation.subcommand == "delete":
        manager.delete(Selector.parse(invocation.argument))
    elif invocation.subcommand == "submit":
        manager.submit(Selector.parse(invocation.argument))
    elif invocation.subcommand == "purge":
        manager.purge(Selector.parse(invocation.argument, JOB_SELECTORS))
    elif invocation.subcommand == "kill":
        manager.kill(Selector.parse(invocation.argument, JOB_SELECTORS), invocation.signal)
    return ExitCode.SUCCESS


def run(invocation):
    """Executes one invocation and returns its exit status."""
    setup_logging(invocation.debug)
    logger.debug(f"Invocation: {invocation}")
    try:
        return int(_dispatch(invocation))
    except click.ClickException as e:
        e.show()
        return int(e.exit_code)
    except Exception as e:
        logger.debug("Unexpected failure", exc_info=True)
        click.echo(f"Error: internal computation error: {e}", err=True)
        return int(ExitCode.COMPUTATION)


@click.command(cls=SweepCommand, name=PROG_NAME, context_settings={"help_option_names": ["-h", "--help"]})
@click.option('-c', '--create', metavar='PARAMETER_FILE', help="Compose job templates from a parameter file.")
@click.option('-d', '--delete', metavar='SELECTOR', help="Delete job templates.")
@click.option('-s', '--submit', metavar='SELECTOR', help="Submit jobs from templates.")
@click.option('-p', '--purge', metavar='SELECTOR', help="Purge jobs from templates once they finish.")
@click.option('-k', '--kill', metavar='SELECTOR', help="Kill jobs from templates.")
@click.option('-i', '--info', type=click.Choice(INFO_MODES), help="Report job status as CSV.")
@click.option('-v', '--version', is_flag=True, help="Print the version.")
@click.option('-l', '--license', 'show_license', is_flag=True, help="Print credits and license.")
@click.option('-w', '--worker', metavar='WORKER_FILE', help="Executable run for every sweep point.")
@click.option('-t', '--template', metavar='TEMPLATE_FILE', help="Extra lines appended to every template.")
@click.option('--signal', 'sig', metavar='SIG', help="Signal sent by --kill.")
@click.option('--debug', is_flag=True, help="Trace internals on standard error.")
@click.option('--config', multiple=True, metavar='KEY=VALUE', help="Override a configuration parameter.")
@click.pass_context
def main(ctx, **options):
    """Parameter-sweep job template manager.

    SELECTOR is one of all, [un]submitted, [un]finished, [un]successful or
    FROM-TO; --purge and --kill do not accept [un]submitted.
    """
    ctx.exit(run(build_invocation(**options)))


def parse_argv(argv):
    """Parses a command line into an Invocation without running it."""
    with main.make_context(PROG_NAME, list(argv)) as ctx:
        params = dict(ctx.params)
    return build_invocation(**params)


if __name__ == "__main__":
    main()
