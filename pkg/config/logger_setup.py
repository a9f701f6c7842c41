import logging
import os
import sys

from colorama import Fore, Style


def setup_logging(debug=False):
    log_level = 'DEBUG' if debug else os.getenv('LOG_LEVEL', 'WARNING').upper()
    numeric_level = getattr(logging, log_level, logging.WARNING)
    # NOTE: stdout carries counts and CSV only, diagnostics go to stderr
    logging.basicConfig(level=numeric_level, format='%(asctime)s [%(levelname)s] %(message)s',
                        handlers=[logging.StreamHandler(sys.stderr)], force=True)

    # NOTE: Suppress logging from noisy libraries
    logging.getLogger('lark').setLevel(logging.WARNING)
    logging.getLogger('urllib3').setLevel(logging.WARNING)


def paint(text, colour=Fore.YELLOW):
    """Colours a user-facing warning when stderr is a terminal."""
    if sys.stderr.isatty():
        return f"{colour}{text}{Style.RESET_ALL}"
    return text
