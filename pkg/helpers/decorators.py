import functools
import time

import click

from config.logging_config import setup_logger
from helpers.exceptions import DiscoveryError

LOG = setup_logger(__name__)


def log_execution_time(func):
    """
    Decorator to log the execution time of a function.

    :param func: Function to be decorated
    :return: Wrapped function
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        execution_time = (time.perf_counter() - start_time) * 1000  # Convert to milliseconds
        LOG.info(f"Execution time of {func.__name__.upper()}: {execution_time:.3f} milliseconds")
        return result

    return wrapper


def exit_on_domain_error(func):
    """
    Decorator for CLI commands: a DiscoveryError is printed as `error category=... message=...`
    on stderr and ends the process with the error's exit code.

    :param func: Command callback to be decorated
    :return: Wrapped function
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except DiscoveryError as e:
            LOG.debug(f"{type(e).__name__} raised in {func.__name__}", exc_info=True)
            click.echo(f"error category={e.category} message={e}", err=True)
            raise SystemExit(e.exit_code)

    return wrapper
