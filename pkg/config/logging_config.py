import logging

_LEVEL = logging.INFO


def setup_logger(name: str) -> logging.Logger:
    """
    Set up a logger with the specified name.
    Calling it twice for the same name returns the same logger without stacking handlers.
    :param name: Name of the logger
    :return: Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(_LEVEL)
    logger.propagate = False

    if not logger.handlers:
        # Create a console handler
        ch = logging.StreamHandler()
        ch.setLevel(logging.DEBUG)

        # Create a formatter and set it for the handler
        formatter = logging.Formatter('%(asctime)s: %(levelname)s : %(message)s')
        ch.setFormatter(formatter)

        # Add the handler to the logger
        logger.addHandler(ch)

    return logger


def set_verbosity(verbose: bool):
    """
    Switch every logger created through setup_logger between INFO and DEBUG.
    :param verbose: True for DEBUG output
    """
    global _LEVEL
    _LEVEL = logging.DEBUG if verbose else logging.INFO
    for name in list(logging.root.manager.loggerDict):
        logger = logging.getLogger(name)
        if logger.handlers and not logger.propagate:
            logger.setLevel(_LEVEL)


def format_record(message: str, /, **fields) -> str:
    """
    Append a machine-parsable key=value suffix to a log message.
    :param message: Human readable prefix
    :param fields: Values to render; floats use the %.6e format, sequences are comma-joined
    :return: The formatted line
    """
    parts = []
    for key, value in fields.items():
        if isinstance(value, float):
            rendered = f"{value:.6e}"
        elif isinstance(value, (list, tuple)):
            rendered = ",".join(str(v) for v in value)
        else:
            rendered = str(value)
        parts.append(f"{key}={rendered}")
    return f"{message} {' '.join(parts)}".strip()
