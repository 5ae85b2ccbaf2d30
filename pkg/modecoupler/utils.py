import os
from pathlib import Path
import click


debug = False


class ModeCouplerError(Exception):
    """Base class of all errors raised by modecoupler.  The command line maps
    this family to exit codes by means of `exit_code`.
    """
    exit_code = 1


class InvalidModelError(ModeCouplerError):
    pass


class UnsupportedModelError(ModeCouplerError):
    pass


class PreconditionError(ModeCouplerError):
    pass


class RangeError(ModeCouplerError):
    pass


class InvalidInputError(ModeCouplerError):
    pass


class InvalidInitialError(ModeCouplerError):
    pass


class ConfigurationError(ModeCouplerError):
    pass


class ParseError(ModeCouplerError):
    """Raised by the file parsers.

    :var line: 1-based line number in the parsed text; ``None`` if the error is
      not bound to a line
    :vartype line: int or NoneType
    """

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
        self.message = message

    def __reduce__(self):
        return self.__class__, (self.message, self.line)


class NumericalFailure(ModeCouplerError):
    """Raised if an iteration did not converge.

    :var float residual: the residual at the moment of giving up
    """
    exit_code = 2

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual
        self.message = message

    def __reduce__(self):
        return self.__class__, (self.message, self.residual)


class SingularResponseError(ModeCouplerError):
    """Raised if ωI − H cannot be inverted.  This is only possible at a real
    eigenvalue of a lossless system.

    :var float omega: the frequency in GHz
    :var gap_index: index of the sweep column, if raised within a sweep
    :vartype gap_index: int or NoneType
    """
    exit_code = 2

    def __init__(self, omega, gap_index=None):
        message = f"ωI − H is singular at {omega!r} GHz"
        if gap_index is not None:
            message += f" (gap sample {gap_index})"
        super().__init__(message)
        self.omega = omega
        self.gap_index = gap_index

    def __reduce__(self):
        return self.__class__, (self.omega, self.gap_index)


def diagnostic(message):
    """Writes a diagnostic message to stderr, but only in debug mode.

    :param str message: the message
    """
    if debug:
        click.echo(message, err=True)


def worker_count(configuration=None):
    """Returns the number of worker processes to use.  The environment variable
    ``MODECOUPLER_THREADS`` takes precedence over the ``threads`` key of the
    configuration.  Zero means “as many as there are CPUs”.

    :param dict[str, object] configuration: user configuration, as read from
      ``configuration.yaml``

    :returns: number of workers, at least 1
    :rtype: int

    :raises ConfigurationError: if the value is not a non-negative integer
    """
    value = os.environ.get("MODECOUPLER_THREADS")
    if value is None or not value.strip():
        value = (configuration or {}).get("threads", 0)
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"invalid worker count {value!r}")
    if value < 0:
        raise ConfigurationError(f"invalid worker count {value!r}")
    return value or os.cpu_count() or 1


def parse_float_list(text, length=None):
    """Parses a comma-separated list of numbers, as given on the command line
    with e.g. ``--alpha 0.01,0.02``.

    :param str text: the comma-separated list
    :param length: expected number of items; ``None`` means any number

    :type length: int or NoneType

    :returns: the numbers
    :rtype: list[float]

    :raises InvalidInputError: if an item is not a number or the length is
      wrong
    """
    items = [item.strip() for item in text.split(",") if item.strip()]
    try:
        values = [float(item) for item in items]
    except ValueError as error:
        raise InvalidInputError(f"invalid number list {text!r}: {error}")
    if length is not None and len(values) != length:
        raise InvalidInputError(f"expected {length} comma-separated numbers, got {text!r}")
    return values


def append_to_path_stem(path, suffix):
    """Appends a suffix to the stem of a path.  “Suffix” is not meant in the
    sense of the pathlib library, which uses this term in the sense of “file
    extension”.  Thus, the call ::

        append_to_path_stem(Path("a/b/c.d"), "-e")

    will return ``Path("a/b/c-e.d")``.

    :param pathlib.Path path: original path
    :param str suffix: suffix to be appended

    :returns: path with the suffix appended
    :rtype: pathlib.Path
    """
    path = Path(path)
    return (path.parent/(path.stem + suffix)).with_suffix(path.suffix)
