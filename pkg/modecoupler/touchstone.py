"""Reading and writing of two-port Touchstone files (version 1), as exported by
vector network analysers.  Frequencies are converted to GHz on reading, and
written in GHz.
"""

from dataclasses import dataclass
import numpy as np
from .model import SpectrumGrid
from .utils import ParseError, InvalidInputError, diagnostic


freq_units = {"HZ": ("Hz", 1e-9), "KHZ": ("kHz", 1e-6), "MHZ": ("MHz", 1e-3), "GHZ": ("GHz", 1.0)}
data_formats = {"RI", "MA", "DB"}
parameter_types = {"S", "Y", "Z", "H", "G"}
fields_per_record = 9


@dataclass(frozen=True, eq=False)
class TouchstoneData:
    """Contents of a two-port Touchstone file.

    :var numpy.ndarray freqs: strictly increasing frequencies in GHz
    :var numpy.ndarray s_parameters: complex array of shape (n, 4) with the
      columns S11, S21, S12, S22, i.e. in file order
    :var str freq_unit: frequency unit of the original file
    :var str format: data format of the original file, ``"RI"``, ``"MA"``, or
      ``"DB"``
    :var float reference_ohms: reference impedance
    :var str parameter: always ``"S"``
    """
    freqs: np.ndarray
    s_parameters: np.ndarray
    freq_unit: str = "GHz"
    format: str = "MA"
    reference_ohms: float = 50.0
    parameter: str = "S"

    def __post_init__(self):
        freqs = np.array(self.freqs, dtype=float).reshape(-1)
        s_parameters = np.array(self.s_parameters, dtype=complex).reshape(-1, 4)
        if len(freqs) != len(s_parameters):
            raise InvalidInputError(f"{len(freqs)} frequencies but {len(s_parameters)} records")
        if np.any(np.diff(freqs) <= 0):
            raise InvalidInputError("frequencies must be strictly increasing")
        if self.format not in data_formats:
            raise InvalidInputError(f"unknown data format {self.format!r}")
        if self.parameter != "S":
            raise InvalidInputError("only S parameters are supported")
        if not self.reference_ohms > 0:
            raise InvalidInputError(f"reference impedance must be positive, got {self.reference_ohms!r}")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "s_parameters", s_parameters)

    def __len__(self):
        return len(self.freqs)

    @property
    def s21(self):
        return self.s_parameters[:, 1]

    def spectrum(self):
        """Returns the transmission S21 as a spectrum.

        :rtype: SpectrumGrid
        """
        return SpectrumGrid(self.freqs, self.s21)


def _parse_option_line(tokens, line_number):
    """Returns frequency unit, multiplier to GHz, data format, and reference
    impedance of an option line.  Omitted tokens default to ``GHz S MA R 50``.
    """
    unit, multiplier = "GHz", 1.0
    format_, reference = "MA", 50.0
    tokens = iter(tokens)
    for token in tokens:
        upper = token.upper()
        if upper in freq_units:
            unit, multiplier = freq_units[upper]
        elif upper in data_formats:
            format_ = upper
        elif upper in parameter_types:
            if upper != "S":
                raise ParseError(f"only S parameters are supported, got {token}", line_number)
        elif upper == "R":
            try:
                reference = float(next(tokens))
            except (StopIteration, ValueError):
                raise ParseError("“R” must be followed by the reference impedance", line_number)
            if not reference > 0:
                raise ParseError(f"invalid reference impedance {reference!r}", line_number)
        else:
            raise ParseError(f"invalid token {token!r} in option line", line_number)
    return unit, multiplier, format_, reference


def _to_complex(first, second, format_):
    if format_ == "RI":
        return first + 1j * second
    magnitude = first if format_ == "MA" else 10 ** (first / 20)
    return magnitude * np.exp(1j * np.deg2rad(second))


def parse_touchstone(text):
    """Parses a two-port Touchstone file.  Comments start with “!”.  A record
    consists of the frequency and four pairs of numbers, and may be continued
    on following lines.

    :param text: contents of the file
    :type text: str or bytes

    :rtype: TouchstoneData

    :raises ParseError: if the file is malformed; the error carries the line
      number
    """
    if isinstance(text, bytes):
        text = text.decode("latin-1")
    options = None
    records, record_lines = [], []
    pending, pending_line = [], None
    for line_number, line in enumerate(text.splitlines(), 1):
        line = line.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise ParseError("Touchstone version 2 files are not supported", line_number)
        if line.startswith("#"):
            if records or pending:
                raise ParseError("option line after data", line_number)
            if options is not None:
                diagnostic(f"line {line_number}: ignoring additional option line")
                continue
            options = _parse_option_line(line[1:].split(), line_number)
            continue
        try:
            numbers = [float(token) for token in line.split()]
        except ValueError as error:
            raise ParseError(f"invalid number: {error}", line_number)
        if not pending:
            pending_line = line_number
        pending.extend(numbers)
        if len(pending) > fields_per_record:
            raise ParseError(f"record has {len(pending)} fields, expected {fields_per_record}", pending_line)
        if len(pending) == fields_per_record:
            records.append(pending)
            record_lines.append(pending_line)
            pending = []
    if pending:
        raise ParseError(f"incomplete record with {len(pending)} fields, expected {fields_per_record}", pending_line)
    unit, multiplier, format_, reference = options or _parse_option_line([], None)
    rows = np.array(records, dtype=float).reshape(-1, fields_per_record)
    freqs = rows[:, 0] * multiplier
    decreasing = np.flatnonzero(np.diff(freqs) <= 0)
    if len(decreasing):
        raise ParseError("frequencies must be strictly increasing", record_lines[decreasing[0] + 1])
    s_parameters = _to_complex(rows[:, 1::2], rows[:, 2::2], format_)
    return TouchstoneData(freqs, s_parameters, unit, format_, reference)


def write_touchstone(data, format="RI"):
    """Returns a two-port Touchstone file with the data.  The option line is
    normalised to GHz, and all numbers are written with 17 significant digits.

    :param TouchstoneData data: the data
    :param str format: data format, ``"RI"``, ``"MA"``, or ``"DB"``

    :returns: contents of the file
    :rtype: str

    :raises InvalidInputError: if the format is unknown
    """
    format = format.upper()
    if format not in data_formats:
        raise InvalidInputError(f"unknown data format {format!r}")
    values = data.s_parameters
    if format == "RI":
        first, second = values.real, values.imag
    else:
        magnitude = np.abs(values)
        if format == "DB":
            with np.errstate(divide="ignore"):
                magnitude = 20 * np.log10(magnitude)
        first, second = magnitude, np.rad2deg(np.angle(values))
    lines = ["! S parameters written by modecoupler", f"# GHz S {format} R {data.reference_ohms:.17g}"]
    for freq, firsts, seconds in zip(data.freqs, first, second):
        numbers = [freq] + [number for pair in zip(firsts, seconds) for number in pair]
        lines.append(" ".join(f"{number:.17g}" for number in numbers))
    return "\n".join(lines) + "\n"
