"""CSV files of spectra and of sweep results.  Numbers are written with 17
significant digits, so that reading them back is lossless.
"""

import csv, io
import numpy as np
from .model import SpectrumGrid
from .configuration import dump_yaml, model_to_data, sweep_to_data
from .utils import ParseError


spectrum_header = ["freq_ghz", "re_s21", "im_s21"]
matrix_corner = "freq_ghz/gap_mm"
long_header = ["gap_mm", "freq_ghz", "magnitude", "magnitude_db", "phase_rad"]


def _float(cell, line_number):
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"invalid number {cell!r}", line_number)


def read_spectrum_csv(text):
    """Reads a spectrum from CSV with the columns ``freq_ghz``, ``re_s21``, and
    ``im_s21``.

    :param str text: contents of the file

    :rtype: SpectrumGrid

    :raises ParseError: if the header or a row is invalid, or if the
      frequencies are not strictly increasing
    """
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None or [cell.strip() for cell in header] != spectrum_header:
        raise ParseError(f"header must be “{','.join(spectrum_header)}”", 1)
    freqs, values = [], []
    for row in rows:
        line_number = rows.line_num
        if not row or not "".join(row).strip():
            continue
        if len(row) != len(spectrum_header):
            raise ParseError(f"expected {len(spectrum_header)} columns, got {len(row)}", line_number)
        freq, real, imaginary = (_float(cell, line_number) for cell in row)
        if freqs and freq <= freqs[-1]:
            raise ParseError("frequencies must be strictly increasing", line_number)
        if not all(np.isfinite((freq, real, imaginary))):
            raise ParseError("numbers must be finite", line_number)
        freqs.append(freq)
        values.append(complex(real, imaginary))
    return SpectrumGrid(freqs, values)


def write_spectrum_csv(grid):
    """Returns the spectrum as CSV, see `read_spectrum_csv`.

    :param SpectrumGrid grid: the spectrum

    :rtype: str
    """
    lines = [",".join(spectrum_header)]
    for freq, value in zip(grid.freqs, grid.s21):
        lines.append(f"{float(freq)!r},{float(value.real)!r},{float(value.imag)!r}")
    return "\n".join(lines) + "\n"


def _savetxt(array, header):
    output = io.StringIO()
    np.savetxt(output, array, fmt="%.17g", delimiter=",", header=header, comments="")
    return output.getvalue()


def export_sweep(result):
    """Returns the files of a sweep result.  The matrix file has the gaps in
    its first row and the frequencies in its first column, and |S21| in the
    cells.  The long file has one row per cell, for plotting programs.  The
    metadata file is YAML and describes the model and the sweep.

    :param SweepResult result: the sweep result

    :returns: contents of the files by kind, ``"matrix"``, ``"long"``, and
      ``"metadata"``
    :rtype: dict[str, str]
    """
    gaps, freqs = np.asarray(result.gaps), np.asarray(result.freqs)
    matrix = _savetxt(np.column_stack((freqs, result.magnitude)),
                      ",".join([matrix_corner] + [f"{gap:.17g}" for gap in gaps]))
    gap_column = np.repeat(gaps, len(freqs))
    freq_column = np.tile(freqs, len(gaps))
    magnitude = np.asarray(result.magnitude).T.reshape(-1)
    with np.errstate(divide="ignore"):
        magnitude_db = 20 * np.log10(magnitude)
    long = _savetxt(np.column_stack((gap_column, freq_column, magnitude, magnitude_db,
                                     np.asarray(result.phase).T.reshape(-1))), ",".join(long_header))
    metadata = {"gaps": len(gaps), "freqs": len(freqs)}
    if result.spec is not None:
        metadata["preset"] = result.spec.name
        metadata["alpha"] = [float(alpha) for alpha in result.spec.base_model.alphas]
        metadata["model"] = model_to_data(result.spec.base_model)
        metadata["sweep"] = sweep_to_data(result.spec)
    return {"matrix": matrix, "long": long, "metadata": dump_yaml(metadata)}


def read_sweep_matrix(text):
    """Reads the matrix file written by `export_sweep`.

    :param str text: contents of the file

    :returns: gaps in mm, frequencies in GHz, and |S21| with one row per
      frequency
    :rtype: numpy.ndarray, numpy.ndarray, numpy.ndarray

    :raises ParseError: if the file is malformed
    """
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty matrix file", 1)
    header = lines[0].split(",")
    if header[0].strip() != matrix_corner:
        raise ParseError(f"first cell must be “{matrix_corner}”", 1)
    gaps = np.array([_float(cell, 1) for cell in header[1:]])
    rows = []
    for line_number, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(cells)}", line_number)
        rows.append([_float(cell, line_number) for cell in cells])
    table = np.array(rows, dtype=float).reshape(-1, len(header))
    return gaps, table[:, 0], table[:, 1:]
