"""Sweeps of the split gap g of the tunable resonator.  The gap shifts the
frequency of one mode; everything else stays fixed.  The result is a |S21|
colour map over (frequency, gap).

The gap-to-frequency relation is an affine interpolation between the
frequencies observed at the smallest and the largest gap.  The real relation
is nonlinear, which is why e.g. the case-1 crossing lands at g ≈ 0.85 mm rather
than at the 0.7 mm seen in the full-wave simulations.
"""

import multiprocessing, time
from dataclasses import dataclass
import numpy as np
from . import presets
from .model import SpectrumGrid, s21_spectrum
from .utils import RangeError, InvalidInputError, SingularResponseError, diagnostic


@dataclass(frozen=True)
class GapCalibration:
    """Affine map from split gap to mode frequency.

    :var float g_min: smallest gap in mm
    :var float g_max: largest gap in mm
    :var float omega_start: mode frequency at `g_min` in GHz
    :var float omega_end: mode frequency at `g_max` in GHz
    """
    g_min: float
    g_max: float
    omega_start: float
    omega_end: float

    def __post_init__(self):
        for name in ("g_min", "g_max", "omega_start", "omega_end"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise InvalidInputError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if not self.g_min < self.g_max:
            raise InvalidInputError(f"g_min must be smaller than g_max, got {self.g_min!r} and {self.g_max!r}")
        if self.omega_start <= 0 or self.omega_end <= 0:
            raise InvalidInputError("calibration frequencies must be positive")


def omega_of_gap(cal, g):
    """Returns the mode frequency at gap `g`.

    :param GapCalibration cal: the calibration
    :param float g: gap in mm

    :returns: frequency in GHz
    :rtype: float

    :raises RangeError: if `g` lies outside [g_min, g_max]
    """
    if not cal.g_min <= g <= cal.g_max:
        raise RangeError(f"gap {g!r} mm outside of [{cal.g_min!r}, {cal.g_max!r}] mm")
    return cal.omega_start + (cal.omega_end - cal.omega_start) * (g - cal.g_min) / (cal.g_max - cal.g_min)


def gap_of_omega(cal, omega):
    """Inverse of `omega_of_gap`.

    :param GapCalibration cal: the calibration
    :param float omega: frequency in GHz

    :returns: gap in mm
    :rtype: float

    :raises RangeError: if `omega` is not reached within [g_min, g_max]
    """
    low, high = sorted((cal.omega_start, cal.omega_end))
    if cal.omega_start == cal.omega_end or not low <= omega <= high:
        raise RangeError(f"frequency {omega!r} GHz is not reached by the calibration")
    return cal.g_min + (cal.g_max - cal.g_min) * (omega - cal.omega_start) / (cal.omega_end - cal.omega_start)


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """Everything needed for a gap sweep.

    :var CouplingModel base_model: the model; the frequency of the varying mode
      is overwritten for every gap
    :var int varying_mode_index: 0-based index of the mode that follows the
      calibration
    :var GapCalibration calibration: the gap calibration
    :var numpy.ndarray gap_samples: gaps in mm
    :var numpy.ndarray freq_grid: strictly increasing frequencies in GHz
    :var str name: name of the preset, or ``"custom"``
    """
    base_model: object
    varying_mode_index: int
    calibration: GapCalibration
    gap_samples: np.ndarray
    freq_grid: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        if not 0 <= self.varying_mode_index < self.base_model.size:
            raise InvalidInputError(f"varying mode index {self.varying_mode_index} is invalid for "
                                    f"{self.base_model.size} modes")
        gaps = np.array(self.gap_samples, dtype=float).reshape(-1)
        freqs = np.array(self.freq_grid, dtype=float).reshape(-1)
        if np.any(gaps < self.calibration.g_min) or np.any(gaps > self.calibration.g_max):
            raise RangeError("gap samples must lie within the calibrated range")
        if not np.all(np.isfinite(freqs)) or np.any(np.diff(freqs) <= 0):
            raise InvalidInputError("frequency grid must be strictly increasing")
        gaps.setflags(write=False)
        freqs.setflags(write=False)
        object.__setattr__(self, "gap_samples", gaps)
        object.__setattr__(self, "freq_grid", freqs)

    def model_at(self, gap):
        """Returns the model with the varying mode tuned to `gap`.

        :param float gap: gap in mm

        :rtype: CouplingModel
        """
        return self.base_model.with_mode(self.varying_mode_index, omega=omega_of_gap(self.calibration, gap))


@dataclass(frozen=True, eq=False)
class SweepResult:
    """|S21| over (frequency, gap).  Rows are frequencies, columns are gaps.

    :var numpy.ndarray gaps: gaps in mm
    :var numpy.ndarray freqs: frequencies in GHz
    :var numpy.ndarray magnitude: |S21|
    :var numpy.ndarray phase: arg S21 in radians
    :var spec: the sweep that produced this result
    :vartype spec: SweepSpec or NoneType
    """
    gaps: np.ndarray
    freqs: np.ndarray
    magnitude: np.ndarray
    phase: np.ndarray
    spec: SweepSpec = None

    def __post_init__(self):
        shape = (len(self.freqs), len(self.gaps))
        if np.shape(self.magnitude) != shape or np.shape(self.phase) != shape:
            raise InvalidInputError(f"magnitude and phase must have shape {shape}")
        if np.any(np.asarray(self.magnitude) < 0):
            raise InvalidInputError("magnitudes must not be negative")

    def column(self, index):
        """Returns the complex spectrum of one gap sample.

        :param int index: index of the gap sample

        :rtype: SpectrumGrid
        """
        return SpectrumGrid(self.freqs, self.magnitude[:, index] * np.exp(1j * self.phase[:, index]))


def _sweep_column(arguments):
    spec, index = arguments
    try:
        return s21_spectrum(spec.model_at(spec.gap_samples[index]), spec.freq_grid).s21
    except SingularResponseError as error:
        raise SingularResponseError(error.omega, index)


def run_sweep(spec, workers=1):
    """Evaluates S21 for every gap sample.  With more than one worker, the
    columns are distributed over a process pool; the result is the same.

    :param SweepSpec spec: the sweep
    :param int workers: number of worker processes

    :returns: the colour map data
    :rtype: SweepResult

    :raises SingularResponseError: with the gap index attached
    """
    start = time.time()
    arguments = [(spec, index) for index in range(len(spec.gap_samples))]
    if workers > 1 and len(arguments) > 1:
        with multiprocessing.Pool(min(workers, len(arguments))) as pool:
            columns = pool.map(_sweep_column, arguments)
    else:
        columns = [_sweep_column(argument) for argument in arguments]
    values = np.column_stack(columns) if columns else np.empty((len(spec.freq_grid), 0), dtype=complex)
    diagnostic(f"sweep “{spec.name}”: {values.shape[1]} columns × {values.shape[0]} frequencies with "
               f"{workers} worker(s) in {time.time() - start:.3f} s")
    return SweepResult(spec.gap_samples, spec.freq_grid, np.abs(values), np.angle(values), spec)


def case1_preset(alpha=(0.01, 0.01)):
    """Returns the sweep of the dissipatively coupled configuration, which
    hosts a bound state at the crossing.  See `modecoupler.presets.case1`.

    :param alpha: intrinsic damping of both modes in GHz
    :type alpha: tuple[float, float]

    :rtype: SweepSpec
    """
    return presets.load_preset("case1").sweep_spec(alpha)


def case2_preset(alpha=(0.01, 0.01)):
    """Returns the sweep of the coherently coupled configuration, which shows a
    transparency window.  See `modecoupler.presets.case2`.

    :param alpha: intrinsic damping of both modes in GHz
    :type alpha: tuple[float, float]

    :rtype: SweepSpec
    """
    return presets.load_preset("case2").sweep_spec(alpha)
