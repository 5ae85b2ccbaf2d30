"""Analysis of two-mode models and their spectra: Friedrich–Wintgen bound
states in the continuum, the level repulsion/attraction taxonomy, and dips,
peaks, and transparency windows of |S21|.
"""

import enum
from dataclasses import dataclass
import numpy as np
import scipy.optimize
import scipy.signal
from .model import eigenvalues
from .utils import UnsupportedModelError, PreconditionError


tie_margin = 1e-9
"""Margin in GHz below which two eigenvalue gaps count as equal."""

bic_tolerance = 1e-9
"""Linewidth in GHz (on top of the largest intrinsic damping) up to which an
eigenvalue counts as trapped."""

default_prominence = 1e-4


@dataclass(frozen=True)
class BicPoint:
    """A located Friedrich–Wintgen bound state.

    :var float sweep_value: control parameter at the bound state, e.g. the gap
      in mm
    :var float omega_bic: real part of the trapped eigenvalue in GHz
    :var float residual: Friedrich–Wintgen residual at the point in GHz²
    :var float min_im: smallest |Im λ| among the branches in GHz
    :var bool verified: whether `min_im` passed the eigenvalue check; points
      failing it are reported, not dropped
    """
    sweep_value: float
    omega_bic: float
    residual: float
    min_im: float
    verified: bool


class Regime(enum.Enum):
    LEVEL_REPULSION = "LEVEL_REPULSION"
    LEVEL_ATTRACTION = "LEVEL_ATTRACTION"
    DEGENERATE = "DEGENERATE"


@dataclass(frozen=True)
class RegimeReport:
    gap_re: float
    gap_im: float
    label: Regime


class FeatureKind(enum.Enum):
    DIP = "DIP"
    PEAK = "PEAK"


@dataclass(frozen=True)
class SpectralFeature:
    """Local extremum of |S21|.

    :var FeatureKind kind: dip or peak
    :var float freq: refined position in GHz
    :var float magnitude: refined |S21| at the extremum
    :var fwhm: full width at half prominence in GHz; ``None`` if a flank does
      not recross the half level within the grid
    :var float prominence: prominence of the extremum in |S21|

    :vartype fwhm: float or NoneType
    """
    kind: FeatureKind
    freq: float
    magnitude: float
    fwhm: float
    prominence: float


@dataclass(frozen=True)
class TransparencyWindow:
    window_height: float
    dip_separation: float


def _check_two_mode_real_coupling(model):
    if model.size != 2:
        raise UnsupportedModelError(f"the Friedrich–Wintgen condition needs two modes, got {model.size}")
    if model.direct_coupling[0, 1].imag != 0:
        raise UnsupportedModelError("the Friedrich–Wintgen condition is only defined for real Δ")


def fw_residual(two_mode_model):
    """Returns the residual of the Friedrich–Wintgen condition, Re Δ (β₁ − β₂)
    − √(β₁β₂) (ω₁ − ω₂).  It vanishes where one hybrid mode decouples from the
    channel.

    :param CouplingModel two_mode_model: model with two modes and real Δ

    :returns: residual in GHz²
    :rtype: float

    :raises UnsupportedModelError: if there are not two modes or Δ is complex
    """
    _check_two_mode_real_coupling(two_mode_model)
    first, second = two_mode_model.modes
    delta = two_mode_model.direct_coupling[0, 1].real
    return float(delta * (first.beta_ext - second.beta_ext) -
                 np.sqrt(first.beta_ext * second.beta_ext) * (first.omega - second.omega))


def _verify_bic(model, sweep_value, residual):
    values = eigenvalues(model)
    trapped = min(values, key=lambda value: abs(value.im))
    min_im = abs(trapped.im)
    verified = bool(min_im <= bic_tolerance + max(model.alphas))
    return BicPoint(float(sweep_value), trapped.re, residual, min_im, verified)


def find_bic(sweep, tol=1e-12, max_bisections=200):
    """Locates all Friedrich–Wintgen bound states along a sweep.  Every sign
    change of `fw_residual` between neighbouring gap samples is refined by
    bisection until |residual| ≤ `tol`, and the result is checked against the
    eigenvalues.

    :param SweepSpec sweep: two-mode sweep with real Δ and monotonic gap
      samples
    :param float tol: residual tolerance in GHz²
    :param int max_bisections: bisection steps per bracket at most

    :returns: bound states sorted by gap; empty if the residual never changes
      sign
    :rtype: list[BicPoint]

    :raises UnsupportedModelError: if the model is not a two-mode model with
      real Δ
    :raises PreconditionError: if the gap samples are not strictly monotonic
    """
    _check_two_mode_real_coupling(sweep.base_model)
    gaps = np.asarray(sweep.gap_samples, dtype=float)
    steps = np.diff(gaps)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise PreconditionError("gap samples must be strictly monotonic")

    def residual(gap):
        return fw_residual(sweep.model_at(gap))

    values = [residual(gap) for gap in gaps]
    points = []
    previous_was_root = False
    for index, (gap, value) in enumerate(zip(gaps, values)):
        if abs(value) <= tol:
            if not previous_was_root:
                points.append(_verify_bic(sweep.model_at(gap), gap, value))
            previous_was_root = True
            continue
        previous_was_root = False
        if index + 1 == len(gaps) or abs(values[index + 1]) <= tol or value * values[index + 1] > 0:
            continue
        low, high, low_value = gap, gaps[index + 1], value
        middle, middle_value = low, low_value
        for __ in range(max_bisections):
            middle = (low + high) / 2
            middle_value = residual(middle)
            if abs(middle_value) <= tol or middle in (low, high):
                break
            if middle_value * low_value > 0:
                low, low_value = middle, middle_value
            else:
                high = middle
        points.append(_verify_bic(sweep.model_at(middle), middle, middle_value))
    return sorted(points, key=lambda point: point.sweep_value)


def at_zero_detuning(two_mode_model):
    """Returns a copy of the model with ω₁ set to ω₂.

    :param CouplingModel two_mode_model: model with two modes

    :rtype: CouplingModel
    """
    if two_mode_model.size != 2:
        raise UnsupportedModelError(f"need two modes, got {two_mode_model.size}")
    return two_mode_model.with_mode(0, omega=two_mode_model.modes[1].omega)


def classify_regime(model_at_zero_detuning):
    """Classifies the coupling by the eigenvalue splitting at zero detuning:
    real parts split (level repulsion, transparency) or imaginary parts split
    (level attraction, absorption).

    :param CouplingModel model_at_zero_detuning: two-mode model with ω₁ = ω₂

    :rtype: RegimeReport

    :raises UnsupportedModelError: if the model does not have two modes
    :raises PreconditionError: if |ω₁ − ω₂| > 1e−9 GHz
    """
    model = model_at_zero_detuning
    if model.size != 2:
        raise UnsupportedModelError(f"need two modes, got {model.size}")
    detuning = abs(model.modes[0].omega - model.modes[1].omega)
    if detuning > tie_margin:
        raise PreconditionError(f"model is detuned by {detuning!r} GHz; classify at ω₁ = ω₂")
    lower, upper = (complex(value) for value in eigenvalues(model))
    gap_re, gap_im = abs((upper - lower).real), abs((upper - lower).imag)
    if gap_re > gap_im + tie_margin:
        label = Regime.LEVEL_REPULSION
    elif gap_im > gap_re + tie_margin:
        label = Regime.LEVEL_ATTRACTION
    else:
        label = Regime.DEGENERATE
    return RegimeReport(gap_re, gap_im, label)


def _refine_extremum(freqs, values, index):
    """Vertex of the parabola through the samples index − 1, index, index + 1.
    """
    local = freqs[index - 1:index + 2] - freqs[index]
    curvature, slope, constant = np.polyfit(local, values[index - 1:index + 2], 2)
    if curvature == 0:
        return freqs[index], values[index]
    offset = np.clip(-slope / (2 * curvature), local[0], local[2])
    return freqs[index] + offset, constant + slope * offset + curvature * offset ** 2


def _half_level_crossing(freqs, values, index, level, direction, above):
    """Walks from `index` in `direction` until the samples cross `level`, and
    interpolates linearly.  Returns ``None`` at the grid edge.
    """
    position = index
    while 0 <= position + direction < len(values):
        following = position + direction
        if (values[following] >= level) == above:
            fraction = (level - values[position]) / (values[following] - values[position])
            return freqs[position] + fraction * (freqs[following] - freqs[position])
        position = following
    return None


def extract_features(spectrum, prominence=default_prominence):
    """Finds the dips and peaks of |S21| whose prominence is at least
    `prominence`.  Every extremum is refined by a parabola through the three
    nearest samples.

    :param SpectrumGrid spectrum: the spectrum
    :param float prominence: minimal prominence in |S21|

    :returns: features sorted by frequency; empty for fewer than three samples
    :rtype: list[SpectralFeature]
    """
    freqs, magnitude = spectrum.freqs, spectrum.magnitude
    if len(freqs) < 3:
        return []
    features = []
    for kind, signal in ((FeatureKind.DIP, -magnitude), (FeatureKind.PEAK, magnitude)):
        indices, properties = scipy.signal.find_peaks(signal, prominence=prominence)
        for index, feature_prominence in zip(indices, properties["prominences"]):
            freq, value = _refine_extremum(freqs, signal, index)
            level = signal[index] - feature_prominence / 2
            left = _half_level_crossing(freqs, signal, index, level, -1, above=False)
            right = _half_level_crossing(freqs, signal, index, level, +1, above=False)
            fwhm = None if left is None or right is None else float(right - left)
            magnitude_value = -value if kind == FeatureKind.DIP else value
            features.append(SpectralFeature(kind, float(freq), float(magnitude_value), fwhm,
                                            float(feature_prominence)))
    return sorted(features, key=lambda feature: feature.freq)


def dips(features):
    return [feature for feature in features if feature.kind == FeatureKind.DIP]


def transparency_window(spectrum, prominence=default_prominence):
    """Returns the transparency window between the two deepest dips, if there
    is a peak between them.

    :param SpectrumGrid spectrum: the spectrum
    :param float prominence: see `extract_features`

    :returns: height of the window and separation of the dips, or ``None``
    :rtype: TransparencyWindow or NoneType
    """
    features = extract_features(spectrum, prominence)
    deepest = sorted(dips(features), key=lambda feature: feature.magnitude)[:2]
    if len(deepest) < 2:
        return None
    low, high = sorted(feature.freq for feature in deepest)
    peaks = [feature.magnitude for feature in features
             if feature.kind == FeatureKind.PEAK and low < feature.freq < high]
    if not peaks:
        return None
    return TransparencyWindow(max(peaks), high - low)


def track_branches(eigenvalue_lists):
    """Reorders eigenvalues sample by sample so that each column follows one
    continuous branch.  Consecutive samples are matched by the assignment with
    the least total distance in the complex plane.

    :param eigenvalue_lists: for every sample, the N eigenvalues in any order
    :type eigenvalue_lists: list[list[complex or ComplexFrequency]]

    :returns: complex array of shape (samples, N)
    :rtype: numpy.ndarray
    """
    branches = np.array([[complex(value) for value in values] for values in eigenvalue_lists], dtype=complex)
    for index in range(1, len(branches)):
        distances = np.abs(branches[index - 1][:, np.newaxis] - branches[index][np.newaxis, :])
        rows, columns = scipy.optimize.linear_sum_assignment(distances)
        reordered = np.empty_like(branches[index])
        reordered[rows] = branches[index][columns]
        branches[index] = reordered
    return branches


def eigenvalue_branches(sweep):
    """Returns the tracked eigenvalue branches along a sweep.

    :param SweepSpec sweep: the sweep

    :returns: complex array of shape (gaps, N)
    :rtype: numpy.ndarray
    """
    return track_branches([eigenvalues(sweep.model_at(gap)) for gap in sweep.gap_samples])
