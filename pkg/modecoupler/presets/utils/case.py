"""Base class for the presets.  A preset consists of two modes: the varying
mode 1 (the split-ring resonator whose frequency follows the gap) and the
fixed mode 2 (the electric resonator).  Both couple to the same microstrip
line.
"""

import numpy as np
from ...model import CouplingModel
from ...sweep import GapCalibration, SweepSpec, gap_of_omega
from ...utils import InvalidInputError


class CasePreset:
    """Abstract base class of presets.

    :var str name: name of the preset, equal to the module name
    :var float omega_fixed: frequency of the fixed mode in GHz
    :var float beta_varying: radiative damping of the varying mode in GHz
    :var float beta_fixed: radiative damping of the fixed mode in GHz
    :var float delta: direct coupling in GHz
    :var tuple[float] calibration: g_min, g_max, omega_start, omega_end
    :var tuple[float] freq_range: lowest and highest frequency of the grid in
      GHz
    """
    name = None
    omega_fixed = None
    beta_varying = None
    beta_fixed = None
    delta = 0.0
    calibration = None
    freq_range = (5.5, 8.0)

    def gap_calibration(self):
        return GapCalibration(*self.calibration)

    def center_gap(self):
        """Returns the gap at which the varying mode crosses the fixed one.

        :returns: gap in mm
        :rtype: float
        """
        return gap_of_omega(self.gap_calibration(), self.omega_fixed)

    def base_model(self, alpha):
        """Returns the model at the crossing.

        :param alpha: intrinsic damping of both modes in GHz
        :type alpha: tuple[float, float]

        :rtype: CouplingModel
        """
        alpha_1, alpha_2 = alpha
        return CouplingModel.two_mode(self.omega_fixed, self.omega_fixed, self.beta_varying, self.beta_fixed,
                                      self.delta, alpha_1, alpha_2)

    def sweep_spec(self, alpha=(0.01, 0.01), gap_count=57, freq_count=2001):
        """Returns the sweep over the whole calibrated gap range.

        :param alpha: intrinsic damping of both modes in GHz
        :param int gap_count: number of gap samples
        :param int freq_count: number of frequencies

        :type alpha: tuple[float, float]

        :rtype: SweepSpec

        :raises InvalidInputError: if `alpha` is not a pair or the counts are
          not positive
        """
        if len(alpha) != 2:
            raise InvalidInputError(f"need two intrinsic dampings, got {alpha!r}")
        if gap_count < 1 or freq_count < 1:
            raise InvalidInputError("sample counts must be positive")
        calibration = self.gap_calibration()
        gaps = np.linspace(calibration.g_min, calibration.g_max, gap_count)
        freqs = np.linspace(*self.freq_range, freq_count)
        return SweepSpec(self.base_model(alpha), 0, calibration, gaps, freqs, self.name)
