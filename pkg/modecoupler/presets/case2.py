"""Coherently coupled configuration.  The direct coupling Δ = 0.12 GHz
dominates, so the dips repel each other and leave a transparency window at the
crossing (g ≈ 1.2 mm).

Example model file::

  modes:
    - {omega: 6.65, beta: 0.0227, alpha: 0.01}
    - {omega: 6.65, beta: 0.0057, alpha: 0.01}
  coupling:
    - {modes: [1, 2], re: 0.12}
  sweep:
    name: case2
    varying_mode: 1
    calibration: {g_min: 0.1, g_max: 2.2, omega_start: 5.7, omega_end: 7.5}
"""

from .utils.case import CasePreset


class Preset(CasePreset):
    name = "case2"
    omega_fixed = 6.65
    beta_varying = 0.0227
    beta_fixed = 0.0057
    delta = 0.12
    calibration = (0.1, 2.2, 5.7, 7.5)
