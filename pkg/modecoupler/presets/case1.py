"""Dissipatively coupled configuration.  The two resonators do not couple
directly (Δ = 0); they only couple through the line.  At the crossing, one
hybrid mode becomes dark, and the two dips merge into a single deep one.

Example model file::

  modes:
    - {omega: 6.75, beta: 0.076, alpha: 0.01}
    - {omega: 6.75, beta: 0.048, alpha: 0.01}
  sweep:
    name: case1
    varying_mode: 1
    calibration: {g_min: 0.1, g_max: 1.5, omega_start: 6.0, omega_end: 7.4}
"""

from .utils.case import CasePreset


class Preset(CasePreset):
    name = "case1"
    omega_fixed = 6.75
    beta_varying = 0.076
    beta_fixed = 0.048
    delta = 0.0
    calibration = (0.1, 1.5, 6.0, 7.4)
