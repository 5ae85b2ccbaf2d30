import numpy as np
import pytest
from modecoupler.analysis import fw_residual, find_bic, at_zero_detuning, classify_regime, Regime, extract_features, \
    FeatureKind, dips, transparency_window, track_branches, eigenvalue_branches
from modecoupler.model import CouplingModel, ModeParams, SpectrumGrid, eigenvalues, s21_spectrum
from modecoupler.presets import load_preset
from modecoupler.sweep import SweepSpec, case1_preset, case2_preset
from modecoupler.utils import UnsupportedModelError, PreconditionError


def min_im(model):
    return min(abs(value.im) for value in eigenvalues(model))


def test_fw_condition_traps_one_mode():
    rng = np.random.default_rng(6)
    for __ in range(100):
        beta_1, beta_2 = rng.uniform(0.02, 0.04, 2)
        delta = rng.uniform(0.005, 0.015)
        omega_1 = 6.5 + delta * (beta_1 - beta_2) / np.sqrt(beta_1 * beta_2)
        model = CouplingModel.two_mode(omega_1, 6.5, beta_1, beta_2, delta)
        assert abs(fw_residual(model)) < 1e-15
        assert min_im(model) < 1e-10
        assert min_im(model.with_mode(0, omega=omega_1 + 1e-3)) > 1e-6


def test_fw_residual_rejects_unsupported_models():
    with pytest.raises(UnsupportedModelError):
        fw_residual(CouplingModel((ModeParams(6.5, 0.01),)))
    with pytest.raises(UnsupportedModelError):
        fw_residual(CouplingModel.two_mode(6.5, 6.6, 0.01, 0.02, 0.1 - 0.01j))


def test_case1_bound_state():
    points = find_bic(case1_preset())
    assert len(points) == 1
    point = points[0]
    assert point.omega_bic == pytest.approx(6.75, abs=1e-6)
    assert point.sweep_value == pytest.approx(0.85, abs=0.01)
    assert point.verified
    assert point.min_im == pytest.approx(0.01, abs=1e-9)


def test_case2_bound_state_is_detuned():
    points = find_bic(case2_preset())
    assert len(points) == 1
    point = points[0]
    assert point.sweep_value == pytest.approx(1.4176, abs=1e-3)
    assert abs(point.residual) <= 1e-12
    assert point.verified


def test_equal_radiative_dampings_trap_at_the_crossing():
    spec = case2_preset()
    model = CouplingModel.two_mode(6.65, 6.65, 0.02, 0.02, 0.12, 0.01, 0.01)
    point, = find_bic(SweepSpec(model, 0, spec.calibration, spec.gap_samples, spec.freq_grid))
    assert point.sweep_value == pytest.approx(0.1 + 2.1 * 0.95 / 1.8, abs=1e-9)
    assert point.omega_bic == pytest.approx(6.53, abs=1e-9)
    assert point.min_im == pytest.approx(0.01, abs=1e-9)
    assert point.verified


def test_bound_state_does_not_depend_on_sampling():
    coarse, = find_bic(load_preset("case2").sweep_spec(gap_count=57))
    fine, = find_bic(load_preset("case2").sweep_spec(gap_count=113))
    assert fine.sweep_value == pytest.approx(coarse.sweep_value, abs=1e-8)
    assert fine.omega_bic == pytest.approx(coarse.omega_bic, abs=1e-8)


def test_bound_state_detuning():
    point, = find_bic(case2_preset())
    model = case2_preset().model_at(point.sweep_value)
    assert model.omegas[0] - model.omegas[1] == pytest.approx(0.17934, abs=1e-5)


def test_bound_state_is_refined_by_bisection():
    spec = case1_preset()
    spec = SweepSpec(spec.base_model, 0, spec.calibration, [0.1, 0.83, 1.5], spec.freq_grid)
    point, = find_bic(spec)
    assert point.sweep_value == pytest.approx(0.85, abs=1e-9)
    assert abs(point.residual) <= 1e-12


def test_bound_state_without_bisection():
    spec = case1_preset()
    spec = SweepSpec(spec.base_model, 0, spec.calibration, [0.1, 0.83, 1.5], spec.freq_grid)
    point, = find_bic(spec, max_bisections=0)
    assert point.sweep_value == 0.83
    assert abs(point.residual) > 1e-12


def test_no_sign_change():
    spec = case1_preset()
    spec = SweepSpec(spec.base_model, 0, spec.calibration, [0.1, 0.3, 0.5], spec.freq_grid)
    assert find_bic(spec) == []


def test_find_bic_preconditions():
    spec = case1_preset()
    with pytest.raises(PreconditionError):
        find_bic(SweepSpec(spec.base_model, 0, spec.calibration, [0.5, 0.3, 0.6], spec.freq_grid))
    with pytest.raises(UnsupportedModelError):
        find_bic(SweepSpec(spec.base_model.with_coupling(0, 1, 0.01 - 0.001j), 0, spec.calibration, [0.5, 1.0],
                           spec.freq_grid))


def test_classify_case1_as_level_attraction():
    report = classify_regime(case1_preset().base_model)
    assert report.label == Regime.LEVEL_ATTRACTION
    assert report.gap_re == pytest.approx(0, abs=1e-12)
    assert report.gap_im == pytest.approx(0.124, abs=1e-9)


def test_classify_case2_as_level_repulsion():
    report = classify_regime(case2_preset().base_model)
    assert report.label == Regime.LEVEL_REPULSION
    assert report.gap_re == pytest.approx(0.239, rel=0.2)
    assert report.gap_im < report.gap_re


def test_classify_degenerate_and_preconditions():
    assert classify_regime(CouplingModel.two_mode(6.5, 6.5)).label == Regime.DEGENERATE
    detuned = CouplingModel.two_mode(6.5, 6.6, 0.01, 0.02, 0.05)
    with pytest.raises(PreconditionError):
        classify_regime(detuned)
    zero_detuning = at_zero_detuning(detuned)
    assert zero_detuning.omegas.tolist() == [6.6, 6.6]
    assert zero_detuning.direct_coupling[0, 1] == 0.05
    with pytest.raises(UnsupportedModelError):
        classify_regime(CouplingModel([ModeParams(6.5)] * 3))


def test_single_notch_features():
    model = CouplingModel((ModeParams(6.75, 0.048, 0.01),))
    features = extract_features(s21_spectrum(model, np.linspace(6.0, 7.5, 1501)))
    assert len(features) == 1
    dip, = features
    assert dip.kind == FeatureKind.DIP
    assert dip.freq == pytest.approx(6.75, abs=1e-6)
    assert dip.magnitude == pytest.approx(0.6552, abs=1e-3)
    assert dip.fwhm == pytest.approx(0.104, rel=0.02)
    assert dip.prominence == pytest.approx(0.343, abs=2e-3)


def test_too_few_samples():
    model = CouplingModel((ModeParams(6.75, 0.048, 0.01),))
    assert extract_features(s21_spectrum(model, [6.7, 6.75])) == []


def test_case1_dips_merge_at_the_crossing():
    spec = case1_preset()
    for gap, expected in ((0.1, 2), (0.85, 1), (1.5, 2)):
        spectrum = s21_spectrum(spec.model_at(gap), spec.freq_grid)
        assert len(dips(extract_features(spectrum))) == expected


def test_case1_central_dip_is_deepest():
    spec = case1_preset(alpha=(0.1, 0.1))

    def depth(gap):
        spectrum = s21_spectrum(spec.model_at(gap), spec.freq_grid)
        return 1 - min(feature.magnitude for feature in dips(extract_features(spectrum)))

    assert depth(0.85) > depth(0.1)
    assert depth(0.85) > depth(1.5)


def test_case1_central_dip_sits_at_the_fixed_mode():
    spec = case1_preset()
    spectrum = s21_spectrum(spec.model_at(spec.gap_samples[30]), spec.freq_grid)
    deepest = min(dips(extract_features(spectrum)), key=lambda feature: feature.magnitude)
    assert deepest.freq == pytest.approx(6.75, abs=spec.freq_grid[1] - spec.freq_grid[0])


def test_case2_columns_show_two_dips():
    spec = case2_preset()
    bound_state, = find_bic(spec)
    for gap in spec.gap_samples:
        # the quasi-dark dip only shows as a shoulder right next to the bound state
        if abs(gap - bound_state.sweep_value) < 0.1:
            continue
        spectrum = s21_spectrum(spec.model_at(gap), spec.freq_grid)
        assert len(dips(extract_features(spectrum, prominence=1e-6))) >= 2


def test_case2_center_has_two_dips_and_one_peak():
    spectrum = s21_spectrum(case2_preset().base_model, case2_preset().freq_grid)
    kinds = [feature.kind for feature in extract_features(spectrum)]
    assert kinds == [FeatureKind.DIP, FeatureKind.PEAK, FeatureKind.DIP]


def test_features_of_mirrored_spectrum():
    spectrum = s21_spectrum(case2_preset().base_model, np.linspace(6.2, 7.1, 901))
    mirrored = SpectrumGrid(13.3 - spectrum.freqs[::-1], spectrum.s21[::-1])
    features, mirrored_features = extract_features(spectrum), extract_features(mirrored)
    assert len(features) == len(mirrored_features) == 3
    for feature, mirrored_feature in zip(features, reversed(mirrored_features)):
        assert mirrored_feature.kind == feature.kind
        assert mirrored_feature.freq == pytest.approx(13.3 - feature.freq, abs=1e-9)
        assert mirrored_feature.magnitude == pytest.approx(feature.magnitude, abs=1e-9)
        assert mirrored_feature.fwhm == pytest.approx(feature.fwhm, abs=1e-9)
        assert mirrored_feature.prominence == pytest.approx(feature.prominence, abs=1e-12)


def test_classification_does_not_depend_on_mode_order():
    model = case2_preset().base_model
    swapped = CouplingModel(model.modes[::-1], model.direct_coupling)
    report, swapped_report = classify_regime(model), classify_regime(swapped)
    assert swapped_report.label == report.label
    assert swapped_report.gap_re == pytest.approx(report.gap_re, abs=1e-12)
    assert swapped_report.gap_im == pytest.approx(report.gap_im, abs=1e-12)


def test_linewidth_is_conserved_along_the_sweep():
    spec = case2_preset()
    total = -float(np.sum(spec.base_model.alphas) + np.sum(spec.base_model.betas))
    for branches in eigenvalue_branches(spec):
        assert np.sum(branches.imag) == pytest.approx(total, abs=1e-12)


def test_case2_transparency_window():
    spec = case2_preset()
    spectrum = s21_spectrum(spec.base_model, spec.freq_grid)
    window = transparency_window(spectrum)
    assert window is not None
    deepest = sorted(dips(extract_features(spectrum)), key=lambda feature: feature.magnitude)[:2]
    assert all(window.window_height > feature.magnitude for feature in deepest)
    assert window.dip_separation == pytest.approx(0.24, rel=0.1)


def test_no_transparency_window_for_single_dip():
    model = CouplingModel((ModeParams(6.75, 0.048, 0.01),))
    assert transparency_window(s21_spectrum(model, np.linspace(6.0, 7.5, 1501))) is None
    spec = case1_preset()
    assert transparency_window(s21_spectrum(spec.base_model, spec.freq_grid)) is None


def test_transparency_window_with_weak_intrinsic_damping():
    spec = case2_preset(alpha=(0.005, 0.005))
    window = transparency_window(s21_spectrum(spec.base_model, spec.freq_grid))
    assert window.dip_separation == pytest.approx(0.239, rel=0.1)


def test_track_branches():
    branches = track_branches([[1.0, 3.0 - 0.5j], [2.0 - 0.5j, 2.0], [1.0 - 0.5j, 3.0]])
    np.testing.assert_array_equal(branches[:, 0], [1, 2, 3])
    np.testing.assert_array_equal(branches[:, 1], [3 - 0.5j, 2 - 0.5j, 1 - 0.5j])


def test_eigenvalue_branches_follow_the_varying_mode():
    branches = eigenvalue_branches(case1_preset())
    assert branches.shape == (57, 2)
    steps = np.abs(np.diff(branches, axis=0))
    assert np.max(steps) < 0.1
    assert branches[0, 0].real == pytest.approx(6.0, abs=0.05)
    assert branches[-1, 0].real == pytest.approx(7.4, abs=0.05)
    assert branches[-1, 1].real == pytest.approx(6.75, abs=0.05)
