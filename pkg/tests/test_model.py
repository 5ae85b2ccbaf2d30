import numpy as np
import pytest
from modecoupler.model import ModeParams, CouplingModel, ComplexFrequency, SpectrumGrid, build_effective_hamiltonian, \
    eigenvalues, s21, s21_spectrum
from modecoupler.utils import InvalidModelError, UnsupportedModelError, InvalidInputError, SingularResponseError


def random_model(rng, size, alpha=True, complex_coupling=False):
    modes = [ModeParams(rng.uniform(5, 8), rng.uniform(0.01, 0.1), rng.uniform(0.001, 0.05) if alpha else 0)
             for __ in range(size)]
    coupling = np.triu(rng.uniform(-0.1, 0.1, (size, size)), 1).astype(complex)
    if complex_coupling:
        coupling += np.triu(-1j * rng.uniform(0, 0.02, (size, size)), 1)
    return CouplingModel(modes, coupling + coupling.T)


@pytest.mark.parametrize("arguments", [(0, 0.1, 0.1), (-1, 0.1, 0.1), (6, -0.1, 0), (6, 0, -0.1),
                                       (float("nan"), 0, 0), (float("inf"), 0, 0), ("x", 0, 0)])
def test_invalid_mode(arguments):
    with pytest.raises(InvalidModelError):
        ModeParams(*arguments)


def test_invalid_coupling():
    modes = [ModeParams(6), ModeParams(7)]
    with pytest.raises(InvalidModelError):
        CouplingModel(modes, [[0, 0.1], [0.2, 0]])
    with pytest.raises(InvalidModelError):
        CouplingModel(modes, [[0.1, 0], [0, 0]])
    with pytest.raises(InvalidModelError):
        CouplingModel(modes, [[0, np.nan], [np.nan, 0]])
    with pytest.raises(InvalidModelError):
        CouplingModel(modes, np.zeros((3, 3)))
    with pytest.raises(InvalidModelError):
        CouplingModel([])


def test_model_is_immutable():
    model = CouplingModel.two_mode(6.0, 6.5, delta=0.1)
    with pytest.raises(ValueError):
        model.direct_coupling[0, 1] = 1
    changed = model.with_mode(1, omega=7.0).with_coupling(0, 1, 0.2 - 0.01j)
    assert model.omegas.tolist() == [6.0, 6.5]
    assert changed.omegas.tolist() == [6.0, 7.0]
    assert changed.direct_coupling[1, 0] == 0.2 - 0.01j
    assert changed != model
    assert model == CouplingModel.two_mode(6.0, 6.5, delta=0.1)
    with pytest.raises(InvalidModelError):
        model.with_coupling(1, 1, 0.1)


def test_passivity():
    CouplingModel.two_mode(6.0, 6.5, delta=0.1 - 0.01j).check_passive()
    with pytest.raises(InvalidModelError):
        CouplingModel.two_mode(6.0, 6.5, delta=0.1 + 0.01j).check_passive()


def test_effective_hamiltonian():
    model = CouplingModel.two_mode(6.0, 6.5, 0.04, 0.01, 0.1, 0.002, 0.003)
    hamiltonian = build_effective_hamiltonian(model)
    assert hamiltonian[0, 0] == pytest.approx(6.0 - 0.042j, abs=1e-15)
    assert hamiltonian[1, 1] == pytest.approx(6.5 - 0.013j, abs=1e-15)
    assert hamiltonian[0, 1] == pytest.approx(0.1 - 0.02j, abs=1e-15)
    assert hamiltonian[1, 0] == hamiltonian[0, 1]


def test_channel_mediated_coupling():
    hamiltonian = build_effective_hamiltonian(CouplingModel.two_mode(6.75, 6.75, 0.076, 0.048))
    assert hamiltonian[0, 1] == pytest.approx(-0.060399j, abs=1e-6)
    model = CouplingModel((ModeParams(6.0, 0.01), ModeParams(6.5, 0.04), ModeParams(7.0, 0.09)))
    hamiltonian = build_effective_hamiltonian(model)
    assert hamiltonian[0, 1] == pytest.approx(-0.02j, abs=1e-15)
    assert hamiltonian[0, 2] == pytest.approx(-0.03j, abs=1e-15)
    assert hamiltonian[1, 2] == pytest.approx(-0.06j, abs=1e-15)


def test_eigenvalues_are_passive():
    rng = np.random.default_rng(7)
    for __ in range(200):
        model = random_model(rng, int(rng.integers(1, 5)))
        values = eigenvalues(model)
        assert max(value.im for value in values) <= 1e-12
        assert sum(value.im for value in values) == \
            pytest.approx(-float(np.sum(model.alphas) + np.sum(model.betas)), abs=1e-12)


@pytest.mark.parametrize("size", range(3, 9))
def test_degenerate_modes_stay_passive(size):
    values = eigenvalues(CouplingModel([ModeParams(6.75, 0.05)] * size))
    assert max(value.im for value in values) <= 1e-12
    assert sum(value.im for value in values) == pytest.approx(-0.05 * size, abs=1e-12)
    assert min(value.im for value in values) == pytest.approx(-0.05 * size, abs=1e-9)


def test_dark_and_bright_mode():
    dark, bright = sorted(eigenvalues(CouplingModel.two_mode(6.5, 6.5, 0.03, 0.03)), key=lambda value: -value.im)
    assert dark.re == pytest.approx(6.5, abs=1e-12)
    assert dark.im == pytest.approx(0, abs=1e-12)
    assert bright.re == pytest.approx(6.5, abs=1e-12)
    assert bright.im == pytest.approx(-0.06, abs=1e-12)


def test_case2_hybrid_modes_repel():
    lower, upper = eigenvalues(CouplingModel.two_mode(6.65, 6.65, 0.0227, 0.0057, 0.12, 0.01, 0.01))
    assert upper.re - lower.re == pytest.approx(0.2386, rel=5e-3)


def test_eigenvalue_laws():
    rng = np.random.default_rng(1)
    for __ in range(1000):
        model = random_model(rng, int(rng.integers(2, 5)))
        hamiltonian = build_effective_hamiltonian(model)
        values = np.array([complex(value) for value in eigenvalues(model)])
        assert abs(values.sum() - np.trace(hamiltonian)) <= 1e-12 * abs(np.trace(hamiltonian))
        determinant = np.linalg.det(hamiltonian)
        assert abs(values.prod() - determinant) <= 1e-10 * abs(determinant)


def test_closed_form_matches_polynomial_roots():
    rng = np.random.default_rng(2)
    for __ in range(200):
        model = random_model(rng, 2, complex_coupling=True)
        closed_form = [complex(value) for value in eigenvalues(model)]
        polynomial = np.array([complex(value) for value in eigenvalues(model, method="polynomial")])
        for value in closed_form:
            assert np.min(np.abs(polynomial - value)) < 1e-10


def test_eigenvalues_are_sorted():
    rng = np.random.default_rng(3)
    values = eigenvalues(random_model(rng, 5))
    assert values == sorted(values)
    assert all(isinstance(value, ComplexFrequency) for value in values)


def test_hermitian_coupling_splits_real_parts():
    lower, upper = eigenvalues(CouplingModel.two_mode(6.7, 6.7, delta=0.05))
    assert upper.re - lower.re == pytest.approx(0.1, abs=1e-12)
    assert lower.im == upper.im == 0


def test_uncoupled_modes():
    model = CouplingModel((ModeParams(7.0, 0, 0.01), ModeParams(6.0, 0, 0.02)))
    assert eigenvalues(model) == [ComplexFrequency(6.0, -0.02), ComplexFrequency(7.0, -0.01)]


def test_too_many_modes():
    with pytest.raises(UnsupportedModelError):
        eigenvalues(CouplingModel([ModeParams(6 + 0.1 * j, 0.01) for j in range(9)]))


def test_single_mode_notch():
    model = CouplingModel((ModeParams(6.75, 0.048, 0.01),))
    assert s21(model, 6.75) == pytest.approx(1 - 2 * 0.048 / 0.058, abs=1e-12)
    assert s21(model, 6.75) == pytest.approx(-0.6552, abs=1e-4)


def test_all_pass_identity():
    rng = np.random.default_rng(4)
    freqs = np.linspace(5, 8, 2001)
    for __ in range(100):
        model = random_model(rng, int(rng.integers(1, 5)), alpha=False)
        assert np.max(np.abs(s21_spectrum(model, freqs).magnitude - 1)) < 1e-9


def test_transmission_far_from_resonance():
    rng = np.random.default_rng(8)
    for __ in range(20):
        model = random_model(rng, 3, complex_coupling=True)
        distance = 1e3
        omega = float(np.mean(model.omegas)) + distance
        assert abs(s21(model, omega) - 1) < 10 * np.sum(model.betas) / distance


def test_sherman_morrison_matches_direct_solve():
    rng = np.random.default_rng(5)
    freqs = np.linspace(5, 8, 301)
    for size in (1, 2, 3, 4):
        for complex_coupling in (False, True):
            model = random_model(rng, size, complex_coupling=complex_coupling)
            np.testing.assert_allclose(s21_spectrum(model, freqs, "sherman-morrison").s21,
                                       s21_spectrum(model, freqs).s21, atol=1e-12)
    uncoupled = CouplingModel((ModeParams(6.0, 0.05, 0.01), ModeParams(6.5, 0.02, 0.01)))
    assert s21(uncoupled, 6.2, "sherman-morrison") == pytest.approx(s21(uncoupled, 6.2), abs=1e-12)


def test_spectrum_matches_pointwise_evaluation():
    model = CouplingModel.two_mode(6.75, 6.75, 0.076, 0.048, 0, 0.01, 0.01)
    spectrum = s21_spectrum(model, [6.75])
    assert len(spectrum) == 1
    assert spectrum.s21[0] == s21(model, 6.75)


def test_spectrum_edge_cases():
    model = CouplingModel.two_mode(6.0, 6.5, 0.04, 0.01, 0.1, 0.01, 0.01)
    assert len(s21_spectrum(model, [])) == 0
    with pytest.raises(InvalidInputError):
        s21_spectrum(model, [6.0, 6.0])
    with pytest.raises(InvalidInputError):
        s21_spectrum(model, [6.5, 6.0])
    with pytest.raises(InvalidInputError):
        s21(model, float("nan"))


def test_no_channel_coupling_means_full_transmission():
    model = CouplingModel.two_mode(6.0, 6.5, delta=0.1, alpha_1=0.01)
    np.testing.assert_array_equal(s21_spectrum(model, np.linspace(5, 8, 11)).s21, np.ones(11))


def test_singular_response():
    # gain Γ = 2β puts the bright mode on the real axis
    model = CouplingModel.two_mode(6.5, 6.5, 0.25, 0.25, 0.5j)
    for method in ("direct", "sherman-morrison"):
        with pytest.raises(SingularResponseError) as error:
            s21_spectrum(model, [6.0, 6.5, 7.0], method)
        assert error.value.omega == 6.5
        assert error.value.exit_code == 2


def test_dark_mode_is_a_removable_singularity():
    for model in (CouplingModel.two_mode(6.5, 6.5, 0.25, 0.25), CouplingModel([ModeParams(6.5, 0.1)] * 3)):
        for method in ("direct", "sherman-morrison"):
            spectrum = s21_spectrum(model, [6.0, 6.5, 7.0], method)
            assert spectrum.s21[1] == pytest.approx(-1, abs=1e-12)
            np.testing.assert_allclose(spectrum.magnitude, 1, atol=1e-12)


def test_lossless_response_next_to_a_dark_mode():
    model = CouplingModel.two_mode(6.75, np.nextafter(6.75, 7), 0.076, 0.048)
    freqs = [6.75 - 1e-15, 6.75, 6.75 + 2e-15, 6.75 + 1e-9, 6.75 + 1e-6]
    for method in ("direct", "sherman-morrison"):
        np.testing.assert_allclose(s21_spectrum(model, freqs, method).magnitude, 1, atol=1e-9)


def test_spectrum_grid_validation():
    with pytest.raises(InvalidInputError):
        SpectrumGrid([1.0, 2.0], [1.0])
    with pytest.raises(InvalidInputError):
        SpectrumGrid([1.0, np.inf], [1.0, 1.0])
    grid = SpectrumGrid([1.0, 2.0], [1j, -1])
    np.testing.assert_allclose(grid.magnitude, [1, 1])
    np.testing.assert_allclose(grid.phase, [np.pi / 2, np.pi])
    assert grid == SpectrumGrid([1.0, 2.0], [1j, -1])
