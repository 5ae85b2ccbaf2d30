import io
import numpy as np
import pytest
from ruamel.yaml import YAML
from modecoupler.model import SpectrumGrid
from modecoupler.spectrum_files import read_spectrum_csv, write_spectrum_csv, export_sweep, read_sweep_matrix
from modecoupler.sweep import SweepSpec, run_sweep, case1_preset
from modecoupler.utils import ParseError


def small_sweep():
    spec = case1_preset()
    spec = SweepSpec(spec.base_model, 0, spec.calibration, spec.gap_samples[::14], spec.freq_grid[::100], spec.name)
    return run_sweep(spec)


def test_spectrum_csv_is_lossless():
    rng = np.random.default_rng(10)
    grid = SpectrumGrid(np.sort(rng.uniform(5, 8, 50)), rng.normal(size=50) + 1j * rng.normal(size=50))
    text = write_spectrum_csv(grid)
    assert text.splitlines()[0] == "freq_ghz,re_s21,im_s21"
    assert read_spectrum_csv(text) == grid


def test_spectrum_csv_tolerates_blank_lines_and_spaces():
    grid = read_spectrum_csv("freq_ghz, re_s21, im_s21\n6.0,1,0\n\n6.5, 0.5 ,-0.5\n")
    assert grid.freqs.tolist() == [6.0, 6.5]
    assert grid.s21.tolist() == [1, 0.5 - 0.5j]


@pytest.mark.parametrize("text, line", [
    ("", 1),
    ("freq,re,im\n6.0,1,0\n", 1),
    ("freq_ghz,re_s21,im_s21\n6.0,1\n", 2),
    ("freq_ghz,re_s21,im_s21\n6.0,1,0\n6.0,1,0\n", 3),
    ("freq_ghz,re_s21,im_s21\n6.0,1,0\n7.0,x,0\n", 3),
    ("freq_ghz,re_s21,im_s21\n6.0,nan,0\n", 2),
])
def test_malformed_spectrum_csv(text, line):
    with pytest.raises(ParseError) as error:
        read_spectrum_csv(text)
    assert error.value.line == line


def test_sweep_export():
    result = small_sweep()
    files = export_sweep(result)
    gaps, freqs, magnitude = read_sweep_matrix(files["matrix"])
    np.testing.assert_array_equal(gaps, result.gaps)
    np.testing.assert_array_equal(freqs, result.freqs)
    np.testing.assert_array_equal(magnitude, result.magnitude)
    long = np.loadtxt(io.StringIO(files["long"]), delimiter=",", skiprows=1)
    assert files["long"].splitlines()[0] == "gap_mm,freq_ghz,magnitude,magnitude_db,phase_rad"
    assert long.shape == (len(result.gaps) * len(result.freqs), 5)
    np.testing.assert_array_equal(long[:len(result.freqs), 0], result.gaps[0])
    np.testing.assert_array_equal(long[:len(result.freqs), 2], result.magnitude[:, 0])
    np.testing.assert_allclose(long[:, 3], 20 * np.log10(long[:, 2]))
    metadata = YAML(typ="safe").load(files["metadata"])
    assert metadata["preset"] == "case1"
    assert (metadata["gaps"], metadata["freqs"]) == (len(result.gaps), len(result.freqs))
    assert metadata["alpha"] == [0.01, 0.01]
    assert metadata["model"]["modes"][0]["beta"] == 0.076
    assert metadata["sweep"]["calibration"]["omega_end"] == 7.4


@pytest.mark.parametrize("text, line", [
    ("", 1),
    ("gap,0.1\n6.0,1\n", 1),
    ("freq_ghz/gap_mm,0.1,0.2\n6.0,1\n", 2),
    ("freq_ghz/gap_mm,0.1\n6.0,1\n6.5,?\n", 3),
])
def test_malformed_sweep_matrix(text, line):
    with pytest.raises(ParseError) as error:
        read_sweep_matrix(text)
    assert error.value.line == line
