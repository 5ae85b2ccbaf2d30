"""User configuration and model files, both in YAML.

A model file looks like this::

  modes:
    - {omega: 6.65, beta: 0.0227, alpha: 0.01}
    - {omega: 6.65, beta: 0.0057, alpha: 0.01}
  coupling:
    - {modes: [1, 2], re: 0.12, im: 0}
  sweep:
    name: case2
    varying_mode: 1
    calibration: {g_min: 0.1, g_max: 2.2, omega_start: 5.7, omega_end: 7.5}
    gaps: {start: 0.1, stop: 2.2, count: 57}
    freqs: {start: 5.5, stop: 8.0, count: 2001}

Mode indices are 1-based.  ``gaps`` and ``freqs`` may also be plain lists.
"""

import io
from dataclasses import dataclass
from pathlib import Path
import numpy as np
from ruamel.yaml import YAML, YAMLError
from .model import CouplingModel, ModeParams
from .sweep import GapCalibration, SweepSpec
from .utils import ConfigurationError, ParseError


yaml = YAML()

configuration_path = Path.home()/".config/modecoupler/configuration.yaml"

default_configuration = {"default_alpha": [0.01, 0.01], "threads": 0, "seed": 0, "restarts": 3}


def _load_yaml(text):
    try:
        return yaml.load(text)
    except YAMLError as error:
        mark = getattr(error, "problem_mark", None)
        raise ParseError(f"invalid YAML: {getattr(error, 'problem', None) or error}",
                         None if mark is None else mark.line + 1)


def dump_yaml(data):
    """Returns the data as a YAML document.

    :param data: nested dicts and lists of numbers and strings
    :type data: dict[str, object]

    :rtype: str
    """
    output = io.StringIO()
    yaml.dump(data, output)
    return output.getvalue()


def _check_keys(mapping, allowed, where):
    if not isinstance(mapping, dict):
        raise ConfigurationError(f"{where} must be a mapping")
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ConfigurationError(f"unknown keys in {where}: {', '.join(sorted(map(str, unknown)))}")


def _number(mapping, key, where, default=None):
    value = mapping.get(key, default)
    if value is None:
        raise ConfigurationError(f"{where} lacks “{key}”")
    if isinstance(value, bool):
        raise ConfigurationError(f"{where}: “{key}” must be a number")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{where}: “{key}” must be a number, got {value!r}")


def _integer(mapping, key, where, default=None):
    value = _number(mapping, key, where, default)
    if value != int(value):
        raise ConfigurationError(f"{where}: “{key}” must be an integer, got {value!r}")
    return int(value)


def load_configuration(path=None):
    """Reads the user configuration.  A missing file means an empty
    configuration.  Missing keys are filled with their defaults.

    :param path: path to the configuration file; defaults to
      ``~/.config/modecoupler/configuration.yaml``
    :type path: pathlib.Path or NoneType

    :rtype: dict[str, object]

    :raises ConfigurationError: if the file contains unknown keys or invalid
      values
    """
    path = configuration_path if path is None else Path(path)
    try:
        data = _load_yaml(path.read_text()) or {}
    except FileNotFoundError:
        data = {}
    _check_keys(data, default_configuration, str(path))
    configuration = dict(default_configuration, **data)
    alpha = configuration["default_alpha"]
    if not isinstance(alpha, list) or len(alpha) != 2:
        raise ConfigurationError("“default_alpha” must be a list of two numbers")
    configuration["default_alpha"] = [_number({"alpha": value}, "alpha", "default_alpha") for value in alpha]
    if min(configuration["default_alpha"]) < 0:
        raise ConfigurationError("“default_alpha” must not be negative")
    for key in ("threads", "seed", "restarts"):
        configuration[key] = _integer(configuration, key, str(path))
        if configuration[key] < 0:
            raise ConfigurationError(f"“{key}” must not be negative")
    return configuration


@dataclass(frozen=True, eq=False)
class ModelConfig:
    """Contents of a model file.

    :var CouplingModel model: the model
    :var sweep: the sweep, if the file has a ``sweep`` section
    :vartype sweep: SweepSpec or NoneType
    """
    model: CouplingModel
    sweep: SweepSpec = None


def _grid(data, where, default):
    if data is None:
        data = default
    if isinstance(data, list):
        return np.array([_number({"value": value}, "value", where) for value in data])
    _check_keys(data, {"start", "stop", "count"}, where)
    count = _integer(data, "count", where)
    if count < 1:
        raise ConfigurationError(f"{where}: “count” must be positive")
    return np.linspace(_number(data, "start", where), _number(data, "stop", where), count)


def _grid_data(values):
    values = np.asarray(values, dtype=float)
    if len(values) > 1 and np.array_equal(values, np.linspace(values[0], values[-1], len(values))):
        return {"start": float(values[0]), "stop": float(values[-1]), "count": len(values)}
    return [float(value) for value in values]


def default_freq_grid(model, calibration, count=2001):
    """Returns a frequency grid that covers all mode frequencies and the
    calibrated range with a margin of 0.5 GHz.

    :param CouplingModel model: the model
    :param GapCalibration calibration: the calibration
    :param int count: number of frequencies

    :rtype: numpy.ndarray
    """
    frequencies = list(model.omegas) + [calibration.omega_start, calibration.omega_end]
    return np.linspace(min(frequencies) - 0.5, max(frequencies) + 0.5, count)


def _load_model(data):
    _check_keys(data, {"modes", "coupling", "sweep"}, "model file")
    modes_data = data.get("modes")
    if not isinstance(modes_data, list) or not modes_data:
        raise ConfigurationError("“modes” must be a non-empty list")
    modes = []
    for index, mode in enumerate(modes_data, 1):
        where = f"mode {index}"
        _check_keys(mode, {"omega", "beta", "alpha"}, where)
        modes.append(ModeParams(_number(mode, "omega", where), _number(mode, "beta", where, 0),
                                _number(mode, "alpha", where, 0)))
    coupling = np.zeros((len(modes), len(modes)), dtype=complex)
    for index, entry in enumerate(data.get("coupling") or [], 1):
        where = f"coupling {index}"
        _check_keys(entry, {"modes", "re", "im"}, where)
        pair = entry.get("modes")
        if not isinstance(pair, list) or len(pair) != 2 or \
           not all(isinstance(j, int) and 1 <= j <= len(modes) for j in pair) or pair[0] == pair[1]:
            raise ConfigurationError(f"{where}: “modes” must be two different mode numbers")
        j, k = pair[0] - 1, pair[1] - 1
        coupling[j, k] = coupling[k, j] = complex(_number(entry, "re", where, 0), _number(entry, "im", where, 0))
    return CouplingModel(modes, coupling)


def _load_sweep(data, model):
    _check_keys(data, {"name", "varying_mode", "calibration", "gaps", "freqs"}, "sweep")
    calibration_data = data.get("calibration")
    if calibration_data is None:
        raise ConfigurationError("sweep lacks “calibration”")
    _check_keys(calibration_data, {"g_min", "g_max", "omega_start", "omega_end"}, "calibration")
    calibration = GapCalibration(*(_number(calibration_data, key, "calibration")
                                   for key in ("g_min", "g_max", "omega_start", "omega_end")))
    varying_mode = _integer(data, "varying_mode", "sweep", 1)
    if not 1 <= varying_mode <= model.size:
        raise ConfigurationError(f"sweep: invalid varying mode {varying_mode}")
    gaps = _grid(data.get("gaps"), "gaps", {"start": calibration.g_min, "stop": calibration.g_max, "count": 57})
    if data.get("freqs") is None:
        freqs = default_freq_grid(model, calibration)
    else:
        freqs = _grid(data["freqs"], "freqs", None)
    return SweepSpec(model, varying_mode - 1, calibration, gaps, freqs, str(data.get("name", "custom")))


def load_model_config(text):
    """Reads a model file.

    :param str text: contents of the file

    :rtype: ModelConfig

    :raises ParseError: if the file is not valid YAML
    :raises ConfigurationError: if keys are unknown, missing, or have values of
      the wrong type
    :raises InvalidModelError: if the model violates its invariants
    """
    data = _load_yaml(text)
    if data is None:
        raise ConfigurationError("model file is empty")
    model = _load_model(data)
    sweep = _load_sweep(data["sweep"], model) if data.get("sweep") is not None else None
    return ModelConfig(model, sweep)


def model_to_data(model):
    """Returns the model as nested dicts and lists, in the layout of model
    files.

    :param CouplingModel model: the model

    :rtype: dict[str, object]
    """
    data = {"modes": [{"omega": mode.omega, "beta": mode.beta_ext, "alpha": mode.alpha_int}
                      for mode in model.modes]}
    coupling = []
    for j in range(model.size):
        for k in range(j + 1, model.size):
            value = model.direct_coupling[j, k]
            if value != 0:
                coupling.append({"modes": [j + 1, k + 1], "re": float(value.real), "im": float(value.imag)})
    if coupling:
        data["coupling"] = coupling
    return data


def sweep_to_data(spec):
    """Returns the sweep section of a model file.

    :param SweepSpec spec: the sweep

    :rtype: dict[str, object]
    """
    calibration = spec.calibration
    return {"name": spec.name, "varying_mode": spec.varying_mode_index + 1,
            "calibration": {"g_min": calibration.g_min, "g_max": calibration.g_max,
                            "omega_start": calibration.omega_start, "omega_end": calibration.omega_end},
            "gaps": _grid_data(spec.gap_samples), "freqs": _grid_data(spec.freq_grid)}


def dump_model_config(model, sweep=None):
    """Returns a model file.  Reading it with `load_model_config` yields the
    same model and sweep.

    :param CouplingModel model: the model
    :param sweep: the sweep; its base model is written instead of `model`
      if `model` is ``None``
    :type sweep: SweepSpec or NoneType

    :rtype: str
    """
    data = model_to_data(sweep.base_model if model is None else model)
    if sweep is not None:
        data["sweep"] = sweep_to_data(sweep)
    return dump_yaml(data)
