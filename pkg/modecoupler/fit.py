"""Least-squares fits of the coupled-mode model to measured spectra.

Parameters are addressed by name with 1-based mode indices: ``omega_1``,
``beta_2``, ``alpha_1``, ``re_delta_12``, ``im_delta_12``.  The simplex works
in coordinates normalised to the bounds, so that all parameters move on the
same scale.
"""

import enum, itertools, multiprocessing, re
from dataclasses import dataclass, field
import numpy as np
import scipy.optimize
from .model import CouplingModel, ModeParams, s21_spectrum
from .analysis import extract_features, dips
from .utils import InvalidInputError, InvalidInitialError, InvalidModelError, SingularResponseError, diagnostic


max_evaluations = 5000
"""Objective evaluations per simplex run at most."""

max_polish_runs = 5


class Loss(enum.Enum):
    COMPLEX_RESIDUAL = "complex"
    MAGNITUDE_RESIDUAL = "mag"


def parameter_names(n_modes):
    """Returns the names of all parameters of a model with `n_modes` modes.

    :param int n_modes: number of modes

    :rtype: list[str]
    """
    names = []
    for j in range(1, n_modes + 1):
        names.extend([f"omega_{j}", f"beta_{j}", f"alpha_{j}"])
    for j, k in itertools.combinations(range(1, n_modes + 1), 2):
        names.extend([f"re_delta_{j}{k}", f"im_delta_{j}{k}"])
    return names


parameter_pattern = re.compile(r"(omega|beta|alpha)_(\d)$|(re|im)_delta_(\d)(\d)$")


def model_parameters(model):
    """Returns all parameters of the model by name.

    :param CouplingModel model: the model

    :rtype: dict[str, float]
    """
    values = {}
    for j, mode in enumerate(model.modes, 1):
        values[f"omega_{j}"] = mode.omega
        values[f"beta_{j}"] = mode.beta_ext
        values[f"alpha_{j}"] = mode.alpha_int
    for j, k in itertools.combinations(range(model.size), 2):
        values[f"re_delta_{j + 1}{k + 1}"] = float(model.direct_coupling[j, k].real)
        values[f"im_delta_{j + 1}{k + 1}"] = float(model.direct_coupling[j, k].imag)
    return values


def apply_parameters(model, values):
    """Returns a copy of the model with some parameters replaced.

    :param CouplingModel model: the template
    :param dict[str, float] values: new parameter values by name

    :rtype: CouplingModel

    :raises InvalidModelError: if the new values violate the model invariants
    """
    modes = [dict(omega=mode.omega, beta_ext=mode.beta_ext, alpha_int=mode.alpha_int) for mode in model.modes]
    coupling = np.array(model.direct_coupling)
    field_names = {"omega": "omega", "beta": "beta_ext", "alpha": "alpha_int"}
    for name, value in values.items():
        match = parameter_pattern.match(name)
        if not match:
            raise InvalidInputError(f"unknown parameter {name!r}")
        if match.group(1):
            modes[int(match.group(2)) - 1][field_names[match.group(1)]] = value
        else:
            j, k = int(match.group(4)) - 1, int(match.group(5)) - 1
            if match.group(3) == "re":
                coupling[j, k] = coupling[k, j] = complex(value, coupling[j, k].imag)
            else:
                coupling[j, k] = coupling[k, j] = complex(coupling[j, k].real, value)
    return CouplingModel([ModeParams(**mode) for mode in modes], coupling)


def relative_bounds(model, names, fraction=0.2):
    """Returns bounds of ±`fraction` around the current parameter values.
    Damping rates are never negative; parameters which are zero get the
    interval [0, 0.5] (damping rates) or [−0.5, 0.5] (coupling) in GHz.

    :param CouplingModel model: the model
    :param names: parameter names
    :param float fraction: relative half width of the intervals

    :type names: iterable[str]

    :rtype: dict[str, tuple[float, float]]
    """
    values = model_parameters(model)
    bounds = {}
    for name in names:
        value = values[name]
        if value == 0:
            bounds[name] = (-0.5, 0.5) if "delta" in name else (0.0, 0.5)
        else:
            lower, upper = sorted((value * (1 - fraction), value * (1 + fraction)))
            if name.startswith(("beta", "alpha")):
                lower = max(lower, 0.0)
            bounds[name] = (lower, upper)
    return bounds


@dataclass(frozen=True, eq=False)
class FitProblem:
    """One spectrum to be fitted.

    :var SpectrumGrid observed: the measured spectrum; for
      `Loss.MAGNITUDE_RESIDUAL`, only its magnitude is used
    :var CouplingModel initial: start model; it also provides the values of
      all fixed parameters
    :var tuple[str] free: names of the free parameters
    :var bounds: closed interval for every free parameter; ``None`` means
      `relative_bounds` with 20 %
    :var Loss loss: the residual to minimise
    :var int seed: seed of the restart jitter
    :var int restarts: number of jittered restarts

    :vartype bounds: dict[str, tuple[float, float]] or NoneType
    """
    observed: object
    initial: CouplingModel
    free: tuple
    bounds: dict = None
    loss: Loss = Loss.COMPLEX_RESIDUAL
    seed: int = 0
    restarts: int = 3

    def __post_init__(self):
        free = tuple(self.free)
        if not free:
            raise InvalidInputError("at least one parameter must be free")
        known = parameter_names(self.initial.size)
        unknown = [name for name in free if name not in known]
        if unknown:
            raise InvalidInputError(f"unknown parameters {', '.join(unknown)}")
        if len(set(free)) != len(free):
            raise InvalidInputError("free parameters must be unique")
        if len(self.observed) == 0:
            raise InvalidInputError("cannot fit an empty spectrum")
        if self.restarts < 0:
            raise InvalidInputError("number of restarts must not be negative")
        bounds = relative_bounds(self.initial, free) if self.bounds is None else dict(self.bounds)
        values = model_parameters(self.initial)
        for name in free:
            try:
                lower, upper = map(float, bounds[name])
            except KeyError:
                raise InvalidInputError(f"no bounds for {name}")
            if not (np.isfinite(lower) and np.isfinite(upper)) or lower > upper:
                raise InvalidInputError(f"invalid bounds for {name}: [{lower!r}, {upper!r}]")
            if name.startswith(("beta", "alpha")) and lower < 0:
                raise InvalidInputError(f"lower bound of {name} must not be negative")
            if name.startswith("omega") and lower <= 0:
                raise InvalidInputError(f"lower bound of {name} must be positive")
            if not lower <= values[name] <= upper:
                raise InvalidInputError(f"initial {name} = {values[name]!r} lies outside of [{lower!r}, {upper!r}]")
            bounds[name] = (lower, upper)
        try:
            loss = Loss(self.loss)
        except ValueError:
            raise InvalidInputError(f"unknown loss {self.loss!r}")
        object.__setattr__(self, "free", free)
        object.__setattr__(self, "bounds", {name: bounds[name] for name in free})
        object.__setattr__(self, "loss", loss)


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of a fit.

    :var CouplingModel model: the fitted model
    :var float rms_residual: root mean square of the real residuals
    :var int iterations: simplex iterations of all runs
    :var int evaluations: objective evaluations of all runs
    :var bool converged: whether the last polishing run improved the objective
      by less than 1e−12 relative
    :var numpy.ndarray objective_history: objective after every improvement,
      starting with the initial objective
    """
    model: CouplingModel
    rms_residual: float
    iterations: int
    evaluations: int
    converged: bool
    objective_history: np.ndarray = field(repr=False)

    @property
    def parameters(self):
        return model_parameters(self.model)


def residuals(model, observed, loss):
    """Returns the real residual vector of a model against observed data.

    :param CouplingModel model: the model
    :param SpectrumGrid observed: the data
    :param Loss loss: the kind of residual

    :returns: two real residuals per frequency for `Loss.COMPLEX_RESIDUAL`,
      one for `Loss.MAGNITUDE_RESIDUAL`
    :rtype: numpy.ndarray
    """
    synthesized = s21_spectrum(model, observed.freqs).s21
    if loss == Loss.COMPLEX_RESIDUAL:
        difference = synthesized - observed.s21
        return np.concatenate((difference.real, difference.imag))
    return np.abs(synthesized) - np.abs(observed.s21)


def objective(model, observed, loss):
    """Returns the sum of squared residuals, or infinity if the model cannot be
    evaluated.

    :rtype: float
    """
    try:
        vector = residuals(model, observed, loss)
    except SingularResponseError:
        return np.inf
    value = float(vector @ vector)
    return value if np.isfinite(value) else np.inf


def initial_guess(spectrum, n_modes):
    """Derives start values for a fit from the dips of a spectrum.  The
    frequencies are taken from the `n_modes` deepest dips, and half of every
    dip’s FWHM is split evenly between α and β.  Two dips closer than ten times
    their mean width are taken as a hybridised pair, with Δ equal to half their
    separation.  Without enough dips, the modes are spread evenly over the
    grid with widths of 1 % of its span.

    :param SpectrumGrid spectrum: the spectrum
    :param int n_modes: number of modes, 1 or 2

    :rtype: CouplingModel

    :raises InvalidInputError: if the spectrum is empty or `n_modes` is not 1
      or 2
    """
    if n_modes not in (1, 2):
        raise InvalidInputError(f"initial guesses are available for one or two modes, not {n_modes}")
    if len(spectrum) == 0:
        raise InvalidInputError("cannot guess from an empty spectrum")
    freqs = spectrum.freqs
    span = freqs[-1] - freqs[0] or 0.01 * abs(freqs[0])
    default_width = 0.01 * span
    deepest = sorted(dips(extract_features(spectrum)), key=lambda feature: feature.magnitude)[:n_modes]
    delta = 0.0
    if len(deepest) < n_modes:
        omegas = [freqs[0] + span * (j + 1) / (n_modes + 1) for j in range(n_modes)]
        widths = [default_width] * n_modes
    else:
        deepest.sort(key=lambda feature: feature.freq)
        omegas = [feature.freq for feature in deepest]
        widths = [default_width if feature.fwhm is None else feature.fwhm for feature in deepest]
        if n_modes == 2:
            separation = omegas[1] - omegas[0]
            if separation < 10 * np.mean(widths):
                delta = separation / 2
    modes = [ModeParams(omega, width / 4, width / 4) for omega, width in zip(omegas, widths)]
    coupling = np.zeros((n_modes, n_modes))
    if n_modes == 2:
        coupling[0, 1] = coupling[1, 0] = delta
    return CouplingModel(modes, coupling)


class _Simplex:
    """Bounded Nelder–Mead in coordinates normalised to [0, 1], with restarts.
    It keeps track of the best point ever evaluated, so the result is never
    worse than the start point.
    """

    def __init__(self, function, names, bounds):
        self.function = function
        self.names = names
        self.lower = np.array([bounds[name][0] for name in names])
        self.span = np.array([bounds[name][1] - bounds[name][0] for name in names])
        self.evaluations = self.iterations = 0
        self.best_x = self.best_values = self.best_value = None
        self.history = []

    def values(self, x):
        return dict(zip(self.names, self.lower + x * self.span))

    def normalise(self, values):
        with np.errstate(divide="ignore", invalid="ignore"):
            x = (np.array([values[name] for name in self.names]) - self.lower) / self.span
        return np.clip(np.nan_to_num(x), 0, 1)

    def evaluate(self, values, x):
        self.evaluations += 1
        value = self.function(values)
        if self.best_value is None or value < self.best_value:
            self.best_x, self.best_values, self.best_value = x.copy(), values, value
            self.history.append(value)
        return value

    def __call__(self, x):
        x = np.clip(x, 0, 1)
        return self.evaluate(self.values(x), x)

    @staticmethod
    def initial_simplex(x, step=0.05):
        simplex = [x]
        for index in range(len(x)):
            vertex = x.copy()
            vertex[index] += step if vertex[index] + step <= 1 else -step
            simplex.append(vertex)
        return np.array(simplex)

    def run(self, x):
        result = scipy.optimize.minimize(
            self, x, method="Nelder-Mead", bounds=[(0, 1)] * len(x),
            options={"maxfev": max_evaluations, "xatol": 1e-10, "fatol": 1e-15,
                     "initial_simplex": self.initial_simplex(x), "adaptive": len(x) > 4})
        self.iterations += int(result.nit)

    def minimize(self, start, rng, restarts):
        """Minimises from `start`, followed by `restarts` runs from jittered
        copies of the best point and up to `max_polish_runs` runs from the best
        point itself.

        :param dict[str, float] start: start values of all parameters
        :param numpy.random.Generator rng: source of the jitter
        :param int restarts: number of jittered restarts

        :returns: whether the last polishing run improved by less than 1e−12
          relative
        :rtype: bool

        :raises InvalidInitialError: if the objective is not finite at `start`
        """
        if not np.isfinite(self.evaluate({name: start[name] for name in self.names}, self.normalise(start))):
            raise InvalidInitialError("objective is not finite at the initial parameters")
        self.run(self.best_x.copy())
        for restart in range(restarts):
            diagnostic(f"restart {restart + 1}: objective {self.best_value:.6e}")
            self.run(np.clip(self.best_x + rng.normal(0, 0.05, len(self.best_x)), 0, 1))
        for __ in range(max_polish_runs):
            previous = self.best_value
            self.run(self.best_x.copy())
            if previous - self.best_value <= 1e-12 * previous:
                return True
        return False


def _substituted_objective(template, observed, loss):
    def function(values):
        try:
            model = apply_parameters(template, values)
        except InvalidModelError:
            return np.inf
        return objective(model, observed, loss)
    return function


def _residual_count(problem):
    return len(problem.observed) * (2 if problem.loss == Loss.COMPLEX_RESIDUAL else 1)


def _rms(model, problem):
    return float(np.sqrt(objective(model, problem.observed, problem.loss) / _residual_count(problem)))


def fit_spectrum(problem):
    """Fits the free parameters of a model to one spectrum by a bounded
    Nelder–Mead simplex with jittered restarts.

    :param FitProblem problem: the fit problem

    :rtype: FitResult

    :raises InvalidInitialError: if the objective is not finite at the initial
      model
    """
    simplex = _Simplex(_substituted_objective(problem.initial, problem.observed, problem.loss),
                       problem.free, problem.bounds)
    converged = simplex.minimize(model_parameters(problem.initial), np.random.default_rng(problem.seed),
                                 problem.restarts)
    model = apply_parameters(problem.initial, simplex.best_values)
    diagnostic(f"fit: objective {simplex.best_value:.6e} after {simplex.evaluations} evaluations")
    return FitResult(model, _rms(model, problem), simplex.iterations, simplex.evaluations, converged,
                     np.array(simplex.history))


def _check_sweep_problems(problems, shared):
    if not problems:
        raise InvalidInputError("no fit problems given")
    size = problems[0].initial.size
    if any(problem.initial.size != size for problem in problems):
        raise InvalidInputError("all fit problems must have the same number of modes")
    for index, problem in enumerate(problems):
        missing = set(shared) - set(problem.free)
        if missing:
            raise InvalidInputError(f"shared parameters {', '.join(sorted(missing))} are not free in problem {index}")


def _shared_bounds(problems, shared):
    bounds = {}
    for name in shared:
        lower = max(problem.bounds[name][0] for problem in problems)
        upper = min(problem.bounds[name][1] for problem in problems)
        if lower > upper:
            raise InvalidInputError(f"bounds of shared parameter {name} do not overlap")
        bounds[name] = (lower, upper)
    return bounds


def _pooled_objective(models, problems):
    return sum(objective(model, problem.observed, problem.loss) for model, problem in zip(models, problems))


def _map(function, items, workers):
    if workers > 1 and len(items) > 1:
        with multiprocessing.Pool(min(workers, len(items))) as pool:
            return pool.map(function, items)
    return list(map(function, items))


def fit_sweep(problems, shared, workers=1, max_rounds=10):
    """Fits several spectra whose models share some parameters, e.g. the
    columns of a gap sweep, which share β and Δ.  Shared and per-problem
    parameters are fitted alternately until the pooled objective improves by
    less than 1e−9 relative.

    :param list[FitProblem] problems: the problems; all with the same number of
      modes
    :param shared: names of the shared parameters; each must be free in every
      problem
    :param int workers: number of worker processes for the per-problem fits
    :param int max_rounds: number of alternations at most

    :type shared: iterable[str]

    :returns: the per-problem results and the values of the shared parameters
    :rtype: list[FitResult], dict[str, float]

    :raises InvalidInputError: if the problems are inconsistent
    """
    problems = list(problems)
    shared = tuple(dict.fromkeys(shared))
    _check_sweep_problems(problems, shared)
    if not shared or len(problems) == 1:
        results = _map(fit_spectrum, problems, workers)
        return results, {name: model_parameters(results[0].model)[name] for name in shared}
    bounds = _shared_bounds(problems, shared)
    start = model_parameters(problems[0].initial)
    shared_values = {name: min(max(start[name], bounds[name][0]), bounds[name][1]) for name in shared}
    models = [apply_parameters(problem.initial, shared_values) for problem in problems]
    pooled = _pooled_objective(models, problems)
    local_free = [tuple(name for name in problem.free if name not in shared) for problem in problems]
    for round_ in range(max_rounds):
        def pooled_function(values, models=models):
            try:
                return _pooled_objective([apply_parameters(model, values) for model in models], problems)
            except InvalidModelError:
                return np.inf
        simplex = _Simplex(pooled_function, shared, bounds)
        simplex.minimize(shared_values, np.random.default_rng(problems[0].seed + round_), problems[0].restarts)
        shared_values = simplex.best_values
        models = [apply_parameters(model, shared_values) for model in models]
        indices = [index for index, names in enumerate(local_free) if names]
        local_problems = [FitProblem(problems[index].observed, models[index], local_free[index],
                                     {name: problems[index].bounds[name] for name in local_free[index]},
                                     problems[index].loss, problems[index].seed, problems[index].restarts)
                          for index in indices]
        local_results = dict(zip(indices, _map(fit_spectrum, local_problems, workers)))
        results = []
        for index, (model, problem) in enumerate(zip(models, problems)):
            if index in local_results:
                results.append(local_results[index])
                models[index] = local_results[index].model
            else:
                results.append(FitResult(model, _rms(model, problem), simplex.iterations, simplex.evaluations, True,
                                         np.array(simplex.history)))
        previous, pooled = pooled, _pooled_objective(models, problems)
        diagnostic(f"shared fit round {round_ + 1}: pooled objective {pooled:.6e}")
        if previous - pooled <= 1e-9 * previous:
            break
    return results, shared_values
