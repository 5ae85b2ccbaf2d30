"""The effective non-Hermitian model of N resonator modes that share one
transmission channel.  Mode j has the complex frequency ω_j − i(α_j + β_j),
where β_j is its radiative damping into the channel and α_j its intrinsic
damping.  Two modes couple directly via Δ_jk = J_jk + iΓ_jk and indirectly via
the channel, which contributes −i√(β_j β_k).  All frequencies and rates are
cyclic frequencies in GHz; there are no factors of 2π anywhere.

Time dependence is e^{−iωt}.  The transmission through the channel is

    S21(ω) = 1 − 2i vᵀ (ωI − H)⁻¹ v,   v_j = √β_j,

i.e. the ratio of outgoing to incoming travelling-wave amplitude.  Note that
with α = 0 and real Δ, |S21| = 1 identically; only intrinsic loss makes dips
visible.
"""

import dataclasses
from dataclasses import dataclass
import numpy as np
from . import roots
from .utils import InvalidModelError, UnsupportedModelError, InvalidInputError, SingularResponseError


max_modes = 8


@dataclass(frozen=True)
class ModeParams:
    """One resonator mode.

    :var float omega: resonance frequency in GHz
    :var float beta_ext: radiative damping into the shared channel in GHz
    :var float alpha_int: intrinsic (non-radiative) damping in GHz
    """
    omega: float
    beta_ext: float = 0.0
    alpha_int: float = 0.0

    def __post_init__(self):
        for name in ("omega", "beta_ext", "alpha_int"):
            try:
                value = float(getattr(self, name))
            except (TypeError, ValueError):
                raise InvalidModelError(f"{name} must be a number, got {getattr(self, name)!r}")
            if not np.isfinite(value):
                raise InvalidModelError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.omega <= 0:
            raise InvalidModelError(f"omega must be positive, got {self.omega!r}")
        if self.beta_ext < 0 or self.alpha_int < 0:
            raise InvalidModelError(f"damping rates must not be negative, got β={self.beta_ext!r}, "
                                    f"α={self.alpha_int!r}")


@dataclass(frozen=True, eq=False)
class CouplingModel:
    """N modes plus their direct coupling.  Instances are immutable; the
    coupling matrix is stored as a read-only array.

    :var tuple[ModeParams] modes: the modes, at least one
    :var numpy.ndarray direct_coupling: symmetric N×N complex matrix Δ in GHz
      with zero diagonal; ``None`` on construction means no direct coupling
    """
    modes: tuple
    direct_coupling: np.ndarray = None

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise InvalidModelError("a model needs at least one mode")
        if not all(isinstance(mode, ModeParams) for mode in modes):
            raise InvalidModelError("modes must be ModeParams instances")
        size = len(modes)
        if self.direct_coupling is None:
            coupling = np.zeros((size, size), dtype=complex)
        else:
            try:
                coupling = np.array(self.direct_coupling, dtype=complex)
            except (TypeError, ValueError):
                raise InvalidModelError("direct coupling must be a complex matrix")
        if coupling.shape != (size, size):
            raise InvalidModelError(f"direct coupling must be {size}×{size}, got shape {coupling.shape}")
        if not np.all(np.isfinite(coupling)):
            raise InvalidModelError("direct coupling must be finite")
        if np.any(np.diag(coupling) != 0):
            raise InvalidModelError("direct coupling must have a zero diagonal")
        if not np.array_equal(coupling, coupling.T):
            raise InvalidModelError("direct coupling must be symmetric")
        coupling.setflags(write=False)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "direct_coupling", coupling)

    @classmethod
    def two_mode(cls, omega_1, omega_2, beta_1=0.0, beta_2=0.0, delta=0.0, alpha_1=0.0, alpha_2=0.0):
        """Convenience constructor for the common two-mode case.

        :param float omega_1: frequency of mode 1 in GHz
        :param float omega_2: frequency of mode 2 in GHz
        :param float beta_1: radiative damping of mode 1 in GHz
        :param float beta_2: radiative damping of mode 2 in GHz
        :param complex delta: direct coupling Δ = J + iΓ in GHz
        :param float alpha_1: intrinsic damping of mode 1 in GHz
        :param float alpha_2: intrinsic damping of mode 2 in GHz

        :rtype: CouplingModel
        """
        return cls((ModeParams(omega_1, beta_1, alpha_1), ModeParams(omega_2, beta_2, alpha_2)),
                   [[0, delta], [delta, 0]])

    def __eq__(self, other):
        if not isinstance(other, CouplingModel):
            return NotImplemented
        return self.modes == other.modes and np.array_equal(self.direct_coupling, other.direct_coupling)

    __hash__ = None

    @property
    def size(self):
        return len(self.modes)

    @property
    def omegas(self):
        return np.array([mode.omega for mode in self.modes])

    @property
    def betas(self):
        return np.array([mode.beta_ext for mode in self.modes])

    @property
    def alphas(self):
        return np.array([mode.alpha_int for mode in self.modes])

    @property
    def channel_vector(self):
        """Returns v with v_j = √β_j.

        :rtype: numpy.ndarray
        """
        return np.sqrt(self.betas)

    def with_mode(self, index, **changes):
        """Returns a copy with one mode changed.

        :param int index: 0-based index of the mode
        :param changes: new field values of the `ModeParams`

        :rtype: CouplingModel
        """
        modes = list(self.modes)
        modes[index] = dataclasses.replace(modes[index], **changes)
        return CouplingModel(modes, self.direct_coupling)

    def with_coupling(self, j, k, value):
        """Returns a copy with Δ_jk = Δ_kj = `value`.

        :param int j: 0-based index of the first mode
        :param int k: 0-based index of the second mode
        :param complex value: new coupling in GHz

        :rtype: CouplingModel
        """
        if j == k:
            raise InvalidModelError("a mode cannot couple directly to itself")
        coupling = np.array(self.direct_coupling)
        coupling[j, k] = coupling[k, j] = value
        return CouplingModel(self.modes, coupling)

    def check_passive(self):
        """Makes sure that the direct coupling does not add gain, i.e. Im Δ_jk ≤
        0.  This is only demanded by the passivity checks, not by the model
        itself.

        :raises InvalidModelError: if some Im Δ_jk is positive
        """
        if np.any(self.direct_coupling.imag > 0):
            raise InvalidModelError("direct coupling with positive imaginary part is not passive")


@dataclass(frozen=True, order=True)
class ComplexFrequency:
    """Complex eigenfrequency in GHz.  The natural ordering (real part first,
    then imaginary part) is the branch ordering.

    :var float re: real eigenfrequency
    :var float im: signed half linewidth; negative means decaying
    """
    re: float
    im: float

    @classmethod
    def from_complex(cls, value):
        return cls(float(value.real), float(value.imag))

    def __complex__(self):
        return complex(self.re, self.im)


@dataclass(frozen=True, eq=False)
class SpectrumGrid:
    """Complex transmission sampled on a frequency grid.

    :var numpy.ndarray freqs: strictly increasing frequencies in GHz
    :var numpy.ndarray s21: complex transmission at these frequencies
    """
    freqs: np.ndarray
    s21: np.ndarray

    def __post_init__(self):
        freqs = np.array(self.freqs, dtype=float).reshape(-1)
        s21 = np.array(self.s21, dtype=complex).reshape(-1)
        if len(freqs) != len(s21):
            raise InvalidInputError(f"{len(freqs)} frequencies but {len(s21)} S21 values")
        if not np.all(np.isfinite(freqs)):
            raise InvalidInputError("frequencies must be finite")
        if np.any(np.diff(freqs) <= 0):
            raise InvalidInputError("frequencies must be strictly increasing")
        freqs.setflags(write=False)
        s21.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "s21", s21)

    def __len__(self):
        return len(self.freqs)

    def __eq__(self, other):
        if not isinstance(other, SpectrumGrid):
            return NotImplemented
        return np.array_equal(self.freqs, other.freqs) and np.array_equal(self.s21, other.s21)

    __hash__ = None

    @property
    def magnitude(self):
        return np.abs(self.s21)

    @property
    def phase(self):
        return np.angle(self.s21)


def build_effective_hamiltonian(model):
    """Returns the effective coupling matrix H with H_jj = ω_j − i(α_j + β_j)
    and H_jk = Δ_jk − i√(β_j β_k).  For N = 2 and α = 0 this is exactly the
    two-mode coupling matrix of the Heisenberg–Langevin equations.

    :param CouplingModel model: the model

    :returns: complex N×N matrix
    :rtype: numpy.ndarray

    :raises InvalidModelError: if the result is not finite
    """
    vector = model.channel_vector
    hamiltonian = model.direct_coupling - 1j * np.outer(vector, vector)
    np.fill_diagonal(hamiltonian, model.omegas - 1j * (model.alphas + model.betas))
    if not np.all(np.isfinite(hamiltonian)):
        raise InvalidModelError("effective Hamiltonian is not finite")
    return hamiltonian


def _closed_form_pair(hamiltonian):
    """Eigenvalues of a 2×2 matrix.  The discriminant is computed from the
    diagonal difference, not from trace and determinant, so nothing cancels
    when both frequencies are large and close.
    """
    (a, b), (c, d) = hamiltonian
    if b * c == 0:
        return np.array([a, d])
    mean = (a + d) / 2
    root = np.sqrt((a - d) ** 2 + 4 * b * c) / 2
    return np.array([mean + root, mean - root])


def eigenvalues(model, method="auto"):
    """Returns the complex eigenfrequencies of the model, sorted by real part,
    ties by imaginary part.

    :param CouplingModel model: the model
    :param str method: ``"auto"`` uses the closed form for N = 2 and the
      polynomial roots otherwise; ``"polynomial"`` always uses the polynomial
      roots

    :returns: N eigenfrequencies
    :rtype: list[ComplexFrequency]

    :raises UnsupportedModelError: for more than `max_modes` modes
    :raises NumericalFailure: if the root iteration did not converge
    """
    if model.size > max_modes:
        raise UnsupportedModelError(f"at most {max_modes} modes are supported, got {model.size}")
    hamiltonian = build_effective_hamiltonian(model)
    off_diagonal = hamiltonian - np.diag(np.diag(hamiltonian))
    if model.size == 1 or not np.any(off_diagonal):
        values = np.diag(hamiltonian)
    elif model.size == 2 and method == "auto":
        values = _closed_form_pair(hamiltonian)
    elif method in {"auto", "polynomial"}:
        values = roots.polynomial_eigenvalues(hamiltonian)
    else:
        raise ValueError(f"unknown method {method!r}")
    return sorted(ComplexFrequency.from_complex(value) for value in values)


CONDITION_LIMIT = 1e6
"""Condition number of ωI − H above which the direct solve hands over to the
rank-one update formula."""


def _adjugate(matrix):
    size = len(matrix)
    if size == 1:
        return np.ones((1, 1), dtype=complex)
    cofactors = np.empty_like(matrix)
    for j in range(size):
        for k in range(size):
            minor = np.delete(np.delete(matrix, j, axis=0), k, axis=1)
            cofactors[j, k] = (-1) ** (j + k) * np.linalg.det(minor)
    return cofactors.T


def _batched_projection(matrices, vector, regular):
    projection = np.full(len(matrices), np.nan, dtype=complex)
    if np.any(regular):
        count = np.count_nonzero(regular)
        solutions = np.linalg.solve(matrices[regular],
                                    np.broadcast_to(vector[:, np.newaxis], (count, len(vector), 1)))
        projection[regular] = solutions[..., 0] @ vector
    return projection


def _projected_resolvent(hamiltonian, vector, freqs):
    """Returns vᵀ(ωI − H)⁻¹v for every ω of `freqs` by a direct solve.  N ≤ 2
    is done explicitly, larger systems by a batched LU solve.  Frequencies at
    which ωI − H is singular or worse conditioned than `CONDITION_LIMIT` are
    reported by a boolean mask; their projections are unreliable.

    :returns: projections and ill-conditioning mask
    :rtype: numpy.ndarray, numpy.ndarray
    """
    size = len(hamiltonian)
    if size == 1:
        denominator = freqs - hamiltonian[0, 0]
        singular = denominator == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            return vector[0] ** 2 / denominator, singular
    if size == 2:
        a = freqs - hamiltonian[0, 0]
        d = freqs - hamiltonian[1, 1]
        b, c = -hamiltonian[0, 1], -hamiltonian[1, 0]
        determinant = a * d - b * c
        numerator = vector[0] ** 2 * d - vector[0] * vector[1] * (b + c) + vector[1] ** 2 * a
        singular = np.abs(determinant) * CONDITION_LIMIT <= np.abs(a * d) + np.abs(b * c)
        with np.errstate(divide="ignore", invalid="ignore"):
            return numerator / determinant, singular
    matrices = freqs[:, np.newaxis, np.newaxis] * np.eye(size) - hamiltonian
    with np.errstate(divide="ignore", invalid="ignore"):
        singular = ~(np.linalg.cond(matrices) < CONDITION_LIMIT)
    return _batched_projection(matrices, vector, ~singular), singular


def _sherman_morrison_projection(model, freqs):
    """Returns g/(1 + ig) with g = vᵀA⁻¹v and A = ωI − (diag(ω_j − iα_j) + Δ),
    which equals vᵀ(ωI − H)⁻¹v because H = diag(ω_j − iα_j) + Δ − i vvᵀ.  For
    Δ = 0, A is diagonal and g has a closed form.  Where A is singular and v
    couples to its null space, g is infinite and the projection is its limit
    −i.
    """
    vector = model.channel_vector
    base = np.diag(model.omegas - 1j * model.alphas) + model.direct_coupling
    if not np.any(model.direct_coupling):
        denominators = freqs[:, np.newaxis] - np.diag(base)
        coupled = vector ** 2 != 0
        poles = np.any((denominators == 0) & coupled, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.sum(np.where(coupled & (denominators != 0), vector ** 2 / denominators, 0), axis=1)
    else:
        matrices = freqs[:, np.newaxis, np.newaxis] * np.eye(model.size) - base
        poles = np.linalg.det(matrices) == 0
        g = _batched_projection(matrices, vector, ~poles)
        for index in np.flatnonzero(poles):
            # v orthogonal to the null space leaves the limit undetermined
            poles[index] = vector @ _adjugate(matrices[index]) @ vector != 0
    with np.errstate(divide="ignore", invalid="ignore"):
        projection = g / (1 + 1j * g)
    projection[poles] = -1j
    return projection, ~np.isfinite(projection)


def _transmission(model, freqs, method):
    freqs = np.asarray(freqs, dtype=float)
    if not np.any(model.betas):
        return np.ones(len(freqs), dtype=complex)
    if method == "direct":
        projection, singular = _projected_resolvent(build_effective_hamiltonian(model), model.channel_vector, freqs)
        singular |= ~np.isfinite(projection)
        if np.any(singular):
            # a dark mode at a real eigenvalue is a removable singularity of the response;
            # the update formula keeps a lossless response unitary next to it
            limits, __ = _sherman_morrison_projection(model, freqs[singular])
            projection[singular] = limits
    elif method == "sherman-morrison":
        projection, __ = _sherman_morrison_projection(model, freqs)
    else:
        raise ValueError(f"unknown method {method!r}")
    singular = ~np.isfinite(projection)
    if np.any(singular):
        raise SingularResponseError(float(freqs[np.argmax(singular)]))
    return 1 - 2j * projection


def s21(model, omega, method="direct"):
    """Returns the complex transmission S21(ω) = 1 − 2i vᵀ(ωI − H)⁻¹v.

    :param CouplingModel model: the model
    :param float omega: frequency in GHz
    :param str method: ``"direct"`` solves the linear system with H;
      ``"sherman-morrison"`` uses the rank-one update formula around the
      channel term

    :returns: S21 at `omega`
    :rtype: complex

    :raises InvalidInputError: if `omega` is not finite
    :raises SingularResponseError: if the response diverges, i.e. ωI − H is
      singular and the channel couples to the mode at ω; a dark mode at ω
      gives the finite limit
    """
    if not np.isfinite(omega):
        raise InvalidInputError(f"frequency must be finite, got {omega!r}")
    return complex(_transmission(model, np.array([omega], dtype=float), method)[0])


def s21_spectrum(model, freqs, method="direct"):
    """Evaluates `s21` on a frequency grid.

    :param CouplingModel model: the model
    :param freqs: strictly increasing frequencies in GHz
    :param str method: see `s21`

    :type freqs: numpy.ndarray or list[float]

    :returns: the transmission spectrum
    :rtype: SpectrumGrid

    :raises InvalidInputError: if the frequencies are not strictly increasing
    :raises SingularResponseError: if the response diverges at a grid frequency;
      it carries that frequency
    """
    freqs = np.array(freqs, dtype=float).reshape(-1)
    if not np.all(np.isfinite(freqs)) or np.any(np.diff(freqs) <= 0):
        raise InvalidInputError("frequencies must be finite and strictly increasing")
    return SpectrumGrid(freqs, _transmission(model, freqs, method))
