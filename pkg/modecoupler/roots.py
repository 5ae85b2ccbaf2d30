"""Eigenvalues of small complex matrices by way of their characteristic
polynomial.  The coefficients are computed with the Faddeev–LeVerrier
recursion, and all roots are found simultaneously with the Aberth–Ehrlich
iteration.  This is only sensible for tiny matrices (N ≤ 8).
"""

import numpy as np
from .utils import NumericalFailure


def characteristic_polynomial(matrix):
    """Returns the coefficients of det(λI − A) by the Faddeev–LeVerrier
    recursion.

    :param numpy.ndarray matrix: square complex matrix A

    :returns: coefficients, highest power first; the first one is always 1
    :rtype: numpy.ndarray
    """
    matrix = np.asarray(matrix, dtype=complex)
    size = len(matrix)
    identity = np.eye(size, dtype=complex)
    coefficients = [1 + 0j]
    auxiliary = np.zeros_like(matrix)
    for k in range(1, size + 1):
        auxiliary = matrix @ auxiliary + coefficients[-1] * identity
        coefficients.append(-np.trace(matrix @ auxiliary) / k)
    return np.array(coefficients)


def _rounding_floor(coefficients, z):
    """Level of |p(z)| below which Horner's scheme cannot resolve the value."""
    degree = len(coefficients) - 1
    return 2 * degree * np.finfo(float).eps * np.polyval(np.abs(coefficients), np.abs(z))


def _polish(function, slope, z, max_steps=8):
    """Newton iteration on the polynomial `function` with derivative `slope`.
    """
    for __ in range(max_steps):
        derivative = np.polyval(slope, z)
        if derivative == 0:
            break
        step = np.polyval(function, z) / derivative
        z -= step
        if abs(step) <= 2 * np.finfo(float).eps * abs(z):
            break
    return z


def merge_clusters(coefficients, roots, spread_factor=10):
    """Replaces clusters of roots that stem from one multiple root by one
    value.  The iteration resolves an m-fold root only to about the m-th root
    of the rounding level, scattering the m copies on a small circle.  The
    group mean is refined by Newton steps on the (m − 1)-th derivative, which
    has a simple root there.  A group of m nearest roots is a
    cluster if none lies farther from the group mean than `spread_factor`
    times (floor / |p⁽ᵐ⁾(mean)/m!|)^(1/m), the scatter radius of an m-fold
    root.

    :param coefficients: coefficients, highest power first, leading one 1
    :param numpy.ndarray roots: all roots of the polynomial
    :param float spread_factor: tolerance on the scatter radius

    :type coefficients: numpy.ndarray

    :returns: the roots with every cluster replaced by copies of the polished
      multiple root
    :rtype: numpy.ndarray
    """
    roots = np.array(roots, dtype=complex)
    degree = len(roots)
    merged = np.zeros(degree, dtype=bool)
    derivatives = [coefficients]
    for m in range(1, degree + 1):
        derivatives.append(np.polyder(derivatives[-1]) / m)
    for index in range(degree):
        if merged[index]:
            continue
        candidates = np.flatnonzero(~merged)
        candidates = candidates[np.argsort(np.abs(roots[candidates] - roots[index]), kind="stable")]
        for m in range(len(candidates), 1, -1):
            group = candidates[:m]
            mean = roots[group].mean()
            leading = abs(np.polyval(derivatives[m], mean))
            if leading == 0:
                continue
            radius = (_rounding_floor(coefficients, mean) / leading) ** (1 / m)
            if np.max(np.abs(roots[group] - mean)) <= spread_factor * radius:
                roots[group] = _polish(derivatives[m - 1], m * derivatives[m], mean)
                merged[group] = True
                break
    return roots


def aberth_roots(coefficients, tolerance=1e-13, max_iterations=200):
    """Finds all roots of a polynomial simultaneously with the Aberth–Ehrlich
    method.  The start values lie on a circle whose radius is the Fujiwara
    bound, slightly rotated so that no start value is real.

    :param coefficients: coefficients, highest power first
    :param float tolerance: iteration stops when every correction is smaller
      than this times max(|z|, start radius), or when |p(z)| has reached the
      rounding level; clusters of a multiple root are then merged by
      `merge_clusters`
    :param int max_iterations: maximal number of sweeps

    :type coefficients: numpy.ndarray or list[complex]

    :returns: the roots, in no particular order
    :rtype: numpy.ndarray

    :raises NumericalFailure: if the iteration did not converge
    """
    coefficients = np.asarray(coefficients, dtype=complex)
    degree = len(coefficients) - 1
    if degree < 1:
        return np.empty(0, dtype=complex)
    coefficients = coefficients / coefficients[0]
    if degree == 1:
        return np.array([-coefficients[1]])
    derivative = coefficients[:-1] * np.arange(degree, 0, -1)
    powers = np.arange(1, degree + 1)
    radius = 2 * np.max(np.abs(coefficients[1:]) ** (1 / powers))
    if radius == 0:
        return np.zeros(degree, dtype=complex)
    z = radius * np.exp(1j * (2 * np.pi * np.arange(degree) / degree + 0.4))
    for __ in range(max_iterations):
        value = np.polyval(coefficients, z)
        slope = np.polyval(derivative, z)
        differences = z[:, np.newaxis] - z[np.newaxis, :]
        np.fill_diagonal(differences, 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            inverse = np.where(differences == 0, 0, 1 / differences)
        np.fill_diagonal(inverse, 0)
        denominator = slope - value * inverse.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            corrections = np.where(denominator == 0, tolerance * radius * (1 + 1j), value / denominator)
        corrections[value == 0] = 0
        z = z - corrections
        # a root whose |p(z)| is at the rounding level of Horner's scheme is final
        small_step = np.abs(corrections) <= tolerance * np.maximum(np.abs(z), radius)
        if np.all(small_step | (np.abs(np.polyval(coefficients, z)) <= _rounding_floor(coefficients, z))):
            return merge_clusters(coefficients, z)
    raise NumericalFailure(f"Aberth iteration did not converge after {max_iterations} sweeps",
                           float(np.max(np.abs(np.polyval(coefficients, z)))))


def polynomial_eigenvalues(matrix, tolerance=1e-13, max_iterations=200):
    """Returns the eigenvalues of a small matrix as the roots of its
    characteristic polynomial.  The matrix is shifted by its mean diagonal
    value first, so that the polynomial coefficients scale with the spread of
    the spectrum rather than with its absolute position.

    :param numpy.ndarray matrix: square complex matrix
    :param float tolerance: see `aberth_roots`
    :param int max_iterations: see `aberth_roots`

    :returns: the eigenvalues, in no particular order
    :rtype: numpy.ndarray

    :raises NumericalFailure: if the root iteration did not converge
    """
    matrix = np.asarray(matrix, dtype=complex)
    shift = np.trace(matrix) / len(matrix)
    shifted = matrix - shift * np.eye(len(matrix))
    return aberth_roots(characteristic_polynomial(shifted), tolerance, max_iterations) + shift
