"""Lie-algebraic controllability test for indirectly controlled systems.

The system is completely controllable when the skew-Hermitian operators
``i H_S`` and ``i H_j`` generate all of ``su(N)``. The closure is computed by
a commutator sweep with Gram-Schmidt rank decisions. Matrices are handled as
real vectors ``(Re A, Im A)`` so that the Euclidean dot product equals the
real Frobenius inner product ``Re tr(A^dagger B)``.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .engine import cycle_unitary
from .spectral import DimensionError, as_matrix, commutator, frobenius_norm

RANK_TOL = 1e-9
BORDERLINE_TOL = 1e-6


class LieRankWarning(UserWarning):
    """A bracket was admitted with a residual close to the rank tolerance."""


@dataclass(frozen=True, eq=False)
class LieBasis:
    """Orthonormal basis of a subalgebra of ``su(N)``."""

    dim_S: int
    basis: tuple
    borderline: int = 0

    @property
    def dimension(self):
        return len(self.basis)

    def _vectors(self):
        if not self.basis:
            return np.zeros((0, 2 * self.dim_S ** 2))
        return np.array([_realify(e) for e in self.basis])

    def residual(self, a):
        """Norm of the part of ``a`` orthogonal to the span."""
        v = _realify(a)
        q = self._vectors()
        return float(np.linalg.norm(v - q.T @ (q @ v)))

    def contains(self, a, tol=1e-10):
        return self.residual(a) <= tol * max(1.0, frobenius_norm(a))


@dataclass(frozen=True, eq=False)
class ControllabilityVerdict:
    controllable: bool
    generated_dim: int
    required_dim: int
    certificate: LieBasis


def _realify(a):
    a = np.asarray(a, dtype=complex)
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def _project_su(a):
    """Skew-Hermitian, traceless part of ``a``."""
    a = (a - a.conj().T) / 2
    n = a.shape[0]
    return a - np.trace(a) / n * np.eye(n)


class _Closure:
    def __init__(self, n, rank_tol):
        self.n = n
        self.rank_tol = rank_tol
        self.elements = []
        self.vectors = []
        self.borderline = 0

    @property
    def full(self):
        return len(self.elements) >= self.n ** 2 - 1

    def admit(self, candidate):
        c = _project_su(candidate)
        norm0 = frobenius_norm(c)
        if norm0 == 0.0:
            return False
        v = _realify(c) / norm0
        # two passes of modified Gram-Schmidt
        for _ in range(2):
            for q in self.vectors:
                v = v - (q @ v) * q
        r = float(np.linalg.norm(v))
        if r <= self.rank_tol:
            return False
        if r <= BORDERLINE_TOL:
            self.borderline += 1
            warnings.warn(
                f"Lie bracket admitted with relative residual {r:.2e}",
                LieRankWarning,
                stacklevel=3,
            )
        v = v / r
        self.vectors.append(v)
        half = self.n * self.n
        self.elements.append((v[:half] + 1j * v[half:]).reshape(self.n, self.n))
        return True


def generated_lie_algebra(generators, rank_tol=RANK_TOL):
    """Orthonormal basis of the Lie algebra generated by ``i G`` for each ``G``.

    Parameters
    ----------
    generators : sequence of array_like
        Hermitian matrices of a common dimension ``N``. Multiples of the
        identity only generate phases and are discarded.
    rank_tol : float
        Admission threshold on a candidate's residual after projection,
        relative to its norm before projection.

    Returns
    -------
    LieBasis
    """
    generators = [as_matrix(g, "generator") for g in generators]
    if not generators:
        raise ValueError("at least one generator is required")
    n = generators[0].shape[0]
    for g in generators:
        if g.shape != (n, n):
            raise DimensionError(f"generator of shape {g.shape}, expected {(n, n)}")

    closure = _Closure(n, rank_tol)
    for g in generators:
        if closure.full:
            break
        closure.admit(1j * g)
    k = 0
    while k < len(closure.elements) and not closure.full:
        for m in range(k):
            if closure.admit(commutator(closure.elements[m], closure.elements[k])):
                if closure.full:
                    break
        k += 1
    return LieBasis(n, tuple(closure.elements), closure.borderline)


def controllability_generators(plant):
    """``H_S`` followed by the conditional Hamiltonians of every accessor state."""
    return [plant.H_S] + [e.H_j for e in plant.spectrum()]


def is_fully_controllable(plant, rank_tol=RANK_TOL):
    """Rank test: do ``H_S`` and the ``H_j`` generate ``su(dim_S)``?"""
    basis = generated_lie_algebra(controllability_generators(plant), rank_tol)
    required = plant.dim_S ** 2 - 1
    return ControllabilityVerdict(basis.dimension == required, basis.dimension, required, basis)


def semigroup_element(plant, schedule):
    """Ordered product of the cycle propagators of ``schedule``.

    Accessor-energy offsets are omitted (global phase). Free tails are
    included so the result agrees with the engine's final state.
    """
    u = np.eye(plant.dim_S, dtype=complex)
    for cycle in schedule:
        u = cycle_unitary(plant, cycle) @ u
    return u
