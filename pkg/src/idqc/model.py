"""The controlled plant: system, accessor and their non-demolition coupling.

A plant is the triple ``(H_S, H_A, H_I)`` acting on ``C^dim_S (x) C^dim_A``.
When ``[1 (x) H_A, H_I] = 0`` every accessor eigenstate ``phi_j`` (energy
``alpha_j``) turns the coupling into a system-only operator

    H_j = (1 (x) phi_j^dagger) H_I (1 (x) phi_j),

and preparing the accessor in ``phi_j`` makes the system evolve under
``H_S + H_j``. This module builds and validates plants and extracts those
conditional Hamiltonians.
"""

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    HERM_TOL,
    DEGENERACY_TOL,
    DimensionError,
    check_hermitian,
    commutator,
    degenerate_clusters,
    eig_hermitian,
    frobenius_norm,
    kron,
)

ND_TOL = 1e-9

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class NonDemolitionError(ValueError):
    """The coupling does not commute with the accessor Hamiltonian."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class BlockInconsistency(ValueError):
    """``H_I`` is not block diagonal in any accessor eigenbasis."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ControlPlant:
    """Immutable ``(H_S, H_A, H_I)`` triple with validation thresholds.

    Hermiticity and dimensional consistency are enforced on construction.
    The non-demolition condition is *not*, so that an offending plant can
    still be inspected with :func:`validate_nondemolition`.
    """

    H_S: np.ndarray
    H_A: np.ndarray
    H_I: np.ndarray
    herm_tol: float = HERM_TOL
    nd_tol: float = ND_TOL
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("H_S", "H_A", "H_I"):
            m = check_hermitian(getattr(self, name), self.herm_tol, name)
            object.__setattr__(self, name, _frozen(m))
        n = self.H_S.shape[0] * self.H_A.shape[0]
        if self.H_I.shape[0] != n:
            raise DimensionError(
                f"H_I has dimension {self.H_I.shape[0]}, expected dim_S*dim_A = {n}"
            )

    @property
    def dim_S(self):
        return self.H_S.shape[0]

    @property
    def dim_A(self):
        return self.H_A.shape[0]

    def total_hamiltonian(self):
        """``H_S (x) 1 + 1 (x) H_A + H_I`` on the joint space."""
        return (
            kron(self.H_S, np.eye(self.dim_A))
            + kron(np.eye(self.dim_S), self.H_A)
            + self.H_I
        )

    def spectrum(self):
        """Cached :func:`accessor_spectrum` of this plant."""
        if "spectrum" not in self._cache:
            self._cache["spectrum"] = accessor_spectrum(self)
        return self._cache["spectrum"]


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    residual: float
    threshold: float


@dataclass(frozen=True, eq=False)
class AccessorEigenstate:
    """One accessor eigenstate and the system operator it induces."""

    index: int
    alpha: float
    phi: np.ndarray
    H_j: np.ndarray

    @property
    def projector(self):
        return np.outer(self.phi, self.phi.conj())


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonian:
    """``H_S + H_j - alpha_j`` for accessor state ``j``."""

    j: int
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class SimplifiedGenerator:
    """A conditional Hamiltonian of the form ``lam * X``."""

    X: np.ndarray
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "X", _frozen(check_hermitian(self.X, name="X")))
        object.__setattr__(self, "lam", float(self.lam))


def nondemolition_residual(plant):
    """``||[1 (x) H_A, H_I]||_F``."""
    lifted = kron(np.eye(plant.dim_S), plant.H_A)
    return frobenius_norm(commutator(lifted, plant.H_I))


def validate_nondemolition(plant):
    """Check that the coupling commutes with the accessor Hamiltonian.

    The threshold is ``nd_tol * max(1, ||H_A||_F ||H_I||_F)``.
    """
    residual = nondemolition_residual(plant)
    threshold = plant.nd_tol * max(1.0, frobenius_norm(plant.H_A) * frobenius_norm(plant.H_I))
    return ValidationReport(residual <= threshold, residual, threshold)


def _conditional_block(H_I, phi, dim_S):
    dim_A = phi.shape[0]
    t = H_I.reshape(dim_S, dim_A, dim_S, dim_A)
    block = np.einsum("a,satb,b->st", phi.conj(), t, phi)
    return (block + block.conj().T) / 2


def _block_residual(plant, phi, H_j):
    P = np.outer(phi, phi.conj())
    lhs = plant.H_I @ kron(np.eye(plant.dim_S), P)
    return frobenius_norm(lhs - kron(H_j, P))


def _split_degenerate(H_I, basis, dim_S):
    """Rotate a degenerate accessor eigenspace so ``H_I`` becomes block diagonal.

    ``basis`` spans the eigenspace (columns). The compressed coupling is
    ``sum_{st} |s><t| (x) A_st`` with ``A_st`` acting on the eigenspace; a
    block structure exists iff the ``A_st`` share an eigenbasis, which is then
    found by diagonalizing a fixed generic Hermitian combination of them.
    """
    dim_A = basis.shape[0]
    t = H_I.reshape(dim_S, dim_A, dim_S, dim_A)
    # A[s, t] is the k x k operator on the eigenspace
    A = np.einsum("ai,satb,bj->stij", basis.conj(), t, basis)
    rng = np.random.default_rng(20240611)
    c = rng.normal(size=(dim_S, dim_S)) + 1j * rng.normal(size=(dim_S, dim_S))
    mix = np.einsum("st,stij->ij", c, A)
    _, w = eig_hermitian((mix + mix.conj().T) / 2)
    return basis @ w


def accessor_spectrum(plant, strict=True):
    """Accessor eigenstates with their energies and conditional Hamiltonians.

    Parameters
    ----------
    plant : ControlPlant
    strict : bool
        When true (the default) the non-demolition condition and the block
        consistency of every entry are enforced. ``strict=False`` skips both
        checks; it exists for diagnosing deliberately broken plants.

    Returns
    -------
    list of AccessorEigenstate
        ``dim_A`` entries in ascending ``alpha`` order. Inside a degenerate
        accessor level the basis is chosen to make ``H_I`` block diagonal.

    Raises
    ------
    NonDemolitionError
        ``[1 (x) H_A, H_I]`` exceeds the plant's threshold.
    BlockInconsistency
        No basis of a degenerate accessor level diagonalizes ``H_I``.
    """
    if strict:
        report = validate_nondemolition(plant)
        if not report.passed:
            raise NonDemolitionError(
                f"[1 (x) H_A, H_I] has norm {report.residual:.3e} > {report.threshold:.3e}",
                report.residual,
            )
    alphas, vecs = eig_hermitian(plant.H_A, plant.herm_tol)
    scale = frobenius_norm(plant.H_A)
    block_tol = plant.nd_tol * max(1.0, frobenius_norm(plant.H_I))
    out = []
    for cluster in degenerate_clusters(alphas, scale, DEGENERACY_TOL):
        basis = vecs[:, cluster]
        if len(cluster) > 1:
            basis = _split_degenerate(plant.H_I, basis, plant.dim_S)
        for col in range(basis.shape[1]):
            phi = basis[:, col]
            phi = phi / np.linalg.norm(phi)
            alpha = float(np.real(np.vdot(phi, plant.H_A @ phi)))
            H_j = _conditional_block(plant.H_I, phi, plant.dim_S)
            if strict:
                res = _block_residual(plant, phi, H_j)
                if res > block_tol:
                    raise BlockInconsistency(
                        f"H_I is not block diagonal at accessor state {len(out)} "
                        f"(residual {res:.3e})",
                        res,
                    )
            phi.setflags(write=False)
            H_j.setflags(write=False)
            out.append(AccessorEigenstate(len(out), alpha, phi, H_j))
    return out


def effective_hamiltonian(plant, j):
    """``H_S + H_j - alpha_j 1`` for accessor state ``j``."""
    spectrum = plant.spectrum()
    if not 0 <= j < len(spectrum):
        raise IndexError(f"accessor index {j} out of range [0, {len(spectrum)})")
    e = spectrum[j]
    matrix = plant.H_S + e.H_j - e.alpha * np.eye(plant.dim_S)
    return EffectiveHamiltonian(j, matrix)


def build_spin_example(omega_S, omega_A, g):
    """Qubit system coupled to a qubit accessor through ``g sx (x) sz``."""
    for v in (omega_S, omega_A, g):
        if not np.isfinite(v):
            raise ValueError("spin example parameters must be finite")
    return ControlPlant(
        H_S=omega_S * PAULI_Z,
        H_A=omega_A * PAULI_Z,
        H_I=g * kron(PAULI_X, PAULI_Z),
    )


def spin_parameters(plant, tol=1e-12):
    """Recover ``(omega_S, omega_A, g)`` from a spin-example plant.

    Raises ``ValueError`` if the plant does not have that structure.
    """
    if plant.dim_S != 2 or plant.dim_A != 2:
        raise ValueError("spin example requires a qubit system and a qubit accessor")
    omega_S = float(np.real(plant.H_S[0, 0]))
    omega_A = float(np.real(plant.H_A[0, 0]))
    g = float(np.real(plant.H_I[0, 2]))
    expected = build_spin_example(omega_S, omega_A, g)
    scale = max(1.0, abs(omega_S), abs(omega_A), abs(g))
    for name in ("H_S", "H_A", "H_I"):
        if frobenius_norm(getattr(plant, name) - getattr(expected, name)) > tol * scale:
            raise ValueError(f"plant is not a spin example ({name} differs)")
    return omega_S, omega_A, g


def assemble_plant(H_S, alphas, basis, blocks, **tolerances):
    """Build a plant from an accessor eigenbasis and per-state coupling blocks.

    ``H_A = sum_j alphas[j] phi_j phi_j^dagger`` and
    ``H_I = sum_j blocks[j] (x) phi_j phi_j^dagger`` where ``phi_j`` is column
    ``j`` of the unitary ``basis``. Such a plant is non-demolition by
    construction.
    """
    basis = np.asarray(basis, dtype=complex)
    projectors = [np.outer(basis[:, j], basis[:, j].conj()) for j in range(basis.shape[1])]
    H_A = sum(a * P for a, P in zip(alphas, projectors))
    H_I = sum(kron(B, P) for B, P in zip(blocks, projectors))
    return ControlPlant(H_S, (H_A + H_A.conj().T) / 2, (H_I + H_I.conj().T) / 2, **tolerances)


def build_simplified_model(H_S, generators):
    """Effective Hamiltonians ``H_S + lam_j X_j`` of the simplified model.

    Scalar offsets are dropped; they only contribute a global phase.
    """
    H_S = check_hermitian(H_S, name="H_S")
    out = []
    for j, gen in enumerate(generators):
        if gen.X.shape != H_S.shape:
            raise DimensionError(f"generator {j} has shape {gen.X.shape}, expected {H_S.shape}")
        out.append(EffectiveHamiltonian(j, H_S + gen.lam * gen.X))
    return out
