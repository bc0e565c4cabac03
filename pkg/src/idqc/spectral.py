"""Dense complex matrix helpers.

Everything downstream (plant construction, evolution, Lie closure) goes
through these few functions, so the numerical conventions live here:

* Kronecker products order the controlled system first and the accessor
  second.
* Propagators are built from a Hermitian eigendecomposition, never from a
  generic ``expm``; this keeps them unitary to machine precision and makes
  ``U(s) U(t) == U(s + t)`` hold to rounding.
* Eigenvalues come back ascending; inside a numerically degenerate cluster the
  eigenvectors are ordered by the position of their largest component and
  phase-fixed so that component is real and positive.
"""

import numpy as np

HERM_TOL = 1e-10
UNIT_TOL = 1e-12
DEGENERACY_TOL = 1e-9


class NotHermitianError(ValueError):
    """Raised when a matrix that must be Hermitian is not."""


class DimensionError(ValueError):
    """Raised on incompatible operand shapes."""


def as_matrix(a, name="matrix"):
    """Return ``a`` as a square complex ndarray, rejecting NaN/Inf."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def frobenius_norm(a):
    return float(np.linalg.norm(a))


def hermiticity_residual(a):
    """Return ``||A - A^dagger||_F``."""
    return frobenius_norm(a - a.conj().T)


def check_hermitian(a, tol=HERM_TOL, name="matrix"):
    """Validate and return ``a`` as a Hermitian complex matrix.

    The test is relative: ``||A - A^dagger||_F <= tol * max(1, ||A||_F)``.
    Nothing is symmetrized; a violation raises :class:`NotHermitianError`.
    """
    m = as_matrix(a, name)
    res = hermiticity_residual(m)
    if res > tol * max(1.0, frobenius_norm(m)):
        raise NotHermitianError(f"{name} is not Hermitian (||A - A^H||_F = {res:.3e})")
    return m


def unitarity_residual(u):
    """Return ``||U^dagger U - I||_F``."""
    u = np.asarray(u)
    return frobenius_norm(u.conj().T @ u - np.eye(u.shape[0]))


def is_unitary(u, tol=UNIT_TOL):
    return unitarity_residual(u) <= tol


def kron(a, b):
    """Kronecker product ``a (x) b`` (system factor first by convention)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def commutator(a, b):
    """Return ``AB - BA``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 2:
        raise DimensionError(f"commutator of shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def frobenius_inner(a, b):
    """Return ``tr(A^dagger B)``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"inner product of shapes {a.shape} and {b.shape}")
    return complex(np.vdot(a, b))


def dominant_index(v, tol=1e-12):
    """Index of the largest-magnitude entry; near-ties go to the lowest index."""
    mag = np.abs(v)
    return int(np.flatnonzero(mag >= mag.max() - tol)[0])


def fix_phase(v):
    """Rotate ``v`` so its dominant entry is real and positive."""
    v = np.asarray(v, dtype=complex)
    if not np.any(v):
        return v.copy()
    k = dominant_index(v)
    return v * (abs(v[k]) / v[k])


def degenerate_clusters(eigenvalues, scale, tol=DEGENERACY_TOL):
    """Group consecutive sorted eigenvalues whose gap is ``<= tol * scale``.

    Returns a list of index lists covering ``range(len(eigenvalues))``.
    """
    clusters = [[0]]
    for i in range(1, len(eigenvalues)):
        if eigenvalues[i] - eigenvalues[i - 1] <= tol * scale:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def eig_hermitian(h, tol=HERM_TOL):
    """Eigendecomposition of a Hermitian matrix with a reproducible basis.

    Parameters
    ----------
    h : array_like
        Hermitian matrix (checked to ``tol``).

    Returns
    -------
    eigenvalues : ndarray of float
        Ascending, except that members of a degenerate cluster are reordered
        together with their eigenvectors.
    eigenvectors : ndarray
        Unitary matrix whose columns are the eigenvectors, so that
        ``h @ V == V @ diag(eigenvalues)``.

    Raises
    ------
    numpy.linalg.LinAlgError
        If LAPACK fails to converge. This is deliberately not caught.
    """
    h = check_hermitian(h, tol)
    w, v = np.linalg.eigh(h)
    order = []
    for cluster in degenerate_clusters(w, frobenius_norm(h)):
        order.extend(sorted(cluster, key=lambda i: dominant_index(v[:, i])))
    w = w[order]
    v = v[:, order]
    for k in range(v.shape[1]):
        v[:, k] = fix_phase(v[:, k])
    return w, v


def propagator(h, t, tol=HERM_TOL):
    """Return ``exp(-i H t)`` via the spectral decomposition of ``H``."""
    t = float(t)
    if not np.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    w, v = eig_hermitian(h, tol)
    return spectral_propagator(w, v, t)


def spectral_propagator(eigenvalues, eigenvectors, t):
    """``V exp(-i diag(w) t) V^dagger`` for a precomputed decomposition."""
    return (eigenvectors * np.exp(-1j * eigenvalues * t)) @ eigenvectors.conj().T
