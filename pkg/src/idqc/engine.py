"""Simulation of prepare-then-interact control cycles.

A cycle prepares the accessor in eigenstate ``j`` (instantaneously, with no
back-action on the system), switches the coupling on for ``duration`` and then
optionally leaves the system to evolve freely under ``H_S`` for
``post_free_time``. The system state is propagated with ``H_S + H_j`` only;
the accessor energy ``alpha_j`` contributes a pure phase which is kept in a
separate ledger (``Trajectory.phases``) instead of being multiplied into the
state.

:func:`evolve_joint` and :func:`check_factorization` provide the independent
route through the full system+accessor Hamiltonian.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spectral import (
    DimensionError,
    eig_hermitian,
    fix_phase,
    kron,
    propagator,
    spectral_propagator,
)

DEFAULT_SAMPLES = 64
NORM_TOL = 1e-10


@dataclass(frozen=True)
class ControlCycle:
    accessor_index: int
    duration: float
    post_free_time: float = 0.0

    def __post_init__(self):
        if int(self.accessor_index) != self.accessor_index or self.accessor_index < 0:
            raise ValueError(f"invalid accessor index {self.accessor_index!r}")
        for name in ("duration", "post_free_time"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "accessor_index", int(self.accessor_index))

    @property
    def total_time(self):
        return self.duration + self.post_free_time


@dataclass(frozen=True)
class Schedule:
    """An ordered, finite sequence of control cycles."""

    cycles: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cycles", tuple(self.cycles))

    @classmethod
    def from_tuples(cls, rows):
        """Build from ``(accessor_index, duration[, post_free_time])`` rows."""
        return cls(tuple(ControlCycle(*row) for row in rows))

    def to_tuples(self):
        return [(c.accessor_index, c.duration, c.post_free_time) for c in self.cycles]

    def __len__(self):
        return len(self.cycles)

    def __iter__(self):
        return iter(self.cycles)

    def __add__(self, other):
        return Schedule(self.cycles + tuple(other.cycles))

    @property
    def total_time(self):
        return sum(c.total_time for c in self.cycles)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled evolution of the system under a schedule.

    ``states[k]`` is the system state at ``times[k]``; ``phases[k]`` is the
    accumulated accessor-energy phase, i.e. the full joint evolution equals
    ``exp(1j * phases[k]) * states[k] (x) phi_j``. ``bloch`` is present only
    for qubit systems.
    """

    times: np.ndarray
    states: np.ndarray
    phases: np.ndarray
    cycle_index: np.ndarray
    bloch: Optional[np.ndarray] = None

    @property
    def final_state(self):
        return self.states[-1]

    @property
    def final_phase(self):
        return float(self.phases[-1])

    def __len__(self):
        return len(self.times)


def as_state(amplitudes, dim=None, tol=NORM_TOL):
    """Validate a pure state vector (unit norm within ``tol``)."""
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    if dim is not None and psi.shape[0] != dim:
        raise DimensionError(f"state has length {psi.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("state has non-finite amplitudes")
    if abs(np.linalg.norm(psi) - 1) > tol:
        raise ValueError(f"state is not normalized (norm {np.linalg.norm(psi):.15g})")
    return psi


def basis_state(dim, k=0):
    psi = np.zeros(dim, dtype=complex)
    psi[k] = 1
    return psi


def fidelity(a, b):
    """Global-phase invariant overlap ``|<a|b>|^2``."""
    return float(abs(np.vdot(a, b)) ** 2)


def _entry(plant, j):
    spectrum = plant.spectrum()
    if not 0 <= j < len(spectrum):
        raise IndexError(f"accessor index {j} out of range [0, {len(spectrum)})")
    return spectrum[j]


class _Propagators:
    """Per-plant cache of the eigendecompositions used by cycle propagation."""

    def __init__(self, plant):
        self.plant = plant
        self.free = eig_hermitian(plant.H_S, plant.herm_tol)
        self.coupled = {}

    def interaction(self, j):
        if j not in self.coupled:
            e = _entry(self.plant, j)
            self.coupled[j] = eig_hermitian(self.plant.H_S + e.H_j, self.plant.herm_tol)
        return self.coupled[j]


def _propagators(plant):
    cache = plant._cache
    if "propagators" not in cache:
        cache["propagators"] = _Propagators(plant)
    return cache["propagators"]


def cycle_unitary(plant, cycle):
    """System propagator of one cycle: free tail after the interaction segment."""
    props = _propagators(plant)
    u = spectral_propagator(*props.interaction(cycle.accessor_index), cycle.duration)
    if cycle.post_free_time:
        u = spectral_propagator(*props.free, cycle.post_free_time) @ u
    return u


def cycle_phase(plant, cycle):
    """Accessor-energy phase picked up during one cycle, ``-alpha_j * T``.

    The accessor stays in ``phi_j`` for the whole cycle, so the free tail
    contributes as well.
    """
    return -_entry(plant, cycle.accessor_index).alpha * cycle.total_time


def evolve_cycle(plant, state, cycle):
    """Prepare the accessor in ``cycle.accessor_index`` and evolve the system."""
    psi = np.asarray(state, dtype=complex)
    return cycle_unitary(plant, cycle) @ psi


def _sample_cycle(plant, psi, cycle, n):
    props = _propagators(plant)
    w_int, v_int = props.interaction(cycle.accessor_index)
    w_free, v_free = props.free
    at_switch = spectral_propagator(w_int, v_int, cycle.duration) @ psi
    taus = cycle.total_time * np.arange(1, n + 1) / n
    out = []
    for k, tau in enumerate(taus):
        if k == n - 1:
            out.append(cycle_unitary(plant, cycle) @ psi)
        elif tau <= cycle.duration:
            out.append(spectral_propagator(w_int, v_int, tau) @ psi)
        else:
            out.append(spectral_propagator(w_free, v_free, tau - cycle.duration) @ at_switch)
    return taus, out


def run_schedule(plant, initial, schedule, sample_points=DEFAULT_SAMPLES):
    """Run a schedule and sample the trajectory ``sample_points`` times per cycle.

    The first sample is the initial state at ``t = 0``; every cycle then
    contributes samples at uniformly spaced times ending exactly at the cycle
    boundary, so the final sample is the composed cycle propagators applied to
    ``initial``.
    """
    if sample_points < 1:
        raise ValueError("sample_points must be >= 1")
    psi = as_state(initial, plant.dim_S)
    times, states, phases, idx = [0.0], [psi], [0.0], [-1]
    t0, phase = 0.0, 0.0
    for c, cycle in enumerate(schedule):
        alpha = _entry(plant, cycle.accessor_index).alpha
        taus, samples = _sample_cycle(plant, psi, cycle, sample_points)
        times.extend(t0 + taus)
        states.extend(samples)
        phases.extend(phase - alpha * taus)
        idx.extend([c] * len(taus))
        psi = samples[-1]
        t0 += cycle.total_time
        phase += cycle_phase(plant, cycle)
    states = np.array(states)
    bloch = np.array([bloch_coordinates(s) for s in states]) if plant.dim_S == 2 else None
    return Trajectory(np.array(times), states, np.array(phases), np.array(idx), bloch)


def final_state(plant, initial, schedule):
    """Final system state of a schedule without sampling."""
    psi = as_state(initial, plant.dim_S)
    for cycle in schedule:
        psi = evolve_cycle(plant, psi, cycle)
    return psi


def evolve_joint(plant, system_state, accessor_index, t):
    """Evolve ``psi (x) phi_j`` under the full Hamiltonian for time ``t``."""
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    phi = _entry(plant, accessor_index).phi
    psi = np.asarray(system_state, dtype=complex)
    return propagator(plant.total_hamiltonian(), t, plant.herm_tol) @ kron(psi, phi)


def reduce_on_accessor(joint, phi, dim_S):
    """Project a joint vector onto accessor state ``phi``: ``(1 (x) phi^dagger) v``."""
    m = np.asarray(joint).reshape(dim_S, -1)
    return m @ phi.conj()


def check_factorization(joint, dim_S, dim_A):
    """Best product approximation of a joint system+accessor vector.

    Returns
    -------
    system, accessor : ndarray
        Dominant Schmidt vectors, each phase-fixed so its largest entry is
        real and positive.
    schmidt_residual : float
        ``1 - s_max^2``; zero for product states, 0.5 for a Bell pair.
    """
    m = np.asarray(joint, dtype=complex).reshape(dim_S, dim_A)
    u, s, vh = np.linalg.svd(m)
    return fix_phase(u[:, 0]), fix_phase(vh[0]), max(0.0, 1.0 - float(s[0]) ** 2)


def bloch_coordinates(state):
    """``(x, y, z)`` of a qubit state ``a0|0> + a1|1>``."""
    a = np.asarray(state, dtype=complex).ravel()
    if a.shape[0] != 2:
        raise DimensionError(f"Bloch coordinates need a qubit state, got length {a.shape[0]}")
    c = np.conj(a[0]) * a[1]
    return np.array([2 * c.real, 2 * c.imag, abs(a[0]) ** 2 - abs(a[1]) ** 2])


def equivalence_check(plant, states, times, spectrum=None):
    """Compare full joint evolution with conditional system evolution.

    For every accessor state, system state and time, ``psi (x) phi_j`` is
    evolved under the total Hamiltonian, reduced with
    :func:`check_factorization`, and compared with ``exp(-i (H_S + H_j) t) psi``.

    ``spectrum`` defaults to the plant's strict accessor spectrum; pass
    ``accessor_spectrum(plant, strict=False)`` to probe a plant that fails the
    non-demolition check.

    Returns
    -------
    worst_infidelity, worst_schmidt_residual : float
    """
    if spectrum is None:
        spectrum = plant.spectrum()
    w_tot, v_tot = eig_hermitian(plant.total_hamiltonian(), plant.herm_tol)
    worst_inf, worst_res = 0.0, 0.0
    for e in spectrum:
        w, v = eig_hermitian(plant.H_S + e.H_j, plant.herm_tol)
        for psi in states:
            start = kron(psi, e.phi)
            for t in times:
                joint = spectral_propagator(w_tot, v_tot, t) @ start
                sys_part, _, res = check_factorization(joint, plant.dim_S, plant.dim_A)
                eff = spectral_propagator(w, v, t) @ psi
                worst_inf = max(worst_inf, 1.0 - fidelity(sys_part, eff))
                worst_res = max(worst_res, res)
    return worst_inf, worst_res
