"""Schedule synthesis: steer an initial state to a target.

Two routes are provided:

* :func:`synthesize_qubit` for the two-qubit spin example: one interaction
  segment sets the polar angle, a free-evolution tail sets the relative phase.
* :func:`synthesize_general` for arbitrary plants: seeded coordinate search
  over the durations of a round-robin cycle template.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .controllability import is_fully_controllable
from .engine import ControlCycle, Schedule, as_state, basis_state, fidelity, final_state
from .model import spin_parameters
from .spectral import eig_hermitian, spectral_propagator

FIDELITY_GOAL = 1 - 1e-10
GRID_POINTS = 16


@dataclass(frozen=True)
class TargetSpec:
    """Target pure state ``cos(theta)|0> + exp(i phi) sin(theta)|1>`` or explicit amplitudes."""

    amplitudes: np.ndarray
    theta: Optional[float] = None
    phi: Optional[float] = None

    @classmethod
    def from_angles(cls, theta, phi):
        if not 0 <= theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {theta}")
        amps = np.array([math.cos(theta), np.exp(1j * phi) * math.sin(theta)])
        return cls(amps, float(theta), float(phi))

    @classmethod
    def from_amplitudes(cls, amplitudes):
        return cls(as_state(amplitudes))


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    schedule: Schedule
    achieved_fidelity: float
    evaluations: int
    seed: int
    controllable: Optional[bool] = None
    # (evaluation count, best fidelity) at every improvement
    trace: list = field(default_factory=list)


def _qubit_candidate(plant, entry, target, second_branch):
    """Two-segment cycle through accessor ``entry``."""
    w, v = eig_hermitian(plant.H_S + entry.H_j)
    omega = (w[-1] - w[0]) / 2
    psi0 = basis_state(2, 0)
    want = abs(target[0]) ** 2
    tight = dict(xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def pop0(t):
        return abs((spectral_propagator(w, v, t) @ psi0)[0]) ** 2

    half = math.pi / (2 * omega)
    if want >= 1 - 1e-15:
        t1 = 0.0
    elif want <= pop0(half):
        # polar angle beyond the reachable band; closest approach at a quarter period
        t1 = half
    elif second_branch:
        t1 = brentq(lambda t: pop0(t) - want, half, 2 * half, **tight)
    else:
        t1 = brentq(lambda t: pop0(t) - want, 0.0, half, **tight)

    state = spectral_propagator(w, v, t1) @ psi0
    t2 = 0.0
    # relative phase rotates at E0 - E1 under the diagonal free Hamiltonian
    rate = float(np.real(plant.H_S[0, 0] - plant.H_S[1, 1]))
    if rate != 0 and min(abs(state[0]), abs(state[1]), abs(target[0]), abs(target[1])) > 1e-12:
        have = np.angle(state[1] / state[0])
        goal = np.angle(target[1] / target[0])
        if rate > 0:
            t2 = ((goal - have) % (2 * math.pi)) / rate
        else:
            t2 = ((have - goal) % (2 * math.pi)) / -rate
    return ControlCycle(entry.index, t1, t2)


def synthesize_qubit(plant, target):
    """Closed-form schedule for the spin example starting from ``|0>``.

    The interaction segment length is the root of the simulated ``|<0|psi>|^2``
    curve inside the first half Rabi period, which reduces to
    ``theta / Omega`` for strong coupling. The free tail then rotates the
    relative phase onto the target's. Both accessor states are tried and the
    shorter schedule wins.

    Raises
    ------
    ValueError
        If the plant is not the spin example or the coupling vanishes.
    """
    _, _, g = spin_parameters(plant)
    if g == 0:
        raise ValueError("g = 0: no transverse drive, only theta in {0, pi} is reachable")
    if not isinstance(target, TargetSpec):
        target = TargetSpec.from_amplitudes(target)
    amps = target.amplitudes
    # beyond the equator the interaction segment continues past a quarter period
    second_branch = target.theta is not None and target.theta > math.pi / 2
    best = None
    for entry in plant.spectrum():
        cycle = _qubit_candidate(plant, entry, amps, second_branch)
        key = (cycle.total_time, entry.index)
        if best is None or key < best[0]:
            best = (key, cycle)
    cycle = best[1]
    if cycle.total_time == 0.0:
        schedule = Schedule()
    else:
        schedule = Schedule((cycle,))
    fid = fidelity(amps, final_state(plant, basis_state(2, 0), schedule))
    return SynthesisResult(schedule, fid, evaluations=len(plant.spectrum()), seed=0)


class _BudgetExhausted(Exception):
    pass


class _Objective:
    def __init__(self, plant, initial, target, template, budget):
        self.initial = initial
        self.target = target
        self.budget = budget
        self.evaluations = 0
        self.best = -1.0
        self.best_x = None
        self.trace = []
        props = []
        for j in template:
            e = plant.spectrum()[j]
            props.append(eig_hermitian(plant.H_S + e.H_j))
        self.props = props

    def __call__(self, x):
        if self.evaluations >= self.budget:
            raise _BudgetExhausted
        self.evaluations += 1
        psi = self.initial
        for (w, v), t in zip(self.props, x):
            if t:
                psi = spectral_propagator(w, v, t) @ psi
        f = fidelity(self.target, psi)
        if f > self.best:
            self.best = f
            self.best_x = np.array(x, dtype=float)
            self.trace.append((self.evaluations, f))
        return f


def _period_bounds(objective, dim):
    bounds = []
    for w, _ in objective.props:
        spread = w[-1] - w[0]
        bounds.append(dim * 2 * math.pi / spread if spread > 1e-12 else 1.0)
    return np.array(bounds)


def _line_search(objective, x, i, upper, current):
    """Maximize over coordinate ``i``: grid scan then bounded Brent refinement."""
    grid = np.linspace(0.0, upper, GRID_POINTS + 1)
    best_t, best_f = x[i], current
    trial = x.copy()
    vals = []
    for t in grid:
        trial[i] = t
        vals.append(objective(trial))
    k = int(np.argmax(vals))
    if vals[k] > best_f:
        best_t, best_f = grid[k], vals[k]
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, GRID_POINTS)]

    def neg(t):
        trial[i] = t
        return -objective(trial)

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    if -res.fun > best_f:
        best_t, best_f = float(res.x), -float(res.fun)
    x[i] = best_t
    return best_f


def synthesize_general(plant, initial, target, max_cycles=8, eval_budget=20000, seed=0):
    """Fidelity maximization over cycle durations for any plant.

    The cycle template visits accessor states round-robin
    (``0, 1, ..., dim_A - 1, 0, ...``) for ``max_cycles`` cycles; only the
    non-negative durations are optimized. Each restart draws a uniform random
    start inside one slow period per coordinate and runs coordinate sweeps
    until a sweep stops improving. The search stops at the evaluation budget
    or once the infidelity drops below ``1e-10``.

    Running out of budget is not an error: the best schedule seen is
    returned. The result is fully determined by ``seed``.
    """
    initial = as_state(initial, plant.dim_S)
    target = as_state(target, plant.dim_S)
    verdict = is_fully_controllable(plant).controllable
    template = [k % plant.dim_A for k in range(max_cycles)]
    obj = _Objective(plant, initial, target, template, eval_budget)
    rng = np.random.default_rng(seed)
    upper = _period_bounds(obj, plant.dim_S)

    try:
        obj(np.zeros(len(template)))
        while obj.best < FIDELITY_GOAL:
            x = rng.uniform(0.0, upper)
            f = obj(x)
            while True:
                before = f
                for i in range(len(template)):
                    f = _line_search(obj, x, i, upper[i], f)
                if f - before <= 1e-13 or obj.best >= FIDELITY_GOAL:
                    break
    except _BudgetExhausted:
        pass

    cycles = [ControlCycle(j, t) for j, t in zip(template, obj.best_x) if t > 0]
    schedule = Schedule(tuple(cycles))
    fid = fidelity(target, final_state(plant, initial, schedule))
    return SynthesisResult(schedule, fid, obj.evaluations, seed, verdict, obj.trace)
