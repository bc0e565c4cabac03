"""Scenario documents for the command line tools.

A scenario is a YAML (or JSON) mapping with exactly one of ``preset`` and
``explicit``::

    preset: {name: spin-example, omega_S: 1.0, omega_A: 2.0, g: 3.0}

    explicit:
      dims: [2, 2]
      H_S: [[1, 0], [0, 0], [0, 0], [-1, 0]]   # row-major (re, im) pairs
      H_A: ...
      H_I: ...

Optional keys: ``schedule`` (list of ``[accessor_index, dt, free_tail]``),
``target`` (``{theta, phi}`` or ``{amplitudes: [[re, im], ...]}``),
``initial`` (amplitude pairs), ``tolerances``, ``synthesis``
(``max_cycles``, ``eval_budget``) and ``seed``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from .engine import Schedule, as_state
from .model import ND_TOL, ControlPlant, build_spin_example
from .spectral import HERM_TOL
from .controllability import RANK_TOL

PRESET_NAMES = ("spin-example",)

DEFAULT_TOLERANCES = {
    "herm_tol": HERM_TOL,
    "nd_tol": ND_TOL,
    "rank_tol": RANK_TOL,
    "fidelity_threshold": 0.999,
    "validate_threshold": 1e-9,
}
DEFAULT_SYNTHESIS = {"max_cycles": 8, "eval_budget": 20000}
TOP_LEVEL_KEYS = {"preset", "explicit", "schedule", "target", "initial", "tolerances", "synthesis", "seed"}


class ScenarioError(ValueError):
    """Malformed scenario document; the message names the offending field."""


def _fail(path, msg):
    raise ScenarioError(f"{path}: {msg}")


def _number(value, path):
    if isinstance(value, str):
        # YAML 1.1 reads exponent literals without a dot (1e-9) as strings
        try:
            value = float(value)
        except ValueError:
            _fail(path, f"expected a number, got {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    if not np.isfinite(value):
        _fail(path, "must be finite")
    return float(value)


def _pairs(value, path, length=None):
    if not isinstance(value, list):
        _fail(path, "expected a list of [re, im] pairs")
    if length is not None and len(value) != length:
        _fail(path, f"expected {length} entries, got {len(value)}")
    out = np.empty(len(value), dtype=complex)
    for k, pair in enumerate(value):
        if not isinstance(pair, list) or len(pair) != 2:
            _fail(f"{path}[{k}]", "expected a [re, im] pair")
        out[k] = complex(_number(pair[0], f"{path}[{k}][0]"), _number(pair[1], f"{path}[{k}][1]"))
    return out


def _as_pairs(arr):
    return [[float(z.real), float(z.imag)] for z in np.asarray(arr, dtype=complex).ravel()]


@dataclass
class Scenario:
    preset: Optional[dict] = None
    explicit: Optional[dict] = None
    schedule: Optional[Schedule] = None
    target: Optional[dict] = None
    initial: Optional[np.ndarray] = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    synthesis: dict = field(default_factory=lambda: dict(DEFAULT_SYNTHESIS))
    seed: int = 0

    @property
    def is_spin_preset(self):
        return self.preset is not None

    def build_plant(self):
        tol = {"herm_tol": self.tolerances["herm_tol"], "nd_tol": self.tolerances["nd_tol"]}
        if self.preset is not None:
            p = build_spin_example(self.preset["omega_S"], self.preset["omega_A"], self.preset["g"])
            return ControlPlant(p.H_S, p.H_A, p.H_I, **tol)
        e = self.explicit
        return ControlPlant(e["H_S"], e["H_A"], e["H_I"], **tol)

    def to_dict(self):
        doc = {}
        if self.preset is not None:
            doc["preset"] = {"name": "spin-example", **self.preset}
        else:
            doc["explicit"] = {
                "dims": [self.explicit["H_S"].shape[0], self.explicit["H_A"].shape[0]],
                **{k: _as_pairs(self.explicit[k]) for k in ("H_S", "H_A", "H_I")},
            }
        if self.schedule is not None:
            doc["schedule"] = [list(row) for row in self.schedule.to_tuples()]
        if self.target is not None:
            if "amplitudes" in self.target:
                doc["target"] = {"amplitudes": _as_pairs(self.target["amplitudes"])}
            else:
                doc["target"] = dict(self.target)
        if self.initial is not None:
            doc["initial"] = _as_pairs(self.initial)
        doc["tolerances"] = dict(self.tolerances)
        doc["synthesis"] = dict(self.synthesis)
        doc["seed"] = self.seed
        return doc


def parse_scenario(doc):
    """Validate a decoded scenario mapping and return a :class:`Scenario`."""
    if not isinstance(doc, dict):
        _fail("<root>", "scenario must be a mapping")
    unknown = set(doc) - TOP_LEVEL_KEYS
    if unknown:
        _fail("<root>", f"unknown keys {sorted(unknown)}")
    if ("preset" in doc) == ("explicit" in doc):
        _fail("<root>", "exactly one of 'preset' and 'explicit' is required")
    sc = Scenario()

    if "preset" in doc:
        p = doc["preset"]
        if not isinstance(p, dict):
            _fail("preset", "expected a mapping")
        if p.get("name") not in PRESET_NAMES:
            _fail("preset.name", f"unknown preset {p.get('name')!r}; known: {list(PRESET_NAMES)}")
        sc.preset = {k: _number(p.get(k), f"preset.{k}") for k in ("omega_S", "omega_A", "g")}
        dim_S, dim_A = 2, 2
    else:
        e = doc["explicit"]
        if not isinstance(e, dict):
            _fail("explicit", "expected a mapping")
        dims = e.get("dims")
        if (
            not isinstance(dims, list)
            or len(dims) != 2
            or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in dims)
        ):
            _fail("explicit.dims", "expected [dim_S, dim_A] positive integers")
        dim_S, dim_A = dims
        sizes = {"H_S": dim_S, "H_A": dim_A, "H_I": dim_S * dim_A}
        sc.explicit = {}
        for name, n in sizes.items():
            if name not in e:
                _fail(f"explicit.{name}", "missing")
            sc.explicit[name] = _pairs(e[name], f"explicit.{name}", n * n).reshape(n, n)

    if "schedule" in doc:
        rows = doc["schedule"]
        if not isinstance(rows, list):
            _fail("schedule", "expected a list of [accessor_index, dt, free_tail]")
        cycles = []
        for k, row in enumerate(rows):
            path = f"schedule[{k}]"
            if not isinstance(row, list) or len(row) not in (2, 3):
                _fail(path, "expected [accessor_index, dt, free_tail]")
            j = row[0]
            if isinstance(j, bool) or not isinstance(j, int) or not 0 <= j < dim_A:
                _fail(f"{path}[0]", f"accessor index must be an integer in [0, {dim_A})")
            dt = _number(row[1], f"{path}[1]")
            tail = _number(row[2], f"{path}[2]") if len(row) == 3 else 0.0
            if dt < 0 or tail < 0:
                _fail(path, "durations must be >= 0")
            cycles.append((j, dt, tail))
        sc.schedule = Schedule.from_tuples(cycles)

    if "target" in doc:
        t = doc["target"]
        if not isinstance(t, dict):
            _fail("target", "expected {theta, phi} or {amplitudes}")
        if "amplitudes" in t:
            amps = _pairs(t["amplitudes"], "target.amplitudes", dim_S)
            try:
                sc.target = {"amplitudes": as_state(amps, dim_S)}
            except ValueError as exc:
                _fail("target.amplitudes", str(exc))
        else:
            if dim_S != 2:
                _fail("target", "angle targets need a qubit system; give amplitudes")
            theta = _number(t.get("theta"), "target.theta")
            phi = _number(t.get("phi"), "target.phi")
            if not 0 <= theta <= np.pi:
                _fail("target.theta", "must lie in [0, pi]")
            sc.target = {"theta": theta, "phi": phi}

    if "initial" in doc:
        amps = _pairs(doc["initial"], "initial", dim_S)
        try:
            sc.initial = as_state(amps, dim_S)
        except ValueError as exc:
            _fail("initial", str(exc))

    if "tolerances" in doc:
        t = doc["tolerances"]
        if not isinstance(t, dict):
            _fail("tolerances", "expected a mapping")
        for k, v in t.items():
            if k not in DEFAULT_TOLERANCES:
                _fail(f"tolerances.{k}", "unknown tolerance")
            sc.tolerances[k] = _number(v, f"tolerances.{k}")

    if "synthesis" in doc:
        s = doc["synthesis"]
        if not isinstance(s, dict):
            _fail("synthesis", "expected a mapping")
        for k, v in s.items():
            if k not in DEFAULT_SYNTHESIS:
                _fail(f"synthesis.{k}", "unknown option")
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                _fail(f"synthesis.{k}", "expected a positive integer")
            sc.synthesis[k] = v

    if "seed" in doc:
        seed = doc["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            _fail("seed", "expected a non-negative integer")
        sc.seed = seed
    return sc


def load_scenario(path):
    """Read and parse a scenario file; YAML syntax errors carry line numbers."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ScenarioError(f"{path}: malformed document at {where}: {exc}") from None
    return parse_scenario(doc)
