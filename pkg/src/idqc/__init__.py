"""Indirect quantum control through accessor state preparation.

A finite-level system coupled to an accessor by a non-demolition interaction
is steered by repeatedly preparing the accessor in one of its energy
eigenstates and letting the coupled pair evolve.
"""

__version__ = "0.1.0"

from .spectral import (
    commutator,
    eig_hermitian,
    frobenius_inner,
    kron,
    propagator,
)
from .model import (
    AccessorEigenstate,
    BlockInconsistency,
    ControlPlant,
    EffectiveHamiltonian,
    NonDemolitionError,
    SimplifiedGenerator,
    accessor_spectrum,
    assemble_plant,
    build_simplified_model,
    build_spin_example,
    effective_hamiltonian,
    validate_nondemolition,
)
from .engine import (
    ControlCycle,
    Schedule,
    Trajectory,
    bloch_coordinates,
    check_factorization,
    evolve_cycle,
    evolve_joint,
    fidelity,
    run_schedule,
)
from .controllability import (
    ControllabilityVerdict,
    LieBasis,
    generated_lie_algebra,
    is_fully_controllable,
    semigroup_element,
)
from .synthesis import SynthesisResult, TargetSpec, synthesize_general, synthesize_qubit
