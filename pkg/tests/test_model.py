import numpy as np
import pytest

from idqc.model import (
    PAULI_X,
    PAULI_Z,
    BlockInconsistency,
    ControlPlant,
    NonDemolitionError,
    SimplifiedGenerator,
    accessor_spectrum,
    assemble_plant,
    build_simplified_model,
    build_spin_example,
    effective_hamiltonian,
    spin_parameters,
    validate_nondemolition,
)
from idqc.spectral import DimensionError, NotHermitianError, eig_hermitian, kron
from conftest import random_hermitian, random_plant
from oracles import kron_loops


def test_spin_example_total_hamiltonian_entrywise():
    plant = build_spin_example(1, 2, 3)
    # basis ordering |s a>: 0=|00>, 1=|01>, 2=|10>, 3=|11>
    expected = np.array(
        [
            [3, 0, 3, 0],
            [0, -1, 0, -3],
            [3, 0, 1, 0],
            [0, -3, 0, -3],
        ]
    )
    np.testing.assert_array_equal(plant.total_hamiltonian(), expected)
    brute = (
        kron_loops(PAULI_Z, np.eye(2))
        + 2 * kron_loops(np.eye(2), PAULI_Z)
        + 3 * kron_loops(PAULI_X, PAULI_Z)
    )
    np.testing.assert_array_equal(plant.total_hamiltonian(), brute)


def test_spin_example_zero():
    np.testing.assert_array_equal(build_spin_example(0, 0, 0).total_hamiltonian(), np.zeros((4, 4)))


@pytest.mark.parametrize("omega_S, omega_A, g", [(1, 2, 3), (0.3, -1.1, 0.7), (2.0, 0.5, 40.0)])
def test_spin_example_rabi_frequency(omega_S, omega_A, g):
    plant = build_spin_example(omega_S, omega_A, g)
    w, _ = eig_hermitian(plant.total_hamiltonian())
    omega = np.hypot(omega_S, g)
    expected = np.sort([s * omega + a * omega_A for s in (-1, 1) for a in (-1, 1)])
    np.testing.assert_allclose(w, expected, atol=1e-12)


@pytest.mark.parametrize("params", [(1, 2, 3), (-0.4, 7, -2), (1, 2, 0)])
def test_spin_example_is_nondemolition(params):
    report = validate_nondemolition(build_spin_example(*params))
    assert report.passed and report.residual == 0.0


def test_nondemolition_failure_residual():
    g, omega_A = 0.7, 1.3
    plant = ControlPlant(PAULI_Z, omega_A * PAULI_Z, g * kron(PAULI_X, PAULI_X))
    report = validate_nondemolition(plant)
    # [1 (x) sz, sx (x) sx] = sx (x) 2i sy, whose Frobenius norm is sqrt(2) * 2 sqrt(2)
    assert not report.passed
    assert report.residual == pytest.approx(4 * abs(g * omega_A), rel=1e-14)
    with pytest.raises(NonDemolitionError):
        accessor_spectrum(plant)


def test_plant_rejects_bad_input():
    with pytest.raises(NotHermitianError):
        ControlPlant(np.array([[0, 1], [0, 0]]), PAULI_Z, np.zeros((4, 4)))
    with pytest.raises(DimensionError):
        ControlPlant(PAULI_Z, PAULI_Z, np.zeros((3, 3)))


def test_plant_is_immutable():
    plant = build_spin_example(1, 2, 3)
    with pytest.raises(ValueError):
        plant.H_S[0, 0] = 5
    with pytest.raises(AttributeError):
        plant.H_S = np.eye(2)


def test_spin_spectrum():
    spectrum = accessor_spectrum(build_spin_example(1, 2, 3))
    assert [e.alpha for e in spectrum] == [-2.0, 2.0]
    np.testing.assert_allclose(spectrum[0].H_j, -3 * PAULI_X, atol=1e-15)
    np.testing.assert_allclose(spectrum[1].H_j, 3 * PAULI_X, atol=1e-15)
    # sz eigenvalue convention |0> -> +1
    np.testing.assert_allclose(spectrum[1].phi, [1, 0])


def test_zero_coupling_spectrum(rng):
    plant = ControlPlant(random_hermitian(rng, 3), random_hermitian(rng, 2), np.zeros((6, 6)))
    for e in accessor_spectrum(plant):
        np.testing.assert_array_equal(e.H_j, np.zeros((3, 3)))


def test_block_round_trip(rng):
    for dim_S, dim_A in [(2, 2), (3, 3), (4, 2)]:
        plant, basis, blocks = random_plant(rng, dim_S, dim_A)
        spectrum = accessor_spectrum(plant)
        assert len(spectrum) == dim_A
        for e in spectrum:
            # match each extracted entry to the assembled block through its eigenvector
            k = int(np.argmax(np.abs(basis.conj().T @ e.phi)))
            assert np.linalg.norm(e.H_j - blocks[k]) <= 1e-12 * max(1, np.linalg.norm(blocks[k]))


def test_spectrum_reconstructs_plant(rng):
    plant, _, _ = random_plant(rng, 3, 3)
    spectrum = accessor_spectrum(plant)
    H_I = sum(kron(e.H_j, e.projector) for e in spectrum)
    H_A = sum(e.alpha * e.projector for e in spectrum)
    assert np.linalg.norm(H_I - plant.H_I) <= 1e-10 * np.linalg.norm(plant.H_I)
    assert np.linalg.norm(H_A - plant.H_A) <= 1e-10 * np.linalg.norm(plant.H_A)
    for e in spectrum:
        assert np.linalg.norm(plant.H_A @ e.phi - e.alpha * e.phi) <= 1e-10 * max(1, abs(e.alpha))


def test_degenerate_accessor_level_is_split(rng):
    # H_A = diag(1, 1, 2); the blocks live on a rotated basis of the degenerate level
    c, s = np.cos(0.4), np.sin(0.4) * np.exp(0.3j)
    basis = np.array([[c, -np.conj(s), 0], [s, c, 0], [0, 0, 1]])
    blocks = [random_hermitian(rng, 2) for _ in range(3)]
    plant = assemble_plant(random_hermitian(rng, 2), [1.0, 1.0, 2.0], basis, blocks)
    spectrum = accessor_spectrum(plant)
    found = []
    for e in spectrum:
        k = int(np.argmax(np.abs(basis.conj().T @ e.phi)))
        found.append(k)
        np.testing.assert_allclose(e.H_j, blocks[k], atol=1e-10)
    assert sorted(found) == [0, 1, 2]


def test_degenerate_level_without_block_structure():
    # accessor fully degenerate and the coupling mixes system and accessor non-trivially
    H_I = kron(PAULI_X, PAULI_X) + kron(PAULI_Z, PAULI_Z)
    plant = ControlPlant(PAULI_Z, np.zeros((2, 2)), H_I)
    assert validate_nondemolition(plant).passed
    with pytest.raises(BlockInconsistency) as exc:
        accessor_spectrum(plant)
    assert exc.value.residual > 1e-3


def test_effective_hamiltonian_spin():
    plant = build_spin_example(1, 2, 3)
    up = next(e for e in plant.spectrum() if abs(e.phi[0]) == 1)
    eff = effective_hamiltonian(plant, up.index)
    np.testing.assert_allclose(eff.matrix, PAULI_Z + 3 * PAULI_X - 2 * np.eye(2), atol=1e-15)


def test_effective_hamiltonian_trivial_coupling(rng):
    H_S = random_hermitian(rng, 3)
    plant = ControlPlant(H_S, np.zeros((2, 2)), np.zeros((6, 6)))
    for j in range(2):
        np.testing.assert_allclose(effective_hamiltonian(plant, j).matrix, H_S, atol=1e-15)


def test_effective_hamiltonian_identity(rng):
    plant, _, _ = random_plant(rng, 3, 2)
    for e in plant.spectrum():
        eff = effective_hamiltonian(plant, e.index).matrix
        assert np.linalg.norm(eff + e.alpha * np.eye(3) - plant.H_S - e.H_j) <= 1e-12
        assert np.linalg.norm(eff - eff.conj().T) <= 1e-12


def test_effective_hamiltonian_index_error():
    with pytest.raises(IndexError):
        effective_hamiltonian(build_spin_example(1, 2, 3), 2)


def test_spin_parameters_round_trip():
    assert spin_parameters(build_spin_example(0.5, -2, 7)) == (0.5, -2, 7)
    with pytest.raises(ValueError):
        spin_parameters(ControlPlant(PAULI_X, PAULI_Z, np.zeros((4, 4))))


def test_simplified_model_zero_lambda(rng):
    H_S = random_hermitian(rng, 2)
    effs = build_simplified_model(H_S, [SimplifiedGenerator(PAULI_X, 0.0), SimplifiedGenerator(PAULI_Z, 0)])
    for e in effs:
        np.testing.assert_array_equal(e.matrix, H_S)


def test_simplified_model_reversible_field():
    g = 3.0
    effs = build_simplified_model(PAULI_Z, [SimplifiedGenerator(PAULI_X, g), SimplifiedGenerator(PAULI_X, -g)])
    plant = build_spin_example(1, 2, g)
    # agree with the plant's effective Hamiltonians up to the scalar offsets
    from_plant = sorted((effective_hamiltonian(plant, j).matrix + e.alpha * np.eye(2) for j, e in enumerate(plant.spectrum())), key=lambda m: m[0, 1].real)
    ours = sorted((e.matrix for e in effs), key=lambda m: m[0, 1].real)
    for a, b in zip(from_plant, ours):
        np.testing.assert_allclose(a, b, atol=1e-15)


def test_simplified_model_structure(rng):
    H_S = random_hermitian(rng, 3)
    gens = [SimplifiedGenerator(random_hermitian(rng, 3), lam) for lam in (0.5, -4.0)]
    effs = build_simplified_model(H_S, gens)
    assert len(effs) == 2
    for e in effs:
        np.testing.assert_allclose(e.matrix, e.matrix.conj().T)
    with pytest.raises(DimensionError):
        build_simplified_model(H_S, [SimplifiedGenerator(PAULI_X, 1.0)])
