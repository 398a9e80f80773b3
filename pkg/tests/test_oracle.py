import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from sykvqt.oracle import (
    boltzmann_weights,
    diagonalize,
    exact_observables,
    fidelity,
    log_partition,
    partial_trace,
    purity,
    shannon_entropy,
    thermal_density_matrix,
    validate_density_matrix,
    von_neumann_entropy,
)
from sykvqt.syk import SykParams, sample

# frozen from tests/oracles.py
FROZEN = {
    (6, 0, 1.0): dict(free_energy=-2.090870809737482, energy=-0.023005146746193215,
                      entropy=2.067865662991289, purity=0.1279484379595756),
    (6, 0, 10.0): dict(free_energy=-0.3119109668207087, energy=-0.1799085589474767,
                       entropy=1.3200240787323196, purity=0.33852107219764355),
    (8, 3, 1.0): dict(free_energy=-2.803515076580946, energy=-0.06155710444870661,
                      entropy=2.7419579721322394, purity=0.06636899386405837),
    (8, 3, 10.0): dict(free_energy=-0.5041719929888477, energy=-0.35819784869122157,
                       entropy=1.459741442976263, purity=0.3226224251285518),
}


def random_state(rng, dim, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_thermal_observables_frozen(key):
    N, seed, beta = key
    obs = exact_observables(diagonalize(sample(SykParams(N, seed=seed)).hamiltonian), beta)
    for name, value in FROZEN[key].items():
        assert getattr(obs, name) == pytest.approx(value, abs=1e-12)


def test_thermal_matrix_matches_expm():
    h = sample(SykParams(6, seed=2)).hamiltonian
    spec = diagonalize(h)
    ref = oracles.gibbs(oracles.syk_matrix(sample(SykParams(6, seed=2)).couplings, 6), 3.0)
    np.testing.assert_allclose(thermal_density_matrix(spec, 3.0), ref, atol=1e-12)


def test_large_beta_is_stable():
    spec = diagonalize(sample(SykParams(8, seed=1)).hamiltonian)
    p = boltzmann_weights(spec, 1e4)
    assert np.isfinite(p).all()
    assert np.isfinite(log_partition(spec, 1e4))


@pytest.mark.parametrize("beta", [0.0, -1.0, np.inf, np.nan])
def test_bad_beta(beta):
    spec = diagonalize(sample(SykParams(6)).hamiltonian)
    with pytest.raises(ValueError):
        exact_observables(spec, beta)


@given(st.integers(0, 10**6), st.floats(0.05, 50))
def test_free_energy_identity(seed, beta):
    spec = diagonalize(sample(SykParams(6, seed=seed)).hamiltonian)
    obs = exact_observables(spec, beta)
    assert obs.free_energy == pytest.approx(-log_partition(spec, beta) / beta, abs=1e-10)
    assert obs.entropy >= -1e-12
    assert 1 / 8 - 1e-12 <= obs.purity <= 1 + 1e-12


def test_shannon_entropy():
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(np.log(2))
    assert shannon_entropy([1.0, 0.0]) == 0.0
    with pytest.raises(ValueError):
        shannon_entropy([0.6, 0.6])
    with pytest.raises(ValueError):
        shannon_entropy([1.5, -0.5])


def test_fidelity_reference_values():
    pure0 = np.diag([1.0, 0.0])
    pure1 = np.diag([0.0, 1.0])
    assert fidelity(pure0, pure0) == pytest.approx(1, abs=1e-12)
    assert fidelity(pure0, pure1) == pytest.approx(0, abs=1e-12)
    assert fidelity(np.eye(2) / 2, pure0) == pytest.approx(1 / np.sqrt(2), abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 8]))
def test_fidelity_matches_sqrtm_oracle(seed, dim):
    rng = np.random.default_rng(seed)
    rho, sigma = random_state(rng, dim), random_state(rng, dim)
    assert fidelity(rho, sigma) == pytest.approx(oracles.fidelity(rho, sigma), abs=1e-8)
    assert fidelity(rho, sigma) == pytest.approx(fidelity(sigma, rho), abs=1e-8)
    assert 0 <= fidelity(rho, sigma) <= 1


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_fidelity_rank_deficient(seed, rank):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, 8, rank)
    assert fidelity(rho, rho) == pytest.approx(1, abs=1e-6)


def test_fidelity_dimension_mismatch():
    with pytest.raises(ValueError):
        fidelity(np.eye(2) / 2, np.eye(4) / 4)


@pytest.mark.parametrize("bad", [np.diag([0.7, 0.7]), np.diag([1.5, -0.5]), np.array([[0.5, 0.5], [0.1, 0.5]])])
def test_invalid_density_matrix(bad):
    with pytest.raises(ValueError):
        validate_density_matrix(bad)
    with pytest.raises(ValueError):
        fidelity(bad, np.eye(2) / 2)


def test_purity_and_entropy():
    assert purity(np.eye(4) / 4) == pytest.approx(0.25)
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(np.log(4))
    assert von_neumann_entropy(np.diag([1.0, 0, 0, 0])) == 0


@given(st.integers(0, 2**32 - 1), st.lists(st.integers(0, 3), min_size=1, max_size=3, unique=True))
def test_partial_trace_matches_loops(seed, keep):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, 16)
    np.testing.assert_allclose(partial_trace(rho, keep), oracles.partial_trace_loops(rho, 4, sorted(keep)),
                               atol=1e-12)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    np.testing.assert_allclose(partial_trace(psi, keep),
                               oracles.partial_trace_loops(np.outer(psi, psi.conj()), 4, sorted(keep)), atol=1e-12)


def test_partial_trace_product_state():
    a = np.diag([0.3, 0.7])
    b = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
    rho = np.kron(b, a)  # a on qubit 0
    np.testing.assert_allclose(partial_trace(rho, [0]), a, atol=1e-14)
    np.testing.assert_allclose(partial_trace(rho, [1]), b, atol=1e-14)


@pytest.mark.parametrize("keep", [[], [5], [-1]])
def test_partial_trace_bad_subsystem(keep):
    with pytest.raises(ValueError):
        partial_trace(np.eye(8) / 8, keep)


@given(arrays(float, 6, elements=st.floats(-2, 2)))
def test_degeneracy_counts_ties(values):
    spec = diagonalize(np.diag(np.sort(np.round(values, 1))))
    e = spec.energies
    assert spec.ground_degeneracy() == int(np.sum(e - e[0] < 1e-8))
