"""Exact diagonalization and thermal reference quantities.

Entropies use the natural logarithm. Boltzmann weights are computed with
energies shifted by the ground energy so large beta does not overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .pauli import DEFAULT_QUBIT_CAP, PauliSum, to_matrix

DEGENERACY_TOL = 1e-8
EIG_CLIP = 1e-12
STATE_TOL = 1e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    energies: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    def ground_degeneracy(self, tol: float = DEGENERACY_TOL) -> int:
        return int(np.sum(self.energies - self.energies[0] < tol))

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])


class ThermalObservables(NamedTuple):
    free_energy: float
    energy: float
    entropy: float
    purity: float


def diagonalize(h: PauliSum | np.ndarray, qubit_cap: int = DEFAULT_QUBIT_CAP) -> SpectralDecomposition:
    mat = to_matrix(h, qubit_cap) if isinstance(h, PauliSum) else np.asarray(h)
    energies, vectors = np.linalg.eigh(mat)
    return SpectralDecomposition(energies, vectors)


def boltzmann_weights(spec: SpectralDecomposition, beta: float) -> np.ndarray:
    if not np.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be finite and non-negative, got {beta}")
    w = np.exp(-beta * (spec.energies - spec.energies[0]))
    return w / w.sum()


def log_partition(spec: SpectralDecomposition, beta: float) -> float:
    """``ln Z`` evaluated stably."""
    shifted = -beta * (spec.energies - spec.energies[0])
    return float(-beta * spec.energies[0] + np.log(np.sum(np.exp(shifted))))


def thermal_density_matrix(spec: SpectralDecomposition, beta: float) -> np.ndarray:
    p = boltzmann_weights(spec, beta)
    return (spec.vectors * p) @ spec.vectors.conj().T


def shannon_entropy(p: np.ndarray) -> float:
    """``-sum p ln p`` with ``0 ln 0 = 0``."""
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12):
        raise ValueError("probabilities must be non-negative")
    if abs(p.sum() - 1) > 1e-9:
        raise ValueError(f"probabilities sum to {p.sum()}, not 1")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def exact_observables(spec: SpectralDecomposition, beta: float) -> ThermalObservables:
    if beta <= 0:
        raise ValueError("free energy needs beta > 0")
    p = boltzmann_weights(spec, beta)
    energy = float(p @ spec.energies)
    entropy = shannon_entropy(p)
    return ThermalObservables(energy - entropy / beta, energy, entropy, float(p @ p))


def validate_density_matrix(rho: np.ndarray, tol: float = STATE_TOL) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real}, not 1")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise ValueError("density matrix is not positive semidefinite")


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.where(w > EIG_CLIP, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity_with_sqrt(sqrt_rho: np.ndarray, sigma: np.ndarray) -> float:
    """Fidelity given a precomputed ``sqrt(rho)``.

    Evaluated as the trace norm of ``sqrt(rho) sqrt(sigma)``: singular values
    keep small contributions that would be lost (squared) in the eigenvalues
    of ``sqrt(rho) sigma sqrt(rho)`` for nearly pure states.
    """
    s = np.linalg.svd(sqrt_rho @ _psd_sqrt(sigma), compute_uv=False)
    return float(min(1.0, np.sum(s)))


def fidelity(rho: np.ndarray, sigma: np.ndarray, check: bool = True) -> float:
    """Uhlmann-Jozsa fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))`` (not squared)."""
    rho, sigma = np.asarray(rho), np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    if check:
        validate_density_matrix(rho)
        validate_density_matrix(sigma)
    return fidelity_with_sqrt(_psd_sqrt(rho), sigma)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.sum(rho * rho.T)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(rho)
    w = w[w > EIG_CLIP]
    return float(-np.sum(w * np.log(w)))


def partial_trace(state: np.ndarray, keep: Sequence[int], n_qubits: int | None = None) -> np.ndarray:
    """Reduced density matrix on the qubits in ``keep`` (qubit 0 = LSB).

    ``state`` is either a state vector or a density matrix. The kept qubits
    keep their relative order, so keeping ``range(n_A)`` yields the low-qubit
    subsystem with its own qubit 0 as LSB.
    """
    state = np.asarray(state)
    dim = state.shape[0]
    n = n_qubits if n_qubits is not None else dim.bit_length() - 1
    if dim != 1 << n:
        raise ValueError(f"state dimension {dim} does not match {n} qubits")
    keep = sorted(set(keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"invalid subsystem {keep} for {n} qubits")
    drop = [q for q in range(n) if q not in keep]
    # tensor axis of qubit q is n-1-q
    keep_axes = [n - 1 - q for q in reversed(keep)]
    drop_axes = [n - 1 - q for q in reversed(drop)]
    d_keep = 1 << len(keep)
    if state.ndim == 1:
        psi = state.reshape((2,) * n).transpose(keep_axes + drop_axes).reshape(d_keep, -1)
        return psi @ psi.conj().T
    rho = state.reshape((2,) * (2 * n))
    perm = keep_axes + drop_axes + [n + a for a in keep_axes] + [n + a for a in drop_axes]
    rho = rho.transpose(perm).reshape(d_keep, dim // d_keep, d_keep, dim // d_keep)
    return np.einsum("ajbj->ab", rho)
