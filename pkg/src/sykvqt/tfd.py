"""Thermofield-double construction from two coupled SYK copies.

Subsystem A holds Majoranas 1..N (low qubits), B holds N+1..2N (high qubits)
of a single 2N-Majorana Jordan-Wigner chain, so tracing out B is a
contiguous-bit operation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .oracle import (
    boltzmann_weights,
    diagonalize,
    fidelity_with_sqrt,
    partial_trace,
)
from .pauli import DEFAULT_QUBIT_CAP, PauliSum, PauliTerm, majorana_product, majorana_quartic, to_matrix
from .syk import SykInstance, SykParams, sample

B_CONVENTIONS = ("same", "conjugate")


@dataclass(frozen=True)
class TfdParams:
    base: SykParams
    mu: float = 1.0
    mu_grid: tuple[float, ...] = tuple(np.linspace(0.05, 2.0, 20).tolist())
    beta_grid: tuple[float, ...] = tuple(np.geomspace(1.0, 35.0, 20).tolist())
    b_convention: str = "same"
    target_fidelity: float = 0.9

    def __post_init__(self):
        if not self.mu > 0 or any(not m > 0 for m in self.mu_grid):
            raise ValueError("mu must be positive")
        if not self.mu_grid or not self.beta_grid:
            raise ValueError("grids must be non-empty")
        if self.base.N > DEFAULT_QUBIT_CAP:
            raise ValueError(f"doubled system needs {self.base.N} qubits, above the cap")
        if self.b_convention not in B_CONVENTIONS:
            raise ValueError(f"b_convention must be one of {B_CONVENTIONS}")


@dataclass
class FidelityMap:
    mu_grid: np.ndarray
    beta_grid: np.ndarray
    fidelity: np.ndarray  # shape (len(mu_grid), len(beta_grid))
    target: float = 0.9
    degeneracy: np.ndarray = field(default=None)

    @property
    def region(self) -> np.ndarray:
        return self.fidelity >= self.target

    def best_beta(self) -> np.ndarray:
        return self.beta_grid[np.argmax(self.fidelity, axis=1)]


def build_tfd_hamiltonian(inst: SykInstance, mu: float, b_convention: str = "same") -> PauliSum:
    """``H_A + H_B + i mu sum_j chi_A^j chi_B^j`` on N qubits.

    ``"same"`` uses the identical couplings on B. ``"conjugate"`` builds
    ``H_B = H_A^*`` in the computational basis instead (sign flip on strings
    with an odd number of Y letters).
    """
    if b_convention not in B_CONVENTIONS:
        raise ValueError(f"b_convention must be one of {B_CONVENTIONS}")
    N = inst.params.N
    n = N  # 2N Majoranas on N qubits
    if n > DEFAULT_QUBIT_CAP:
        raise ValueError(f"TFD register of {n} qubits exceeds the cap")
    terms = []
    for (i, j, k, l), J in inst.couplings.items():
        terms.append(majorana_quartic(i, j, k, l, n).scaled(J))
        tb = majorana_quartic(i + N, j + N, k + N, l + N, n).scaled(J)
        if b_convention == "conjugate" and tb.axes.count("Y") % 2:
            tb = tb.scaled(-1)
        terms.append(tb)
    for j in range(1, N + 1):
        terms.append(majorana_product((j, j + N), n).scaled(1j * mu))
    h = PauliSum.from_terms(terms, n)
    if not h.is_hermitian():
        raise AssertionError("TFD Hamiltonian is not Hermitian")
    return PauliSum(tuple(PauliTerm(t.axes, t.coeff.real) for t in h.terms), n)


def tfd_ground_state(h_tfd: PauliSum | np.ndarray) -> tuple[np.ndarray, float, int]:
    """Lowest eigenvector, its energy and the ground-space degeneracy."""
    spec = diagonalize(h_tfd)
    return spec.vectors[:, 0], spec.ground_energy, spec.ground_degeneracy()


def analytic_tfd(inst_or_h, beta: float) -> np.ndarray:
    """``sum_i exp(-beta E_i / 2) |i>_A |i>_B / sqrt(Z)`` with A on the low qubits."""
    h = inst_or_h.hamiltonian if isinstance(inst_or_h, SykInstance) else inst_or_h
    spec = diagonalize(h)
    w = np.sqrt(boltzmann_weights(spec, beta))
    # amplitude[b, a] = sum_i w_i v_i[b] v_i[a], flattened with B as the high bits
    amp = (spec.vectors * w) @ spec.vectors.T
    return amp.reshape(-1)


def tfd_fidelity_map(params: TfdParams, inst: SykInstance | None = None) -> FidelityMap:
    """Fidelity between Tr_B of the TFD ground state and ``rho_beta`` of H_A."""
    inst = inst if inst is not None else sample(params.base)
    n_a = inst.params.n_qubits
    spec_a = diagonalize(inst.hamiltonian)
    sqrt_thermal = []
    for beta in params.beta_grid:
        p = boltzmann_weights(spec_a, beta)
        sqrt_thermal.append((spec_a.vectors * np.sqrt(p)) @ spec_a.vectors.conj().T)
    fid = np.zeros((len(params.mu_grid), len(params.beta_grid)))
    degen = np.zeros(len(params.mu_grid), dtype=int)
    for a, mu in enumerate(params.mu_grid):
        h = to_matrix(build_tfd_hamiltonian(inst, mu, params.b_convention))
        psi, _, degen[a] = tfd_ground_state(h)
        rho_a = partial_trace(psi, range(n_a))
        for b, s in enumerate(sqrt_thermal):
            fid[a, b] = fidelity_with_sqrt(s, rho_a)
    return FidelityMap(np.array(params.mu_grid), np.array(params.beta_grid), fid, params.target_fidelity, degen)
