"""Parameterized circuits, exact statevector simulation and the two ansatze.

Angle conventions: ``RZ(t) = exp(-i t Z/2)``, ``RY(t) = exp(-i t Y/2)`` and
``PAULI_ROT(t, P) = exp(-i t P)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pauli import CommutingCluster, PauliSum, apply_pauli

PARAM_KINDS = ("RZ", "RY", "PAULI_ROT")
FIXED_KINDS = ("CNOT", "H", "S")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])
_HALF_Z = np.diag([0.5, -0.5]).astype(complex)
_HALF_Y = np.array([[0, -0.5j], [0.5j, 0]])


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    param_index: int | None = None
    pauli: str | None = None

    def __post_init__(self):
        if self.kind not in PARAM_KINDS + FIXED_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if (self.kind in PARAM_KINDS) != (self.param_index is not None):
            raise ValueError(f"{self.kind} gate has wrong parameter binding")
        if (self.kind == "PAULI_ROT") != (self.pauli is not None):
            raise ValueError("only PAULI_ROT gates carry a Pauli string")
        arity = {"CNOT": 2}.get(self.kind, 1)
        if self.kind != "PAULI_ROT" and len(self.qubits) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s)")

    @property
    def cnot_cost(self) -> int:
        if self.kind == "CNOT":
            return 1
        if self.kind == "PAULI_ROT":
            return 2 * (sum(c != "I" for c in self.pauli) - 1)
        return 0


@dataclass(frozen=True)
class CircuitProgram:
    n_qubits: int
    gates: tuple[Gate, ...]
    n_params: int
    layers: tuple[int, ...] = (0,)

    def __post_init__(self):
        used = sorted({g.param_index for g in self.gates if g.param_index is not None})
        if used != list(range(self.n_params)):
            raise ValueError("parameter indices must cover range(n_params) exactly")
        for g in self.gates:
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} addresses a qubit outside the register")
            if g.pauli is not None and len(g.pauli) != self.n_qubits:
                raise ValueError("PAULI_ROT string length must equal n_qubits")

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def cnot_count(self) -> int:
        return sum(g.cnot_cost for g in self.gates)


def build_vqc1(n_qubits: int, n_layers: int) -> CircuitProgram:
    """Hardware-efficient layers: RZ RY RZ on every qubit, then a CNOT ring."""
    if n_qubits < 2:
        raise ValueError("VQC1 needs at least 2 qubits")
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    gates: list[Gate] = []
    layers = []
    idx = 0
    ring = [(0, 1)] if n_qubits == 2 else [(q, (q + 1) % n_qubits) for q in range(n_qubits)]
    for _ in range(n_layers):
        layers.append(len(gates))
        for q in range(n_qubits):
            for kind in ("RZ", "RY", "RZ"):
                gates.append(Gate(kind, (q,), idx))
                idx += 1
        gates += [Gate("CNOT", pair) for pair in ring]
    return CircuitProgram(n_qubits, tuple(gates), idx, tuple(layers))


def clifford_gates(diagonalizer: Sequence[tuple], inverse: bool = False) -> list[Gate]:
    gates = [Gate(kind, tuple(qubits)) for kind, qubits in diagonalizer]
    if not inverse:
        return gates
    out = []
    for g in reversed(gates):
        # S^dagger = S^3
        out += [g] * (3 if g.kind == "S" else 1)
    return out


def build_vqc2(h: PauliSum, clusters: Sequence[CommutingCluster], n_layers: int) -> CircuitProgram:
    """Cluster-diagonalized Hamiltonian ansatz.

    Per layer and cluster: Clifford diagonalizer, one ``exp(-i phi_a D_a)``
    per member (``D_a`` the diagonalized I/Z string), inverse Clifford.
    Parameter ``layer * len(h) + a`` belongs to Hamiltonian term ``a``.
    """
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    members = sorted(i for c in clusters for i in c.member_indices)
    if members != list(range(len(h))):
        raise ValueError("clusters do not partition the Hamiltonian terms")
    n_terms = len(h)
    gates: list[Gate] = []
    layers = []
    for layer in range(n_layers):
        layers.append(len(gates))
        for c in clusters:
            gates += clifford_gates(c.diagonalizer)
            for a, d in zip(c.member_indices, c.diagonal_terms):
                support = tuple(q for q, x in enumerate(d.axes) if x != "I")
                gates.append(Gate("PAULI_ROT", support, layer * n_terms + a, d.axes))
            gates += clifford_gates(c.diagonalizer, inverse=True)
    return CircuitProgram(h.n_qubits, tuple(gates), n_terms * n_layers, tuple(layers))


# --- simulation -------------------------------------------------------------


def _apply_1q(state: np.ndarray, mat: np.ndarray, q: int, n: int) -> np.ndarray:
    shape = state.shape
    view = state.reshape(1 << (n - 1 - q), 2, 1 << q, -1)
    return np.einsum("ab,xbyk->xayk", mat, view).reshape(shape)


def _cnot_perm(c: int, t: int, n: int) -> np.ndarray:
    b = np.arange(1 << n)
    return b ^ (((b >> c) & 1) << t)


def _rotation(kind: str, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if kind == "RZ":
        return np.diag([c - 1j * s, c + 1j * s])
    return np.array([[c, -s], [s, c]], dtype=complex)


def apply_gate(state: np.ndarray, gate: Gate, params: np.ndarray, n: int, inverse: bool = False) -> np.ndarray:
    kind = gate.kind
    if kind == "CNOT":
        return state[_cnot_perm(*gate.qubits, n)]
    if kind == "H":
        return _apply_1q(state, _H, gate.qubits[0], n)
    if kind == "S":
        return _apply_1q(state, _S.conj() if inverse else _S, gate.qubits[0], n)
    theta = params[gate.param_index] * (-1 if inverse else 1)
    if kind == "PAULI_ROT":
        return np.cos(theta) * state - 1j * np.sin(theta) * apply_pauli(gate.pauli, state)
    return _apply_1q(state, _rotation(kind, theta), gate.qubits[0], n)


def _apply_generator(state: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    if gate.kind == "PAULI_ROT":
        return apply_pauli(gate.pauli, state)
    return _apply_1q(state, _HALF_Z if gate.kind == "RZ" else _HALF_Y, gate.qubits[0], n)


def _check_params(prog: CircuitProgram, params) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    if params.shape != (prog.n_params,):
        raise ValueError(f"expected {prog.n_params} parameters, got shape {params.shape}")
    return params


def simulate(prog: CircuitProgram, params, input: int = 0) -> np.ndarray:
    """State ``U(params) |input>``."""
    params = _check_params(prog, params)
    dim = 1 << prog.n_qubits
    if not 0 <= input < dim:
        raise ValueError(f"basis index {input} out of range")
    state = np.zeros(dim, dtype=complex)
    state[input] = 1.0
    for g in prog.gates:
        state = apply_gate(state, g, params, prog.n_qubits)
    return state


def unitary(prog: CircuitProgram, params=None) -> np.ndarray:
    params = _check_params(prog, np.zeros(prog.n_params) if params is None else params)
    mat = np.eye(1 << prog.n_qubits, dtype=complex)
    for g in prog.gates:
        mat = apply_gate(mat, g, params, prog.n_qubits)
    return mat


def diagonal_expectation_grad(prog: CircuitProgram, params, observable: np.ndarray, input: int = 0):
    """``<psi|diag(observable)|psi>`` and its gradient by the adjoint method."""
    params = _check_params(prog, params)
    n = prog.n_qubits
    psi = simulate(prog, params, input)
    lam = observable * psi
    value = float(np.real(np.vdot(psi, lam)))
    grad = np.zeros(prog.n_params)
    for g in reversed(prog.gates):
        if g.param_index is not None:
            grad[g.param_index] += 2 * np.real(np.vdot(lam, -1j * _apply_generator(psi, g, n)))
        psi = apply_gate(psi, g, params, n, inverse=True)
        lam = apply_gate(lam, g, params, n, inverse=True)
    return value, grad


def basis_probabilities(psi: np.ndarray, shots: int | None = None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Computational-basis probabilities, exact or estimated from ``shots`` samples."""
    p = np.abs(psi) ** 2
    p /= p.sum()
    if shots is None:
        return p
    rng = rng if rng is not None else np.random.default_rng()
    return rng.multinomial(shots, p) / shots


def assemble_mixed_state(p: np.ndarray, prog2: CircuitProgram, phi) -> np.ndarray:
    """``sum_i p_i U2|b_i><b_i|U2^dagger``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (1 << prog2.n_qubits,):
        raise ValueError("probability vector does not match the circuit dimension")
    u = unitary(prog2, phi)
    return (u * p) @ u.conj().T


def dump_circuit(prog: CircuitProgram) -> str:
    """One gate per line: ``kind qubits [param] [pauli]``."""
    lines = [f"# n_qubits={prog.n_qubits} n_params={prog.n_params} layers={list(prog.layers)}"]
    for g in prog.gates:
        parts = [g.kind, ",".join(map(str, g.qubits))]
        if g.param_index is not None:
            parts.append(f"p{g.param_index}")
        if g.pauli is not None:
            parts.append(g.pauli)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
