"""Independent dense-matrix reference implementations used by the tests.

Nothing here imports the package: Majoranas are built from explicit
Kronecker products, fidelities use scipy's ``sqrtm``, and so on.
"""

from functools import reduce
from itertools import combinations

import numpy as np
from scipy.linalg import expm, sqrtm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
LETTERS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def pauli_matrix(axes: str) -> np.ndarray:
    """``axes[q]`` acts on qubit q, qubit 0 is the least significant bit."""
    return reduce(np.kron, [LETTERS[c] for c in reversed(axes)])


def majorana(i: int, n: int) -> np.ndarray:
    """1-based Majorana index on n qubits, {chi_i, chi_j} = delta_ij."""
    k, odd = divmod(i - 1, 2)
    ops = [Z] * k + [X if odd == 0 else Y] + [I2] * (n - k - 1)
    return reduce(np.kron, list(reversed(ops))) / np.sqrt(2)


def syk_matrix(couplings: dict, N: int) -> np.ndarray:
    n = N // 2
    chis = [None] + [majorana(i, n) for i in range(1, N + 1)]
    h = np.zeros((2**n, 2**n), dtype=complex)
    for (i, j, k, l), J in couplings.items():
        h += J * chis[i] @ chis[j] @ chis[k] @ chis[l]
    return h


def dense_couplings(N: int, J: float, seed: int) -> dict:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0])))
    sigma = np.sqrt(6 * J**2 / N**3)
    tuples = list(combinations(range(1, N + 1), 4))
    return dict(zip(tuples, sigma * rng.standard_normal(len(tuples))))


def gibbs(h: np.ndarray, beta: float) -> np.ndarray:
    rho = expm(-beta * h)
    return rho / np.trace(rho)


def thermal_quantities(h: np.ndarray, beta: float) -> dict:
    e = np.linalg.eigvalsh(h)
    w = np.exp(-beta * (e - e[0]))
    z = w.sum()
    p = w / z
    log_z = np.log(z) - beta * e[0]
    energy = p @ e
    entropy = -np.sum(p[p > 0] * np.log(p[p > 0]))
    return {"free_energy": -log_z / beta, "energy": energy, "entropy": entropy, "purity": p @ p, "log_z": log_z}


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    s = sqrtm(rho)
    return float(np.real(np.trace(sqrtm(s @ sigma @ s))))


def partial_trace_loops(rho: np.ndarray, n: int, keep: list[int]) -> np.ndarray:
    """Brute-force reduced density matrix, bit by bit."""
    drop = [q for q in range(n) if q not in keep]
    dk = 2 ** len(keep)
    out = np.zeros((dk, dk), dtype=complex)

    def index(kbits, dbits):
        idx = 0
        for pos, q in enumerate(keep):
            idx |= ((kbits >> pos) & 1) << q
        for pos, q in enumerate(drop):
            idx |= ((dbits >> pos) & 1) << q
        return idx

    for a in range(dk):
        for b in range(dk):
            out[a, b] = sum(rho[index(a, d), index(b, d)] for d in range(2 ** len(drop)))
    return out


def rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def ry(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def on_qubit(mat: np.ndarray, q: int, n: int) -> np.ndarray:
    ops = [I2] * n
    ops[q] = mat
    return reduce(np.kron, list(reversed(ops)))


def cnot(c: int, t: int, n: int) -> np.ndarray:
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    return on_qubit(p0, c, n) + on_qubit(p1, c, n) @ on_qubit(X, t, n)


def vqc1_unitary(theta: np.ndarray, n: int, layers: int) -> np.ndarray:
    u = np.eye(2**n, dtype=complex)
    idx = 0
    ring = [(0, 1)] if n == 2 else [(q, (q + 1) % n) for q in range(n)]
    for _ in range(layers):
        for q in range(n):
            for gate in (rz, ry, rz):
                u = on_qubit(gate(theta[idx]), q, n) @ u
                idx += 1
        for c, t in ring:
            u = cnot(c, t, n) @ u
    return u
