"""Pauli strings, Majorana operators under Jordan-Wigner, and commuting clusters.

Conventions used throughout the package:

* ``axes[q]`` is the Pauli letter acting on qubit ``q``.
* Qubit 0 is the least-significant bit of a computational-basis index, so the
  dense matrix of ``axes`` is ``kron(P[n-1], ..., P[1], P[0])``.
* Majoranas are normalized to ``{chi_i, chi_j} = delta_ij``:
  ``chi_{2k-1} = Z..Z X I..I / sqrt(2)`` and ``chi_{2k} = Z..Z Y I..I / sqrt(2)``
  with the X/Y on qubit ``k-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

LETTERS = "IXYZ"
COEFF_TOL = 1e-12
DEFAULT_QUBIT_CAP = 12

# single-qubit products: (a, b) -> (phase, c) with a.b = phase * c
_PRODUCT = {}
for _a in LETTERS:
    _PRODUCT[("I", _a)] = (1, _a)
    _PRODUCT[(_a, "I")] = (1, _a)
    _PRODUCT[(_a, _a)] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PRODUCT[(_a, _b)] = (1j, _c)
    _PRODUCT[(_b, _a)] = (-1j, _c)


@dataclass(frozen=True)
class PauliTerm:
    """A Pauli string with a complex coefficient."""

    axes: str
    coeff: complex = 1.0

    def __post_init__(self):
        if not self.axes or any(c not in LETTERS for c in self.axes):
            raise ValueError(f"invalid Pauli string {self.axes!r}")
        object.__setattr__(self, "coeff", complex(self.coeff))

    @property
    def n_qubits(self) -> int:
        return len(self.axes)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.axes)

    @property
    def x_bits(self) -> np.ndarray:
        return np.array([c in "XY" for c in self.axes], dtype=np.uint8)

    @property
    def z_bits(self) -> np.ndarray:
        return np.array([c in "ZY" for c in self.axes], dtype=np.uint8)

    def is_diagonal(self) -> bool:
        return all(c in "IZ" for c in self.axes)

    def adjoint(self) -> PauliTerm:
        return PauliTerm(self.axes, self.coeff.conjugate())

    def scaled(self, factor: complex) -> PauliTerm:
        return PauliTerm(self.axes, self.coeff * factor)

    def __mul__(self, other: PauliTerm) -> PauliTerm:
        return multiply(self, other)


def _check_same_size(a: PauliTerm, b: PauliTerm) -> None:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Product ``a @ b`` with the exact Pauli-group phase."""
    _check_same_size(a, b)
    phase = 1 + 0j
    letters = []
    for la, lb in zip(a.axes, b.axes):
        ph, lc = _PRODUCT[(la, lb)]
        phase *= ph
        letters.append(lc)
    return PauliTerm("".join(letters), a.coeff * b.coeff * phase)


def commutes(a: PauliTerm, b: PauliTerm) -> bool:
    _check_same_size(a, b)
    clashes = sum(1 for la, lb in zip(a.axes, b.axes) if la != "I" and lb != "I" and la != lb)
    return clashes % 2 == 0


@dataclass(frozen=True)
class MajoranaIndex:
    i: int
    N: int

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ValueError(f"Majorana count N must be even and positive, got {self.N}")
        if not 1 <= self.i <= self.N:
            raise ValueError(f"Majorana index {self.i} out of range [1, {self.N}]")


@lru_cache(maxsize=None)
def majorana_to_pauli(i: int, n_qubits: int) -> PauliTerm:
    """Jordan-Wigner image of ``chi_i`` (1-based) on ``n_qubits`` qubits."""
    if isinstance(i, MajoranaIndex):
        if i.N != 2 * n_qubits:
            raise ValueError(f"N={i.N} needs {i.N // 2} qubits, got {n_qubits}")
        i = i.i
    MajoranaIndex(i, 2 * n_qubits)
    k = (i + 1) // 2
    letter = "X" if i % 2 else "Y"
    axes = "Z" * (k - 1) + letter + "I" * (n_qubits - k)
    return PauliTerm(axes, 1 / np.sqrt(2))


def majorana_product(indices: Sequence[int], n_qubits: int) -> PauliTerm:
    out = PauliTerm("I" * n_qubits, 1.0)
    for i in indices:
        out = multiply(out, majorana_to_pauli(i, n_qubits).scaled(np.sqrt(2)))
    # exact power of 1/2 instead of repeated 1/sqrt(2) products
    return out.scaled(0.5 ** (len(indices) / 2))


@lru_cache(maxsize=None)
def majorana_quartic(i: int, j: int, k: int, l: int, n_qubits: int) -> PauliTerm:
    """Pauli image of ``chi_i chi_j chi_k chi_l`` for ``i < j < k < l``.

    The image is Hermitian, so the coefficient is real (magnitude 1/4).
    """
    if not i < j < k < l:
        raise ValueError(f"indices must be strictly increasing, got {(i, j, k, l)}")
    term = majorana_product((i, j, k, l), n_qubits)
    if abs(term.coeff.imag) > COEFF_TOL:
        raise AssertionError(f"quartic image not Hermitian: {term}")
    return PauliTerm(term.axes, term.coeff.real)


@dataclass(frozen=True)
class PauliSum:
    """Linear combination of Pauli strings with merged duplicate strings."""

    terms: tuple[PauliTerm, ...]
    n_qubits: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        for t in self.terms:
            if t.n_qubits != self.n_qubits:
                raise ValueError(f"term {t.axes} does not act on {self.n_qubits} qubits")

    @classmethod
    def from_terms(cls, terms: Iterable[PauliTerm], n_qubits: int) -> PauliSum:
        """Merge equal strings (first-occurrence order) and drop zeros."""
        merged: dict[str, complex] = {}
        for t in terms:
            merged[t.axes] = merged.get(t.axes, 0j) + t.coeff
        kept = tuple(PauliTerm(a, c) for a, c in merged.items() if abs(c) > COEFF_TOL)
        return cls(kept, n_qubits)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: PauliSum) -> PauliSum:
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        return PauliSum.from_terms(self.terms + other.terms, self.n_qubits)

    def scaled(self, factor: complex) -> PauliSum:
        return PauliSum(tuple(t.scaled(factor) for t in self.terms), self.n_qubits)

    def hermiticity_residual(self) -> float:
        return max((abs(t.coeff.imag) for t in self.terms), default=0.0)

    def is_hermitian(self, tol: float = COEFF_TOL) -> bool:
        return self.hermiticity_residual() < tol

    def real_coefficients(self) -> np.ndarray:
        if not self.is_hermitian():
            raise ValueError(f"PauliSum not Hermitian (residual {self.hermiticity_residual():.3g})")
        return np.array([t.coeff.real for t in self.terms])


def _pauli_action(axes: str):
    """Index map and phases with ``P|b> = phase[b] |b ^ xmask>``."""
    n = len(axes)
    xmask = zmask = 0
    n_y = 0
    for q, c in enumerate(axes):
        if c in "XY":
            xmask |= 1 << q
        if c in "ZY":
            zmask |= 1 << q
        n_y += c == "Y"
    basis = np.arange(1 << n)
    parity = np.zeros(1 << n, dtype=np.int64)
    z = basis & zmask
    while np.any(z):
        parity ^= z & 1
        z >>= 1
    phase = (1j ** n_y) * (1 - 2 * parity)
    return basis ^ xmask, phase


def apply_pauli(axes: str, state: np.ndarray) -> np.ndarray:
    """Apply a Pauli string to a vector or to the rows of a matrix."""
    target, phase = _pauli_action(axes)
    out = np.empty_like(state, dtype=complex)
    if state.ndim == 1:
        out[target] = phase * state
    else:
        out[target] = phase[:, None] * state
    return out


def to_matrix(h: PauliSum | PauliTerm, qubit_cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a PauliSum (or a single term)."""
    if isinstance(h, PauliTerm):
        h = PauliSum((h,), h.n_qubits)
    n = h.n_qubits
    if n > qubit_cap:
        raise ValueError(f"{n} qubits exceeds the dense-matrix cap of {qubit_cap}")
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for t in h.terms:
        rows, phase = _pauli_action(t.axes)
        mat[rows, cols] += t.coeff * phase
    return mat


# --- Clifford conjugation -------------------------------------------------

# image of single-qubit letters under H and S (sign, letter)
_H_IMAGE = {"I": (1, "I"), "X": (1, "Z"), "Y": (-1, "Y"), "Z": (1, "X")}
_S_IMAGE = {"I": (1, "I"), "X": (1, "Y"), "Y": (-1, "X"), "Z": (1, "Z")}
# CNOT images of letters on the control / target qubit as (sign, control, target)
_CNOT_CONTROL = {"I": (1, "I", "I"), "X": (1, "X", "X"), "Y": (1, "Y", "X"), "Z": (1, "Z", "I")}
_CNOT_TARGET = {"I": (1, "I", "I"), "X": (1, "I", "X"), "Y": (1, "Z", "Y"), "Z": (1, "Z", "Z")}


def _two_site(n: int, a: int, la: str, b: int, lb: str) -> PauliTerm:
    axes = ["I"] * n
    axes[a] = la
    axes[b] = lb
    return PauliTerm("".join(axes))


def conjugate(term: PauliTerm, gate: tuple) -> PauliTerm:
    """Return ``G term G^dagger`` for a Clifford gate ``(kind, qubits)``."""
    kind, qubits = gate
    axes = list(term.axes)
    if kind in ("H", "S"):
        (q,) = qubits
        sign, axes[q] = (_H_IMAGE if kind == "H" else _S_IMAGE)[axes[q]]
        return PauliTerm("".join(axes), term.coeff * sign)
    if kind != "CNOT":
        raise ValueError(f"not a Clifford gate: {kind}")
    c, t = qubits
    sc, cc, ct = _CNOT_CONTROL[axes[c]]
    st, tc, tt = _CNOT_TARGET[axes[t]]
    axes[c] = axes[t] = "I"
    rest = PauliTerm("".join(axes), term.coeff * sc * st)
    n = term.n_qubits
    img = multiply(_two_site(n, c, cc, t, ct), _two_site(n, c, tc, t, tt))
    return multiply(rest, img)


def conjugate_through(term: PauliTerm, gates: Sequence[tuple]) -> PauliTerm:
    for g in gates:
        term = conjugate(term, g)
    return term


# --- commuting clusters ---------------------------------------------------


@dataclass(frozen=True)
class CommutingCluster:
    """Mutually commuting terms plus a Clifford circuit diagonalizing them.

    ``diagonalizer`` is a gate list ``(kind, qubits)`` with kind in H, S, CNOT,
    applied in order. ``diagonal_terms[a]`` is ``C P_a C^dagger`` (coefficient
    included) for ``P_a = h.terms[member_indices[a]]``; it has only I/Z letters.
    """

    member_indices: tuple[int, ...]
    diagonalizer: tuple[tuple, ...]
    diagonal_terms: tuple[PauliTerm, ...] = field(repr=False)

    @property
    def cnot_count(self) -> int:
        return sum(g[0] == "CNOT" for g in self.diagonalizer)


def _row_basis(mat: np.ndarray) -> np.ndarray:
    """Linearly independent rows spanning ``mat`` over GF(2)."""
    m = mat.copy() % 2
    rank = 0
    for col in range(m.shape[1]):
        pivot = next((r for r in range(rank, m.shape[0]) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return m[:rank]


def _rref_pivots(m: np.ndarray, cols: Sequence[int]) -> list[tuple[int, int]]:
    """In-place RREF of ``m`` restricted to ``cols``; returns (row, col) pivots."""
    pivots = []
    rank = 0
    for col in cols:
        pivot = next((r for r in range(rank, m.shape[0]) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        pivots.append((rank, col))
        rank += 1
    return pivots


def diagonalizing_clifford(terms: Sequence[PauliTerm]) -> tuple[tuple, ...]:
    """Clifford gate list mapping every (mutually commuting) term to I/Z only.

    Symplectic Gaussian elimination over GF(2) on an independent generating set:
    make the X block full rank with Hadamards, reduce it to a partial identity
    with CNOTs, clear the Z block with S and CZ (as H-CNOT-H), then Hadamard the
    pivots.
    """
    for a in range(len(terms)):
        if not all(commutes(terms[a], b) for b in terms[a + 1:]):
            raise ValueError("terms do not mutually commute")
    if all(t.is_diagonal() for t in terms):
        return ()
    n = terms[0].n_qubits
    tab = _row_basis(np.array([np.concatenate([t.x_bits, t.z_bits]) for t in terms]))
    X, Z = tab[:, :n].copy(), tab[:, n:].copy()
    gates: list[tuple] = []

    def h(q):
        X[:, q], Z[:, q] = Z[:, q].copy(), X[:, q].copy()
        gates.append(("H", (q,)))

    def s(q):
        Z[:, q] ^= X[:, q]
        gates.append(("S", (q,)))

    def cnot(c, t):
        X[:, t] ^= X[:, c]
        Z[:, c] ^= Z[:, t]
        gates.append(("CNOT", (c, t)))

    def cz(a, b):
        h(b)
        cnot(a, b)
        h(b)

    # X block to full rank
    both = np.concatenate([X, Z], axis=1)
    x_pivots = _rref_pivots(both, range(n))
    X[:], Z[:] = both[:, :n], both[:, n:]
    x_cols = {c for _, c in x_pivots}
    rest = Z[len(x_pivots):].copy()
    z_pivots = _rref_pivots(rest, [c for c in range(n) if c not in x_cols])
    for _, c in z_pivots:
        h(c)

    # X block to [I | 0]
    both = np.concatenate([X, Z], axis=1)
    pivots = _rref_pivots(both, range(n))
    X[:], Z[:] = both[:, :n], both[:, n:]
    for row, p in pivots:
        for c in range(n):
            if c != p and X[row, c]:
                cnot(p, c)

    # clear Z block
    pivot_cols = [p for _, p in pivots]
    for row, p in pivots:
        if Z[row, p]:
            s(p)
    for a, (row, p) in enumerate(pivots):
        for c in range(n):
            if c != p and Z[row, c] and (c not in pivot_cols or pivot_cols.index(c) > a):
                cz(p, c)
    for p in pivot_cols:
        h(p)
    if X.any() or (Z.sum(axis=1) != 1).any():
        raise AssertionError("symplectic elimination failed; terms may not commute")
    return tuple(gates)


def _greedy_coloring(terms: Sequence[PauliTerm]) -> list[int]:
    """Largest-degree-first greedy coloring of the anticommutation graph."""
    m = len(terms)
    xs = np.array([t.x_bits for t in terms], dtype=np.int64)
    zs = np.array([t.z_bits for t in terms], dtype=np.int64)
    anti = ((xs @ zs.T + zs @ xs.T) % 2).astype(bool)
    degree = anti.sum(axis=1)
    order = sorted(range(m), key=lambda i: (-degree[i], i))
    colors = [-1] * m
    for i in order:
        taken = {colors[j] for j in np.flatnonzero(anti[i]) if colors[j] >= 0}
        c = 0
        while c in taken:
            c += 1
        colors[i] = c
    return colors


def cluster_commuting(h: PauliSum) -> list[CommutingCluster]:
    """Partition ``h.terms`` into commuting clusters with Clifford diagonalizers.

    Clusters are ordered by descending size, ties broken by first term index.
    """
    if not h.terms:
        raise ValueError("cannot cluster an empty PauliSum")
    colors = _greedy_coloring(h.terms)
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(colors):
        groups.setdefault(c, []).append(i)
    ordered = sorted(groups.values(), key=lambda g: (-len(g), g[0]))
    clusters = []
    for members in ordered:
        terms = [h.terms[i] for i in members]
        gates = diagonalizing_clifford(terms)
        diag = tuple(conjugate_through(t, gates) for t in terms)
        if not all(d.is_diagonal() for d in diag):
            raise AssertionError("diagonalizer left off-diagonal letters")
        clusters.append(CommutingCluster(tuple(members), gates, diag))
    return clusters


# --- text serialization ---------------------------------------------------


def to_text(h: PauliSum) -> str:
    """One ``AXES, coefficient`` line per term (real coefficients only)."""
    coeffs = h.real_coefficients()
    return "".join(f"{t.axes}, {float(c)!r}\n" for t, c in zip(h.terms, coeffs))


def from_text(text: str) -> PauliSum:
    terms = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            axes, coeff = (part.strip() for part in line.split(","))
            terms.append(PauliTerm(axes, float(coeff)))
        except ValueError:
            raise ValueError(f"bad PauliSum line {line!r}") from None
    if not terms:
        raise ValueError("no terms in PauliSum text")
    return PauliSum.from_terms(terms, len(terms[0].axes))
