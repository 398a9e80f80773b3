"""Seeded dense and sparse SYK disorder realizations (q = 4)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .pauli import PauliSum, majorana_quartic

GENERATOR = "numpy.PCG64(SeedSequence([seed, attempt])).standard_normal"
DIGEST_VERSION = "syk-instance v1"
MAX_SPARSE_ATTEMPTS = 1000


@dataclass(frozen=True)
class SykParams:
    N: int
    J: float = 1.0
    mode: str = "dense"
    k: float = 8.7
    seed: int = 0

    def __post_init__(self):
        if self.N < 4 or self.N % 2:
            raise ValueError(f"N must be an even integer >= 4, got {self.N}")
        if self.mode not in ("dense", "sparse"):
            raise ValueError(f"mode must be 'dense' or 'sparse', got {self.mode!r}")
        if not self.k > 0:
            raise ValueError(f"connectivity k must be positive, got {self.k}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_qubits(self) -> int:
        return self.N // 2

    @property
    def p(self) -> float:
        """Retention probability (1 in dense mode, clamped to 1 in sparse mode)."""
        if self.mode == "dense":
            return 1.0
        return min(1.0, 24 * self.k / self.N**3)

    @property
    def variance(self) -> float:
        """Variance of a retained coupling, ``3! J^2 / (p N^3)``."""
        return 6 * self.J**2 / (self.p * self.N**3)

    @property
    def n_tuples(self) -> int:
        return comb(self.N, 4)


@lru_cache(maxsize=None)
def quartic_tuples(N: int) -> tuple[tuple[int, int, int, int], ...]:
    """All ``i<j<k<l`` in lexicographic order (1-based)."""
    return tuple(combinations(range(1, N + 1), 4))


@dataclass(frozen=True)
class SykInstance:
    params: SykParams
    couplings: dict[tuple[int, int, int, int], float] = field(repr=False)
    attempt: int = 0
    hamiltonian: PauliSum = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.hamiltonian is None:
            object.__setattr__(self, "hamiltonian", build_hamiltonian(self.couplings, self.params.N))

    @property
    def retained(self) -> tuple[tuple[int, int, int, int], ...]:
        return tuple(self.couplings)

    @property
    def realized_term_count(self) -> int:
        return len(self.hamiltonian)


def build_hamiltonian(couplings: dict, N: int) -> PauliSum:
    """``sum_{i<j<k<l} J_ijkl chi_i chi_j chi_k chi_l`` as a PauliSum."""
    n = N // 2
    terms = [majorana_quartic(*idx, n).scaled(J) for idx, J in couplings.items()]
    return PauliSum.from_terms(terms, n)


def _rng(seed: int, attempt: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, attempt])))


def sample_dense(params: SykParams) -> SykInstance:
    if params.mode != "dense":
        raise ValueError("sample_dense needs mode='dense'")
    tuples = quartic_tuples(params.N)
    values = _rng(params.seed, 0).standard_normal(len(tuples)) * np.sqrt(params.variance)
    return SykInstance(params, dict(zip(tuples, values.tolist())))


def sample_sparse(params: SykParams) -> SykInstance:
    """Bernoulli(p) retention per tuple; empty draws are resampled with attempt+1."""
    if params.mode != "sparse":
        raise ValueError("sample_sparse needs mode='sparse'")
    tuples = quartic_tuples(params.N)
    for attempt in range(MAX_SPARSE_ATTEMPTS):
        rng = _rng(params.seed, attempt)
        keep = rng.random(len(tuples)) < params.p
        values = rng.standard_normal(len(tuples)) * np.sqrt(params.variance)
        if keep.any():
            couplings = {t: v for t, v, k in zip(tuples, values.tolist(), keep) if k}
            return SykInstance(params, couplings, attempt)
    raise RuntimeError("could not draw a non-empty sparse Hamiltonian")


def sample(params: SykParams) -> SykInstance:
    return sample_dense(params) if params.mode == "dense" else sample_sparse(params)


def instance_digest(inst: SykInstance) -> str:
    """Exact text record of an instance; ``parse_digest`` inverts it."""
    p = inst.params
    lines = [
        f"# {DIGEST_VERSION}",
        f"# generator = {GENERATOR}",
        f"# N = {p.N}",
        f"# J = {p.J!r}",
        f"# mode = {p.mode}",
        f"# k = {p.k!r}",
        f"# seed = {p.seed}",
        f"# attempt = {inst.attempt}",
        f"# p = {p.p!r}",
        f"# realized_term_count = {inst.realized_term_count}",
    ]
    lines += [f"{i} {j} {k} {l} {v!r}" for (i, j, k, l), v in inst.couplings.items()]
    return "\n".join(lines) + "\n"


def parse_digest(text: str) -> SykInstance:
    header: dict[str, str] = {}
    couplings = {}
    for line in text.splitlines():
        if line.startswith("#"):
            if "=" in line:
                key, value = line[1:].split("=", 1)
                header[key.strip()] = value.strip()
            continue
        if line.strip():
            *idx, value = line.split()
            couplings[tuple(int(x) for x in idx)] = float(value)
    try:
        params = SykParams(
            N=int(header["N"]),
            J=float(header["J"]),
            mode=header["mode"],
            k=float(header["k"]),
            seed=int(header["seed"]),
        )
        inst = SykInstance(params, couplings, int(header["attempt"]))
    except KeyError as exc:
        raise ValueError(f"digest is missing header field {exc}") from None
    if inst.realized_term_count != int(header["realized_term_count"]):
        raise ValueError("digest term count does not match its couplings")
    return inst
