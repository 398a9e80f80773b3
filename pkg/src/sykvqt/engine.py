"""Free-energy minimization over the two-circuit thermal ansatz.

The prepared state is ``rho = U2(phi) diag(p(theta)) U2(phi)^dagger`` with
``p(theta) = |U1(theta)|0>|^2``. The loss ``<H> - S(p)/beta`` is evaluated
exactly together with its gradient: an adjoint sweep through the VQC2 cluster
blocks in density-matrix form and a statevector adjoint sweep through VQC1.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import circuits
from .circuits import build_vqc1, build_vqc2, unitary
from .oracle import (
    SpectralDecomposition,
    boltzmann_weights,
    diagonalize,
    exact_observables,
    fidelity_with_sqrt,
    log_partition,
    shannon_entropy,
)
from .pauli import CommutingCluster, PauliSum, cluster_commuting, to_matrix
from .syk import SykInstance, SykParams, sample

log = logging.getLogger(__name__)

DEFAULT_BETAS = tuple(float(b) for b in np.linspace(1.0, 35.0, 9))
OPTIMIZERS = ("lbfgsb", "slsqp", "nelder-mead")
_LOG_FLOOR = 1e-300

__all__ = [
    "DEFAULT_BETAS",
    "ThermalAnsatz",
    "ThermalResult",
    "VqtConfig",
    "EnsembleResult",
    "shannon_entropy",
    "free_energy_loss",
    "optimize_at_beta",
    "run_ensemble",
    "resource_report",
    "make_context",
    "instance_seeds",
    "summarize",
]


@dataclass(frozen=True)
class VqtConfig:
    beta_grid: tuple[float, ...] = DEFAULT_BETAS
    target_fidelity: float = 0.9
    max_layers: int = 10
    optimizer: str = "lbfgsb"
    tol: float = 1e-8
    max_iter: int = 2000
    init_seed: int = 0
    escalation: str = "alternate"
    joint: bool = True
    restarts: int = 3
    shots: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))
        if not self.beta_grid or any(not b > 0 for b in self.beta_grid):
            raise ValueError("beta grid must be non-empty with beta > 0")
        if not 0 < self.target_fidelity <= 1:
            raise ValueError("target_fidelity must lie in (0, 1]")
        if self.max_layers < 1:
            raise ValueError("max_layers must be >= 1")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
        if self.escalation not in ("alternate", "vqc1-first", "vqc2-first"):
            raise ValueError(f"unknown escalation policy {self.escalation!r}")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be positive")


@dataclass
class ThermalResult:
    instance: int
    seed: int
    N: int
    mode: str
    beta: float
    loss: float
    energy: float
    entropy: float
    purity: float
    fidelity: float
    layers1: int
    layers2: int
    n_params1: int
    n_params2: int
    cnots: int
    iterations: int
    converged: bool
    exact_free_energy: float
    exact_energy: float
    exact_entropy: float
    exact_purity: float
    ground_energy: float
    log_z: float
    wall_time: float = 0.0
    error: str = ""
    loss_trace: np.ndarray = field(default=None, repr=False)
    params: np.ndarray = field(default=None, repr=False)

    @property
    def reached_target(self) -> bool:
        return not self.error

    def record(self) -> dict:
        """Plain fields for the output writers (no trace, params or timing)."""
        d = asdict(self)
        for key in ("loss_trace", "params", "wall_time"):
            d.pop(key)
        return d


class ThermalAnsatz:
    """Exact loss and gradient for a fixed (VQC1 depth, VQC2 depth) pair."""

    def __init__(self, h: PauliSum, clusters: Sequence[CommutingCluster], layers1: int, layers2: int,
                 h_matrix: np.ndarray | None = None):
        self.h = h
        self.n = h.n_qubits
        self.dim = 1 << self.n
        self.layers1, self.layers2 = layers1, layers2
        self.clusters = list(clusters)
        self.H = to_matrix(h) if h_matrix is None else h_matrix
        self.vqc1 = build_vqc1(self.n, layers1)
        self.n1 = self.vqc1.n_params
        self.n_terms = len(h)
        self.n2 = self.n_terms * layers2
        basis = np.arange(self.dim)
        self._cliff = []
        self._signs = []
        for c in self.clusters:
            self._cliff.append(unitary(circuits.CircuitProgram(self.n, tuple(circuits.clifford_gates(c.diagonalizer)), 0)))
            zmasks = [sum(1 << q for q, x in enumerate(d.axes) if x == "Z") for d in c.diagonal_terms]
            parity = np.array([[bin(m).count("1") % 2 for m in (basis & z)] for z in zmasks])
            self._signs.append((1 - 2 * parity).astype(float))
        m = len(self.clusters)
        # W[j] = C_j C_{j-1}^dagger, cyclic so it also links consecutive layers
        self._trans = [self._cliff[j] @ self._cliff[j - 1].conj().T for j in range(m)]
        self._h_last = self._cliff[-1] @ self.H @ self._cliff[-1].conj().T
        self._members = [np.array(c.member_indices) for c in self.clusters]

    @property
    def n_params(self) -> int:
        return self.n1 + self.n2

    @property
    def cnot_count(self) -> tuple[int, int]:
        """CNOTs of the full VQC1 and VQC2 circuits."""
        per_layer2 = sum(
            2 * c.cnot_count + sum(2 * (d.weight - 1) for d in c.diagonal_terms) for c in self.clusters
        )
        return self.vqc1.cnot_count, per_layer2 * self.layers2

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x[: self.n1], x[self.n1:]

    def probabilities(self, theta: np.ndarray) -> np.ndarray:
        return circuits.basis_probabilities(circuits.simulate(self.vqc1, theta))

    def _blocks(self):
        m = len(self.clusters)
        for layer in range(self.layers2):
            for j in range(m):
                yield layer, j

    def _phases(self, phi: np.ndarray, layer: int, j: int) -> np.ndarray:
        angles = phi[layer * self.n_terms + self._members[j]]
        return np.exp(-1j * (angles @ self._signs[j]))

    def _forward(self, p: np.ndarray, phi: np.ndarray) -> list[np.ndarray]:
        """Frame states ``A_k = C_k rho_k C_k^dagger`` after every block."""
        frames = []
        a = None
        for layer, j in self._blocks():
            if a is None:
                c = self._cliff[0]
                a = (c * p) @ c.conj().T
            else:
                w = self._trans[j]
                a = w @ a @ w.conj().T
            d = self._phases(phi, layer, j)
            a = d[:, None] * a * d.conj()[None, :]
            frames.append(a)
        return frames

    def energy_diagonal(self, phi: np.ndarray) -> np.ndarray:
        """Diagonal of ``U2^dagger H U2``."""
        b = self._h_last
        blocks = list(self._blocks())
        for k in range(len(blocks) - 1, -1, -1):
            layer, j = blocks[k]
            d = self._phases(phi, layer, j)
            b = d.conj()[:, None] * b * d[None, :]
            w = self._trans[j] if k > 0 else self._cliff[0]
            b = w.conj().T @ b @ w
        return np.real(np.diag(b)).copy()

    def loss_and_grad(self, x: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
        theta, phi = self.split(np.asarray(x, dtype=float))
        psi = circuits.simulate(self.vqc1, theta)
        p = np.abs(psi) ** 2
        frames = self._forward(p, phi)
        energy = float(np.real(np.sum(self._h_last * frames[-1].T)))
        entropy = float(-np.sum(p * np.log(np.maximum(p, _LOG_FLOOR))))
        grad_phi = np.zeros_like(phi)
        b = self._h_last
        blocks = list(self._blocks())
        for k in range(len(blocks) - 1, -1, -1):
            layer, j = blocks[k]
            diag_ab = np.sum(frames[k] * b.T, axis=1)
            grad_phi[layer * self.n_terms + self._members[j]] = 2 * self._signs[j] @ diag_ab.imag
            d = self._phases(phi, layer, j)
            b = d.conj()[:, None] * b * d[None, :]
            w = self._trans[j] if k > 0 else self._cliff[0]
            b = w.conj().T @ b @ w
        h_diag = np.real(np.diag(b))
        obs = h_diag + np.log(np.maximum(p, _LOG_FLOOR)) / beta
        _, grad_theta = circuits.diagonal_expectation_grad(self.vqc1, theta, obs)
        return energy - entropy / beta, np.concatenate([grad_theta, grad_phi])

    def loss(self, x: np.ndarray, beta: float) -> float:
        return self.loss_and_grad(x, beta)[0]

    def prepared_state(self, x: np.ndarray, shots: int | None = None, rng=None) -> tuple[np.ndarray, np.ndarray]:
        """Basis probabilities and ``rho_VQC2``."""
        theta, phi = self.split(np.asarray(x, dtype=float))
        p = circuits.basis_probabilities(circuits.simulate(self.vqc1, theta), shots, rng)
        c = self._cliff[-1]
        rho = c.conj().T @ self._forward(p, phi)[-1] @ c
        return p, (rho + rho.conj().T) / 2

    def observables(self, x: np.ndarray, beta: float, shots: int | None = None, rng=None) -> dict:
        theta, phi = self.split(np.asarray(x, dtype=float))
        p, rho = self.prepared_state(x, shots, rng)
        energy = float(p @ self.energy_diagonal(phi))
        entropy = shannon_entropy(p)
        return {
            "p": p,
            "rho": rho,
            "energy": energy,
            "entropy": entropy,
            "loss": energy - entropy / beta,
            "purity": float(p @ p),
        }


def free_energy_loss(theta, phi, inst: SykInstance, beta: float) -> float:
    """One-off loss evaluation; depths are inferred from the vector lengths."""
    h = inst.hamiltonian
    n = h.n_qubits
    theta, phi = np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    l1, r1 = divmod(len(theta), 3 * n)
    l2, r2 = divmod(len(phi), len(h))
    if r1 or r2 or l1 < 1 or l2 < 1:
        raise ValueError("parameter vectors do not match any circuit depth")
    model = ThermalAnsatz(h, cluster_commuting(h), l1, l2)
    return model.loss(np.concatenate([theta, phi]), beta)


# --- optimization -----------------------------------------------------------


@dataclass
class _Attempt:
    x: np.ndarray
    loss: float
    iterations: int
    success: bool


def _minimize(model: ThermalAnsatz, beta: float, x0: np.ndarray, config: VqtConfig, trace: list) -> _Attempt:
    def fun(x):
        val, grad = model.loss_and_grad(x, beta)
        trace.append(val)
        return val, grad

    if config.optimizer == "nelder-mead":
        res = minimize(lambda x: fun(x)[0], x0, method="Nelder-Mead",
                       options={"maxiter": config.max_iter, "fatol": config.tol, "xatol": 1e-8})
    elif config.optimizer == "slsqp":
        res = minimize(fun, x0, jac=True, method="SLSQP", options={"maxiter": config.max_iter, "ftol": config.tol})
    else:
        res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": config.max_iter, "ftol": config.tol, "gtol": 1e-9, "maxcor": 30})
    x = np.asarray(res.x, dtype=float)
    return _Attempt(x, float(model.loss(x, beta)), int(res.get("nit", 0)), bool(res.success))


def _alternating(model: ThermalAnsatz, beta: float, x0: np.ndarray, config: VqtConfig, trace: list,
                 rounds: int = 4) -> _Attempt:
    """Alternate theta-only and phi-only minimizations."""
    x = x0.copy()
    n1 = model.n1
    iters = 0
    ok = True
    for _ in range(rounds):
        for sl in (slice(0, n1), slice(n1, None)):
            def fun(sub, sl=sl):
                y = x.copy()
                y[sl] = sub
                val, grad = model.loss_and_grad(y, beta)
                trace.append(val)
                return val, grad[sl]
            res = minimize(fun, x[sl], jac=True, method="L-BFGS-B",
                           options={"maxiter": config.max_iter, "ftol": config.tol, "gtol": 1e-9})
            x[sl] = res.x
            iters += int(res.nit)
            ok = ok and bool(res.success)
    return _Attempt(x, float(model.loss(x, beta)), iters, ok)


def mixed_state_loss(h_matrix: np.ndarray, beta: float) -> float:
    """Loss of the maximally mixed state, ``Tr H / d - n ln 2 / beta``."""
    d = h_matrix.shape[0]
    return float(np.real(np.trace(h_matrix)) / d - np.log(d) / beta)


def _init_rng(config: VqtConfig, inst_seed: int, beta: float, restart: int) -> np.random.Generator:
    key = [config.init_seed, inst_seed, int(round(beta * 1e6)), restart]
    return np.random.default_rng(np.random.SeedSequence(key))


def _escalate(l1: int, l2: int, step: int, config: VqtConfig) -> tuple[int, int] | None:
    grow1, grow2 = l1 < config.max_layers, l2 < config.max_layers
    if not (grow1 or grow2):
        return None
    if config.escalation == "vqc1-first":
        first = 1
    elif config.escalation == "vqc2-first":
        first = 2
    else:
        first = 1 if step % 2 == 0 else 2
    if first == 1:
        return (l1 + 1, l2) if grow1 else (l1, l2 + 1)
    return (l1, l2 + 1) if grow2 else (l1 + 1, l2)


def _grow(x: np.ndarray, old: ThermalAnsatz, new: ThermalAnsatz) -> np.ndarray:
    """Warm start: a new VQC1 layer is prepended (its zero-angle CNOT ring fixes
    |0..0>), a new VQC2 layer appended with zero angles (identity)."""
    theta, phi = old.split(x)
    theta = np.concatenate([np.zeros(new.n1 - old.n1), theta])
    phi = np.concatenate([phi, np.zeros(new.n2 - old.n2)])
    return np.concatenate([theta, phi])


@dataclass
class _InstanceContext:
    inst: SykInstance
    clusters: list
    spec: SpectralDecomposition
    h_matrix: np.ndarray
    index: int = 0


def make_context(inst: SykInstance, index: int = 0) -> _InstanceContext:
    h = inst.hamiltonian
    mat = to_matrix(h)
    return _InstanceContext(inst, cluster_commuting(h), diagonalize(mat), mat, index)


def optimize_at_beta(inst: SykInstance | _InstanceContext, beta: float, config: VqtConfig = VqtConfig(),
                     warm_start: tuple[int, int, np.ndarray] | None = None) -> ThermalResult:
    """Minimize the free energy at ``beta``, adding layers until the fidelity target.

    ``warm_start`` is ``(layers1, layers2, params)`` from an earlier run.
    """
    ctx = inst if isinstance(inst, _InstanceContext) else make_context(inst)
    inst = ctx.inst
    t0 = time.perf_counter()
    spec = ctx.spec
    p_exact = boltzmann_weights(spec, beta)
    rho_exact = (spec.vectors * p_exact) @ spec.vectors.conj().T
    sqrt_exact = (spec.vectors * np.sqrt(p_exact)) @ spec.vectors.conj().T
    bound = mixed_state_loss(ctx.h_matrix, beta)
    trace: list[float] = []

    if warm_start is not None:
        l1, l2, x = warm_start[0], warm_start[1], np.asarray(warm_start[2], dtype=float)
    else:
        l1, l2, x = 1, 1, None
    model = ThermalAnsatz(inst.hamiltonian, ctx.clusters, l1, l2, ctx.h_matrix)

    best = None
    total_iters = 0
    step = 0
    converged = True
    while True:
        candidates = []
        for restart in range(config.restarts + 1):
            if x is None or restart > 0:
                rng = _init_rng(config, inst.params.seed, beta, restart + 10 * step)
                x0 = np.concatenate([rng.uniform(-np.pi, np.pi, model.n1), np.zeros(model.n2)])
            else:
                x0 = x
            run = _minimize if config.joint else _alternating
            att = run(model, beta, x0, config, trace)
            total_iters += att.iterations
            candidates.append(att)
            failed = not np.isfinite(att.loss) or att.loss > bound + 1e-12 or (not att.success and att.iterations == 0)
            if not failed:
                break
        att = min(candidates, key=lambda a: a.loss)
        converged = converged and att.success
        x = att.x
        _, rho = model.prepared_state(x)
        fid = fidelity_with_sqrt(sqrt_exact, rho)
        if best is None or fid > best[0]:
            best = (fid, model, x)
        log.debug("beta=%g layers=(%d,%d) loss=%.10g fidelity=%.4f", beta, l1, l2, att.loss, fid)
        if fid >= config.target_fidelity:
            break
        nxt = _escalate(l1, l2, step, config)
        if nxt is None:
            break
        step += 1
        l1, l2 = nxt
        new_model = ThermalAnsatz(inst.hamiltonian, ctx.clusters, l1, l2, ctx.h_matrix)
        x = _grow(x, model, new_model)
        model = new_model

    fid, model, x = best
    rng = np.random.default_rng(np.random.SeedSequence([config.init_seed, inst.params.seed, 7]))
    obs = model.observables(x, beta, config.shots, rng if config.shots else None)
    exact = exact_observables(spec, beta)
    c1, c2 = model.cnot_count
    error = "" if fid >= config.target_fidelity else f"fidelity {fid:.4f} below target"
    return ThermalResult(
        instance=ctx.index,
        seed=inst.params.seed,
        N=inst.params.N,
        mode=inst.params.mode,
        beta=float(beta),
        loss=obs["loss"],
        energy=obs["energy"],
        entropy=obs["entropy"],
        purity=obs["purity"],
        fidelity=fid,
        layers1=model.layers1,
        layers2=model.layers2,
        n_params1=model.n1,
        n_params2=model.n2,
        cnots=c1 + c2,
        iterations=total_iters,
        converged=converged,
        exact_free_energy=exact.free_energy,
        exact_energy=exact.energy,
        exact_entropy=exact.entropy,
        exact_purity=exact.purity,
        ground_energy=spec.ground_energy,
        log_z=log_partition(spec, beta),
        wall_time=time.perf_counter() - t0,
        error=error,
        loss_trace=np.array(trace),
        params=x,
    )


# --- ensembles --------------------------------------------------------------


def instance_seeds(master_seed: int, n_instances: int) -> list[int]:
    """Per-instance 64-bit seeds derived from the master seed."""
    state = np.random.SeedSequence(master_seed).generate_state(n_instances, dtype=np.uint64)
    return [int(s) for s in state]


_CONTEXTS: dict[tuple, _InstanceContext] = {}


def _context_for(inst: SykInstance, index: int) -> _InstanceContext:
    key = (index, inst.params, inst.attempt)
    if key not in _CONTEXTS:
        _CONTEXTS.clear()
        _CONTEXTS[key] = make_context(inst, index)
    return _CONTEXTS[key]


def _work_item(args) -> ThermalResult:
    index, inst, beta, config = args
    ctx = _context_for(inst, index)
    try:
        return optimize_at_beta(ctx, beta, config)
    except Exception as exc:  # reported per point, never fatal to the ensemble
        log.exception("point (instance %d, beta %g) failed", index, beta)
        exact = exact_observables(ctx.spec, beta)
        nan = float("nan")
        return ThermalResult(index, inst.params.seed, inst.params.N, inst.params.mode, beta, nan, nan, nan, nan,
                             nan, 0, 0, 0, 0, 0, 0, False, exact.free_energy, exact.energy, exact.entropy,
                             exact.purity, ctx.spec.ground_energy, log_partition(ctx.spec, beta),
                             error=f"{type(exc).__name__}: {exc}")


@dataclass
class EnsembleResult:
    instances: list[SykInstance]
    results: list[ThermalResult]
    summary: list[dict]

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.results if r.error)


def summarize(results: Sequence[ThermalResult], beta_grid: Sequence[float]) -> list[dict]:
    """Per-beta exact mean/std (for 1 and 2 sigma bands) and variational mean/std."""
    rows = []
    for beta in beta_grid:
        pts = [r for r in results if r.beta == beta]
        row = {"beta": float(beta), "n": len(pts)}
        for key in ("free_energy", "energy", "entropy", "purity"):
            vals = np.array([getattr(r, f"exact_{key}") for r in pts])
            mean, std = float(vals.mean()), _std(vals)
            row[f"exact_{key}_mean"] = mean
            row[f"exact_{key}_std"] = std
        for key in ("loss", "energy", "entropy", "purity", "fidelity"):
            vals = np.array([getattr(r, key) for r in pts if not np.isnan(r.fidelity)])
            row[f"var_{key}_mean"] = float(vals.mean()) if len(vals) else float("nan")
            row[f"var_{key}_std"] = _std(vals)
        row["ground_energy_mean"] = float(np.mean([r.ground_energy for r in pts]))
        row["layers1_mean"] = float(np.mean([r.layers1 for r in pts]))
        row["layers2_mean"] = float(np.mean([r.layers2 for r in pts]))
        row["cnots_mean"] = float(np.mean([r.cnots for r in pts]))
        row["n_reached"] = sum(1 for r in pts if not r.error)
        rows.append(row)
    return rows


def _std(vals: np.ndarray) -> float:
    return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0


def ensemble_instances(template: SykParams, n_instances: int) -> list[SykInstance]:
    return [sample(replace(template, seed=s)) for s in instance_seeds(template.seed, n_instances)]


def run_ensemble(template: SykParams, n_instances: int, config: VqtConfig = VqtConfig(), workers: int = 1,
                 instances: Sequence[SykInstance] | None = None) -> EnsembleResult:
    """Sample instances from the master seed and optimize every (instance, beta) point.

    Results are ordered by (instance index, beta index) whatever the worker count.
    """
    if n_instances < 1:
        raise ValueError("n_instances must be >= 1")
    if instances is None:
        instances = ensemble_instances(template, n_instances)
    items = [(i, inst, beta, config) for i, inst in enumerate(instances) for beta in config.beta_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_work_item, items, chunksize=len(config.beta_grid)))
    else:
        results = [_work_item(item) for item in items]
    return EnsembleResult(list(instances), results, summarize(results, config.beta_grid))


def resource_report(results: Sequence[ThermalResult]) -> dict:
    """Average layers per beta (layer table), parameters per layer and CNOT totals."""
    if not results:
        raise ValueError("no results to report")
    groups: dict[tuple, list[ThermalResult]] = {}
    for r in results:
        groups.setdefault((r.mode, r.N, r.beta), []).append(r)
    layers, cnots = [], []
    for (mode, N, beta), rs in sorted(groups.items()):
        layers.append({"mode": mode, "N": N, "beta": beta,
                       "layers1_mean": float(np.mean([r.layers1 for r in rs])),
                       "layers2_mean": float(np.mean([r.layers2 for r in rs]))})
        cnots.append({"mode": mode, "N": N, "beta": beta, "cnots_mean": float(np.mean([r.cnots for r in rs]))})
    params: dict[tuple, list[ThermalResult]] = {}
    for r in results:
        params.setdefault((r.mode, r.N), []).append(r)
    per_layer = [
        {"mode": mode, "N": N,
         "vqc1_params_per_layer": 3 * (N // 2),
         "vqc2_params_per_layer": float(np.mean([r.n_params2 / max(r.layers2, 1) for r in rs]))}
        for (mode, N), rs in sorted(params.items())
    ]
    return {"layers": layers, "params_per_layer": per_layer, "cnots": cnots}
