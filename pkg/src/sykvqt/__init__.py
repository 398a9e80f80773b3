"""Variational preparation of SYK thermal states with a two-circuit ansatz."""

from .engine import ThermalResult, VqtConfig, optimize_at_beta, run_ensemble
from .oracle import diagonalize, exact_observables, fidelity
from .pauli import PauliSum, PauliTerm, cluster_commuting, majorana_to_pauli
from .syk import SykInstance, SykParams, sample
from .tfd import TfdParams, analytic_tfd, tfd_fidelity_map

__version__ = "0.1.0"
