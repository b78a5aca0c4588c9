"""Inequality evaluation, significance and the incompatibility correction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .algebra import CONTEXT_LABELS, COLUMN_LABELS, ROW_LABELS, DisplacementProduct
from . import fock

NC_BOUND = 3.0 * math.sqrt(3.0)
QUANTUM_MAX = 6.0
N_CONTEXTS = 6


def evaluate_L(expectations: Mapping[str, complex]) -> float:
    """``|sum(rows) - sum(columns)|`` using only real parts."""
    missing = [lab for lab in CONTEXT_LABELS if lab not in expectations]
    if missing:
        raise ValueError(f"missing context: {', '.join(missing)}")
    rows = sum(complex(expectations[lab]).real for lab in ROW_LABELS)
    cols = sum(complex(expectations[lab]).real for lab in COLUMN_LABELS)
    return abs(rows - cols)


def propagate_sd(sds: Sequence[float]) -> float:
    """Quadrature sum; contexts are measured in independent runs."""
    return math.sqrt(sum(s * s for s in sds))


def significance(L: float, sd: float) -> float:
    """Violation of the noncontextual bound in standard deviations.

    With zero uncertainty the result is ``+inf`` above the bound, ``-inf``
    below it and 0 on it.
    """
    if sd < 0:
        raise ValueError("sd must be non-negative")
    excess = L - NC_BOUND
    if sd == 0:
        if abs(excess) < 1e-15:
            return 0.0
        return math.copysign(math.inf, excess)
    return excess / sd


@dataclass
class KappaReport:
    """Noncommutation fractions for the ordered in-context pairs."""

    pairs: list[dict]

    def __post_init__(self):
        for p in self.pairs:
            if not -1e-12 <= p["kappa"] <= 1 + 1e-12:
                raise ValueError(f"kappa {p['kappa']} outside [0, 1]")

    @property
    def kappas(self) -> np.ndarray:
        return np.array([p["kappa"] for p in self.pairs])

    @property
    def mean_kappa(self) -> float:
        return float(self.kappas.mean())

    @property
    def max_kappa(self) -> float:
        return float(self.kappas.max())

    def worst_per_context(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for p in self.pairs:
            out[p["context"]] = max(out.get(p["context"], 0.0), p["kappa"])
        return out

    @classmethod
    def uniform(cls, kappa: float) -> "KappaReport":
        from .algebra import context_pairs, contexts, operator_label

        return cls([
            {"context": ctx.label, "a": operator_label(a), "b": operator_label(b),
             "kappa": kappa, "sd": 0.0}
            for ctx in contexts() for a, b in context_pairs(ctx)
        ])


def disturbance_bound(kappa: float) -> float:
    """Largest change of an expectation a preceding operation can cause: ``2 sqrt(kappa)``."""
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    return 2.0 * math.sqrt(kappa)


def corrected_bound(kappas: KappaReport, slots_per_context: int = 3) -> float:
    """Noncontextual bound inflated by worst-case sequential disturbance.

    Each context may be disturbed ``slots_per_context`` times, each by at most
    ``2 sqrt(kappa)`` of that context's least-compatible pair.
    """
    worst = kappas.worst_per_context()
    if len(worst) != N_CONTEXTS:
        raise ValueError(f"need kappa values for all {N_CONTEXTS} contexts, got {len(worst)}")
    return NC_BOUND + sum(
        slots_per_context * disturbance_bound(min(max(k, 0.0), 1.0)) for k in worst.values()
    )


def kappa_threshold(L: float = QUANTUM_MAX, slots_per_context: int = 3) -> float:
    """Uniform kappa below which the corrected bound stays under ``L``."""
    if L <= NC_BOUND:
        return 0.0
    return ((L - NC_BOUND) / (2.0 * N_CONTEXTS * slots_per_context)) ** 2


@dataclass
class InequalityReport:
    L: float
    sd: float
    per_context: list[dict]
    corrected_bound: float = NC_BOUND
    nc_bound: float = NC_BOUND
    quantum_max: float = QUANTUM_MAX
    significance: float = field(init=False)
    violation: bool = field(init=False)
    corrected_violation: bool = field(init=False)

    def __post_init__(self):
        self.significance = significance(self.L, self.sd)
        self.violation = self.L > self.nc_bound
        self.corrected_violation = self.L > self.corrected_bound


def inequality_report(per_context: Sequence[dict], kappas: Optional[KappaReport] = None,
                      slots_per_context: int = 3) -> InequalityReport:
    """Build the report from entries with ``label``, ``expectation`` and ``sd``."""
    values = {e["label"]: e["expectation"] for e in per_context}
    L = evaluate_L(values)
    sd = propagate_sd([e["sd"] for e in per_context])
    bound = corrected_bound(kappas, slots_per_context) if kappas is not None else NC_BOUND
    return InequalityReport(L=L, sd=sd, per_context=list(per_context), corrected_bound=bound)


# --- disturbance of one operation on the next --------------------------------


@dataclass
class DisturbanceRecord:
    delta: complex
    kappa: float
    delta_bound: float
    kappa_rho_prime: complex
    holds: bool


def kappa_matrix(a: np.ndarray, b: np.ndarray, rho: np.ndarray) -> complex:
    """``tr(rho |[a, b]|^2) / 4`` for explicit matrices."""
    c = a @ b - b @ a
    return complex(np.trace(rho @ c.conj().T @ c) / 4.0)


def delta_matrix(a: np.ndarray, b: np.ndarray, rho: np.ndarray) -> complex:
    """Change of ``<b>`` caused by applying ``a`` first: ``tr(rho a^dag [a, b])``."""
    return complex(np.trace(rho @ a.conj().T @ (a @ b - b @ a)))


def delta_exact(state: "fock.FockState", a: DisplacementProduct, b: DisplacementProduct,
                guard: bool = True) -> DisturbanceRecord:
    """Evaluate the disturbance of ``b`` by ``a`` in the truncated Fock space.

    ``kappa`` is taken from the simulated commutativity circuit on ``state``;
    ``kappa_rho_prime`` is ``tr(rho a^dag |[a,b]|^2)/4``, the value the bound
    formally requires, reported alongside since ``rho a^dag`` is not a state.
    """
    if guard:
        fock.check_state(state)
    delta = 0j
    k_prime = 0j
    for w, psi in state.components:
        psi = psi / np.linalg.norm(psi)
        a_psi = fock.apply_op(a, psi)
        comm = fock.apply_sequence([a, b], psi) - fock.apply_sequence([b, a], psi)
        delta += w * np.vdot(a_psi, comm)
        # <psi| a^dag c^dag c |psi> with c = [a, b]; c^dag c is a multiple of 1 only
        # for exact displacements, so evaluate it through the matrices.
        cc_psi = _comm_dag_comm(a, b, psi)
        k_prime += w * np.vdot(a_psi, cc_psi) / 4.0
    kappa = fock.commutativity_test_exact(state, a, b, guard=guard)
    bound = disturbance_bound(min(max(kappa, 0.0), 1.0))
    return DisturbanceRecord(
        delta=complex(delta),
        kappa=kappa,
        delta_bound=bound,
        kappa_rho_prime=complex(k_prime),
        holds=abs(delta) <= bound + 1e-8,
    )


def _comm_dag_comm(a: DisplacementProduct, b: DisplacementProduct, psi: np.ndarray) -> np.ndarray:
    comm = fock.apply_sequence([a, b], psi) - fock.apply_sequence([b, a], psi)
    # [a,b]^dag = b^dag a^dag - a^dag b^dag
    return fock.apply_sequence([b.inverse(), a.inverse()], comm) - fock.apply_sequence(
        [a.inverse(), b.inverse()], comm
    )
