"""Brute-force truncated Fock-space simulation of an ancilla qubit and two qumodes.

This module is the independent check on every closed-form result: it never
uses the Weyl composition law, only explicit number-basis matrices applied to
state vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from .algebra import DisplacementProduct, compose_all
from . import gaussian

DEFAULT_CUTOFF = 60
TAIL_TOL = 1e-8


class CutoffError(RuntimeError):
    """The Fock truncation is too small for the requested computation."""


@lru_cache(maxsize=512)
def _displacement_matrix(alpha: complex, cutoff: int) -> np.ndarray:
    if alpha == 0:
        return np.eye(cutoff, dtype=complex)
    m, n = np.meshgrid(np.arange(cutoff), np.arange(cutoff), indexing="ij")
    lo = np.minimum(m, n)
    hi = np.maximum(m, n)
    x = abs(alpha) ** 2
    # <m|D|n> = sqrt(lo!/hi!) z^(hi-lo) e^{-x/2} L_lo^(hi-lo)(x), z = alpha or -alpha^*
    z = np.where(m >= n, alpha, -np.conj(alpha))
    log_mag = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) + (hi - lo) * np.log(abs(alpha)) - x / 2
    unit = np.exp(1j * (hi - lo) * np.angle(z))
    out = np.exp(log_mag) * unit * eval_genlaguerre(lo, hi - lo, x)
    out.setflags(write=False)
    return out


def displacement_matrix(alpha: complex, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Number-basis matrix of ``D(alpha)`` from the associated-Laguerre formula.

    Elements are exact for ``m, n < cutoff``; truncation only enters when the
    matrix is multiplied with other operators or states.
    """
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2")
    return _displacement_matrix(complex(alpha), int(cutoff))


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff)), 1).astype(complex)


def displacement_matrix_expm(alpha: complex, cutoff: int, pad: int = 40) -> np.ndarray:
    """``D(alpha)`` via matrix exponentiation on a padded space (debug path)."""
    a = annihilation(cutoff + pad)
    big = expm(alpha * a.conj().T - np.conj(alpha) * a)
    return big[:cutoff, :cutoff]


# --- single-mode kets ------------------------------------------------------


def squeezed_vacuum(r: float, phi: float, cutoff: int) -> np.ndarray:
    """Number-basis amplitudes of ``S(r e^{i phi})|0>``."""
    vec = np.zeros(cutoff, dtype=complex)
    if r == 0:
        vec[0] = 1.0
        return vec
    k = np.arange((cutoff + 1) // 2)
    t = np.tanh(r)
    log_mag = 0.5 * gammaln(2 * k + 1) - k * np.log(2.0) - gammaln(k + 1) + k * np.log(t)
    vec[2 * k] = np.exp(log_mag) * np.exp(1j * k * (phi + np.pi)) / np.sqrt(np.cosh(r))
    return vec


def displaced_squeezed(alpha: complex, r: float, phi: float, cutoff: int, pad: int = 40) -> np.ndarray:
    """``D(alpha) S(r e^{i phi}) |0>``, computed on a padded space then truncated."""
    big = cutoff + pad
    vec = displacement_matrix(alpha, big) @ squeezed_vacuum(r, phi, big)
    return vec[:cutoff]


def thermal_weights(nbar: float, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff)
    if nbar == 0:
        w = np.zeros(cutoff)
        w[0] = 1.0
        return w
    return (nbar / (1 + nbar)) ** n / (1 + nbar)


# --- two-mode states -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FockState:
    """Two-mode state as a convex mixture of pure components.

    ``components`` holds ``(weight, psi)`` pairs with ``psi[m, n]`` the
    amplitude of ``|m>_x |n>_y``. A pure state has a single component.
    """

    components: tuple[tuple[float, np.ndarray], ...]

    @property
    def cutoff(self) -> int:
        return self.components[0][1].shape[0]

    @property
    def is_pure(self) -> bool:
        return len(self.components) == 1

    @classmethod
    def pure(cls, psi: np.ndarray) -> "FockState":
        return cls(((1.0, np.asarray(psi, dtype=complex)),))

    @classmethod
    def vacuum(cls, cutoff: int = DEFAULT_CUTOFF) -> "FockState":
        psi = np.zeros((cutoff, cutoff), dtype=complex)
        psi[0, 0] = 1.0
        return cls.pure(psi)

    @classmethod
    def product(cls, cutoff: int, alphas=(0j, 0j), rs=(0.0, 0.0), phis=(0.0, 0.0),
                nbars=(0.0, 0.0), weight_floor: float = 1e-14) -> "FockState":
        """Fock image of :meth:`GaussianState.product` for two modes.

        Thermal modes are unravelled into their number-state mixture, each
        term squeezed and displaced exactly.
        """
        per_mode = []
        for alpha, r, phi, nbar in zip(alphas, rs, phis, nbars):
            pad = 40
            big = cutoff + pad
            w = thermal_weights(nbar, big)
            keep = np.flatnonzero(w > weight_floor)
            if nbar == 0:
                terms = [(1.0, displaced_squeezed(alpha, r, phi, cutoff))]
            else:
                if r != 0:
                    a = annihilation(big + pad)
                    z = r * np.exp(1j * phi)
                    S = expm(0.5 * (np.conj(z) * a @ a - z * a.conj().T @ a.conj().T))[:big, :big]
                else:
                    S = np.eye(big)
                D = displacement_matrix(alpha, big)
                terms = []
                for n in keep:
                    basis = np.zeros(big, dtype=complex)
                    basis[n] = 1.0
                    terms.append((float(w[n]), (D @ (S @ basis))[:cutoff]))
            per_mode.append(terms)
        comps = tuple(
            (wx * wy, np.outer(vx, vy)) for wx, vx in per_mode[0] for wy, vy in per_mode[1]
        )
        return cls(comps)

    def trace(self) -> float:
        return float(sum(w * np.vdot(p, p).real for w, p in self.components))

    def density_matrix(self) -> np.ndarray:
        """Dense ``N^2 x N^2`` density matrix (small cutoffs only)."""
        dim = self.cutoff ** 2
        rho = np.zeros((dim, dim), dtype=complex)
        for w, p in self.components:
            v = p.reshape(-1)
            rho += w * np.outer(v, v.conj())
        return rho

    def tail_weight(self) -> float:
        """Probability of more than ``cutoff/2`` photons in either mode."""
        return max(tail_weight(p) for _, p in self.components)


def tail_weight(psi: np.ndarray) -> float:
    half = psi.shape[0] // 2
    prob = np.abs(psi) ** 2
    return float(prob.sum() - prob[: half + 1, : half + 1].sum())


def _check_tail(psi: np.ndarray, what: str, weight: float = None):
    w = tail_weight(psi) if weight is None else weight
    if w >= TAIL_TOL:
        raise CutoffError(
            f"{what}: weight {w:.2e} above n = cutoff/2 at cutoff {psi.shape[0]}; "
            f"increase the cutoff (try {2 * psi.shape[0]})"
        )


def check_state(state: "FockState", what: str = "input state"):
    """Mixture-weighted tail guard."""
    psi0 = state.components[0][1]
    _check_tail(psi0, what, sum(w * tail_weight(p / np.linalg.norm(p)) for w, p in state.components))


def op_factors(op: DisplacementProduct, cutoff: int):
    return op.phase, displacement_matrix(op.amp_x, cutoff), displacement_matrix(op.amp_y, cutoff)


def apply_op(op: DisplacementProduct, psi: np.ndarray) -> np.ndarray:
    phase, dx, dy = op_factors(op, psi.shape[0])
    return phase * (dx @ psi @ dy.T)


def apply_sequence(ops: Sequence[DisplacementProduct], psi: np.ndarray) -> np.ndarray:
    """``ops[0] ops[1] ... ops[-1] |psi>``: the last operator acts first."""
    for op in reversed(ops):
        psi = apply_op(op, psi)
    return psi


def operator_matrix(op: DisplacementProduct, cutoff: int) -> np.ndarray:
    """Dense two-mode matrix (index ``m * cutoff + n``), small cutoffs only."""
    phase, dx, dy = op_factors(op, cutoff)
    return phase * np.kron(dx, dy)


# --- hybrid ancilla + modes ------------------------------------------------


class HybridFockState:
    """Pure state of an ancilla qubit (x) two truncated modes.

    ``vector`` has shape ``(2, N, N)``; flattened it is the ``2 N^2`` ket.
    """

    _H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

    def __init__(self, vector: np.ndarray):
        self.vector = np.asarray(vector, dtype=complex)
        norm = np.vdot(self.vector, self.vector).real
        if abs(norm - 1) > 1e-10:
            raise ValueError(f"hybrid state has norm {norm:.12f}")

    @classmethod
    def ancilla_zero(cls, psi: np.ndarray) -> "HybridFockState":
        v = np.zeros((2,) + psi.shape, dtype=complex)
        v[0] = psi / np.linalg.norm(psi)
        return cls(v)

    @property
    def cutoff(self) -> int:
        return self.vector.shape[1]

    def hadamard(self) -> "HybridFockState":
        return HybridFockState(np.tensordot(self._H, self.vector, axes=1))

    def controlled(self, op: DisplacementProduct, control: int = 1) -> np.ndarray:
        v = self.vector.copy()
        v[control] = apply_op(op, v[control])
        return v

    def ancilla_probability(self, outcome: int) -> float:
        return float(np.vdot(self.vector[outcome], self.vector[outcome]).real)

    def density_matrix(self) -> np.ndarray:
        v = self.vector.reshape(-1)
        return np.outer(v, v.conj())


def _run_branches(psi: np.ndarray, branch0: Sequence[DisplacementProduct],
                  branch1: Sequence[DisplacementProduct]) -> tuple[float, float, float]:
    """Ancilla ``|0>`` probability after H, controlled branches, H.

    ``branch0`` ops act (in time order) when the ancilla is ``|0>``,
    ``branch1`` ops when it is ``|1>``. Also returns the largest branch tail
    weight and the norm leakage, for the truncation guard.
    """
    state = HybridFockState.ancilla_zero(psi).hadamard()
    v = state.vector.copy()
    tail = 0.0
    for control, ops in ((0, branch0), (1, branch1)):
        for op in ops:
            v[control] = apply_op(op, v[control])
        tail = max(tail, tail_weight(v[control] * np.sqrt(2)))
    leak = abs(np.vdot(v, v).real - 1)
    out = np.tensordot(HybridFockState._H, v, axes=1)
    return float(np.vdot(out[0], out[0]).real), tail, leak


def _mixture_branches(state: "FockState", branch0, branch1, guard: bool) -> float:
    if guard:
        check_state(state)
    p0 = tail = leak = 0.0
    for w, psi in state.components:
        p, t, lk = _run_branches(psi / np.linalg.norm(psi), branch0, branch1)
        p0 += w * p
        tail += w * t
        leak += w * lk
    if guard:
        _check_tail(state.components[0][1], "branch state", tail)
        if leak > TAIL_TOL:
            raise CutoffError(
                f"norm leaked by {leak:.3e} at cutoff {state.cutoff}; increase the cutoff"
            )
    return p0


def hadamard_test_exact(state: FockState, ops: Sequence[DisplacementProduct],
                        guard: bool = True) -> float:
    """Probability of the ancilla ending in ``|+>`` for ``<ops[0] ... ops[-1]>``.

    Each operator is applied as a separate controlled gate, rightmost first.
    The guard bounds the mixture-weighted probability above ``cutoff/2``.
    """
    return _mixture_branches(state, [], list(ops)[::-1], guard)


def commutativity_test_exact(state: FockState, a: DisplacementProduct, b: DisplacementProduct,
                             guard: bool = True) -> float:
    """Probability of the ancilla ending in ``|->`` in the order-superposition circuit.

    Ancilla ``|0>`` applies ``a`` then ``b``; ancilla ``|1>`` applies ``b`` then ``a``.
    """
    return 1.0 - _mixture_branches(state, [a, b], [b, a], guard)


def expectation_exact(state: FockState, ops: Sequence[DisplacementProduct]) -> complex:
    """``tr(rho ops[0] ... ops[-1])`` by sequential matrix application."""
    return complex(
        sum(w * np.vdot(psi, apply_sequence(ops, psi)) for w, psi in state.components)
    )


def trace_with_operator(state: FockState, fn: Callable[[np.ndarray], np.ndarray]) -> complex:
    """``tr(rho X)`` where ``fn(psi) = X psi``."""
    return complex(sum(w * np.vdot(psi, fn(psi)) for w, psi in state.components))


def convergence_scan(op_sets: Iterable[Sequence[DisplacementProduct]], cutoffs: Sequence[int],
                     probe=None, tol: float = 1e-6) -> list[dict]:
    """Max ``|fock - gaussian|`` over ``op_sets`` at each cutoff.

    ``probe`` supplies ``gaussian()`` and ``fock(cutoff)``; vacuum by default.
    """
    if list(cutoffs) != sorted(cutoffs):
        raise ValueError("cutoffs must be increasing")
    op_sets = [list(ops) for ops in op_sets]
    g_state = probe.gaussian() if probe is not None else gaussian.GaussianState.vacuum(2)
    exact = [gaussian.expectation(g_state, compose_all(ops)) for ops in op_sets]
    rows = []
    for n in cutoffs:
        f_state = probe.fock(n) if probe is not None else FockState.vacuum(n)
        devs = [abs(expectation_exact(f_state, ops) - e) for ops, e in zip(op_sets, exact)]
        worst = max(devs)
        rows.append({"cutoff": n, "max_deviation": worst, "flagged": worst > tol})
    return rows
