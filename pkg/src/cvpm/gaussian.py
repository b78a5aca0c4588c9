"""Closed-form displacement expectations on Gaussian states.

Quadratures are ordered ``(x_1, p_1, x_2, p_2, ...)`` with ``[x, p] = i``,
``a = (x + i p) / sqrt(2)`` and vacuum covariance ``I / 2``. In this
convention ``D(alpha) = exp(i xi . r)`` with ``xi = sqrt(2) (Im alpha, -Re alpha)``
per mode, which gives the characteristic function

    chi(alpha) = exp(i xi . mean - xi^T cov xi / 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from .algebra import DisplacementProduct

VALIDITY_TOL = 1e-8
SQRT2 = np.sqrt(2.0)


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if mean.size % 2 or cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"mean of length {mean.size} and covariance {cov.shape} do not describe "
                "the same number of modes"
            )
        if not np.allclose(cov, cov.T, atol=1e-10, rtol=0):
            raise ValueError("covariance matrix is not symmetric")
        n = mean.size // 2
        uncertainty = cov + 0.5j * symplectic_form(n)
        if np.linalg.eigvalsh(uncertainty).min() < -VALIDITY_TOL:
            raise ValueError("covariance violates the uncertainty principle")
        mean.setflags(write=False)
        cov = 0.5 * (cov + cov.T)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    # -- constructors -------------------------------------------------------

    @classmethod
    def vacuum(cls, n_modes: int = 2) -> "GaussianState":
        return cls(np.zeros(2 * n_modes), 0.5 * np.eye(2 * n_modes))

    @classmethod
    def thermal(cls, nbar, n_modes: int = 2) -> "GaussianState":
        nbar = np.broadcast_to(np.asarray(nbar, dtype=float), (n_modes,))
        return cls(np.zeros(2 * n_modes), np.diag(np.repeat(nbar + 0.5, 2)))

    @classmethod
    def product(cls, alphas, rs=0.0, phis=0.0, nbars=0.0) -> "GaussianState":
        """Product of displaced, squeezed thermal single-mode states.

        Mode ``i`` is ``D(alpha_i) S(r_i e^{i phi_i}) rho_th(nbar_i) S^dag D^dag``
        with ``S(z) = exp((z^* a^2 - z a^dag^2) / 2)``.
        """
        alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
        n = alphas.size
        rs = np.broadcast_to(np.asarray(rs, dtype=float), (n,))
        phis = np.broadcast_to(np.asarray(phis, dtype=float), (n,))
        nbars = np.broadcast_to(np.asarray(nbars, dtype=float), (n,))
        mean = np.zeros(2 * n)
        cov = np.zeros((2 * n, 2 * n))
        for i in range(n):
            mean[2 * i : 2 * i + 2] = SQRT2 * np.array([alphas[i].real, alphas[i].imag])
            c, s = np.cos(phis[i] / 2), np.sin(phis[i] / 2)
            rot = np.array([[c, -s], [s, c]])
            sq = np.diag([np.exp(-2 * rs[i]), np.exp(2 * rs[i])])
            cov[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = (nbars[i] + 0.5) * rot @ sq @ rot.T
        return cls(mean, cov)

    @classmethod
    def random(cls, rng: np.random.Generator, n_modes: int = 2, max_r: float = 0.8,
               max_nbar: float = 1.0, max_alpha: float = 1.5) -> "GaussianState":
        """Random valid state: thermal noise, passive mixing, squeezing, mixing, shift."""
        nbar = rng.uniform(0, max_nbar, n_modes)
        r = rng.uniform(0, max_r, n_modes)
        u1 = unitary_group.rvs(n_modes, random_state=rng) if n_modes > 1 else np.exp(
            2j * np.pi * rng.uniform()) * np.eye(1)
        u2 = unitary_group.rvs(n_modes, random_state=rng) if n_modes > 1 else np.exp(
            2j * np.pi * rng.uniform()) * np.eye(1)
        S = passive_symplectic(u1) @ squeeze_symplectic(r) @ passive_symplectic(u2)
        cov = S @ np.diag(np.repeat(nbar + 0.5, 2)) @ S.T
        alpha = rng.uniform(0, max_alpha, n_modes) * np.exp(2j * np.pi * rng.uniform(size=n_modes))
        mean = SQRT2 * np.column_stack([alpha.real, alpha.imag]).reshape(-1)
        return cls(mean, cov)


def passive_symplectic(u: np.ndarray) -> np.ndarray:
    """Symplectic image of the mode transformation ``a -> u a`` (interleaved order)."""
    n = u.shape[0]
    S = np.zeros((2 * n, 2 * n))
    S[0::2, 0::2] = u.real
    S[0::2, 1::2] = -u.imag
    S[1::2, 0::2] = u.imag
    S[1::2, 1::2] = u.real
    return S


def squeeze_symplectic(r) -> np.ndarray:
    r = np.atleast_1d(r)
    return np.diag(np.exp(np.column_stack([-r, r]).reshape(-1)))


def _xi(amps: np.ndarray) -> np.ndarray:
    return SQRT2 * np.column_stack([amps.imag, -amps.real]).reshape(-1)


def characteristic(state: GaussianState, amps) -> complex:
    """``<D(alpha_1) (x) ... (x) D(alpha_n)>`` for the given state."""
    amps = np.atleast_1d(np.asarray(amps, dtype=complex))
    if amps.size != state.n_modes:
        raise ValueError(
            f"got {amps.size} displacement amplitudes for a {state.n_modes}-mode state"
        )
    xi = _xi(amps)
    return complex(np.exp(1j * xi @ state.mean - 0.5 * xi @ state.cov @ xi))


def expectation(state: GaussianState, op: DisplacementProduct) -> complex:
    if state.n_modes != 2:
        raise ValueError("displacement products act on exactly two modes")
    return op.phase * characteristic(state, op.amps)


def apply_displacement(state: GaussianState, amps) -> GaussianState:
    amps = np.atleast_1d(np.asarray(amps, dtype=complex))
    if amps.size != state.n_modes:
        raise ValueError(
            f"got {amps.size} displacement amplitudes for a {state.n_modes}-mode state"
        )
    shift = SQRT2 * np.column_stack([amps.real, amps.imag]).reshape(-1)
    return GaussianState(state.mean + shift, state.cov)
