"""Imperfection models turning ideal protocol probabilities into realistic ones."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.stats import truncnorm

from .algebra import SquareParams


@dataclass(frozen=True)
class NoiseModel:
    """Optical imperfections of the Hadamard and commutativity setups.

    ``per_context_visibility`` overrides ``visibility_hadamard`` context by
    context (rows 1-3, then columns 1-3). ``residual_amp`` is an alignment
    offset added to the net displacement of every composed context.
    """

    visibility_hadamard: float = 1.0
    visibility_sagnac: float = 1.0
    per_context_visibility: Optional[tuple[float, ...]] = None
    calib_eps_q: float = 0.0
    calib_eps_p: float = 0.0
    residual_amp: tuple[complex, complex] = (0j, 0j)
    g2: float = 0.0
    visibility_jitter_sd: float = 0.0

    def __post_init__(self):
        vis = [self.visibility_hadamard, self.visibility_sagnac]
        if self.per_context_visibility is not None:
            if len(self.per_context_visibility) != 6:
                raise ValueError("per_context_visibility needs one value per context (6)")
            object.__setattr__(
                self, "per_context_visibility", tuple(float(v) for v in self.per_context_visibility)
            )
            vis += list(self.per_context_visibility)
        if any(not 0.0 <= v <= 1.0 for v in vis):
            raise ValueError("visibilities must lie in [0, 1]")
        if not 0.0 <= self.g2 < 1.0:
            raise ValueError("g2 must lie in [0, 1)")
        if self.visibility_jitter_sd < 0:
            raise ValueError("visibility_jitter_sd must be non-negative")
        object.__setattr__(self, "residual_amp", tuple(complex(a) for a in self.residual_amp))

    @property
    def is_ideal(self) -> bool:
        return self == NoiseModel()

    def context_visibility(self, index: int) -> float:
        """Visibility of context ``index`` before the multiphoton contraction."""
        if self.per_context_visibility is not None:
            return self.per_context_visibility[index]
        return self.visibility_hadamard

    def with_(self, **changes) -> "NoiseModel":
        return replace(self, **changes)


def dephase(p_ideal: float, visibility: float) -> float:
    """Contract an ideal outcome probability toward 1/2 by the visibility."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError("visibility must lie in [0, 1]")
    if visibility == 1.0:
        return p_ideal
    return 0.5 + visibility * (p_ideal - 0.5)


def miscalibrate(params: SquareParams, model: NoiseModel) -> SquareParams:
    if model.calib_eps_q == 0 and model.calib_eps_p == 0:
        return params
    return SquareParams(params.q0 * (1 + model.calib_eps_q), params.p0 * (1 + model.calib_eps_p))


def effective_visibility(model: NoiseModel, visibility: Optional[float] = None) -> float:
    """Visibility after the multiphoton contraction ``V (1 - g2)``.

    The linear dependence on g2 is a modelling assumption: multiphoton events
    are treated as producing a uniformly random outcome.
    """
    v = model.visibility_hadamard if visibility is None else visibility
    return v * (1.0 - model.g2)


def event_fraction(model: NoiseModel) -> float:
    """Fraction of detection events kept after discarding double clicks."""
    return 1.0 - model.g2


def jittered_visibilities(mean: float, sd: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Visibilities drawn from a normal distribution truncated to [0, 1]."""
    if sd == 0:
        return np.full(size, mean)
    a, b = (0.0 - mean) / sd, (1.0 - mean) / sd
    return truncnorm.rvs(a, b, loc=mean, scale=sd, size=size, random_state=rng)


def fit_context_visibilities(expectations: Sequence[float], ideal: Sequence[float],
                             g2: float = 0.0) -> tuple[float, ...]:
    """Per-context visibilities reproducing measured expectations exactly.

    Raises if a measured value would need a visibility above one once the
    multiphoton contraction is taken into account.
    """
    out = []
    for e, s in zip(expectations, ideal):
        v = (e / s) / (1.0 - g2)
        if not 0.0 <= v <= 1.0 + 1e-12:
            raise ValueError(
                f"expectation {e} needs visibility {v:.6f}; incompatible with g2={g2}"
            )
        out.append(min(v, 1.0))
    return tuple(out)


def fit_uniform_visibility(expectations: Sequence[float], ideal: Sequence[float]) -> float:
    """Least-squares single visibility for ``expectation = V * ideal``."""
    e = np.asarray(expectations, dtype=float)
    s = np.asarray(ideal, dtype=float)
    return float(np.dot(e, s) / np.dot(s, s))
