"""Hadamard-test and commutativity-test experiments with noise and photon counting."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import fock, gaussian
from .algebra import (
    DisplacementProduct,
    PMSquare,
    SquareParams,
    build_pm_square,
    compose,
    compose_all,
    context_pairs,
    contexts,
    kappa_ideal,
    operator_label,
)
from .analysis import InequalityReport, KappaReport, inequality_report
from .noise import (
    NoiseModel,
    dephase,
    effective_visibility,
    event_fraction,
    fit_context_visibilities,
    fit_uniform_visibility,
    jittered_visibilities,
    miscalibrate,
)

log = logging.getLogger(__name__)

# RNG stream ids
_CONTEXT_STREAM = 0
_PAIR_STREAM = 100
_JITTER_STREAM = 200


@dataclass(frozen=True)
class ProbeState:
    """Product of displaced squeezed thermal states on the two modes."""

    alphas: tuple[complex, complex] = (0j, 0j)
    rs: tuple[float, float] = (0.0, 0.0)
    phis: tuple[float, float] = (0.0, 0.0)
    nbars: tuple[float, float] = (0.0, 0.0)

    def gaussian(self) -> gaussian.GaussianState:
        return gaussian.GaussianState.product(self.alphas, self.rs, self.phis, self.nbars)

    def fock(self, cutoff: int) -> fock.FockState:
        return fock.FockState.product(cutoff, self.alphas, self.rs, self.phis, self.nbars)


@dataclass(frozen=True)
class Backend:
    kind: str = "gaussian"
    cutoff: int = fock.DEFAULT_CUTOFF

    def __post_init__(self):
        if self.kind not in ("gaussian", "fock"):
            raise ValueError(f"unknown backend {self.kind!r}")
        if self.cutoff < 2:
            raise ValueError("cutoff must be at least 2")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one simulated measurement campaign.

    ``context_rates`` (rows 1-3 then columns 1-3) override ``count_rate`` for
    the Hadamard tests; ``pair_rate`` sets the commutativity-test rate.
    With ``sampling`` off, records hold the expected counts and the
    binomial per-window SD instead of Monte Carlo draws.
    """

    square_params: SquareParams = field(default_factory=SquareParams.canonical)
    backend: Backend = field(default_factory=Backend)
    probe: ProbeState = field(default_factory=ProbeState)
    noise: NoiseModel = field(default_factory=NoiseModel)
    count_rate: float = 1.0e5
    context_rates: Optional[tuple[float, ...]] = None
    pair_rate: Optional[float] = None
    window_s: float = 1.0
    n_windows: int = 100
    rng_seed: int = 0
    sampling: bool = True
    slots_per_context: int = 3

    def __post_init__(self):
        if not self.count_rate > 0:
            raise ValueError("count_rate must be positive")
        if self.context_rates is not None:
            if len(self.context_rates) != 6 or any(r <= 0 for r in self.context_rates):
                raise ValueError("context_rates needs six positive values")
        if self.pair_rate is not None and not self.pair_rate > 0:
            raise ValueError("pair_rate must be positive")
        if not self.window_s > 0:
            raise ValueError("window_s must be positive")
        if self.n_windows < 1:
            raise ValueError("n_windows must be at least 1")

    def context_rate(self, index: int) -> float:
        if self.context_rates is not None:
            return self.context_rates[index]
        return self.count_rate

    def rng(self, task_id: int) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.rng_seed, spawn_key=(task_id,))
        return np.random.default_rng(seq)


@dataclass(frozen=True)
class CountRecord:
    """Per-window photon counts reduced to an expectation value.

    ``sd`` is the sample standard deviation of the per-window expectations,
    ``sem`` the standard error of their mean.
    """

    n_plus: float
    n_minus: float
    expectation: float
    sd: float
    sem: float
    n_windows: int


# --- single measurements -----------------------------------------------------


def _with_residual(op: DisplacementProduct, noise: NoiseModel) -> DisplacementProduct:
    rx, ry = noise.residual_amp
    if rx == 0 and ry == 0:
        return op
    return DisplacementProduct(op.angle, op.amp_x + rx, op.amp_y + ry)


def ideal_expectation(cfg: ExperimentConfig, ops: Sequence[DisplacementProduct],
                      sequential: bool = False) -> complex:
    """Noise-free ``<ops[0] ... ops[-1]>`` (residual alignment offset included)."""
    ops = list(ops)
    if not ops:
        raise ValueError("need at least one operator")
    if cfg.backend.kind == "gaussian":
        if sequential:
            # accumulate in physical order: the last operator acts first
            total = ops[-1]
            for op in reversed(ops[:-1]):
                total = compose(op, total)
        else:
            total = compose_all(ops)
        return gaussian.expectation(cfg.probe.gaussian(), _with_residual(total, cfg.noise))
    state = cfg.probe.fock(cfg.backend.cutoff)
    seq = _fock_sequence(ops, cfg.noise, sequential)
    return fock.expectation_exact(state, seq)


def _fock_sequence(ops, noise, sequential):
    total = compose_all(ops)
    target = _with_residual(total, noise)
    if not sequential:
        return [target]
    if target is total:
        return list(ops)
    return list(ops) + [compose(total.inverse(), target)]


def hadamard_test(cfg: ExperimentConfig, ops: Sequence[DisplacementProduct],
                  context_index: Optional[int] = None, sequential: bool = False) -> float:
    """Probability of the ``|+>`` outcome after noise for ``<ops[0] ... ops[-1]>``."""
    ops = list(ops)
    if not ops:
        raise ValueError("need at least one operator")
    if cfg.backend.kind == "fock":
        state = cfg.probe.fock(cfg.backend.cutoff)
        p = fock.hadamard_test_exact(state, _fock_sequence(ops, cfg.noise, sequential))
    else:
        p = 0.5 * (1.0 + ideal_expectation(cfg, ops, sequential).real)
    v = cfg.noise.visibility_hadamard if context_index is None else cfg.noise.context_visibility(
        context_index)
    return dephase(p, effective_visibility(cfg.noise, v))


def commutativity_test(cfg: ExperimentConfig, a: DisplacementProduct, b: DisplacementProduct,
                       visibility: Optional[float] = None) -> float:
    """Probability of the ``|->`` outcome: ``(1 - V)/2 + V kappa``."""
    if cfg.backend.kind == "fock":
        kappa = fock.commutativity_test_exact(cfg.probe.fock(cfg.backend.cutoff), a, b)
    else:
        kappa = kappa_ideal(a, b)
    v = cfg.noise.visibility_sagnac if visibility is None else visibility
    return 1.0 - dephase(1.0 - kappa, effective_visibility(cfg.noise, v))


def sample_counts(p_plus: float, cfg: ExperimentConfig, rng: Optional[np.random.Generator] = None,
                  rate: Optional[float] = None) -> CountRecord:
    """Simulate ``n_windows`` counting windows split between the two detectors.

    Totals per window are Poisson with mean ``rate * window_s`` (after the
    multiphoton discard); each event lands on ``+`` with probability
    ``p_plus``.
    """
    if not -1e-12 <= p_plus <= 1 + 1e-12:
        raise ValueError(f"p_plus={p_plus} is not a probability")
    p_plus = min(max(p_plus, 0.0), 1.0)
    rate = cfg.count_rate if rate is None else rate
    mean_total = rate * cfg.window_s * event_fraction(cfg.noise)
    n = cfg.n_windows
    if not cfg.sampling:
        e = 2.0 * p_plus - 1.0
        sd = 2.0 * math.sqrt(p_plus * (1.0 - p_plus) / mean_total)
        return CountRecord(mean_total * p_plus, mean_total * (1 - p_plus), e, sd,
                           sd / math.sqrt(n), n)
    if rng is None:
        rng = cfg.rng(_CONTEXT_STREAM)
    totals = rng.poisson(mean_total, size=n)
    plus = rng.binomial(totals, p_plus)
    minus = totals - plus
    with np.errstate(invalid="ignore", divide="ignore"):
        per_window = np.where(totals > 0, (plus - minus) / np.maximum(totals, 1), 0.0)
    if np.any(totals == 0):
        log.warning("%d window(s) recorded no events; counted as expectation 0",
                    int(np.sum(totals == 0)))
    n_plus, n_minus = float(plus.mean()), float(minus.mean())
    denom = n_plus + n_minus
    e = (n_plus - n_minus) / denom if denom > 0 else 0.0
    sd = float(per_window.std(ddof=1)) if n > 1 else 0.0
    return CountRecord(n_plus, n_minus, e, sd, sd / math.sqrt(n), n)


# --- full campaigns ------------------------------------------------------------


@dataclass
class ExperimentResult:
    report: InequalityReport
    records: dict[str, CountRecord]
    exact: dict[str, complex]
    visibility_fit: dict
    kappas: Optional[KappaReport] = None
    notes: list[str] = field(default_factory=list)


def experiment_square(cfg: ExperimentConfig) -> PMSquare:
    return build_pm_square(miscalibrate(cfg.square_params, cfg.noise))


def run_commutativity_suite(cfg: ExperimentConfig) -> KappaReport:
    """Commutativity tests of the 18 cyclic in-context operator pairs."""
    square = experiment_square(cfg)
    pairs = [(ctx, a, b) for ctx in contexts() for a, b in context_pairs(ctx)]
    vis = jittered_visibilities(cfg.noise.visibility_sagnac, cfg.noise.visibility_jitter_sd,
                                len(pairs), cfg.rng(_JITTER_STREAM))
    rate = cfg.pair_rate if cfg.pair_rate is not None else cfg.count_rate
    entries = []
    for i, ((ctx, a, b), v) in enumerate(zip(pairs, vis)):
        p_minus = commutativity_test(cfg, square[a], square[b], visibility=float(v))
        rec = sample_counts(1.0 - p_minus, cfg, cfg.rng(_PAIR_STREAM + i), rate)
        total = rec.n_plus + rec.n_minus
        entries.append({
            "context": ctx.label,
            "a": operator_label(a),
            "b": operator_label(b),
            "n_plus": rec.n_plus,
            "n_minus": rec.n_minus,
            "kappa": rec.n_minus / total if total > 0 else 0.0,
            "sd": rec.sd / 2.0,
            "kappa_ideal": kappa_ideal(square[a], square[b]),
            "visibility": float(v),
        })
    return KappaReport(entries)


def run_pm_experiment(cfg: ExperimentConfig, kappas: Optional[KappaReport] = None,
                      with_kappas: bool = True) -> ExperimentResult:
    """Hadamard tests of all six contexts, reduced to the inequality report.

    Unless ``kappas`` is given (or ``with_kappas`` is off), the commutativity
    suite runs as well so the report carries the corrected bound.
    """
    square = experiment_square(cfg)
    records, exact, per_context = {}, {}, []
    for i, ctx in enumerate(contexts()):
        ops = square.context_ops(ctx)
        exact[ctx.label] = ideal_expectation(cfg, ops)
        p = hadamard_test(cfg, ops, context_index=i)
        rec = sample_counts(p, cfg, cfg.rng(_CONTEXT_STREAM + i), cfg.context_rate(i))
        records[ctx.label] = rec
        per_context.append({
            "label": ctx.label,
            "operator": "".join(operator_label(jk) for jk in ctx.members),
            "n_plus": rec.n_plus,
            "n_minus": rec.n_minus,
            "expectation": rec.expectation,
            "sd": rec.sd,
            "sem": rec.sem,
            "exact_re": exact[ctx.label].real,
            "exact_im": exact[ctx.label].imag,
        })
    if kappas is None and with_kappas:
        kappas = run_commutativity_suite(cfg)
    report = inequality_report(per_context, kappas, cfg.slots_per_context)
    # ideal values: rows -1, columns +1
    ideal_signs = [-ctx.sign for ctx in contexts()]
    measured = [records[ctx.label].expectation for ctx in contexts()]
    fit = {"uniform": fit_uniform_visibility(measured, ideal_signs)}
    try:
        fit["per_context"] = list(fit_context_visibilities(measured, ideal_signs))
    except ValueError:
        fit["per_context"] = None
    notes = []
    if cfg.noise.g2 > 0:
        notes.append("multiphoton contraction V(1-g2) is a modelling assumption")
    validity = square.validity()
    if not validity["anticommuting"]:
        notes.append(f"miscalibrated square: q0*p0 = {validity['product']:.12g}")
    return ExperimentResult(report, records, exact, fit, kappas, notes)
